#pragma once

// Umbrella header: the whole library.

#include "mmpnn/error.hpp"
#include "mmpnn/tropical.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"
#include "mmpnn/translate.hpp"
#include "mmpnn/normalization.hpp"
#include "mmpnn/training.hpp"
#include "mmpnn/approx.hpp"
#include "mmpnn/collapse.hpp"
#include "mmpnn/io.hpp"
