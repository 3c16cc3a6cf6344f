#pragma once

/**
 * @file translate.hpp
 * @brief Exact Type I constructions for maxout, ReLU, leaky ReLU and the
 *        dequantized (zero-temperature) log-sum-exp unit.
 *
 * Each constructor returns one (Linear, MaxPlus) block. Absent connections in
 * the max-plus matrix are -inf.
 */

#include <cstddef>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"

namespace mmpnn {

struct MaxoutUnit {
  RealMatrix weights;  // n_i x d
  Vector bias;         // n_i
};

struct MaxoutSpec {
  std::vector<MaxoutUnit> units;
};

struct AffineReluSpec {
  RealMatrix weights;  // m x d
  Vector bias;         // m
};

struct LeakyReluSpec {
  RealMatrix weights;
  Vector bias;
  double slope = 0.01;
};

// f(x) = max_i (a_i . x + b_i)
struct LseSpec {
  RealMatrix exponents;  // n x d, rows a_i
  Vector offsets;        // n
};

namespace detail {

inline void check_affine(const RealMatrix& w, const Vector& b, const char* what) {
  require(w.rows() >= 1 && w.cols() >= 1, ErrorCode::InvalidConfig,
          std::string(what) + ": weight matrix is empty");
  require(b.size() == w.rows(), ErrorCode::ShapeMismatch,
          std::string(what) + ": bias length " + std::to_string(b.size()) + " != " +
              std::to_string(w.rows()) + " weight rows");
  for (double v : b) {
    require(std::isfinite(v), ErrorCode::InvalidValue, std::string(what) + ": non-finite bias");
  }
}

}  // namespace detail

// L stacks the unit weight matrices; B is block-diagonal with the biases.
inline Network from_maxout(const MaxoutSpec& spec) {
  detail::require(!spec.units.empty(), ErrorCode::InvalidConfig, "maxout: no units");
  const std::size_t d = spec.units.front().weights.cols();
  std::size_t n = 0;
  for (const auto& u : spec.units) {
    detail::check_affine(u.weights, u.bias, "maxout");
    detail::require(u.weights.cols() == d, ErrorCode::ShapeMismatch,
                    "maxout: units disagree on input dimension");
    n += u.weights.rows();
  }
  std::vector<double> l;
  l.reserve(n * d);
  MaxPlusMatrix b(spec.units.size(), n);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < spec.units.size(); ++i) {
    const auto& u = spec.units[i];
    l.insert(l.end(), u.weights.entries().begin(), u.weights.entries().end());
    for (std::size_t k = 0; k < u.bias.size(); ++k) b.set(i, offset + k, u.bias[k]);
    offset += u.bias.size();
  }
  return Network({RealMatrix(n, d, std::move(l)), std::move(b)}, ShapeTag::TypeI);
}

// L = (W; 0), B row i = (.., b_i at i, .., 0 at m).
inline Network from_relu(const AffineReluSpec& spec) {
  detail::check_affine(spec.weights, spec.bias, "relu");
  const std::size_t m = spec.weights.rows();
  const std::size_t d = spec.weights.cols();
  std::vector<double> l(spec.weights.entries().begin(), spec.weights.entries().end());
  l.resize((m + 1) * d, 0.0);
  MaxPlusMatrix b(m, m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    b.set(i, i, spec.bias[i]);
    b.set(i, m, 0.0);
  }
  return Network({RealMatrix(m + 1, d, std::move(l)), std::move(b)}, ShapeTag::TypeI);
}

// L = (W; slope*W), B row i pairs b_i with slope*b_i.
inline Network from_leaky_relu(const LeakyReluSpec& spec) {
  detail::check_affine(spec.weights, spec.bias, "leaky relu");
  detail::require(std::isfinite(spec.slope), ErrorCode::InvalidValue,
                  "leaky relu: slope must be finite");
  const std::size_t m = spec.weights.rows();
  const std::size_t d = spec.weights.cols();
  std::vector<double> l(spec.weights.entries().begin(), spec.weights.entries().end());
  for (double w : spec.weights.entries()) l.push_back(spec.slope * w);
  MaxPlusMatrix b(m, 2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    b.set(i, i, spec.bias[i]);
    b.set(i, m + i, spec.slope * spec.bias[i]);
  }
  return Network({RealMatrix(2 * m, d, std::move(l)), std::move(b)}, ShapeTag::TypeI);
}

// L rows are the exponent vectors; B is the single row of offsets.
inline Network from_lse_dequantized(const LseSpec& spec) {
  detail::check_affine(spec.exponents, spec.offsets, "lse");
  const std::size_t n = spec.exponents.rows();
  return Network({spec.exponents, MaxPlusMatrix(1, n, spec.offsets)}, ShapeTag::TypeI);
}

}  // namespace mmpnn
