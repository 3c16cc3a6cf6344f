#include <gtest/gtest.h>

#include "support.hpp"

using namespace mmpnn;
using mmpnn::tsupport::Rng;

namespace {

template <class S>
TropicalMatrix<S> random_dyadic(Rng& rng, std::size_t r, std::size_t c) {
  TropicalMatrix<S> m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      m.set(i, j, rng.chance(0.15) ? S::zero : rng.dyadic(50.0));
    }
  }
  return m;
}

// Direct triple loop, written independently of the library.
template <class S>
std::vector<double> naive_product(const TropicalMatrix<S>& a, const TropicalMatrix<S>& b) {
  std::vector<double> out;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = S::zero;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        const double t = a(i, k) + b(k, j);
        acc = S::better(t, acc) ? t : acc;
      }
      out.push_back(acc);
    }
  }
  return out;
}

}  // namespace

TEST(TropicalMatrix, WorkedProductExample) {
  const MinPlusMatrix a{{7, 2}, {0, -1}, {3, 4}};
  const MinPlusMatrix b{{5, 3}, {6, 2}};
  EXPECT_EQ(minplus_matmul(a, b), (MinPlusMatrix{{8, 4}, {5, 1}, {8, 6}}));
  const MaxPlusMatrix c{{7, 2}, {0, -1}, {3, 4}};
  const MaxPlusMatrix d{{5, 3}, {6, 2}};
  EXPECT_EQ(maxplus_matmul(c, d), (MaxPlusMatrix{{12, 10}, {5, 3}, {10, 6}}));
}

TEST(TropicalMatrix, DefaultFillIsTheReductionIdentity) {
  const MinPlusMatrix a(2, 3);
  for (double v : a.entries()) EXPECT_EQ(v, kInf);
  const MaxPlusMatrix b(2, 3);
  for (double v : b.entries()) EXPECT_EQ(v, -kInf);
  EXPECT_FALSE(a.transform_valid());
  EXPECT_EQ(a.first_invalid_row(), std::optional<std::size_t>(0));
}

TEST(TropicalMatrix, RejectsForbiddenInfinity) {
  EXPECT_THROW(MinPlusMatrix(1, 1, {-kInf}), Error);
  EXPECT_THROW(MaxPlusMatrix(1, 1, {kInf}), Error);
  MinPlusMatrix a(1, 1);
  EXPECT_THROW(a.set(0, 0, -kInf), Error);
  EXPECT_THROW(RealMatrix(1, 1, {kInf}), Error);
}

TEST(TropicalMatrix, IdentityIsNeutral) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_dyadic<MinPlus>(rng, 3, 4);
    EXPECT_EQ(minplus_matmul(MinPlusMatrix::identity(3), a), a);
    EXPECT_EQ(minplus_matmul(a, MinPlusMatrix::identity(4)), a);
    const auto b = random_dyadic<MaxPlus>(rng, 2, 5);
    EXPECT_EQ(maxplus_matmul(MaxPlusMatrix::identity(2), b), b);
  }
}

TEST(TropicalMatrix, ProductMatchesNaiveLoop) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = rng.between(1, 5), k = rng.between(1, 5), m = rng.between(1, 5);
    const auto a = random_dyadic<MinPlus>(rng, n, k);
    const auto b = random_dyadic<MinPlus>(rng, k, m);
    const auto p = minplus_matmul(a, b);
    const auto want = naive_product(a, b);
    ASSERT_EQ(p.entries().size(), want.size());
    for (std::size_t e = 0; e < want.size(); ++e) EXPECT_EQ(p.entries()[e], want[e]);
  }
}

TEST(TropicalMatrix, ProductIsAssociativeAndDistributes) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_dyadic<MaxPlus>(rng, 3, 2);
    const auto b = random_dyadic<MaxPlus>(rng, 2, 4);
    const auto c = random_dyadic<MaxPlus>(rng, 4, 3);
    const auto b2 = random_dyadic<MaxPlus>(rng, 2, 4);
    EXPECT_EQ(maxplus_matmul(maxplus_matmul(a, b), c), maxplus_matmul(a, maxplus_matmul(b, c)));
    EXPECT_EQ(maxplus_matmul(a, maxplus_sum(b, b2)),
              maxplus_sum(maxplus_matmul(a, b), maxplus_matmul(a, b2)));
  }
}

TEST(TropicalMatrix, ShapeMismatchIsReported) {
  try {
    minplus_matmul(MinPlusMatrix(2, 3), MinPlusMatrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
  EXPECT_THROW(minplus_sum(MinPlusMatrix(2, 3), MinPlusMatrix(3, 2)), Error);
}

TEST(TropicalApply, SelectsLowestIndexOnTies) {
  const MinPlusMatrix a{{1, 0, 1}, {2, 5, kInf}};
  std::vector<std::size_t> sel;
  const Vector x{0, 1, 0};
  const Vector y = tropical_apply(a, x, &sel);
  EXPECT_EQ(y, (Vector{1, 2}));
  EXPECT_EQ(sel, (std::vector<std::size_t>{0, 0}));
  const MaxPlusMatrix b{{0, 3, 3}};
  tropical_apply(b, Vector{1, 0, 0}, &sel);
  EXPECT_EQ(sel, (std::vector<std::size_t>{1}));
}

TEST(TropicalApply, ValidatesInput) {
  const MinPlusMatrix a{{1, 0}};
  EXPECT_THROW(minplus_apply(a, Vector{1.0}), Error);
  EXPECT_THROW(minplus_apply(a, Vector{1.0, kInf}), Error);
  try {
    minplus_apply(MinPlusMatrix(1, 2), Vector{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidTransform);
  }
}

TEST(TropicalApply, CountsAdditionsAndComparisonsOnly) {
  OpCounts c;
  minplus_apply(MinPlusMatrix{{1, 2, 3}, {4, 5, 6}}, Vector{0, 0, 0}, &c);
  EXPECT_EQ(c.multiplies, 0u);
  EXPECT_EQ(c.additions, 6u);
  EXPECT_EQ(c.comparisons, 4u);
}

TEST(LinearApply, ComputesAndCounts) {
  const RealMatrix l{{2, -2}, {0.5, 1}, {-2, 0}};
  OpCounts c;
  EXPECT_EQ(linear_apply(l, Vector{1, 3}, &c), (Vector{-4, 3.5, -2}));
  EXPECT_EQ(c.multiplies, 6u);
  // Column 0: 2 new, 0.5 new, -2 reuses |2|. Column 1: -2 new, 1 and 0 free.
  EXPECT_EQ(c.nontrivial_multiplies(), 3u);
  EXPECT_EQ(c.additions, 3u);
}

TEST(TropicalApply, HandEvaluatedExamples) {
  const Vector x{5, 6};
  EXPECT_EQ(minplus_apply(MinPlusMatrix{{7, 2}, {0, -1}, {3, 4}}, x), (Vector{8, 5, 8}));
  EXPECT_EQ(maxplus_apply(MaxPlusMatrix{{7, 2}, {0, -1}, {3, 4}}, x), (Vector{12, 5, 10}));
  EXPECT_EQ(minplus_apply(MinPlusMatrix::identity(2), Vector{4, 7}), (Vector{4, 7}));
  EXPECT_EQ(maxplus_apply(MaxPlusMatrix{{1, 1}}, Vector{2, 5}), (Vector{6}));
  EXPECT_EQ(minplus_sum(MinPlusMatrix{{1, kInf}}, MinPlusMatrix{{0, 2}}), (MinPlusMatrix{{0, 2}}));
  EXPECT_EQ(maxplus_sum(MaxPlusMatrix{{1, -kInf}}, MaxPlusMatrix{{0, 2}}), (MaxPlusMatrix{{1, 2}}));
}

TEST(TropicalApply, AgreesWithSingleColumnProduct) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_dyadic<MinPlus>(rng, 4, 3);
    if (!a.transform_valid()) continue;
    Vector x(3);
    for (auto& v : x) v = rng.dyadic(10.0);
    const MinPlusMatrix col(3, 1, x);
    const auto p = minplus_matmul(a, col);
    const Vector y = minplus_apply(a, x);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(y[i], p(i, 0));
      EXPECT_TRUE(std::isfinite(y[i]));
    }
  }
}
