#pragma once

/**
 * @file matrix.hpp
 * @brief Min-plus, max-plus and real matrices.
 *
 * Storage is dense and row-major. A min-plus matrix never holds -inf and a
 * max-plus matrix never holds +inf; +inf (resp. -inf) is the additive
 * identity and marks an absent connection.
 *
 * All apply functions take an optional OpCounts accumulator so the cost of an
 * evaluation can be measured exactly.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/tropical.hpp"

namespace mmpnn {

using Vector = std::vector<double>;

struct OpCounts {
  std::uint64_t multiplies = 0;
  // Subset of multiplies that need no multiplier: factors 0, +1, -1, or a
  // product whose magnitude was already formed for the same input (negation).
  std::uint64_t trivial_multiplies = 0;
  std::uint64_t additions = 0;
  std::uint64_t comparisons = 0;

  std::uint64_t nontrivial_multiplies() const { return multiplies - trivial_multiplies; }

  OpCounts& operator+=(const OpCounts& o) {
    multiplies += o.multiplies;
    trivial_multiplies += o.trivial_multiplies;
    additions += o.additions;
    comparisons += o.comparisons;
    return *this;
  }
  bool operator==(const OpCounts&) const = default;
};

struct MinPlus {
  static constexpr double zero = kInf;  // identity of the reduction
  static constexpr double forbidden = -kInf;
  static constexpr OppositeInfinities absorb = OppositeInfinities::absorb_min_plus;
  static constexpr const char* name = "min-plus";
  static bool better(double a, double b) { return a < b; }
  static Scalar reduce(Scalar a, Scalar b) { return add_lower(a, b); }
};

struct MaxPlus {
  static constexpr double zero = -kInf;
  static constexpr double forbidden = kInf;
  static constexpr OppositeInfinities absorb = OppositeInfinities::absorb_max_plus;
  static constexpr const char* name = "max-plus";
  static bool better(double a, double b) { return a > b; }
  static Scalar reduce(Scalar a, Scalar b) { return add_upper(a, b); }
};

namespace detail {

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

inline std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

inline std::vector<double> flatten(
    std::initializer_list<std::initializer_list<double>> rows, std::size_t& n_rows,
    std::size_t& n_cols) {
  n_rows = rows.size();
  n_cols = n_rows == 0 ? 0 : rows.begin()->size();
  std::vector<double> out;
  out.reserve(n_rows * n_cols);
  for (const auto& r : rows) {
    require(r.size() == n_cols, ErrorCode::ShapeMismatch, "ragged matrix literal");
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

inline void require_finite_input(std::span<const double> x) {
  for (double v : x) {
    require(std::isfinite(v), ErrorCode::InvalidValue, "input vector entries must be finite");
  }
}

}  // namespace detail

template <class Semiring>
class TropicalMatrix {
 public:
  using semiring = Semiring;

  TropicalMatrix() = default;

  // rows x cols filled with the additive identity.
  TropicalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Semiring::zero) {}

  TropicalMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    detail::require(data_.size() == rows_ * cols_, ErrorCode::ShapeMismatch,
                    "entry count does not match " + detail::shape_str(rows_, cols_));
    for (double v : data_) check_entry(v);
  }

  TropicalMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    data_ = detail::flatten(rows, rows_, cols_);
    for (double v : data_) check_entry(v);
  }

  static TropicalMatrix identity(std::size_t n) {
    TropicalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 0.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    check_entry(v);
    data_[i * cols_ + j] = v;
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> entries() const { return data_; }

  // First row with no finite entry, if any.
  std::optional<std::size_t> first_invalid_row() const {
    for (std::size_t i = 0; i < rows_; ++i) {
      auto r = row(i);
      if (std::none_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); })) {
        return i;
      }
    }
    return std::nullopt;
  }

  // Every row has a finite entry, so finite inputs map to finite outputs.
  bool transform_valid() const { return !first_invalid_row().has_value(); }

  friend bool operator==(const TropicalMatrix& a, const TropicalMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (std::size_t k = 0; k < a.data_.size(); ++k) {
      if (Scalar(a.data_[k]) != Scalar(b.data_[k])) return false;
    }
    return true;
  }

 private:
  static void check_entry(double v) {
    detail::require(!std::isnan(v), ErrorCode::InvalidValue, "NaN entry");
    detail::require(v != Semiring::forbidden, ErrorCode::InvalidValue,
                    std::string(Semiring::name) + " matrix cannot hold " +
                        format_scalar(Semiring::forbidden));
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using MinPlusMatrix = TropicalMatrix<MinPlus>;
using MaxPlusMatrix = TropicalMatrix<MaxPlus>;

class RealMatrix {
 public:
  RealMatrix() = default;

  RealMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    detail::require(data_.size() == rows_ * cols_, ErrorCode::ShapeMismatch,
                    "entry count does not match " + detail::shape_str(rows_, cols_));
    for (double v : data_) check_entry(v);
  }

  RealMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    data_ = detail::flatten(rows, rows_, cols_);
    for (double v : data_) check_entry(v);
  }

  static RealMatrix identity(std::size_t n) {
    RealMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data_[i * n + i] = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void set(std::size_t i, std::size_t j, double v) {
    check_entry(v);
    data_[i * cols_ + j] = v;
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> entries() const { return data_; }

  friend bool operator==(const RealMatrix& a, const RealMatrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    for (std::size_t k = 0; k < a.data_.size(); ++k) {
      if (Scalar(a.data_[k]) != Scalar(b.data_[k])) return false;
    }
    return true;
  }

 private:
  static void check_entry(double v) {
    detail::require(std::isfinite(v), ErrorCode::InvalidValue,
                    "linear matrix entries must be finite");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Entrywise reduction: min for min-plus, max for max-plus.
template <class S>
TropicalMatrix<S> tropical_sum(const TropicalMatrix<S>& a, const TropicalMatrix<S>& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::ShapeMismatch,
                  "sum of " + detail::shape_str(a.rows(), a.cols()) + " and " +
                      detail::shape_str(b.rows(), b.cols()));
  std::vector<double> out(a.rows() * a.cols());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = S::reduce(Scalar(a.entries()[k]), Scalar(b.entries()[k])).value();
  }
  return TropicalMatrix<S>(a.rows(), a.cols(), std::move(out));
}

// t_ij = reduce_k (a_ik + c_kj).
template <class S>
TropicalMatrix<S> tropical_product(const TropicalMatrix<S>& a, const TropicalMatrix<S>& c) {
  detail::require(a.cols() == c.rows(), ErrorCode::ShapeMismatch,
                  "product of " + detail::shape_str(a.rows(), a.cols()) + " and " +
                      detail::shape_str(c.rows(), c.cols()));
  std::vector<double> out(a.rows() * c.cols(), S::zero);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < c.cols(); ++j) {
      Scalar acc(S::zero);
      for (std::size_t k = 0; k < a.cols(); ++k) {
        acc = S::reduce(acc, mul(Scalar(a(i, k)), Scalar(c(k, j))));
      }
      out[i * c.cols() + j] = acc.value();
    }
  }
  TropicalMatrix<S> t(a.rows(), c.cols(), std::move(out));
  if (a.transform_valid() && c.transform_valid() && !t.transform_valid()) {
    fail(ErrorCode::InvalidTransform, "product of transform-valid matrices lost validity");
  }
  return t;
}

inline MinPlusMatrix minplus_sum(const MinPlusMatrix& a, const MinPlusMatrix& b) {
  return tropical_sum(a, b);
}
inline MaxPlusMatrix maxplus_sum(const MaxPlusMatrix& a, const MaxPlusMatrix& b) {
  return tropical_sum(a, b);
}
inline MinPlusMatrix minplus_matmul(const MinPlusMatrix& a, const MinPlusMatrix& c) {
  return tropical_product(a, c);
}
inline MaxPlusMatrix maxplus_matmul(const MaxPlusMatrix& a, const MaxPlusMatrix& c) {
  return tropical_product(a, c);
}

/// Tropical transformation y_i = reduce_j (a_ij + x_j).
///
/// When `selection` is given it receives, per output, the index attaining the
/// extremum; ties go to the lowest index.
template <class S>
Vector tropical_apply(const TropicalMatrix<S>& a, std::span<const double> x,
                      std::vector<std::size_t>* selection = nullptr,
                      OpCounts* counts = nullptr) {
  detail::require(x.size() == a.cols(), ErrorCode::ShapeMismatch,
                  std::string(S::name) + " transform expects " + std::to_string(a.cols()) +
                      " inputs, got " + std::to_string(x.size()));
  detail::require_finite_input(x);
  if (auto bad = a.first_invalid_row()) {
    fail(ErrorCode::InvalidTransform,
         std::string(S::name) + " row " + std::to_string(*bad) + " has no finite entry");
  }
  Vector y(a.rows());
  if (selection) selection->assign(a.rows(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double best = r[0] + x[0];
    std::size_t arg = 0;
    for (std::size_t j = 1; j < r.size(); ++j) {
      const double term = r[j] + x[j];
      if (S::better(term, best)) {
        best = term;
        arg = j;
      }
    }
    y[i] = best;
    if (selection) (*selection)[i] = arg;
  }
  if (counts) {
    counts->additions += a.rows() * a.cols();
    counts->comparisons += a.rows() * (a.cols() - 1);
  }
  return y;
}

inline Vector minplus_apply(const MinPlusMatrix& a, std::span<const double> x,
                            OpCounts* counts = nullptr) {
  return tropical_apply(a, x, nullptr, counts);
}

inline Vector maxplus_apply(const MaxPlusMatrix& b, std::span<const double> x,
                            OpCounts* counts = nullptr) {
  return tropical_apply(b, x, nullptr, counts);
}

namespace detail {

// Multiplications in one linear evaluation. A product is trivial when the
// weight is 0 or +-1, or when a product of the same magnitude with the same
// input was already formed (its negation is free).
inline OpCounts linear_counts(const RealMatrix& l) {
  OpCounts c;
  c.multiplies = l.rows() * l.cols();
  c.additions = l.cols() == 0 ? 0 : l.rows() * (l.cols() - 1);
  for (std::size_t j = 0; j < l.cols(); ++j) {
    std::vector<double> formed;
    for (std::size_t i = 0; i < l.rows(); ++i) {
      const double w = std::fabs(l(i, j));
      if (w == 0.0 || w == 1.0 ||
          std::find(formed.begin(), formed.end(), w) != formed.end()) {
        ++c.trivial_multiplies;
      } else {
        formed.push_back(w);
      }
    }
  }
  return c;
}

}  // namespace detail

inline Vector linear_apply(const RealMatrix& l, std::span<const double> x,
                           OpCounts* counts = nullptr) {
  detail::require(x.size() == l.cols(), ErrorCode::ShapeMismatch,
                  "linear transform expects " + std::to_string(l.cols()) + " inputs, got " +
                      std::to_string(x.size()));
  Vector y(l.rows(), 0.0);
  for (std::size_t i = 0; i < l.rows(); ++i) {
    auto r = l.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  if (counts) *counts += detail::linear_counts(l);
  return y;
}

}  // namespace mmpnn
