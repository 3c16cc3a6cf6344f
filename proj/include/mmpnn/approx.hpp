#pragma once

/**
 * @file approx.hpp
 * @brief Constructive LMM approximation of Lipschitz functions on a box.
 *
 * The linear layer produces scaled coordinate hyperplanes, each min-plus row
 * combines them into a cone ("pyramid") whose tip sits over one grid point at
 * the target's value there, and the single max-plus row takes the maximum of
 * all cones. For a K-Lipschitz target (max norm) the network interpolates the
 * target at every grid point and stays within 2*K*delta of it on the box.
 *
 * Linear-layer variants:
 *   TwoD      2d rows: +K x_i, -K x_i. Cone g(x) = t - K |x - c|_inf.
 *   DPlusOne  d+1 rows: +S x_i and -S (x_1 + ... + x_d), with S = K d so the
 *             simplex cone falls off at least as fast as the TwoD cone.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"
#include "mmpnn/normalization.hpp"

namespace mmpnn {

enum class LinearVariant { TwoD, DPlusOne };

inline constexpr std::size_t kMaxApproxDim = 4;
inline constexpr std::size_t kMaxGridPoints = 1'000'000;

struct ApproxConfig {
  std::vector<std::pair<double, double>> box;
  double delta = 0.1;
  double lipschitz = 1.0;
  LinearVariant variant = LinearVariant::TwoD;

  std::size_t dim() const { return box.size(); }
};

using TargetFunction = std::function<double(std::span<const double>)>;

inline void check_config(const ApproxConfig& cfg) {
  detail::require(!cfg.box.empty(), ErrorCode::InvalidConfig, "box has no axes");
  detail::require(cfg.box.size() <= kMaxApproxDim, ErrorCode::InvalidConfig,
                  "input dimension " + std::to_string(cfg.box.size()) + " exceeds the limit of " +
                      std::to_string(kMaxApproxDim));
  for (auto [lo, hi] : cfg.box) {
    detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorCode::InvalidConfig,
                    "box axis needs finite bounds with lo < hi");
  }
  detail::require(std::isfinite(cfg.delta) && cfg.delta > 0.0, ErrorCode::InvalidConfig,
                  "delta must be positive");
  detail::require(std::isfinite(cfg.lipschitz) && cfg.lipschitz > 0.0, ErrorCode::InvalidConfig,
                  "Lipschitz constant must be positive");
}

// Axis coordinates lo, lo + delta, ... with hi always included; a short top
// cell is kept when (hi - lo) is not a multiple of delta.
inline std::vector<double> axis_points(double lo, double hi, double delta) {
  const double span = hi - lo;
  const double steps = span / delta;
  const double tol = 1e-9;
  auto k_max = static_cast<std::size_t>(std::floor(steps + tol));
  std::vector<double> pts;
  pts.reserve(k_max + 2);
  for (std::size_t k = 0; k <= k_max; ++k) pts.push_back(lo + static_cast<double>(k) * delta);
  if (hi - pts.back() > tol * std::max(1.0, std::fabs(hi))) {
    pts.push_back(hi);
  } else {
    pts.back() = hi;
  }
  return pts;
}

class ApproxGrid {
 public:
  explicit ApproxGrid(const ApproxConfig& cfg) {
    check_config(cfg);
    std::size_t total = 1;
    for (auto [lo, hi] : cfg.box) {
      axes_.push_back(axis_points(lo, hi, cfg.delta));
      total *= axes_.back().size();
      detail::require(total <= kMaxGridPoints, ErrorCode::InvalidConfig,
                      "grid exceeds " + std::to_string(kMaxGridPoints) + " points");
    }
    size_ = total;
  }

  std::size_t size() const { return size_; }
  std::size_t dim() const { return axes_.size(); }
  const std::vector<double>& axis(std::size_t a) const { return axes_[a]; }

  // Row-major enumeration, last axis fastest.
  Vector point(std::size_t flat) const {
    Vector p(axes_.size());
    for (std::size_t a = axes_.size(); a-- > 0;) {
      p[a] = axes_[a][flat % axes_[a].size()];
      flat /= axes_[a].size();
    }
    return p;
  }

  std::vector<Vector> points() const {
    std::vector<Vector> out;
    out.reserve(size_);
    for (std::size_t t = 0; t < size_; ++t) out.push_back(point(t));
    return out;
  }

 private:
  std::vector<std::vector<double>> axes_;
  std::size_t size_ = 0;
};

inline double slope_scale(const ApproxConfig& cfg) {
  return cfg.variant == LinearVariant::TwoD ? cfg.lipschitz
                                            : cfg.lipschitz * static_cast<double>(cfg.dim());
}

inline RealMatrix approx_linear_layer(const ApproxConfig& cfg) {
  const std::size_t d = cfg.dim();
  const double s = slope_scale(cfg);
  if (cfg.variant == LinearVariant::TwoD) {
    RealMatrix l(2 * d, d);
    for (std::size_t i = 0; i < d; ++i) {
      l.set(2 * i, i, s);
      l.set(2 * i + 1, i, -s);
    }
    return l;
  }
  RealMatrix l(d + 1, d);
  for (std::size_t i = 0; i < d; ++i) {
    l.set(i, i, s);
    l.set(d, i, -s);
  }
  return l;
}

// Min-plus row whose cone has its tip at (center, height).
inline Vector pyramid_coefficients(std::span<const double> center, double height,
                                   const ApproxConfig& cfg) {
  detail::require(center.size() == cfg.dim(), ErrorCode::ShapeMismatch,
                  "pyramid center has wrong dimension");
  const double s = slope_scale(cfg);
  const std::size_t d = cfg.dim();
  if (cfg.variant == LinearVariant::TwoD) {
    Vector row(2 * d);
    for (std::size_t i = 0; i < d; ++i) {
      row[2 * i] = height - s * center[i];
      row[2 * i + 1] = height + s * center[i];
    }
    return row;
  }
  Vector row(d + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    row[i] = height - s * center[i];
    sum += center[i];
  }
  row[d] = height + s * sum;
  return row;
}

// `values[t]` is the target at grid.point(t).
inline Network build_approximator(const ApproxConfig& cfg, std::span<const double> values) {
  const ApproxGrid grid(cfg);
  if (values.size() != grid.size()) {
    fail(ErrorCode::MissingGridValue, "expected " + std::to_string(grid.size()) +
                                          " grid values, got " + std::to_string(values.size()));
  }
  RealMatrix lin = approx_linear_layer(cfg);
  const std::size_t m = grid.size();
  std::vector<double> mins;
  mins.reserve(m * lin.rows());
  for (std::size_t t = 0; t < m; ++t) {
    detail::require(std::isfinite(values[t]), ErrorCode::InvalidValue, "non-finite target value");
    const Vector row = pyramid_coefficients(grid.point(t), values[t], cfg);
    mins.insert(mins.end(), row.begin(), row.end());
  }
  const std::size_t n = lin.rows();
  return Network({std::move(lin), MinPlusMatrix(m, n, std::move(mins)),
                  MaxPlusMatrix(1, m, std::vector<double>(m, 0.0))},
                 ShapeTag::TypeII);
}

inline Network build_approximator(const ApproxConfig& cfg, const TargetFunction& f) {
  const ApproxGrid grid(cfg);
  Vector values(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) values[t] = f(grid.point(t));
  return build_approximator(cfg, values);
}

inline std::string format_point(std::span<const double> p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ", ";
    s += format_scalar(p[i]);
  }
  return s + ")";
}

// Orders a free-form (point, value) table onto the grid. Coordinates match a
// grid point when they agree to 1e-9 relative.
inline Vector grid_values_from_table(const ApproxConfig& cfg,
                                     const std::vector<std::pair<Vector, double>>& table) {
  const ApproxGrid grid(cfg);
  auto axis_index = [&](std::size_t a, double v) -> std::optional<std::size_t> {
    const auto& ax = grid.axis(a);
    for (std::size_t k = 0; k < ax.size(); ++k) {
      if (std::fabs(ax[k] - v) <= 1e-9 * std::max(1.0, std::fabs(ax[k]))) return k;
    }
    return std::nullopt;
  };
  std::vector<std::optional<double>> slots(grid.size());
  for (const auto& [pt, val] : table) {
    detail::require(pt.size() == grid.dim(), ErrorCode::ShapeMismatch,
                    "table point " + format_point(pt) + " has wrong dimension");
    std::size_t flat = 0;
    bool on_grid = true;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      auto k = axis_index(a, pt[a]);
      if (!k) {
        on_grid = false;
        break;
      }
      flat = flat * grid.axis(a).size() + *k;
    }
    if (on_grid) slots[flat] = val;
  }
  Vector values(grid.size());
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (!slots[t]) {
      fail(ErrorCode::MissingGridValue, "no table value for grid point " +
                                            format_point(grid.point(t)));
    }
    values[t] = *slots[t];
  }
  return values;
}

// Largest difference quotient between grid neighbours along any axis.
inline double estimate_lipschitz(const ApproxConfig& cfg, std::span<const double> values) {
  const ApproxGrid grid(cfg);
  detail::require(values.size() == grid.size(), ErrorCode::MissingGridValue,
                  "value count does not match grid");
  double k = 0.0;
  std::size_t stride = 1;
  for (std::size_t a = grid.dim(); a-- > 0;) {
    const auto& ax = grid.axis(a);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const std::size_t pos = (t / stride) % ax.size();
      if (pos + 1 == ax.size()) continue;
      const double q = std::fabs(values[t + stride] - values[t]) / (ax[pos + 1] - ax[pos]);
      k = std::max(k, q);
    }
    stride *= ax.size();
  }
  return k;
}

struct ApproxReport {
  double sup_error = 0.0;
  double mean_error = 0.0;
  bool grid_exact = false;
  std::size_t samples = 0;
};

/// Measures |net - f| on a uniform grid of about `samples` points over the
/// box, and checks exactness (1e-12) at every construction grid point.
inline ApproxReport approx_error_report(const Network& net, const TargetFunction& f,
                                        const ApproxConfig& cfg, std::size_t samples) {
  const ApproxGrid grid(cfg);
  detail::require(net.input_dim() == cfg.dim() && net.output_dim() == 1, ErrorCode::ShapeMismatch,
                  "approximator dimensions do not match the box");
  ApproxReport rep;
  rep.grid_exact = true;
  for (const auto& p : grid.points()) {
    if (std::fabs(evaluate(net, p)[0] - f(p)) > 1e-12) {
      rep.grid_exact = false;
      break;
    }
  }
  const double per_axis = std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(samples, 2)),
                                             1.0 / static_cast<double>(cfg.dim())) - 1e-9);
  GridPlan plan{cfg.box, std::max<std::size_t>(2, static_cast<std::size_t>(per_axis))};
  double sum = 0.0;
  const auto pts = grid_points(plan);
  for (const auto& p : pts) {
    const double e = std::fabs(evaluate(net, p)[0] - f(p));
    rep.sup_error = std::max(rep.sup_error, e);
    sum += e;
  }
  rep.samples = pts.size();
  rep.mean_error = sum / static_cast<double>(pts.size());
  return rep;
}

}  // namespace mmpnn
