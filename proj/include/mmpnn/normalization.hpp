#pragma once

/**
 * @file normalization.hpp
 * @brief Normalization of min-plus / max-plus coefficients over sample sets.
 *
 * For a min-plus row g_i = min_j (a_ij + f_j) the normalized coefficient is
 *
 *     nu(a_ij) = max_{x in D} (g_i(x) - f_j(x))
 *
 * and dually nu(b_ij) = min_{x in D} (h_i(x) - f_j(x)) for max-plus rows.
 * Every term becomes attached to the row's graph somewhere on D while the
 * row's values on D stay the same.
 *
 * Floating point: the computed value is nudged by single ulps until
 * fl(nu + f_j(x)) >= g_i(x) holds at every x in D, then clamped to the
 * original coefficient. Both steps keep the row's output on D bit-identical,
 * and the result never moves past the original coefficient.
 *
 * Infinite coefficients encode absent connections and are left untouched.
 */

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"

namespace mmpnn {

// features[s][j] = f_j(x_s) for sample s.
using FeatureTable = std::vector<Vector>;

template <class S>
TropicalMatrix<S> normalize_restricted(const TropicalMatrix<S>& a, const FeatureTable& features) {
  detail::require(!features.empty(), ErrorCode::EmptyPlan, "normalization needs at least one sample");
  for (const auto& f : features) {
    detail::require(f.size() == a.cols(), ErrorCode::ShapeMismatch,
                    "feature row has " + std::to_string(f.size()) + " values, matrix has " +
                        std::to_string(a.cols()) + " columns");
    detail::require_finite_input(f);
  }
  if (auto bad = a.first_invalid_row()) {
    fail(ErrorCode::InvalidTransform, "row " + std::to_string(*bad) + " has no finite entry");
  }

  const std::size_t ns = features.size();
  TropicalMatrix<S> out = a;
  Vector g(ns);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t s = 0; s < ns; ++s) {
      double best = r[0] + features[s][0];
      for (std::size_t j = 1; j < r.size(); ++j) {
        const double term = r[j] + features[s][j];
        if (S::better(term, best)) best = term;
      }
      g[s] = best;
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(r[j])) continue;
      double c = g[0] - features[0][j];
      for (std::size_t s = 1; s < ns; ++s) {
        const double cand = g[s] - features[s][j];
        if (S::better(c, cand)) c = cand;
      }
      // Repair rounding: no term may undercut (min-plus) or overshoot
      // (max-plus) the row value at any sample.
      for (std::size_t s = 0; s < ns && S::better(c, r[j]); ++s) {
        while (S::better(c + features[s][j], g[s]) && S::better(c, r[j])) {
          c = std::nextafter(c, S::zero);
        }
      }
      out.set(i, j, S::better(c, r[j]) ? c : r[j]);
    }
  }
  return out;
}

inline MinPlusMatrix normalize_minplus_restricted(const MinPlusMatrix& a,
                                                  const FeatureTable& features) {
  return normalize_restricted(a, features);
}

inline MaxPlusMatrix normalize_maxplus_restricted(const MaxPlusMatrix& b,
                                                  const FeatureTable& features) {
  return normalize_restricted(b, features);
}

// Dense grid over an axis-aligned box. The unrestricted algorithm takes a
// supremum over the whole box; the grid gives a lower bound that tightens as
// the grid refines.
struct GridPlan {
  std::vector<std::pair<double, double>> box;  // [lo, hi] per axis
  std::size_t points_per_axis = 2;
};

// Grid points, enumerated row-major (last axis fastest).
inline std::vector<Vector> grid_points(const GridPlan& plan) {
  detail::require(!plan.box.empty(), ErrorCode::EmptyPlan, "grid plan has no axes");
  detail::require(plan.points_per_axis >= 2, ErrorCode::EmptyPlan,
                  "grid plan needs at least 2 points per axis");
  for (auto [lo, hi] : plan.box) {
    detail::require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, ErrorCode::InvalidConfig,
                    "grid axis bounds must be finite with lo < hi");
  }
  const std::size_t d = plan.box.size();
  const std::size_t n = plan.points_per_axis;
  auto coord = [&](std::size_t axis, std::size_t k) {
    auto [lo, hi] = plan.box[axis];
    if (k + 1 == n) return hi;
    return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  };
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= n;
  std::vector<Vector> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    Vector p(d);
    for (std::size_t a = 0; a < d; ++a) p[a] = coord(a, idx[a]);
    pts.push_back(std::move(p));
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return pts;
}

// Maps an input point to the feature vector (f_1, ..., f_n).
using FeatureEvaluator = std::function<Vector(std::span<const double>)>;

inline FeatureTable tabulate(const FeatureEvaluator& f, const std::vector<Vector>& points) {
  FeatureTable t;
  t.reserve(points.size());
  for (const auto& p : points) t.push_back(f(p));
  return t;
}

inline MinPlusMatrix normalize_minplus(const MinPlusMatrix& a, const FeatureEvaluator& f,
                                       const GridPlan& plan) {
  return normalize_restricted(a, tabulate(f, grid_points(plan)));
}

inline MaxPlusMatrix normalize_maxplus(const MaxPlusMatrix& b, const FeatureEvaluator& f,
                                       const GridPlan& plan) {
  return normalize_restricted(b, tabulate(f, grid_points(plan)));
}

// Restricted normalization of every tropical layer, using the values D takes
// at each layer's input. Outputs on D are unchanged bit for bit, so feature
// tables are computed once from the original network.
inline Network normalize_network(const Network& net, const std::vector<Vector>& samples) {
  detail::require(!samples.empty(), ErrorCode::EmptyPlan, "normalization needs at least one sample");
  std::vector<FeatureTable> inputs(net.size());
  for (const auto& x : samples) {
    auto res = forward(net, x, /*record=*/true);
    for (std::size_t k = 0; k < net.size(); ++k) {
      inputs[k].push_back(std::move(res.trace->layers[k].input));
    }
  }
  Network out = net;
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Layer& layer = net.layer(k);
    switch (layer.kind()) {
      case LayerKind::min_plus:
        out.layer(k) = Layer(normalize_restricted(layer.min_plus(), inputs[k]));
        break;
      case LayerKind::max_plus:
        out.layer(k) = Layer(normalize_restricted(layer.max_plus(), inputs[k]));
        break;
      case LayerKind::linear: break;
    }
  }
  return out;
}

}  // namespace mmpnn
