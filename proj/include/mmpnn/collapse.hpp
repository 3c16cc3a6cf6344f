#pragma once

/**
 * @file collapse.hpp
 * @brief Symbolic collapse of Type II networks into a single LMM block.
 *
 * After the leading linear layer every neuron is a function of the base
 * features f_1..f_n. Each such function is kept in max-of-mins normal form
 *
 *     E(f) = max_G min_{(j, c) in G} (c + f_j)
 *
 * A max-plus layer maps normal forms to normal forms by shifting and taking
 * the union of groups. A min-plus layer needs the distributive law
 * min(a, max(b, c)) = max(min(a, b), min(a, c)): the result has one group per
 * choice of one group from each input, with the chosen groups merged. The
 * final normal forms are emitted as one min-plus layer (one row per distinct
 * group) and one max-plus layer (selecting each output's groups).
 *
 * Pruning keeps the cross products small:
 *   - within a group only the smallest offset per feature is kept;
 *   - a group G is dropped when another group G' satisfies G <= G' pointwise,
 *     i.e. every feature of G' occurs in G with an offset no larger;
 *   - exact duplicates are dropped.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"

namespace mmpnn {

struct Term {
  std::size_t feature = 0;
  double offset = 0.0;

  friend bool operator==(const Term& a, const Term& b) {
    return a.feature == b.feature && Scalar(a.offset) == Scalar(b.offset);
  }
  friend bool operator<(const Term& a, const Term& b) {
    if (a.feature != b.feature) return a.feature < b.feature;
    return Scalar(a.offset) < Scalar(b.offset);
  }
};

// min over terms; terms sorted by feature, one per feature.
struct Group {
  std::vector<Term> terms;

  friend bool operator==(const Group&, const Group&) = default;
  friend bool operator<(const Group& a, const Group& b) {
    return std::lexicographical_compare(a.terms.begin(), a.terms.end(), b.terms.begin(),
                                        b.terms.end());
  }
};

// max over groups.
struct MinMaxExpr {
  std::vector<Group> groups;

  friend bool operator==(const MinMaxExpr&, const MinMaxExpr&) = default;
};

struct CollapseOptions {
  std::size_t cap = 1'000'000;  // largest group count any step may produce
  bool prune = true;
};

inline double evaluate(const Group& g, std::span<const double> features) {
  double v = kInf;
  for (const auto& t : g.terms) v = std::min(v, t.offset + features[t.feature]);
  return v;
}

inline double evaluate(const MinMaxExpr& e, std::span<const double> features) {
  double v = -kInf;
  for (const auto& g : e.groups) v = std::max(v, evaluate(g, features));
  return v;
}

// The base feature f_j as a normal form.
inline MinMaxExpr feature_expr(std::size_t j) { return MinMaxExpr{{Group{{Term{j, 0.0}}}}}; }

namespace detail {

// Union of two groups, keeping the smaller offset per feature.
inline Group merge(const Group& a, const Group& b) {
  Group out;
  out.terms.reserve(a.terms.size() + b.terms.size());
  auto ia = a.terms.begin();
  auto ib = b.terms.begin();
  while (ia != a.terms.end() || ib != b.terms.end()) {
    if (ib == b.terms.end() || (ia != a.terms.end() && ia->feature < ib->feature)) {
      out.terms.push_back(*ia++);
    } else if (ia == a.terms.end() || ib->feature < ia->feature) {
      out.terms.push_back(*ib++);
    } else {
      out.terms.push_back({ia->feature, std::min(ia->offset, ib->offset)});
      ++ia;
      ++ib;
    }
  }
  return out;
}

inline Group shifted(const Group& g, double by) {
  Group out = g;
  for (auto& t : out.terms) t.offset += by;
  return out;
}

// True when g <= upper everywhere: each term of `upper` has a counterpart in
// g with offset no larger.
inline bool bounded_by(const Group& g, const Group& upper) {
  auto it = g.terms.begin();
  for (const auto& u : upper.terms) {
    while (it != g.terms.end() && it->feature < u.feature) ++it;
    if (it == g.terms.end() || it->feature != u.feature || it->offset > u.offset) return false;
  }
  return true;
}

inline void canonicalize(std::vector<Group>& groups) {
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
}

inline void prune(std::vector<Group>& groups) {
  // Small groups first: they are the likely dominators.
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (a.terms.size() != b.terms.size()) return a.terms.size() < b.terms.size();
    return b < a;
  });
  std::vector<Group> kept;
  for (auto& g : groups) {
    const bool redundant = std::any_of(kept.begin(), kept.end(),
                                       [&](const Group& k) { return bounded_by(g, k); });
    if (redundant) continue;
    std::erase_if(kept, [&](const Group& k) { return bounded_by(k, g); });
    kept.push_back(std::move(g));
  }
  groups = std::move(kept);
}

inline void finish(std::vector<Group>& groups, const CollapseOptions& opts) {
  if (opts.prune) prune(groups);
  canonicalize(groups);
}

inline void check_cap(std::size_t n, const CollapseOptions& opts) {
  if (n > opts.cap) {
    fail(ErrorCode::Blowup, "collapse step would produce " + std::to_string(n) +
                                " groups, cap is " + std::to_string(opts.cap));
  }
}

}  // namespace detail

// out_i = min_j (a_ij + expr_j), re-expanded into max-of-mins form.
inline std::vector<MinMaxExpr> push_minplus(const std::vector<MinMaxExpr>& exprs,
                                            const MinPlusMatrix& a,
                                            const CollapseOptions& opts = {}) {
  detail::require(exprs.size() == a.cols(), ErrorCode::ShapeMismatch,
                  "min-plus layer expects " + std::to_string(a.cols()) + " inputs, got " +
                      std::to_string(exprs.size()));
  std::vector<MinMaxExpr> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    bool started = false;
    std::vector<Group> acc;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (!std::isfinite(aij)) continue;
      if (!started) {
        for (const auto& g : exprs[j].groups) acc.push_back(detail::shifted(g, aij));
        detail::finish(acc, opts);
        started = true;
        continue;
      }
      detail::check_cap(acc.size() * exprs[j].groups.size(), opts);
      std::vector<Group> next;
      next.reserve(acc.size() * exprs[j].groups.size());
      for (const auto& left : acc) {
        for (const auto& g : exprs[j].groups) {
          next.push_back(detail::merge(left, detail::shifted(g, aij)));
        }
      }
      detail::finish(next, opts);
      acc = std::move(next);
    }
    if (!started) {
      fail(ErrorCode::InvalidTransform, "min-plus row " + std::to_string(i) + " has no finite entry");
    }
    out[i].groups = std::move(acc);
  }
  return out;
}

// out_i = max_j (b_ij + expr_j): shifted union of groups.
inline std::vector<MinMaxExpr> push_maxplus(const std::vector<MinMaxExpr>& exprs,
                                            const MaxPlusMatrix& b,
                                            const CollapseOptions& opts = {}) {
  detail::require(exprs.size() == b.cols(), ErrorCode::ShapeMismatch,
                  "max-plus layer expects " + std::to_string(b.cols()) + " inputs, got " +
                      std::to_string(exprs.size()));
  std::vector<MinMaxExpr> out(b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    std::vector<Group> acc;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      const double bij = b(i, j);
      if (!std::isfinite(bij)) continue;
      for (const auto& g : exprs[j].groups) acc.push_back(detail::shifted(g, bij));
    }
    if (acc.empty()) {
      fail(ErrorCode::InvalidTransform, "max-plus row " + std::to_string(i) + " has no finite entry");
    }
    detail::check_cap(acc.size(), opts);
    detail::finish(acc, opts);
    out[i].groups = std::move(acc);
  }
  return out;
}

// One min-plus row per distinct group, one max-plus row per output.
inline Network emit_lmm(const std::vector<MinMaxExpr>& exprs, const RealMatrix& lead) {
  detail::require(!exprs.empty(), ErrorCode::ShapeMismatch, "no output expressions");
  const std::size_t n = lead.rows();
  std::map<Group, std::size_t> index;
  std::vector<const Group*> order;
  for (const auto& e : exprs) {
    for (const auto& g : e.groups) {
      for (const auto& t : g.terms) {
        detail::require(t.feature < n, ErrorCode::ShapeMismatch, "term refers to a missing feature");
      }
      if (index.emplace(g, order.size()).second) order.push_back(&g);
    }
  }
  const std::size_t m = order.size();
  MinPlusMatrix a(m, n);
  for (std::size_t r = 0; r < m; ++r) {
    for (const auto& t : order[r]->terms) a.set(r, t.feature, t.offset);
  }
  MaxPlusMatrix b(exprs.size(), m);
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    for (const auto& g : exprs[i].groups) b.set(i, index.at(g), 0.0);
  }
  return Network({lead, std::move(a), std::move(b)}, ShapeTag::TypeII);
}

namespace detail {

inline void require_type_ii(const Network& net) {
  if (!conforms(net.layers(), ShapeTag::TypeII)) {
    fail(ErrorCode::ShapeViolation,
         "collapse needs a Type II layer sequence (linear, then min-plus/max-plus pairs)");
  }
}

inline std::vector<MinMaxExpr> base_features(std::size_t n) {
  std::vector<MinMaxExpr> exprs;
  for (std::size_t j = 0; j < n; ++j) exprs.push_back(feature_expr(j));
  return exprs;
}

template <class S>
TropicalMatrix<typename std::conditional_t<std::is_same_v<S, MinPlus>, MaxPlus, MinPlus>>
negated(const TropicalMatrix<S>& m) {
  std::vector<double> e(m.entries().begin(), m.entries().end());
  for (auto& v : e) v = -v;
  return {m.rows(), m.cols(), std::move(e)};
}

}  // namespace detail

// Normal forms of the network outputs in terms of the linear-layer outputs.
inline std::vector<MinMaxExpr> expand(const Network& net, const CollapseOptions& opts = {}) {
  detail::require_type_ii(net);
  auto exprs = detail::base_features(net.layer(0).out_dim());
  for (std::size_t k = 1; k < net.size(); ++k) {
    const Layer& layer = net.layer(k);
    exprs = layer.kind() == LayerKind::min_plus ? push_minplus(exprs, layer.min_plus(), opts)
                                                : push_maxplus(exprs, layer.max_plus(), opts);
  }
  return exprs;
}

// Dual normal form: output_i = min_G max_{(j, c) in G} (c + f_j). Computed by
// expanding the negated network (min and max swap, features negate).
inline std::vector<MinMaxExpr> expand_min_of_maxes(const Network& net,
                                                   const CollapseOptions& opts = {}) {
  detail::require_type_ii(net);
  auto exprs = detail::base_features(net.layer(0).out_dim());
  for (std::size_t k = 1; k < net.size(); ++k) {
    const Layer& layer = net.layer(k);
    exprs = layer.kind() == LayerKind::min_plus
                ? push_maxplus(exprs, detail::negated(layer.min_plus()), opts)
                : push_minplus(exprs, detail::negated(layer.max_plus()), opts);
  }
  for (auto& e : exprs) {
    for (auto& g : e.groups) {
      for (auto& t : g.terms) t.offset = -t.offset;
    }
    detail::canonicalize(e.groups);
  }
  return exprs;
}

inline double evaluate_min_of_maxes(const MinMaxExpr& e, std::span<const double> features) {
  double v = kInf;
  for (const auto& g : e.groups) {
    double w = -kInf;
    for (const auto& t : g.terms) w = std::max(w, t.offset + features[t.feature]);
    v = std::min(v, w);
  }
  return v;
}

// Equivalent LMM network; the leading linear layer is carried over unchanged.
inline Network collapse(const Network& net, const CollapseOptions& opts = {}) {
  auto exprs = expand(net, opts);
  return emit_lmm(exprs, net.layer(0).linear());
}

// Group counts of a collapsed network, for diagnostics.
struct CollapseStats {
  std::size_t min_plus_rows = 0;
  std::vector<std::size_t> groups_per_output;
};

inline CollapseStats collapse_stats(const Network& lmm) {
  CollapseStats s;
  s.min_plus_rows = lmm.layer(1).out_dim();
  const auto& b = lmm.layer(2).max_plus();
  for (std::size_t i = 0; i < b.rows(); ++i) {
    auto r = b.row(i);
    s.groups_per_output.push_back(static_cast<std::size_t>(
        std::count_if(r.begin(), r.end(), [](double v) { return std::isfinite(v); })));
  }
  return s;
}

}  // namespace mmpnn
