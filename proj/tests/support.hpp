#pragma once

// Helpers shared by the unit suites and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mmpnn/mmpnn.hpp"

namespace mmpnn::tsupport {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * detail::uniform01(gen_); }

  std::size_t index(std::size_t n) { return detail::uniform_index(gen_, n); }

  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }

  bool chance(double p) { return detail::uniform01(gen_) < p; }

  // Multiple of 1/64 in [-range, range]; sums of a few stay exact.
  double dyadic(double range) {
    const auto steps = static_cast<std::int64_t>(range * 64.0);
    const auto k = static_cast<std::int64_t>(index(static_cast<std::size_t>(2 * steps + 1))) - steps;
    return static_cast<double>(k) / 64.0;
  }

  // Finite value or, with probability p_inf, one of the infinities.
  double extended(double range, double p_inf) {
    if (chance(p_inf)) return chance(0.5) ? kInf : -kInf;
    return dyadic(range);
  }

  Vector vector(std::size_t n, double lo, double hi) {
    Vector v(n);
    for (auto& x : v) x = uniform(lo, hi);
    return v;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline RealMatrix random_linear(Rng& rng, std::size_t rows, std::size_t cols) {
  RealMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, rng.uniform(-1.0, 1.0));
  }
  return m;
}

template <class S>
TropicalMatrix<S> random_tropical(Rng& rng, std::size_t rows, std::size_t cols, double range = 1.0) {
  TropicalMatrix<S> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, rng.uniform(-range, range));
  }
  return m;
}

inline Layer random_layer(Rng& rng, LayerKind kind, std::size_t rows, std::size_t cols) {
  switch (kind) {
    case LayerKind::linear: return random_linear(rng, rows, cols);
    case LayerKind::min_plus: return random_tropical<MinPlus>(rng, rows, cols);
    case LayerKind::max_plus: return random_tropical<MaxPlus>(rng, rows, cols);
  }
  return random_linear(rng, rows, cols);
}

// Random Type II network: Linear, then `blocks` (MinPlus, MaxPlus) pairs.
inline Network random_type_ii(Rng& rng, std::size_t d, std::size_t max_width, std::size_t blocks) {
  std::vector<Layer> layers;
  std::size_t in = rng.between(1, max_width);
  layers.emplace_back(random_linear(rng, in, d));
  for (std::size_t k = 0; k < blocks; ++k) {
    const std::size_t a = rng.between(1, max_width);
    layers.emplace_back(random_tropical<MinPlus>(rng, a, in));
    const std::size_t b = rng.between(1, max_width);
    layers.emplace_back(random_tropical<MaxPlus>(rng, b, a));
    in = b;
  }
  return Network(std::move(layers), ShapeTag::TypeII);
}

// Smallest gap between the best and second-best term over every tropical row
// evaluated at x. Infinite when no row has two finite terms.
inline double tie_gap(const Network& net, std::span<const double> x) {
  double gap = kInf;
  const auto res = forward(net, x, true);
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Layer& l = net.layer(k);
    if (!l.is_tropical()) continue;
    const Vector& in = res.trace->layers[k].input;
    auto e = l.entries();
    for (std::size_t i = 0; i < l.out_dim(); ++i) {
      std::vector<double> terms;
      for (std::size_t j = 0; j < l.in_dim(); ++j) {
        const double t = e[i * l.in_dim() + j] + in[j];
        if (std::isfinite(t)) terms.push_back(t);
      }
      if (terms.size() < 2) continue;
      std::sort(terms.begin(), terms.end());
      const double g = l.kind() == LayerKind::min_plus ? terms[1] - terms[0]
                                                       : terms[terms.size() - 1] - terms[terms.size() - 2];
      gap = std::min(gap, g);
    }
  }
  return gap;
}

// Random network of the given layer kinds and widths in [1, max_width]. A
// fraction of tropical entries is made structurally absent (infinite) while
// keeping every row valid.
inline Network random_network(Rng& rng, std::size_t d, const std::vector<LayerKind>& kinds,
                              std::size_t max_width, double p_absent = 0.0) {
  std::vector<Layer> layers;
  std::size_t in = d;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const std::size_t out = k + 1 == kinds.size() ? 1 : rng.between(1, max_width);
    Layer l = random_layer(rng, kinds[k], out, in);
    if (l.is_tropical() && in > 1) {
      const double absent = l.kind() == LayerKind::min_plus ? kInf : -kInf;
      for (std::size_t i = 0; i < out; ++i) {
        const std::size_t keep = rng.index(in);
        for (std::size_t j = 0; j < in; ++j) {
          if (j != keep && rng.chance(p_absent)) l.set(i, j, absent);
        }
      }
    }
    layers.push_back(std::move(l));
    in = out;
  }
  return Network(std::move(layers), ShapeTag::Custom);
}

struct GradCheck {
  double worst = 0.0;  // max |g - fd| / (rel |fd| + abs_floor); <= 1 passes
  std::size_t checked = 0;
};

// Central differences of the MSE loss at (x, t) against backward(), for every
// finite parameter and every input coordinate.
inline GradCheck check_gradients(const Network& net, const Vector& x, const Vector& t, double h,
                                 double rel, double abs_floor = 1e-8) {
  GradCheck out;
  auto loss_at = [&](const Network& n, const Vector& in) {
    return loss_and_grad(evaluate(n, in), t, Loss::MSE).value;
  };
  const auto fw = forward(net, x, true);
  const auto bw = backward(net, *fw.trace, loss_and_grad(fw.output, t, Loss::MSE).grad);
  auto record = [&](double g, double fd) {
    out.worst = std::max(out.worst, std::fabs(g - fd) / (rel * std::fabs(fd) + abs_floor));
    ++out.checked;
  };
  for (std::size_t k = 0; k < net.size(); ++k) {
    const Layer& l = net.layer(k);
    for (std::size_t i = 0; i < l.out_dim(); ++i) {
      for (std::size_t j = 0; j < l.in_dim(); ++j) {
        const double w = l.entries()[i * l.in_dim() + j];
        if (!std::isfinite(w)) continue;
        Network up = net, down = net;
        up.layer(k).set(i, j, w + h);
        down.layer(k).set(i, j, w - h);
        record(*bw.grads.layers[k](i, j), (loss_at(up, x) - loss_at(down, x)) / (2 * h));
      }
    }
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    Vector up = x, down = x;
    up[j] += h;
    down[j] -= h;
    record(bw.input_grad[j], (loss_at(net, up) - loss_at(net, down)) / (2 * h));
  }
  return out;
}

inline bool same_bits(double a, double b) { return Scalar(a) == Scalar(b); }

inline bool same_bits(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

inline double rel_err(double got, double want) {
  return std::fabs(got - want) / std::max(1.0, std::fabs(want));
}

}  // namespace mmpnn::tsupport
