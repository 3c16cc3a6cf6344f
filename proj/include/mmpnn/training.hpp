#pragma once

/**
 * @file training.hpp
 * @brief Backpropagation through linear, min-plus and max-plus layers, and a
 *        plain minibatch SGD loop.
 *
 * Gradient rules for one sample, with dy the loss gradient at a layer output:
 *
 *   linear    y_i = sum_j w_ij x_j       dw_ij = x_j dy_i     dx_j = sum_i w_ij dy_i
 *   min-plus  y_i = min_j (w_ij + x_j)   dw_{i,s(i)} = dy_i   dx_{s(i)} += dy_i
 *   max-plus  y_i = max_j (w_ij + x_j)   same, with s(i) the maximizing index
 *
 * s(i) comes from the forward trace (lowest index at ties). All other tropical
 * entries get zero gradient. Infinite entries have no gradient slot and are
 * never updated.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"
#include "mmpnn/network.hpp"
#include "mmpnn/normalization.hpp"

namespace mmpnn {

struct LayerGradient {
  std::size_t rows = 0;
  std::size_t cols = 0;
  // Row-major; nullopt where the parameter is +-inf.
  std::vector<std::optional<double>> values;

  std::optional<double> operator()(std::size_t i, std::size_t j) const {
    return values[i * cols + j];
  }
};

struct Gradients {
  std::vector<LayerGradient> layers;
};

// Zero gradients shaped like the network.
inline Gradients zero_gradients(const Network& net) {
  Gradients g;
  for (const auto& layer : net.layers()) {
    LayerGradient lg{layer.out_dim(), layer.in_dim(), {}};
    lg.values.reserve(lg.rows * lg.cols);
    for (double w : layer.entries()) {
      lg.values.push_back(std::isfinite(w) ? std::optional<double>(0.0) : std::nullopt);
    }
    g.layers.push_back(std::move(lg));
  }
  return g;
}

enum class Loss { MSE, MAE };

struct LossValue {
  double value = 0.0;
  Vector grad;  // dL/dy
};

inline LossValue loss_and_grad(std::span<const double> y, std::span<const double> t, Loss loss) {
  detail::require(y.size() == t.size(), ErrorCode::ShapeMismatch,
                  "loss: output has " + std::to_string(y.size()) + " values, target has " +
                      std::to_string(t.size()));
  const double p = static_cast<double>(y.size());
  LossValue out{0.0, Vector(y.size(), 0.0)};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - t[i];
    if (loss == Loss::MSE) {
      out.value += r * r;
      out.grad[i] = 2.0 * r / p;
    } else {
      out.value += std::fabs(r);
      out.grad[i] = (r > 0.0 ? 1.0 : r < 0.0 ? -1.0 : 0.0) / p;
    }
  }
  out.value /= p;
  return out;
}

struct BackwardResult {
  Gradients grads;
  Vector input_grad;  // dL/dx
};

namespace detail {

inline void check_trace(const Network& net, const ForwardTrace& trace) {
  require(trace.layers.size() == net.size(), ErrorCode::TraceMismatch,
          "trace has " + std::to_string(trace.layers.size()) + " layers, network has " +
              std::to_string(net.size()));
  for (std::size_t k = 0; k < net.size(); ++k) {
    const auto& rec = trace.layers[k];
    const auto& layer = net.layer(k);
    const bool ok = rec.input.size() == layer.in_dim() && rec.output.size() == layer.out_dim() &&
                    (layer.is_tropical() ? rec.selection.size() == layer.out_dim()
                                         : rec.selection.empty());
    require(ok, ErrorCode::TraceMismatch, "trace record " + std::to_string(k) +
                                              " does not match the layer shape");
    for (std::size_t s : rec.selection) {
      require(s < layer.in_dim(), ErrorCode::TraceMismatch, "selection index out of range");
    }
  }
}

}  // namespace detail

inline BackwardResult backward(const Network& net, const ForwardTrace& trace,
                               std::span<const double> dldy) {
  detail::check_trace(net, trace);
  detail::require(dldy.size() == net.output_dim(), ErrorCode::ShapeMismatch,
                  "output gradient has wrong length");
  BackwardResult res{zero_gradients(net), Vector(dldy.begin(), dldy.end())};
  for (std::size_t k = net.size(); k-- > 0;) {
    const Layer& layer = net.layer(k);
    const LayerRecord& rec = trace.layers[k];
    LayerGradient& g = res.grads.layers[k];
    const Vector& dy = res.input_grad;
    Vector dx(layer.in_dim(), 0.0);
    if (layer.kind() == LayerKind::linear) {
      const RealMatrix& w = layer.linear();
      for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) {
          g.values[i * g.cols + j] = rec.input[j] * dy[i];
          dx[j] += w(i, j) * dy[i];
        }
      }
    } else {
      for (std::size_t i = 0; i < layer.out_dim(); ++i) {
        const std::size_t s = rec.selection[i];
        *g.values[i * g.cols + s] += dy[i];
        dx[s] += dy[i];
      }
    }
    res.input_grad = std::move(dx);
  }
  return res;
}

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  std::size_t output_dim() const { return targets.empty() ? 0 : targets.front().size(); }
};

inline double dataset_loss(const Network& net, const Dataset& data, Loss loss) {
  double total = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    total += loss_and_grad(evaluate(net, data.inputs[s]), data.targets[s], loss).value;
  }
  return data.size() == 0 ? 0.0 : total / static_cast<double>(data.size());
}

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 1;
  std::size_t batch_size = 1;
  Loss loss = Loss::MSE;
  std::size_t normalize_every = 0;  // 0 disables
  std::uint64_t seed = 0;
  std::vector<bool> trainable;  // per layer; empty means every layer
};

// One mid-training normalization pass and its effect on the training set.
struct NormalizationEvent {
  std::size_t epoch = 0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  bool outputs_unchanged = false;
};

struct TrainResult {
  Network net;
  std::vector<double> history;  // training-set loss after each epoch
  std::vector<NormalizationEvent> normalizations;
};

// Name of the generator used for shuffling and initialization.
inline constexpr const char* kGeneratorName = "mt19937_64";

namespace detail {

// Uniform [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

inline void check_data(const Network& net, const Dataset& data) {
  require(data.inputs.size() == data.targets.size(), ErrorCode::ShapeMismatch,
          "dataset inputs and targets differ in count");
  for (std::size_t s = 0; s < data.size(); ++s) {
    require(data.inputs[s].size() == net.input_dim() &&
                data.targets[s].size() == net.output_dim(),
            ErrorCode::ShapeMismatch,
            "dataset row " + std::to_string(s) + " does not match the network dimensions");
  }
}

inline bool same_outputs(const Network& a, const Network& b, const std::vector<Vector>& xs) {
  for (const auto& x : xs) {
    const Vector ya = evaluate(a, x);
    const Vector yb = evaluate(b, x);
    for (std::size_t i = 0; i < ya.size(); ++i) {
      if (Scalar(ya[i]) != Scalar(yb[i])) return false;
    }
  }
  return true;
}

}  // namespace detail

inline TrainResult train(const Network& net, const Dataset& data, const TrainConfig& cfg) {
  detail::require(cfg.learning_rate > 0.0 && std::isfinite(cfg.learning_rate),
                  ErrorCode::InvalidConfig, "learning rate must be positive");
  detail::require(cfg.batch_size >= 1, ErrorCode::InvalidConfig, "batch size must be at least 1");
  detail::require(cfg.trainable.empty() || cfg.trainable.size() == net.size(),
                  ErrorCode::InvalidConfig, "trainable mask must have one flag per layer");
  detail::check_data(net, data);

  TrainResult out{net, {}, {}};
  if (cfg.epochs == 0 || data.size() == 0) return out;

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Network& cur = out.net;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    detail::shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Gradients sum = zero_gradients(cur);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t s = order[b];
        auto fw = forward(cur, data.inputs[s], /*record=*/true);
        auto lv = loss_and_grad(fw.output, data.targets[s], cfg.loss);
        auto bw = backward(cur, *fw.trace, lv.grad);
        for (std::size_t k = 0; k < sum.layers.size(); ++k) {
          auto& dst = sum.layers[k].values;
          const auto& src = bw.grads.layers[k].values;
          for (std::size_t e = 0; e < dst.size(); ++e) {
            if (dst[e]) *dst[e] += *src[e];
          }
        }
      }
      const double scale = cfg.learning_rate / static_cast<double>(stop - start);
      for (std::size_t k = 0; k < cur.size(); ++k) {
        if (!cfg.trainable.empty() && !cfg.trainable[k]) continue;
        Layer& layer = cur.layer(k);
        const LayerGradient& g = sum.layers[k];
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < g.cols; ++j) {
            if (auto d = g(i, j); d && *d != 0.0) {
              layer.set(i, j, layer.entries()[i * g.cols + j] - scale * *d);
            }
          }
        }
      }
    }
    if (cfg.normalize_every != 0 && epoch % cfg.normalize_every == 0) {
      NormalizationEvent ev;
      ev.epoch = epoch;
      ev.loss_before = dataset_loss(cur, data, cfg.loss);
      Network normalized = normalize_network(cur, data.inputs);
      ev.outputs_unchanged = detail::same_outputs(cur, normalized, data.inputs);
      cur = std::move(normalized);
      ev.loss_after = dataset_loss(cur, data, cfg.loss);
      out.normalizations.push_back(ev);
    }
    out.history.push_back(dataset_loss(cur, data, cfg.loss));
  }
  return out;
}

/// Re-draws the parameters of `net` for training on `inputs`.
///
/// Linear weights are uniform in [-1, 1] unless `keep_linear` is set. For each
/// tropical row a random sample x_r is drawn and every finite coefficient is
/// set to -f_j(x_r), so all terms of the row tie at x_r; the layer is then
/// restricted-normalized on `inputs` before the next layer is visited.
/// Infinite entries keep their structural role.
inline Network initialize(const Network& net, const std::vector<Vector>& inputs,
                          std::uint64_t seed, bool keep_linear = false) {
  detail::require(!inputs.empty(), ErrorCode::EmptyPlan, "initialization needs training inputs");
  std::mt19937_64 rng(seed);
  Network out = net;
  std::vector<Vector> cur = inputs;
  for (std::size_t k = 0; k < out.size(); ++k) {
    Layer& layer = out.layer(k);
    const std::size_t rows = layer.out_dim();
    const std::size_t cols = layer.in_dim();
    if (layer.kind() == LayerKind::linear) {
      if (!keep_linear) {
        for (std::size_t i = 0; i < rows; ++i) {
          for (std::size_t j = 0; j < cols; ++j) layer.set(i, j, 2.0 * detail::uniform01(rng) - 1.0);
        }
      }
    } else {
      for (std::size_t i = 0; i < rows; ++i) {
        const Vector& anchor = cur[detail::uniform_index(rng, cur.size())];
        for (std::size_t j = 0; j < cols; ++j) {
          if (std::isfinite(layer.entries()[i * cols + j])) layer.set(i, j, -anchor[j]);
        }
      }
      if (layer.kind() == LayerKind::min_plus) {
        layer = Layer(normalize_restricted(layer.min_plus(), cur));
      } else {
        layer = Layer(normalize_restricted(layer.max_plus(), cur));
      }
    }
    for (auto& x : cur) x = detail::apply_layer(layer, x, nullptr, nullptr);
  }
  return out;
}

}  // namespace mmpnn
