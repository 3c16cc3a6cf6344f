#pragma once

/**
 * @file network.hpp
 * @brief Layers, networks, forward evaluation and operation census.
 *
 * A network is a sequence of linear, min-plus and max-plus layers applied
 * strictly one after another. Tropical layers are not associative with
 * linear ones, so forward evaluation never fuses adjacent layers.
 *
 * Shape tags:
 *   General   (Linear, MinPlus, MaxPlus) repeated
 *   TypeI     (Linear, MaxPlus) repeated
 *   TypeII    Linear, then (MinPlus, MaxPlus) repeated
 *   TypeIII   TypeII followed by one Linear
 *   Custom    anything
 */

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mmpnn/error.hpp"
#include "mmpnn/matrix.hpp"

namespace mmpnn {

enum class LayerKind { linear, min_plus, max_plus };

constexpr std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::linear: return "linear";
    case LayerKind::min_plus: return "minplus";
    case LayerKind::max_plus: return "maxplus";
  }
  return "?";
}

class Layer {
 public:
  using Storage = std::variant<RealMatrix, MinPlusMatrix, MaxPlusMatrix>;

  Layer(RealMatrix m) : m_(std::move(m)) {}
  Layer(MinPlusMatrix m) : m_(std::move(m)) {}
  Layer(MaxPlusMatrix m) : m_(std::move(m)) {}

  LayerKind kind() const { return static_cast<LayerKind>(m_.index()); }
  bool is_tropical() const { return kind() != LayerKind::linear; }

  std::size_t in_dim() const {
    return std::visit([](const auto& m) { return m.cols(); }, m_);
  }
  std::size_t out_dim() const {
    return std::visit([](const auto& m) { return m.rows(); }, m_);
  }

  std::span<const double> entries() const {
    return std::visit([](const auto& m) { return m.entries(); }, m_);
  }

  // Replaces one entry, keeping the matrix invariants.
  void set(std::size_t i, std::size_t j, double v) {
    std::visit([&](auto& m) { m.set(i, j, v); }, m_);
  }

  const RealMatrix& linear() const { return std::get<RealMatrix>(m_); }
  const MinPlusMatrix& min_plus() const { return std::get<MinPlusMatrix>(m_); }
  const MaxPlusMatrix& max_plus() const { return std::get<MaxPlusMatrix>(m_); }
  const Storage& storage() const { return m_; }

  std::optional<std::size_t> first_invalid_row() const {
    switch (kind()) {
      case LayerKind::min_plus: return min_plus().first_invalid_row();
      case LayerKind::max_plus: return max_plus().first_invalid_row();
      case LayerKind::linear: break;
    }
    return std::nullopt;
  }

  friend bool operator==(const Layer&, const Layer&) = default;

 private:
  Storage m_;
};

enum class ShapeTag { General, TypeI, TypeII, TypeIII, Custom };

constexpr std::string_view to_string(ShapeTag t) {
  switch (t) {
    case ShapeTag::General: return "General";
    case ShapeTag::TypeI: return "TypeI";
    case ShapeTag::TypeII: return "TypeII";
    case ShapeTag::TypeIII: return "TypeIII";
    case ShapeTag::Custom: return "Custom";
  }
  return "?";
}

inline std::optional<ShapeTag> shape_tag_from_string(std::string_view s) {
  for (auto t : {ShapeTag::General, ShapeTag::TypeI, ShapeTag::TypeII, ShapeTag::TypeIII,
                 ShapeTag::Custom}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

// Layers chained by dimension. The constructor enforces the dimension chain;
// tag conformance and transform validity are reported by validate().
class Network {
 public:
  Network(std::vector<Layer> layers, ShapeTag tag = ShapeTag::Custom)
      : layers_(std::move(layers)), tag_(tag) {
    detail::require(!layers_.empty(), ErrorCode::ShapeMismatch, "network has no layers");
    for (std::size_t k = 1; k < layers_.size(); ++k) {
      detail::require(layers_[k].in_dim() == layers_[k - 1].out_dim(), ErrorCode::ShapeMismatch,
                      "layer " + std::to_string(k) + " expects " +
                          std::to_string(layers_[k].in_dim()) + " inputs but layer " +
                          std::to_string(k - 1) + " produces " +
                          std::to_string(layers_[k - 1].out_dim()));
    }
  }

  std::size_t input_dim() const { return layers_.front().in_dim(); }
  std::size_t output_dim() const { return layers_.back().out_dim(); }
  ShapeTag shape_tag() const { return tag_; }
  std::size_t size() const { return layers_.size(); }

  std::span<const Layer> layers() const { return layers_; }
  const Layer& layer(std::size_t k) const { return layers_[k]; }
  Layer& layer(std::size_t k) { return layers_[k]; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
  ShapeTag tag_;
};

// Whether the layer kinds follow the pattern the tag promises.
inline bool conforms(std::span<const Layer> layers, ShapeTag tag) {
  using K = LayerKind;
  const std::size_t n = layers.size();
  auto kind = [&](std::size_t k) { return layers[k].kind(); };
  switch (tag) {
    case ShapeTag::Custom: return true;
    case ShapeTag::General:
      if (n == 0 || n % 3 != 0) return false;
      for (std::size_t k = 0; k < n; ++k) {
        const K want = k % 3 == 0 ? K::linear : k % 3 == 1 ? K::min_plus : K::max_plus;
        if (kind(k) != want) return false;
      }
      return true;
    case ShapeTag::TypeI:
      if (n == 0 || n % 2 != 0) return false;
      for (std::size_t k = 0; k < n; ++k) {
        if (kind(k) != (k % 2 == 0 ? K::linear : K::max_plus)) return false;
      }
      return true;
    case ShapeTag::TypeII:
      if (n < 3 || n % 2 != 1 || kind(0) != K::linear) return false;
      for (std::size_t k = 1; k < n; ++k) {
        if (kind(k) != (k % 2 == 1 ? K::min_plus : K::max_plus)) return false;
      }
      return true;
    case ShapeTag::TypeIII:
      return n >= 4 && kind(n - 1) == K::linear && conforms(layers.first(n - 1), ShapeTag::TypeII);
  }
  return false;
}

struct Diagnostic {
  ErrorCode code;
  std::optional<std::size_t> layer;
  std::optional<std::size_t> row;
  std::string message;
};

// Reports problems without throwing. Empty result means the network is sound.
inline std::vector<Diagnostic> validate(const Network& net) {
  std::vector<Diagnostic> out;
  for (std::size_t k = 0; k < net.size(); ++k) {
    if (auto row = net.layer(k).first_invalid_row()) {
      out.push_back({ErrorCode::InvalidTransform, k, *row,
                     "layer " + std::to_string(k) + " (" +
                         std::string(to_string(net.layer(k).kind())) + ") row " +
                         std::to_string(*row) + " has no finite entry"});
    }
  }
  if (!conforms(net.layers(), net.shape_tag())) {
    std::string seq;
    for (const auto& l : net.layers()) {
      if (!seq.empty()) seq += ",";
      seq += to_string(l.kind());
    }
    out.push_back({ErrorCode::ShapeViolation, std::nullopt, std::nullopt,
                   "layer sequence [" + seq + "] does not match shape tag " +
                       std::string(to_string(net.shape_tag()))});
  }
  return out;
}

// What one layer saw and did during a recorded forward pass. `selection` is
// empty for linear layers; for tropical layers selection[i] is the input index
// whose term attained output i.
struct LayerRecord {
  Vector input;
  Vector output;
  std::vector<std::size_t> selection;
};

struct ForwardTrace {
  std::vector<LayerRecord> layers;
};

struct ForwardResult {
  Vector output;
  std::optional<ForwardTrace> trace;
};

namespace detail {

inline Vector apply_layer(const Layer& layer, std::span<const double> x,
                          std::vector<std::size_t>* selection, OpCounts* counts) {
  switch (layer.kind()) {
    case LayerKind::linear: return linear_apply(layer.linear(), x, counts);
    case LayerKind::min_plus: return tropical_apply(layer.min_plus(), x, selection, counts);
    case LayerKind::max_plus: return tropical_apply(layer.max_plus(), x, selection, counts);
  }
  return {};
}

}  // namespace detail

inline ForwardResult forward(const Network& net, std::span<const double> x, bool record = false,
                             OpCounts* counts = nullptr) {
  detail::require(x.size() == net.input_dim(), ErrorCode::ShapeMismatch,
                  "network expects " + std::to_string(net.input_dim()) + " inputs, got " +
                      std::to_string(x.size()));
  detail::require_finite_input(x);
  ForwardResult result;
  if (record) result.trace.emplace();
  Vector cur(x.begin(), x.end());
  for (const auto& layer : net.layers()) {
    if (record) {
      LayerRecord rec;
      rec.input = cur;
      cur = detail::apply_layer(layer, cur, layer.is_tropical() ? &rec.selection : nullptr, counts);
      rec.output = cur;
      result.trace->layers.push_back(std::move(rec));
    } else {
      cur = detail::apply_layer(layer, cur, nullptr, counts);
    }
  }
  result.output = std::move(cur);
  return result;
}

inline Vector evaluate(const Network& net, std::span<const double> x) {
  return forward(net, x).output;
}

// Exact operation counts for one forward pass, per layer.
struct Census {
  OpCounts total;
  std::vector<OpCounts> per_layer;
};

inline Census op_census(const Network& net, std::span<const double> x) {
  detail::require(x.size() == net.input_dim(), ErrorCode::ShapeMismatch,
                  "network expects " + std::to_string(net.input_dim()) + " inputs, got " +
                      std::to_string(x.size()));
  detail::require_finite_input(x);
  Census c;
  Vector cur(x.begin(), x.end());
  for (const auto& layer : net.layers()) {
    OpCounts local;
    cur = detail::apply_layer(layer, cur, nullptr, &local);
    c.per_layer.push_back(local);
    c.total += local;
  }
  return c;
}

}  // namespace mmpnn
