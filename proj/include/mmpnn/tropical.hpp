#pragma once

/**
 * @file tropical.hpp
 * @brief Extended-real scalars and the tropical operations on them.
 *
 *   lower addition   a (+) b = min(a, b)     identity +inf
 *   upper addition   a [+] b = max(a, b)     identity -inf
 *   multiplication   a (.) b = a + b         identity 0
 *   division         a (/) b = a - b         b finite
 *
 * Min-plus and max-plus algebra are isomorphic under negation, which maps
 * +inf <-> -inf and fixes every finite value.
 */

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>

#include "mmpnn/error.hpp"

namespace mmpnn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Value in R u {+inf, -inf}. NaN is unrepresentable.
class Scalar {
 public:
  constexpr Scalar() = default;

  // Throws InvalidValue for NaN.
  explicit Scalar(double v) : v_(v) {
    if (std::isnan(v)) fail(ErrorCode::InvalidValue, "NaN is not an extended real");
  }

  static constexpr Scalar pos_inf() { return Scalar(kInf, Unchecked{}); }
  static constexpr Scalar neg_inf() { return Scalar(-kInf, Unchecked{}); }

  constexpr double value() const { return v_; }
  constexpr bool is_finite() const { return v_ != kInf && v_ != -kInf; }
  constexpr bool is_pos_inf() const { return v_ == kInf; }
  constexpr bool is_neg_inf() const { return v_ == -kInf; }

  // Both zeros map to +0.0, matching x + (-x) == +0.0, so negation carries
  // min-plus results onto max-plus results bit for bit.
  constexpr Scalar operator-() const { return Scalar(v_ == 0.0 ? 0.0 : -v_, Unchecked{}); }

  // Exact comparison; -0.0 and 0.0 are distinguished.
  friend bool operator==(Scalar a, Scalar b) {
    return a.v_ == b.v_ && std::signbit(a.v_) == std::signbit(b.v_);
  }

  // Total order -inf < finite < +inf, with -0.0 ordered before 0.0 so that
  // min and max are commutative bit for bit.
  friend bool operator<(Scalar a, Scalar b) {
    if (a.v_ == b.v_) return std::signbit(a.v_) && !std::signbit(b.v_);
    return a.v_ < b.v_;
  }

 private:
  struct Unchecked {};
  constexpr Scalar(double v, Unchecked) : v_(v) {}

  double v_ = 0.0;
};

// How (+inf) (.) (-inf) is resolved. The default rejects it.
enum class OppositeInfinities {
  reject,
  absorb_min_plus,  // resolves to +inf, the identity of min
  absorb_max_plus,  // resolves to -inf, the identity of max
};

inline Scalar add_lower(Scalar a, Scalar b) { return b < a ? b : a; }

inline Scalar add_upper(Scalar a, Scalar b) { return a < b ? b : a; }

inline Scalar mul(Scalar a, Scalar b,
                  OppositeInfinities mode = OppositeInfinities::reject) {
  const bool opposite = (a.is_pos_inf() && b.is_neg_inf()) ||
                        (a.is_neg_inf() && b.is_pos_inf());
  if (opposite) {
    switch (mode) {
      case OppositeInfinities::absorb_min_plus: return Scalar::pos_inf();
      case OppositeInfinities::absorb_max_plus: return Scalar::neg_inf();
      case OppositeInfinities::reject: break;
    }
    fail(ErrorCode::IndeterminateForm, "(+inf) + (-inf) is indeterminate");
  }
  return Scalar(a.value() + b.value());
}

inline Scalar div(Scalar a, Scalar b) {
  if (!b.is_finite()) {
    fail(ErrorCode::IndeterminateForm, "tropical division by an infinite value");
  }
  return Scalar(a.value() - b.value());
}

// Text form: shortest round-trip decimal, or the tokens "inf" and "-inf".
inline std::string format_scalar(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_scalar(Scalar s) { return format_scalar(s.value()); }

inline Scalar parse_scalar(std::string_view text) {
  if (text == "inf") return Scalar::pos_inf();
  if (text == "-inf") return Scalar::neg_inf();
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // from_chars rejects a leading '+'; accept it for hand-written files.
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v, std::chars_format::general);
  if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(v)) {
    fail(ErrorCode::ParseError, "not a scalar token: '" + std::string(text) + "'");
  }
  return Scalar(v);
}

}  // namespace mmpnn
