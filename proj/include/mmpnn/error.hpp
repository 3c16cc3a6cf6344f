#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmpnn {

enum class ErrorCode {
  IndeterminateForm,
  ShapeMismatch,
  InvalidTransform,
  InvalidValue,
  TraceMismatch,
  EmptyPlan,
  MissingGridValue,
  InvalidConfig,
  ShapeViolation,
  Blowup,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndeterminateForm: return "IndeterminateForm";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::TraceMismatch: return "TraceMismatch";
    case ErrorCode::EmptyPlan: return "EmptyPlan";
    case ErrorCode::MissingGridValue: return "MissingGridValue";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ShapeViolation: return "ShapeViolation";
    case ErrorCode::Blowup: return "Blowup";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure the library reports carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace mmpnn
