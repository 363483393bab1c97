#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delvar {

enum class ErrorCode {
  OutOfDomain,
  OrderTooHigh,
  InvalidTrajectory,
  InvalidProblem,
  BlockOutOfRange,
  StencilCrossesBreakpoint,
  NotDifferentiable,
  DegenerateGrid,
  EmptyGrid,
  NoConstraints,
  JOutOfRange,
  IOutOfRange,
  TransformEscapesDomain,
  WrongOrder,
  SyntaxError,
  UnknownVariable,
  DerivativeOrderTooHigh,
  EvaluationDomain,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::BlockOutOfRange: return "BlockOutOfRange";
    case ErrorCode::StencilCrossesBreakpoint: return "StencilCrossesBreakpoint";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoConstraints: return "NoConstraints";
    case ErrorCode::JOutOfRange: return "JOutOfRange";
    case ErrorCode::IOutOfRange: return "IOutOfRange";
    case ErrorCode::TransformEscapesDomain: return "TransformEscapesDomain";
    case ErrorCode::WrongOrder: return "WrongOrder";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::DerivativeOrderTooHigh: return "DerivativeOrderTooHigh";
    case ErrorCode::EvaluationDomain: return "EvaluationDomain";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace delvar
