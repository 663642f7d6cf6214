#include "xhammer/error.hpp"

namespace xhammer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::GeometryInconsistent: return "GeometryInconsistent";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::VoltageOutOfRange: return "VoltageOutOfRange";
    case ErrorCode::TemperatureOutOfRange: return "TemperatureOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ConvergenceError::ConvergenceError(const std::string& message, double residual,
                                   std::size_t iterations)
    : Error(ErrorCode::NoConvergence,
            message + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)"),
      residual_(residual),
      iterations_(iterations) {}

namespace {
std::string join_violations(const std::vector<std::string>& v) {
  std::string out = std::to_string(v.size()) + " violation(s)";
  for (const auto& s : v) out += "\n  - " + s;
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::ValidationError, join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace xhammer
