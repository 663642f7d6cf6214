#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xhammer {

enum class ErrorCode {
  InvalidArgument,
  GridTooLarge,
  GeometryInconsistent,
  NoConvergence,
  SingularSystem,
  DegenerateFit,
  VoltageOutOfRange,
  TemperatureOutOfRange,
  IndexOutOfRange,
  SingularMatrix,
  ShapeMismatch,
  ConfigInvalid,
  ParseError,
  ValidationError,
  FitDiverged,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Iterative procedure hit its cap; carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual, std::size_t iterations);

  double residual() const noexcept { return residual_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

// Lists every violated invariant, each prefixed with its field path.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace xhammer
