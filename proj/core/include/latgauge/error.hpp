#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace latgauge {

enum class ErrorKind {
  kInvalidParameter,
  kValidation,
  kIndex,
  kDegenerateLattice,
  kResource,
  kConvergence,
  kDegeneracy,
  kUnsupportedStructure,
  kParse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base error for the library. The kind drives the CLI exit-code mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when an iterative solver exhausts its restart budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> best_residuals);

  [[nodiscard]] const std::vector<double>& best_residuals() const noexcept {
    return best_residuals_;
  }

 private:
  std::vector<double> best_residuals_;
};

}  // namespace latgauge
