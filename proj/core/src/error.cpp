#include "latgauge/error.hpp"

#include <utility>

namespace latgauge {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid_parameter";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kDegenerateLattice: return "degenerate_lattice";
    case ErrorKind::kResource: return "resource";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kDegeneracy: return "degeneracy";
    case ErrorKind::kUnsupportedStructure: return "unsupported_structure";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

ConvergenceError::ConvergenceError(const std::string& message,
                                   std::vector<double> best_residuals)
    : Error(ErrorKind::kConvergence, message),
      best_residuals_(std::move(best_residuals)) {}

}  // namespace latgauge
