#include "magbloch/error.hpp"

namespace magbloch {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::degenerate_lattice: return "degenerate-lattice";
    case ErrorKind::not_rational: return "not-rational";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_potential: return "invalid-potential";
    case ErrorKind::assembly: return "assembly-error";
    case ErrorKind::eigenvalue_on_contour: return "eigenvalue-on-contour";
    case ErrorKind::near_singular_resolvent: return "near-singular-resolvent";
    case ErrorKind::incomplete_spectrum: return "incomplete-spectrum";
    case ErrorKind::continuation_lost: return "continuation-lost";
    case ErrorKind::degenerate_level: return "degenerate-level";
    case ErrorKind::not_converged: return "not-converged";
    case ErrorKind::config: return "config-error";
    case ErrorKind::io: return "io-error";
  }
  return "unknown";
}

}  // namespace magbloch
