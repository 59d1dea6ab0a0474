#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace magbloch {

enum class ErrorKind {
  degenerate_lattice,
  not_rational,
  invalid_argument,
  invalid_potential,
  assembly,
  eigenvalue_on_contour,
  near_singular_resolvent,
  incomplete_spectrum,
  continuation_lost,
  degenerate_level,
  not_converged,
  config,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace magbloch
