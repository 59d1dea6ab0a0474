#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magbloch/lattice_flux.hpp"

namespace magbloch {

struct IdentityCheck {
  std::string name;
  int samples = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const noexcept { return max_error <= tolerance; }
};

/// Randomized checks of the magnetic translation algebra at the given flux:
/// commutation phases, the Θ_q cocycle, the W group law, the Abelian pair
/// {(U₁)^q, U₂}, and dual-basis duality. Deterministic in `seed`.
std::vector<IdentityCheck> check_translation_algebra(const FluxRational& flux, std::uint64_t seed,
                                                     int samples, double tolerance = 1e-12);

}  // namespace magbloch
