#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magbloch/bands.hpp"
#include "magbloch/error.hpp"
#include "magbloch/potential.hpp"

namespace magbloch::io {

/// Seeded trigonometric polynomial, see random_potential.
struct RandomPotentialConfig {
  std::uint64_t seed = 0;
  int max_harmonic = 2;
  double amplitude = 0.0;
};

/// Explicit modes plus an optional random component (summed).
struct PotentialConfig {
  std::vector<FourierMode> modes;
  std::optional<RandomPotentialConfig> random;

  PotentialSpec build(const Lattice& lattice) const;
};

struct FlatnessOptions {
  std::optional<double> threshold;  // absent: self-calibrated
};

struct PerturbOptions {
  std::vector<double> t_values{-1e-3, 0.0, 1e-3};
  PotentialConfig perturbation;  // default: random, amplitude 1, seed = run seed + 1
  ThetaCoords theta{0.0, 0.0};
  std::vector<std::uint64_t> seeds;  // genericity experiment; empty skips it
  double amplitude = 0.5;
  int max_harmonic = 2;
  int checked_bands = 0;  // 0 → 2p + 1
};

struct ButterflyOptions {
  std::vector<std::pair<long, long>> fractions{{1, 1}};
  int sites_per_cell = 16;
  ThetaCoords theta{0.0, 0.0};
};

struct NodalOptions {
  ThetaCoords theta{0.3, 0.7};
  int band = 0;
  double zero_tol = 1e-3;
};

struct AlgebraOptions {
  int samples = 1000;
};

/// Fully validated run configuration with every default filled in.
struct RunConfig {
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};
  long p = 1;
  long q = 1;
  std::uint64_t seed = 0;
  PotentialConfig potential;
  int N1 = 32;
  int N2 = 32;
  int M1 = 8;
  int M2 = 8;
  int bands = 4;  // default 4p
  FlatnessOptions flatness;
  PerturbOptions perturb;
  ButterflyOptions butterfly;
  NodalOptions nodal;
  AlgebraOptions algebra;
  std::vector<std::string> warnings;

  Lattice lattice() const { return {e1, e2}; }
  FluxRational flux() const { return make_flux(p, q, lattice()); }
  PotentialSpec potential_spec() const { return potential.build(lattice()); }
  Grid grid() const { return build_grid(flux(), N1, N2); }
  ThetaGrid theta_grid() const { return {M1, M2}; }

  /// Normalized configuration as JSON text with sorted keys; stable across runs.
  std::string canonical_json() const;
  /// FNV-1a of canonical_json(), 16 hex digits.
  std::string hash() const;
};

/// Raised for configuration problems; lists every offending field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Parses the JSON configuration (comments allowed). Unknown keys, missing
/// required keys, and invariant violations are collected and reported together.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(std::string_view bytes) noexcept;

}  // namespace magbloch::io
