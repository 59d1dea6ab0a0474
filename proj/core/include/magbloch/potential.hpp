#pragma once

#include <cstdint>
#include <vector>

#include "magbloch/lattice_flux.hpp"

namespace magbloch {

/// One Fourier component c·exp(iK·x), K = m1·b1 + m2·b2 with (b1, b2) dual to Γ.
struct FourierMode {
  int m1 = 0;
  int m2 = 0;
  cplx c{};

  friend bool operator==(const FourierMode&, const FourierMode&) = default;
};

/// Real Γ-periodic potential as a finite Fourier series.
///
/// Modes with equal wave index are merged and the list is kept sorted by
/// (m1, m2). Construction never throws; a list that is not conjugate
/// symmetric is recorded and rejected when the potential is evaluated.
class PotentialSpec {
 public:
  explicit PotentialSpec(Lattice lattice, std::vector<FourierMode> modes = {});

  static PotentialSpec constant(const Lattice& lattice, double value);
  /// amplitude·cos(m1·b1·x + m2·b2·x), i.e. the pair (±m1, ±m2) with c = amplitude/2.
  static PotentialSpec cosine(const Lattice& lattice, int m1, int m2, double amplitude);

  const Lattice& lattice() const noexcept { return lattice_; }
  const std::vector<FourierMode>& modes() const noexcept { return modes_; }
  bool conjugate_symmetric() const noexcept { return symmetric_; }

  /// Σ|c|, an upper bound for the uniform norm.
  double coefficient_l1() const noexcept;

  /// Coefficient of the constant mode.
  double mean() const noexcept;

  Vec2 wave_vector(int m1, int m2) const noexcept {
    return static_cast<double>(m1) * b1_ + static_cast<double>(m2) * b2_;
  }

  /// this + t·other on the same lattice.
  PotentialSpec plus(const PotentialSpec& other, double t = 1.0) const;

  /// Stable FNV-1a digest of the mode list, for provenance records.
  std::uint64_t hash() const noexcept;

 private:
  Lattice lattice_;
  Vec2 b1_;
  Vec2 b2_;
  std::vector<FourierMode> modes_;
  bool symmetric_ = true;
};

/// V(x). Throws ErrorKind::invalid_potential when V is not conjugate symmetric.
double evaluate(const PotentialSpec& V, const Vec2& x);

/// Seeded trigonometric polynomial with |m1|, |m2| ≤ max_harmonic, scaled so
/// that Σ|c| = amplitude. Bit-identical across platforms for a given seed.
PotentialSpec random_potential(const Lattice& lattice, std::uint64_t seed, int max_harmonic,
                               double amplitude);

/// max |V| over an n_grid × n_grid sampling of the Γ cell.
double sup_norm(const PotentialSpec& V, int n_grid);

}  // namespace magbloch
