#include "magbloch/potential.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>

#include "magbloch/error.hpp"

namespace magbloch {

namespace {

// Uniform double in [-1, 1) from the raw 64-bit engine output. The standard
// distributions are implementation-defined, so they are avoided here.
double symmetric_unit(std::mt19937_64& engine) {
  const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

PotentialSpec::PotentialSpec(Lattice lattice, std::vector<FourierMode> modes)
    : lattice_(std::move(lattice)) {
  std::tie(b1_, b2_) = lattice_.dual();

  std::map<std::pair<int, int>, cplx> merged;
  for (const auto& mode : modes) merged[{mode.m1, mode.m2}] += mode.c;
  modes_.reserve(merged.size());
  double l1 = 0.0;
  for (const auto& [key, c] : merged) {
    if (c == cplx{}) continue;
    modes_.push_back({key.first, key.second, c});
    l1 += std::abs(c);
  }

  const double tol = 1e-12 * std::max(l1, 1e-300);
  for (const auto& mode : modes_) {
    const auto it = merged.find({-mode.m1, -mode.m2});
    const cplx partner = it == merged.end() ? cplx{} : it->second;
    if (std::abs(partner - std::conj(mode.c)) > tol) {
      symmetric_ = false;
      break;
    }
  }
}

PotentialSpec PotentialSpec::constant(const Lattice& lattice, double value) {
  return PotentialSpec(lattice, {{0, 0, cplx(value, 0.0)}});
}

PotentialSpec PotentialSpec::cosine(const Lattice& lattice, int m1, int m2, double amplitude) {
  return PotentialSpec(lattice, {{m1, m2, cplx(0.5 * amplitude, 0.0)},
                                 {-m1, -m2, cplx(0.5 * amplitude, 0.0)}});
}

double PotentialSpec::coefficient_l1() const noexcept {
  double total = 0.0;
  for (const auto& mode : modes_) total += std::abs(mode.c);
  return total;
}

double PotentialSpec::mean() const noexcept {
  for (const auto& mode : modes_) {
    if (mode.m1 == 0 && mode.m2 == 0) return mode.c.real();
  }
  return 0.0;
}

PotentialSpec PotentialSpec::plus(const PotentialSpec& other, double t) const {
  std::vector<FourierMode> modes = modes_;
  for (const auto& mode : other.modes()) modes.push_back({mode.m1, mode.m2, t * mode.c});
  return PotentialSpec(lattice_, std::move(modes));
}

std::uint64_t PotentialSpec::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (word >> (8 * byte)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& mode : modes_) {
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(mode.m1)));
    mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(mode.m2)));
    mix(std::bit_cast<std::uint64_t>(mode.c.real()));
    mix(std::bit_cast<std::uint64_t>(mode.c.imag()));
  }
  return h;
}

double evaluate(const PotentialSpec& V, const Vec2& x) {
  if (!V.conjugate_symmetric()) {
    throw Error(ErrorKind::invalid_potential, "potential modes are not conjugate symmetric");
  }
  cplx sum{};
  for (const auto& mode : V.modes()) {
    sum += mode.c * std::polar(1.0, V.wave_vector(mode.m1, mode.m2).dot(x));
  }
  return sum.real();
}

PotentialSpec random_potential(const Lattice& lattice, std::uint64_t seed, int max_harmonic,
                               double amplitude) {
  if (amplitude < 0.0 || max_harmonic < 0) {
    throw Error(ErrorKind::invalid_argument, "random_potential requires amplitude >= 0 and max_harmonic >= 0");
  }
  if (amplitude == 0.0) return PotentialSpec(lattice);

  std::mt19937_64 engine(seed);
  std::vector<FourierMode> modes;
  modes.push_back({0, 0, cplx(symmetric_unit(engine), 0.0)});
  double l1 = std::abs(modes.front().c);
  for (int m1 = 0; m1 <= max_harmonic; ++m1) {
    for (int m2 = -max_harmonic; m2 <= max_harmonic; ++m2) {
      if (m1 == 0 && m2 <= 0) continue;  // half plane; partners added below
      const double re = symmetric_unit(engine);
      const double im = symmetric_unit(engine);
      const cplx c(re, im);
      modes.push_back({m1, m2, c});
      modes.push_back({-m1, -m2, std::conj(c)});
      l1 += 2.0 * std::abs(c);
    }
  }
  // Scaling to Σ|c| = amplitude bounds the sup norm by the amplitude.
  // The (1 - 1e-15) factor keeps the rounded sum at or below the amplitude.
  const double scale = l1 > 0.0 ? (1.0 - 1e-15) * amplitude / l1 : 0.0;
  for (auto& mode : modes) mode.c *= scale;
  return PotentialSpec(lattice, std::move(modes));
}

double sup_norm(const PotentialSpec& V, int n_grid) {
  if (n_grid < 2) throw Error(ErrorKind::invalid_argument, "sup_norm requires n_grid >= 2");
  double best = 0.0;
  const double inv = 1.0 / n_grid;
  for (int i = 0; i < n_grid; ++i) {
    for (int j = 0; j < n_grid; ++j) {
      best = std::max(best, std::abs(evaluate(V, V.lattice().point(i * inv, j * inv))));
    }
  }
  return best;
}

}  // namespace magbloch
