#include "magbloch/algebra_check.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace magbloch {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  long integer(long lo, long hi) {
    return lo + static_cast<long>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  Vec2 vec(double half_width) { return {uniform(-half_width, half_width), uniform(-half_width, half_width)}; }
  GammaPrimeVector lattice_vector(long bound) { return {integer(-bound, bound), integer(-bound, bound)}; }

 private:
  std::mt19937_64 engine_;
};

// Bounded, non-decaying test function so translated values stay O(1).
cplx probe(const Vec2& x) {
  return std::polar(1.0, 0.7 * x.x() - 1.3 * x.y()) + 0.5 * std::cos(x.x() * x.y());
}

}  // namespace

std::vector<IdentityCheck> check_translation_algebra(const FluxRational& flux, std::uint64_t seed,
                                                     int samples, double tolerance) {
  Sampler rng(seed);
  const double B = flux.B;
  const Vec2& e1 = flux.lattice.e1();
  const Vec2& e2 = flux.lattice.e2();
  const double q = static_cast<double>(flux.q);
  const PlaneFunction f = probe;

  auto check = [&](std::string name, auto&& error_of_sample) {
    IdentityCheck result{std::move(name), samples, 0.0, tolerance};
    for (int i = 0; i < samples; ++i) result.max_error = std::max(result.max_error, error_of_sample());
    return result;
  };

  std::vector<IdentityCheck> out;
  out.push_back(check("commutation antisymmetry", [&] {
    const Vec2 a = rng.vec(3.0), b = rng.vec(3.0);
    return std::abs(commutation_phase(a, b, B) * commutation_phase(b, a, B) - 1.0);
  }));
  out.push_back(check("commutation unit modulus", [&] {
    return std::abs(std::abs(commutation_phase(rng.vec(3.0), rng.vec(3.0), B)) - 1.0);
  }));
  out.push_back(check("commutation phase of (e1, e2) is exp(2 pi i p/q)", [&] {
    const cplx expected = std::polar(1.0, 2.0 * std::numbers::pi * flux.p / q);
    return std::abs(commutation_phase(e1, e2, B) - expected);
  }));
  out.push_back(check("abelian pair (q e1, e2)", [&] {
    return std::abs(commutation_phase(q * e1, e2, B) - 1.0);
  }));
  out.push_back(check("theta phase equals exp(i pi p g1 g2)", [&] {
    const GammaPrimeVector g = rng.lattice_vector(7);
    const cplx expected = std::polar(1.0, std::numbers::pi * flux.p * g.g1 * g.g2);
    return std::abs(static_cast<double>(theta_phase(g, flux.p)) - expected);
  }));
  out.push_back(check("theta cocycle", [&] {
    const GammaPrimeVector g = rng.lattice_vector(7), h = rng.lattice_vector(7);
    const Vec2 vg = q * g.g1 * e1 + static_cast<double>(g.g2) * e2;
    const Vec2 vh = q * h.g1 * e1 + static_cast<double>(h.g2) * e2;
    const cplx lhs = static_cast<double>(theta_phase(g, flux.p) * theta_phase(h, flux.p)) *
                     std::polar(1.0, 0.5 * B * wedge(vg, vh));
    return std::abs(lhs - static_cast<double>(theta_phase(g + h, flux.p)));
  }));
  out.push_back(check("U commutation relation", [&] {
    const Vec2 a = rng.vec(2.0), b = rng.vec(2.0), x = rng.vec(2.0);
    const cplx lhs = magnetic_translate(magnetic_translate(f, b, B), a, B)(x);
    const cplx rhs = commutation_phase(a, b, B) * magnetic_translate(magnetic_translate(f, a, B), b, B)(x);
    return std::abs(lhs - rhs);
  }));
  out.push_back(check("W group law", [&] {
    const GammaPrimeVector g = rng.lattice_vector(3), h = rng.lattice_vector(3);
    const Vec2 x = rng.vec(2.0);
    const cplx lhs = weyl_translate(weyl_translate(f, h, flux), g, flux)(x);
    return std::abs(lhs - weyl_translate(f, g + h, flux)(x));
  }));
  out.push_back(check("(U1)^q and U2 commute", [&] {
    const Vec2 x = rng.vec(2.0);
    PlaneFunction u1q_then_u2 = f;  // U2 (U1)^q f
    PlaneFunction u2_then_u1q = magnetic_translate(f, e2, B);
    for (long k = 0; k < flux.q; ++k) {
      u1q_then_u2 = magnetic_translate(u1q_then_u2, e1, B);
      u2_then_u1q = magnetic_translate(u2_then_u1q, e1, B);
    }
    u1q_then_u2 = magnetic_translate(u1q_then_u2, e2, B);
    return std::abs(u1q_then_u2(x) - u2_then_u1q(x));
  }));
  out.push_back(check("dual basis duality (relative)", [&] {
    Vec2 u1, u2;
    do {
      u1 = rng.vec(3.0);
      u2 = rng.vec(3.0);
    } while (std::abs(wedge(u1, u2)) < 0.1 * u1.norm() * u2.norm());
    const auto [f1, f2] = dual_basis(u1, u2);
    const double two_pi = 2.0 * std::numbers::pi;
    return std::max({std::abs(f1.dot(u1) - two_pi), std::abs(f1.dot(u2)), std::abs(f2.dot(u1)),
                     std::abs(f2.dot(u2) - two_pi)}) / two_pi;
  }));
  return out;
}

}  // namespace magbloch
