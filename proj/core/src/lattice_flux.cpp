#include "magbloch/lattice_flux.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "magbloch/error.hpp"

namespace magbloch {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_degenerate(const Vec2& u1, const Vec2& u2) {
  const double scale = u1.norm() * u2.norm();
  return !(scale > 0.0) || std::abs(wedge(u1, u2)) <= 1e-14 * scale;
}

}  // namespace

Lattice::Lattice(Vec2 e1, Vec2 e2) : e1_(std::move(e1)), e2_(std::move(e2)), area_(wedge(e1_, e2_)) {
  if (!std::isfinite(area_) || is_degenerate(e1_, e2_)) {
    std::ostringstream msg;
    msg << "degenerate lattice: e1∧e2 = " << area_;
    throw Error(ErrorKind::degenerate_lattice, msg.str());
  }
}

std::pair<Vec2, Vec2> Lattice::dual() const { return dual_basis(e1_, e2_); }

FluxRational make_flux(long p, long q, const Lattice& lattice) {
  if (q < 1) {
    throw Error(ErrorKind::invalid_argument, "flux denominator q must be >= 1, got " + std::to_string(q));
  }
  const long g = std::gcd(p, q);
  p /= g;
  q /= g;
  const double B = kTwoPi * static_cast<double>(p) / (static_cast<double>(q) * lattice.cell_area());
  return FluxRational{p, q, B, lattice};
}

FluxRational detect_flux(double B, const Lattice& lattice, long qmax, double tol) {
  if (qmax < 1 || !(tol > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "detect_flux requires qmax >= 1 and tol > 0");
  }
  const double ratio = B * lattice.cell_area() / kTwoPi;
  for (long q = 1; q <= qmax; ++q) {
    const double p = std::round(ratio * static_cast<double>(q));
    if (std::abs(ratio - p / static_cast<double>(q)) <= tol) {
      return make_flux(static_cast<long>(p), q, lattice);
    }
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "flux ratio " << ratio << " has no approximant p/q with q <= " << qmax << " within " << tol;
  throw Error(ErrorKind::not_rational, msg.str());
}

SublatticePrime make_sublattice(const FluxRational& flux) {
  SublatticePrime sub;
  sub.u1 = static_cast<double>(flux.q) * flux.lattice.e1();
  sub.u2 = flux.lattice.e2();
  std::tie(sub.f1, sub.f2) = dual_basis(sub.u1, sub.u2);
  return sub;
}

std::pair<Vec2, Vec2> dual_basis(const Vec2& u1, const Vec2& u2) {
  if (is_degenerate(u1, u2)) {
    throw Error(ErrorKind::degenerate_lattice, "dual_basis: singular basis");
  }
  // Rows of F satisfy F·U = 2π·I with U = [u1 u2].
  Eigen::Matrix2d U;
  U.col(0) = u1;
  U.col(1) = u2;
  const Eigen::Matrix2d F = kTwoPi * U.inverse();
  return {F.row(0).transpose(), F.row(1).transpose()};
}

cplx commutation_phase(const Vec2& alpha, const Vec2& beta, double B) {
  return std::polar(1.0, B * wedge(alpha, beta));
}

int theta_phase(const GammaPrimeVector& g, long p) noexcept {
  const bool odd = (p % 2 != 0) && (g.g1 % 2 != 0) && (g.g2 % 2 != 0);
  return odd ? -1 : 1;
}

PlaneFunction magnetic_translate(PlaneFunction f, const Vec2& alpha, double B) {
  return [f = std::move(f), alpha, B](const Vec2& x) -> cplx {
    return std::polar(1.0, 0.5 * B * wedge(x, alpha)) * f(x + alpha);
  };
}

PlaneFunction weyl_translate(PlaneFunction f, const GammaPrimeVector& g, const FluxRational& flux) {
  const Vec2 shift = static_cast<double>(flux.q * g.g1) * flux.lattice.e1() +
                     static_cast<double>(g.g2) * flux.lattice.e2();
  const double sign = theta_phase(g, flux.p);
  return [inner = magnetic_translate(std::move(f), shift, flux.B), sign](const Vec2& x) {
    return sign * inner(x);
  };
}

}  // namespace magbloch
