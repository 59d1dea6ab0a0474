#pragma once

#include <complex>
#include <functional>
#include <utility>

#include <Eigen/Core>

namespace magbloch {

using Vec2 = Eigen::Vector2d;
using cplx = std::complex<double>;

/// A complex function on the plane. Translation operators act on these
/// pointwise so that algebraic identities can be checked anywhere.
using PlaneFunction = std::function<cplx(const Vec2&)>;

/// a∧b = a₁b₂ − a₂b₁. Signed; every phase in the library uses this sign.
inline double wedge(const Vec2& a, const Vec2& b) noexcept {
  return a.x() * b.y() - a.y() * b.x();
}

class Lattice {
 public:
  /// Throws ErrorKind::degenerate_lattice when e1∧e2 vanishes.
  Lattice(Vec2 e1, Vec2 e2);

  static Lattice unit_square() { return {Vec2(1.0, 0.0), Vec2(0.0, 1.0)}; }

  const Vec2& e1() const noexcept { return e1_; }
  const Vec2& e2() const noexcept { return e2_; }
  /// e1∧e2, signed.
  double cell_area() const noexcept { return area_; }

  Vec2 point(double c1, double c2) const noexcept { return c1 * e1_ + c2 * e2_; }

  /// Dual basis (b1, b2) with b_i·e_j = 2πδ_ij.
  std::pair<Vec2, Vec2> dual() const;

 private:
  Vec2 e1_;
  Vec2 e2_;
  double area_;
};

/// Rational flux p/q per cell of Γ, stored in lowest terms with q > 0.
/// B is derived: B·(e1∧e2) = 2πp/q.
struct FluxRational {
  long p = 0;
  long q = 1;
  double B = 0.0;
  Lattice lattice;
};

FluxRational make_flux(long p, long q, const Lattice& lattice);

/// Smallest q ≤ qmax with |B·area/2π − p/q| ≤ tol. Throws ErrorKind::not_rational.
FluxRational detect_flux(double B, const Lattice& lattice, long qmax, double tol);

/// γ' = q·g1·e1 + g2·e2 ∈ Γ'.
struct GammaPrimeVector {
  long g1 = 0;
  long g2 = 0;

  friend GammaPrimeVector operator+(GammaPrimeVector a, GammaPrimeVector b) noexcept {
    return {a.g1 + b.g1, a.g2 + b.g2};
  }
  friend bool operator==(const GammaPrimeVector&, const GammaPrimeVector&) = default;
};

/// Basis u1 = q·e1, u2 = e2 of the magnetic sublattice Γ' and its dual basis.
struct SublatticePrime {
  Vec2 u1;
  Vec2 u2;
  Vec2 f1;
  Vec2 f2;

  Vec2 vector(const GammaPrimeVector& g) const noexcept {
    return static_cast<double>(g.g1) * u1 + static_cast<double>(g.g2) * u2;
  }
  /// θ = t1·f1 + t2·f2.
  Vec2 theta(double t1, double t2) const noexcept { return t1 * f1 + t2 * f2; }
};

SublatticePrime make_sublattice(const FluxRational& flux);

/// Solves f_i·u_j = 2πδ_ij. Throws ErrorKind::degenerate_lattice on a singular basis.
std::pair<Vec2, Vec2> dual_basis(const Vec2& u1, const Vec2& u2);
inline std::pair<Vec2, Vec2> dual_basis(const SublatticePrime& sub) {
  return dual_basis(sub.u1, sub.u2);
}

/// exp(iB·α∧β): U_α U_β = commutation_phase(α, β)·U_β U_α.
cplx commutation_phase(const Vec2& alpha, const Vec2& beta, double B);

/// Θ_q(γ') = (−1)^(p·g1·g2), evaluated by parity.
int theta_phase(const GammaPrimeVector& g, long p) noexcept;

/// (U_α f)(x) = exp((iB/2)(x₁α₂ − x₂α₁))·f(x + α).
PlaneFunction magnetic_translate(PlaneFunction f, const Vec2& alpha, double B);

/// W_{q,γ'} f = Θ_q(γ')·U_{γ'} f. A true representation of Γ'.
PlaneFunction weyl_translate(PlaneFunction f, const GammaPrimeVector& g,
                             const FluxRational& flux);

}  // namespace magbloch
