#pragma once

// Reference computations for the tests. Each one is written independently of
// the library code it checks: no shared helpers, different algorithms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// Uniform double in [lo, hi) from the raw engine output, so draws do not
/// depend on the standard library's distribution implementation.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
  Eigen::MatrixXcd A(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) A(i, j) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
  }
  return 0.5 * (A + A.adjoint());
}

/// Householder reduction of a Hermitian matrix to real symmetric tridiagonal
/// form: diag holds the diagonal, off the moduli of the sub-diagonal.
inline void tridiagonalize(Eigen::MatrixXcd A, std::vector<double>& diag, std::vector<double>& off) {
  const int n = static_cast<int>(A.rows());
  for (int k = 0; k + 2 < n; ++k) {
    const int len = n - k - 1;
    Eigen::VectorXcd x = A.block(k + 1, k, len, 1);
    const double norm = x.norm();
    if (norm == 0.0) continue;
    const cplx phase = std::abs(x(0)) > 0 ? x(0) / std::abs(x(0)) : cplx(1.0);
    Eigen::VectorXcd v = x;
    v(0) += phase * norm;
    const double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;
    // A ← H A H with H = I − 2 v v† acting on rows/cols k+1..n−1.
    Eigen::MatrixXcd rows = A.bottomRows(len);
    A.bottomRows(len) = rows - 2.0 * v * (v.adjoint() * rows);
    Eigen::MatrixXcd cols = A.rightCols(len);
    A.rightCols(len) = cols - 2.0 * (cols * v) * v.adjoint();
  }
  diag.resize(n);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  for (int i = 0; i < n; ++i) diag[i] = A(i, i).real();
  for (int i = 0; i + 1 < n; ++i) off[i] = std::abs(A(i + 1, i));
}

/// Number of eigenvalues of the tridiagonal matrix below x (Sturm sequence).
inline int count_below(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : b2 / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

/// All eigenvalues, ascending, by tridiagonalization plus bisection.
inline std::vector<double> hermitian_eigenvalues(const Eigen::MatrixXcd& A) {
  std::vector<double> d, e;
  tridiagonalize(A, d, e);
  const int n = static_cast<int>(d.size());
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i > 0 ? e[i - 1] : 0.0) + (i + 1 < n ? e[i] : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (count_below(d, e, mid) > k) b = mid; else a = mid;
    }
    out[k] = 0.5 * (a + b);
  }
  return out;
}

/// Dual basis of (e1, e2) from the closed-form 2×2 inverse.
inline void dual(const Eigen::Vector2d& e1, const Eigen::Vector2d& e2, Eigen::Vector2d& b1,
                 Eigen::Vector2d& b2) {
  const double det = e1.x() * e2.y() - e1.y() * e2.x();
  b1 = 2 * pi / det * Eigen::Vector2d(e2.y(), -e2.x());
  b2 = 2 * pi / det * Eigen::Vector2d(-e1.y(), e1.x());
}

struct Mode {
  int m1, m2;
  cplx c;
};

/// Σ c·exp(iK·x), summed term by term in complex arithmetic.
inline cplx fourier_series(const std::vector<Mode>& modes, const Eigen::Vector2d& e1,
                           const Eigen::Vector2d& e2, const Eigen::Vector2d& x) {
  Eigen::Vector2d b1, b2;
  dual(e1, e2, b1, b2);
  cplx sum = 0.0;
  for (const auto& m : modes) {
    const Eigen::Vector2d K = m.m1 * b1 + m.m2 * b2;
    sum += m.c * std::exp(cplx(0.0, K.dot(x)));
  }
  return sum;
}

/// Landau level n of the continuum operator: B(2n + 1).
inline double landau_level(double B, int n) { return B * (2 * n + 1); }

/// Central difference of f at 0 with step h.
template <class F>
double central_difference(F&& f, double h) {
  return (f(h) - f(-h)) / (2 * h);
}

}  // namespace oracle
