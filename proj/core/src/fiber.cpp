#include "magbloch/fiber.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/SparseCholesky>

#include "magbloch/error.hpp"

namespace magbloch {

namespace {

int floor_div(int a, int n) noexcept { return a >= 0 ? a / n : -((-a + n - 1) / n); }

struct Hop {
  int d1;
  int d2;
  double weight;
};

std::vector<Hop> stencil(const Grid& grid) {
  std::vector<Hop> hops{{1, 0, grid.metric(0, 0)}, {0, 1, grid.metric(1, 1)}};
  if (grid.oblique()) {
    // 2·g12·∂1∂2 = (g12/2)·(∂_{a1+a2}² − ∂_{a1−a2}²)
    hops.push_back({1, 1, 0.5 * grid.metric(0, 1)});
    hops.push_back({1, -1, -0.5 * grid.metric(0, 1)});
  }
  return hops;
}

// Row sums of |H|: (lower Gershgorin bound, ‖H‖∞).
std::pair<double, double> gershgorin(const SparseMatrix& H) {
  const Eigen::Index n = H.rows();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(n);
  for (Eigen::Index col = 0; col < H.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(H, col); it; ++it) {
      if (it.row() == it.col()) {
        diag(it.row()) = it.value().real();
      } else {
        off(it.row()) += std::abs(it.value());
      }
    }
  }
  return {(diag - off).minCoeff(), (diag.cwiseAbs() + off).maxCoeff()};
}

void require_count(Eigen::Index n, int m) {
  if (m < 1 || m > n) {
    std::ostringstream msg;
    msg << "eigensolve: requested " << m << " eigenpairs of a " << n << "-dimensional operator";
    throw Error(ErrorKind::invalid_argument, msg.str());
  }
}

void require_hermitian(double defect) {
  if (defect > 1e-12) {
    std::ostringstream msg;
    msg << "eigensolve: matrix is not Hermitian (relative defect " << defect << ")";
    throw Error(ErrorKind::assembly, msg.str());
  }
}

template <class Matrix>
Eigen::VectorXd residual_norms(const Matrix& H, const Eigen::MatrixXcd& vectors,
                               const Eigen::VectorXd& values) {
  const Eigen::MatrixXcd R = H * vectors - vectors * values.cast<cplx>().asDiagonal();
  return R.colwise().norm().transpose();
}

EigenSolution dense_solve(const Eigen::MatrixXcd& H, int m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::not_converged, "dense Hermitian eigensolver failed");
  }
  EigenSolution out;
  out.dimension = static_cast<int>(H.rows());
  out.eigenvalues = solver.eigenvalues().head(m);
  out.eigenvectors = solver.eigenvectors().leftCols(m);
  out.residuals = residual_norms(H, out.eigenvectors, out.eigenvalues);
  return out;
}

Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(Y.rows(), Y.cols());
}

// Shift-invert subspace iteration with Rayleigh-Ritz. The shift sits below
// the Gershgorin bound so H − σ is positive definite and admits a sparse
// Cholesky factorization. Blocks wider than m resolve degenerate clusters.
std::optional<EigenSolution> iterative_solve(const SparseMatrix& H, int m,
                                             const SolverOptions& options) {
  const Eigen::Index n = H.rows();
  const int block = static_cast<int>(std::min<Eigen::Index>(n, std::max(2 * m, m + 8)));
  const auto [lower, norm_inf] = gershgorin(H);
  const double shift = lower - 1.0;

  SparseMatrix shifted = H;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> factor(shifted);
  if (factor.info() != Eigen::Success) return std::nullopt;

  std::mt19937_64 engine(options.seed);
  Eigen::MatrixXcd X(n, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5;
      const double im = static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5;
      X(i, j) = cplx(re, im);
    }
  }
  X = orthonormal_columns(X);

  const double target = options.tolerance * std::max(norm_inf, 1.0);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXcd Q = orthonormal_columns(factor.solve(X));
    const Eigen::MatrixXcd HQ = H * Q;
    Eigen::MatrixXcd projected = Q.adjoint() * HQ;
    projected = 0.5 * (projected + projected.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(projected);
    X = Q * ritz.eigenvectors();

    const Eigen::VectorXd values = ritz.eigenvalues().head(m);
    const Eigen::MatrixXcd leading = X.leftCols(m);
    const Eigen::MatrixXcd R =
        HQ * ritz.eigenvectors().leftCols(m) - leading * values.cast<cplx>().asDiagonal();
    const Eigen::VectorXd residuals = R.colwise().norm().transpose();
    if (residuals.maxCoeff() <= target) {
      EigenSolution out;
      out.dimension = static_cast<int>(n);
      out.eigenvalues = values;
      out.eigenvectors = leading;
      out.residuals = residuals;
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace

bool Grid::oblique() const noexcept {
  return std::abs(metric(0, 1)) > 1e-14 * std::max(metric(0, 0), metric(1, 1));
}

Grid build_grid(const FluxRational& flux, int N1, int N2) {
  if (N1 < 4 || N2 < 4) {
    std::ostringstream msg;
    msg << "grid needs at least 4 sites per direction, got " << N1 << " x " << N2;
    throw Error(ErrorKind::invalid_argument, msg.str());
  }
  const SublatticePrime sub = make_sublattice(flux);
  const Vec2 a1 = sub.u1 / static_cast<double>(N1);
  const Vec2 a2 = sub.u2 / static_cast<double>(N2);
  Eigen::Matrix2d gram;
  gram << a1.dot(a1), a1.dot(a2), a2.dot(a1), a2.dot(a2);
  return Grid{N1, N2, flux, sub, a1, a2, gram.inverse()};
}

cplx boundary_factor(const Grid& grid, const Vec2& y, const GammaPrimeVector& g) {
  if (g.g1 == 0 && g.g2 == 0) return {1.0, 0.0};
  const Vec2 shift = grid.sub.vector(g);
  const double sign = theta_phase(g, grid.flux.p);
  return sign * std::polar(1.0, -0.5 * grid.flux.B * wedge(y, shift));
}

Eigen::VectorXd sample_potential(const Grid& grid, const PotentialSpec& V) {
  Eigen::VectorXd values(grid.size());
  for (int s2 = 0; s2 < grid.N2; ++s2) {
    for (int s1 = 0; s1 < grid.N1; ++s1) {
      values(grid.index(s1, s2)) = evaluate(V, grid.site(s1, s2));
    }
  }
  return values;
}

FiberOperator::FiberOperator(Grid grid, PotentialSpec potential, ThetaCoords theta,
                             SparseMatrix matrix, Eigen::VectorXd potential_samples)
    : grid_(std::move(grid)),
      potential_(std::move(potential)),
      theta_(theta),
      matrix_(std::move(matrix)),
      potential_samples_(std::move(potential_samples)) {}

FiberOperator assemble(const Grid& grid, const PotentialSpec& V, ThetaCoords theta) {
  const double B = grid.flux.B;
  const Vec2 theta_vec = grid.sub.theta(theta.t1, theta.t2);
  const std::vector<Hop> hops = stencil(grid);
  Eigen::VectorXd samples = sample_potential(grid, V);

  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.size()) * (2 * hops.size() + 1));
  for (int s2 = 0; s2 < grid.N2; ++s2) {
    for (int s1 = 0; s1 < grid.N1; ++s1) {
      const int row = grid.index(s1, s2);
      const Vec2 x = grid.site(s1, s2);
      double diagonal = samples(row);
      for (const Hop& hop : hops) {
        const Vec2 step = hop.d1 * grid.a1 + hop.d2 * grid.a2;
        // exp(−i W(mid)·a) with W = A − θ; exact for affine W.
        const Vec2 mid = x + 0.5 * step;
        const Vec2 A_mid(-0.5 * B * mid.y(), 0.5 * B * mid.x());
        const cplx link = std::polar(1.0, -(A_mid - theta_vec).dot(step));

        const int n1 = floor_div(s1 + hop.d1, grid.N1);
        const int n2 = floor_div(s2 + hop.d2, grid.N2);
        const int t1 = s1 + hop.d1 - n1 * grid.N1;
        const int t2 = s2 + hop.d2 - n2 * grid.N2;
        const cplx wrap = boundary_factor(grid, grid.site(t1, t2), {n1, n2});

        const cplx entry = -hop.weight * link * wrap;
        const int col = grid.index(t1, t2);
        triplets.emplace_back(row, col, entry);
        triplets.emplace_back(col, row, std::conj(entry));
        if (hop.d1 == 0 || hop.d2 == 0) diagonal += 2.0 * hop.weight;
      }
      triplets.emplace_back(row, row, cplx(diagonal, 0.0));
    }
  }
  SparseMatrix H(grid.size(), grid.size());
  H.setFromTriplets(triplets.begin(), triplets.end());
  H.makeCompressed();
  return FiberOperator(grid, V, theta, std::move(H), std::move(samples));
}

SparseMatrix discrete_translation(const Grid& grid, int k1, int k2) {
  const Vec2 alpha = k1 * grid.a1 + k2 * grid.a2;
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(grid.size());
  for (int s2 = 0; s2 < grid.N2; ++s2) {
    for (int s1 = 0; s1 < grid.N1; ++s1) {
      const Vec2 x = grid.site(s1, s2);
      const int n1 = floor_div(s1 + k1, grid.N1);
      const int n2 = floor_div(s2 + k2, grid.N2);
      const int t1 = s1 + k1 - n1 * grid.N1;
      const int t2 = s2 + k2 - n2 * grid.N2;
      const cplx value = std::polar(1.0, 0.5 * grid.flux.B * wedge(x, alpha)) *
                         boundary_factor(grid, grid.site(t1, t2), {n1, n2});
      triplets.emplace_back(grid.index(s1, s2), grid.index(t1, t2), value);
    }
  }
  SparseMatrix T(grid.size(), grid.size());
  T.setFromTriplets(triplets.begin(), triplets.end());
  return T;
}

double hermiticity_defect(const SparseMatrix& H) {
  const SparseMatrix adj = H.adjoint();
  const SparseMatrix diff = H - adj;
  double scale = 0.0;
  for (Eigen::Index k = 0; k < H.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double hermiticity_defect(const Eigen::MatrixXcd& H) {
  if (H.rows() != H.cols()) return std::numeric_limits<double>::infinity();
  const double scale = H.cwiseAbs().maxCoeff();
  return scale > 0.0 ? (H - H.adjoint()).cwiseAbs().maxCoeff() / scale : 0.0;
}

bool same_cluster(double a, double b) noexcept {
  return std::abs(a - b) <= kClusterTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

EigenSolution eigensolve(const Eigen::MatrixXcd& H, int m) {
  require_hermitian(hermiticity_defect(H));
  require_count(H.rows(), m);
  return dense_solve(H, m);
}

EigenSolution eigensolve(const SparseMatrix& H, int m, const SolverOptions& options) {
  require_hermitian(hermiticity_defect(H));
  require_count(H.rows(), m);
  const Eigen::Index n = H.rows();
  bool iterative = false;
  switch (options.kind) {
    case SolverKind::dense: break;
    case SolverKind::iterative: iterative = 2 * m < n; break;
    case SolverKind::automatic: iterative = n > 400 && 8 * m <= n; break;
  }
  if (iterative) {
    if (auto solution = iterative_solve(H, m, options)) return *std::move(solution);
    if (options.kind == SolverKind::iterative || n > 8192) {
      throw Error(ErrorKind::not_converged, "iterative eigensolver did not reach the residual target");
    }
  }
  return dense_solve(Eigen::MatrixXcd(H), m);
}

EigenSolution eigensolve(const FiberOperator& H, int m, const SolverOptions& options) {
  return eigensolve(H.matrix(), m, options);
}

}  // namespace magbloch
