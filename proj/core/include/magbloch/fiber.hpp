#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "magbloch/lattice_flux.hpp"
#include "magbloch/potential.hpp"

namespace magbloch {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

/// Uniform N1 × N2 sampling of the magnetic cell spanned by u1 = q·e1, u2 = e2.
/// Site (s1, s2) sits at (s1/N1)·u1 + (s2/N2)·u2; sites are stored with s1
/// running fastest.
struct Grid {
  int N1 = 0;
  int N2 = 0;
  FluxRational flux;
  SublatticePrime sub;
  Vec2 a1;  // u1 / N1
  Vec2 a2;  // u2 / N2
  /// Inverse Gram matrix of (a1, a2): −Δ = −Σ metric(i,j)·∂_i∂_j in step units.
  Eigen::Matrix2d metric;

  int size() const noexcept { return N1 * N2; }
  int index(int s1, int s2) const noexcept { return s1 + N1 * s2; }
  Vec2 site(int s1, int s2) const noexcept {
    return static_cast<double>(s1) * a1 + static_cast<double>(s2) * a2;
  }
  bool oblique() const noexcept;
};

/// Throws ErrorKind::invalid_argument when N1 or N2 is below 4.
Grid build_grid(const FluxRational& flux, int N1, int N2);

/// Quasi-momentum θ = t1·f1 + t2·f2 in coordinates of the dual basis of Γ'.
struct ThetaCoords {
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Factor relating ψ(y + γ') to ψ(y) for functions invariant under every W_{q,γ'}:
/// ψ(y + γ') = Θ_q(γ')·exp(−(iB/2)·y∧γ')·ψ(y).
cplx boundary_factor(const Grid& grid, const Vec2& y, const GammaPrimeVector& g);

/// V sampled at the grid sites.
Eigen::VectorXd sample_potential(const Grid& grid, const PotentialSpec& V);

/// Discretized H(θ, V) = (i∇ + A − θ)² + V on the magnetic cell.
///
/// Covariant second differences with Peierls link phases for W = A − θ,
/// A = (B/2)(−x₂, x₁). Hops leaving the cell re-enter through
/// boundary_factor, so the matrix acts on the twisted space directly.
class FiberOperator {
 public:
  FiberOperator(Grid grid, PotentialSpec potential, ThetaCoords theta, SparseMatrix matrix,
                Eigen::VectorXd potential_samples);

  const Grid& grid() const noexcept { return grid_; }
  const PotentialSpec& potential() const noexcept { return potential_; }
  ThetaCoords theta() const noexcept { return theta_; }
  Vec2 theta_vector() const noexcept { return grid_.sub.theta(theta_.t1, theta_.t2); }
  const SparseMatrix& matrix() const noexcept { return matrix_; }
  const Eigen::VectorXd& potential_samples() const noexcept { return potential_samples_; }
  int dimension() const noexcept { return static_cast<int>(matrix_.rows()); }
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(matrix_); }

 private:
  Grid grid_;
  PotentialSpec potential_;
  ThetaCoords theta_;
  SparseMatrix matrix_;
  Eigen::VectorXd potential_samples_;
};

/// Any finite (t1, t2) is accepted; shifting t_i by an integer is a gauge
/// transformation of the result.
FiberOperator assemble(const Grid& grid, const PotentialSpec& V, ThetaCoords theta);

/// Discrete magnetic translation by k1·a1 + k2·a2 acting on grid functions of the
/// twisted space: (Tψ)(x) = exp((iB/2)·x∧α)·ψ(x + α).
SparseMatrix discrete_translation(const Grid& grid, int k1, int k2);

/// Lowest eigenpairs, eigenvalues ascending, eigenvectors as unit columns.
struct EigenSolution {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd eigenvectors;
  Eigen::VectorXd residuals;  // ‖Hv − λv‖₂ per pair
  /// Number of columns of the underlying operator; equals eigenvalues.size()
  /// when the full spectrum is known.
  int dimension = 0;

  int count() const noexcept { return static_cast<int>(eigenvalues.size()); }
  bool complete() const noexcept { return count() == dimension; }
};

enum class SolverKind { automatic, dense, iterative };

struct SolverOptions {
  SolverKind kind = SolverKind::automatic;
  /// Iterative convergence: every residual ≤ tolerance·‖H‖∞.
  double tolerance = 1e-12;
  int max_iterations = 2000;
  std::uint64_t seed = 0x5eed;
};

/// Throws ErrorKind::assembly for a non-Hermitian matrix and
/// ErrorKind::invalid_argument unless 1 ≤ m ≤ dim.
EigenSolution eigensolve(const Eigen::MatrixXcd& H, int m);
EigenSolution eigensolve(const SparseMatrix& H, int m, const SolverOptions& options = {});
EigenSolution eigensolve(const FiberOperator& H, int m, const SolverOptions& options = {});

/// max |H − H†| / max |H| (0 for the zero matrix).
double hermiticity_defect(const SparseMatrix& H);
double hermiticity_defect(const Eigen::MatrixXcd& H);

/// Two eigenvalues belong to one cluster when they differ by at most
/// 1e-6·max(1, |E|).
constexpr double kClusterTolerance = 1e-6;
bool same_cluster(double a, double b) noexcept;

}  // namespace magbloch
