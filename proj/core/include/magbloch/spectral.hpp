#pragma once

#include "magbloch/fiber.hpp"

namespace magbloch {

/// Orthogonal projector onto the eigenvalues inside the disk |λ − center| < radius.
struct SpectralProjector {
  double center = 0.0;
  double radius = 0.0;
  int rank = 0;
  Eigen::MatrixXcd matrix;
};

/// Σ v_k v_k† over the eigenpairs inside the disk.
///
/// Throws ErrorKind::eigenvalue_on_contour when an eigenvalue lies within 1e-9
/// of the circle, and ErrorKind::incomplete_spectrum when the disk reaches past
/// the largest eigenvalue of a partial solution.
SpectralProjector riesz_projector(const EigenSolution& es, double center, double radius);

/// Trapezoidal quadrature of (1/2πi)∮(z − H)⁻¹dz on n_nodes equispaced points
/// of the circle. Dense LU per node; meant for moderate dimensions.
///
/// Throws ErrorKind::near_singular_resolvent when an eigenvalue lies within
/// 1e-6 of the contour.
SpectralProjector riesz_projector_contour(const Eigen::MatrixXcd& H, double center, double radius,
                                          int n_nodes);
SpectralProjector riesz_projector_contour(const FiberOperator& H, double center, double radius,
                                          int n_nodes);

/// Half the distance from the cluster starting at `first` (of size `count`)
/// to the nearest eigenvalue outside it, and the cluster midpoint.
struct Disk {
  double center;
  double radius;
};
Disk isolating_disk(const EigenSolution& es, int first, int count);

/// φ = (Pψ)·G^{−1/2}, G the Gram matrix of the projected references.
///
/// Throws ErrorKind::continuation_lost when the smallest Gram eigenvalue is at
/// most 1e-8, and ErrorKind::invalid_argument when the number of references
/// differs from the projector rank.
Eigen::MatrixXcd gram_orthonormalize(const SpectralProjector& P, const Eigen::MatrixXcd& psis);

/// Gram matrix (Pψ)†(Pψ), exposed for continuation diagnostics.
Eigen::MatrixXcd projected_gram(const SpectralProjector& P, const Eigen::MatrixXcd& psis);

/// M̃_ij = ⟨φ_i, H φ_j⟩.
Eigen::MatrixXcd reduced_matrix(const SparseMatrix& H, const Eigen::MatrixXcd& phi);
Eigen::MatrixXcd reduced_matrix(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& phi);
inline Eigen::MatrixXcd reduced_matrix(const FiberOperator& H, const Eigen::MatrixXcd& phi) {
  return reduced_matrix(H.matrix(), phi);
}

/// Monic characteristic polynomial det(E − M̃) evaluated at E.
cplx characteristic_polynomial(const Eigen::MatrixXcd& reduced, cplx E);

/// ∂E/∂t of H(V + tU) at t = 0 for a unit-norm eigenvector: Σ U(x)|φ(x)|².
/// Throws ErrorKind::invalid_argument when ‖φ‖ differs from 1 by more than 1e-8.
double hellmann_feynman(const Eigen::VectorXcd& phi, const PotentialSpec& U, const Grid& grid);

/// As above for eigenpair `index` of `es`, refusing levels whose gap to a
/// neighbouring eigenvalue is at most 1e-6 (ErrorKind::degenerate_level).
double hellmann_feynman(const EigenSolution& es, int index, const PotentialSpec& U,
                        const Grid& grid);

/// Matrix ⟨φ_i, U φ_j⟩ of a perturbation restricted to span(φ); its
/// eigenvalues are the first-order splittings of a degenerate level.
Eigen::MatrixXcd projected_perturbation(const Eigen::MatrixXcd& phi, const PotentialSpec& U,
                                        const Grid& grid);

}  // namespace magbloch
