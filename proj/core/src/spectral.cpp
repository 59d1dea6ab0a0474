#include "magbloch/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "magbloch/error.hpp"

namespace magbloch {

namespace {

constexpr double kContourClearance = 1e-9;
constexpr double kResolventClearance = 1e-6;

double distance_to_circle(double lambda, double center, double radius) {
  return std::abs(std::abs(lambda - center) - radius);
}

// Spectral norm of a Hermitian matrix by power iteration (a lower bound that
// is tight once the dominant eigenvalue separates).
double hermitian_norm_estimate(const Eigen::MatrixXcd& M) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(M.rows()).normalized();
  double estimate = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXcd w = M * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    if (std::abs(norm - estimate) <= 1e-10 * norm) return norm;
    estimate = norm;
    v = w / norm;
  }
  return estimate;
}

void require_clear_resolvent(const Eigen::MatrixXcd& H, double center, double radius) {
  const Eigen::Index n = H.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  // Real eigenvalues meet the circle only near center ± radius.
  for (const double x : {center - radius, center + radius}) {
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(cplx(x, 0.0) * I - H);
    const Eigen::MatrixXcd inverse = lu.inverse();
    const double frobenius = inverse.norm();
    const bool finite = std::isfinite(frobenius);
    if (finite && frobenius * kResolventClearance <= 1.0) continue;
    if (!finite || hermitian_norm_estimate(inverse) * kResolventClearance > 1.0) {
      std::ostringstream msg;
      msg << "resolvent is near-singular on the contour at z = " << x;
      throw Error(ErrorKind::near_singular_resolvent, msg.str());
    }
  }
}

int trace_rank(const Eigen::MatrixXcd& P) {
  return static_cast<int>(std::lround(P.trace().real()));
}

}  // namespace

SpectralProjector riesz_projector(const EigenSolution& es, double center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "projector radius must be positive");
  const Eigen::Index n = es.eigenvectors.rows();
  SpectralProjector out{center, radius, 0, Eigen::MatrixXcd::Zero(n, n)};
  for (int k = 0; k < es.count(); ++k) {
    const double lambda = es.eigenvalues(k);
    if (distance_to_circle(lambda, center, radius) <= kContourClearance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "eigenvalue " << lambda << " lies on the contour |z - " << center << "| = " << radius;
      throw Error(ErrorKind::eigenvalue_on_contour, msg.str());
    }
    if (std::abs(lambda - center) < radius) {
      out.matrix.noalias() += es.eigenvectors.col(k) * es.eigenvectors.col(k).adjoint();
      ++out.rank;
    }
  }
  if (!es.complete() && es.count() > 0 && center + radius >= es.eigenvalues(es.count() - 1)) {
    throw Error(ErrorKind::incomplete_spectrum,
                "projector disk extends beyond the computed part of the spectrum");
  }
  return out;
}

SpectralProjector riesz_projector_contour(const Eigen::MatrixXcd& H, double center, double radius,
                                          int n_nodes) {
  if (n_nodes < 8) throw Error(ErrorKind::invalid_argument, "contour quadrature needs at least 8 nodes");
  if (!(radius > 0.0)) throw Error(ErrorKind::invalid_argument, "projector radius must be positive");
  require_clear_resolvent(H, center, radius);

  const Eigen::Index n = H.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
  // z_k = c + r·e^{iφ_k}, dz = i·r·e^{iφ_k}dφ, so (1/2πi)∮ ≈ (1/N)Σ r·e^{iφ_k}(z_k − H)⁻¹.
  for (int k = 0; k < n_nodes; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_nodes;
    const cplx offset = std::polar(radius, phi);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu((center + offset) * I - H);
    P.noalias() += offset * lu.inverse();
  }
  P /= static_cast<double>(n_nodes);
  return {center, radius, trace_rank(P), std::move(P)};
}

SpectralProjector riesz_projector_contour(const FiberOperator& H, double center, double radius,
                                          int n_nodes) {
  return riesz_projector_contour(H.dense(), center, radius, n_nodes);
}

Disk isolating_disk(const EigenSolution& es, int first, int count) {
  if (first < 0 || count < 1 || first + count > es.count()) {
    throw Error(ErrorKind::invalid_argument, "isolating_disk: cluster outside the computed eigenvalues");
  }
  const int last = first + count - 1;
  const bool has_upper = last + 1 < es.count();
  if (!has_upper && !es.complete()) {
    throw Error(ErrorKind::incomplete_spectrum, "isolating_disk: no computed eigenvalue above the cluster");
  }
  const double lo = es.eigenvalues(first);
  const double hi = es.eigenvalues(last);
  double gap = std::numeric_limits<double>::infinity();
  if (first > 0) gap = std::min(gap, lo - es.eigenvalues(first - 1));
  if (has_upper) gap = std::min(gap, es.eigenvalues(last + 1) - hi);
  if (!std::isfinite(gap)) gap = 2.0;
  return {0.5 * (lo + hi), 0.5 * (hi - lo) + 0.5 * gap};
}

Eigen::MatrixXcd projected_gram(const SpectralProjector& P, const Eigen::MatrixXcd& psis) {
  const Eigen::MatrixXcd projected = P.matrix * psis;
  return projected.adjoint() * projected;
}

Eigen::MatrixXcd gram_orthonormalize(const SpectralProjector& P, const Eigen::MatrixXcd& psis) {
  if (psis.cols() != P.rank || psis.rows() != P.matrix.rows()) {
    std::ostringstream msg;
    msg << "gram_orthonormalize: " << psis.cols() << " reference vectors for a rank-" << P.rank
        << " projector";
    throw Error(ErrorKind::invalid_argument, msg.str());
  }
  const Eigen::MatrixXcd projected = P.matrix * psis;
  const Eigen::MatrixXcd gram = projected.adjoint() * projected;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  const double smallest = eig.eigenvalues().minCoeff();
  if (!(smallest > 1e-8)) {
    std::ostringstream msg;
    msg << "projected reference vectors are nearly dependent (smallest Gram eigenvalue "
        << smallest << ")";
    throw Error(ErrorKind::continuation_lost, msg.str());
  }
  const Eigen::MatrixXcd inv_sqrt = eig.eigenvectors() *
                                    eig.eigenvalues().cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() *
                                    eig.eigenvectors().adjoint();
  return projected * inv_sqrt;
}

Eigen::MatrixXcd reduced_matrix(const SparseMatrix& H, const Eigen::MatrixXcd& phi) {
  return phi.adjoint() * (H * phi);
}

Eigen::MatrixXcd reduced_matrix(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& phi) {
  return phi.adjoint() * (H * phi);
}

cplx characteristic_polynomial(const Eigen::MatrixXcd& reduced, cplx E) {
  const Eigen::Index n = reduced.rows();
  if (n == 0) return {1.0, 0.0};
  return (E * Eigen::MatrixXcd::Identity(n, n) - reduced).partialPivLu().determinant();
}

double hellmann_feynman(const Eigen::VectorXcd& phi, const PotentialSpec& U, const Grid& grid) {
  if (phi.size() != grid.size()) {
    throw Error(ErrorKind::invalid_argument, "hellmann_feynman: vector does not match the grid");
  }
  if (std::abs(phi.norm() - 1.0) > 1e-8) {
    throw Error(ErrorKind::invalid_argument, "hellmann_feynman: eigenvector is not normalized");
  }
  const Eigen::VectorXd samples = sample_potential(grid, U);
  return samples.dot(phi.cwiseAbs2());
}

double hellmann_feynman(const EigenSolution& es, int index, const PotentialSpec& U,
                        const Grid& grid) {
  if (index < 0 || index >= es.count()) {
    throw Error(ErrorKind::invalid_argument, "hellmann_feynman: eigenpair index out of range");
  }
  if (index + 1 == es.count() && !es.complete()) {
    throw Error(ErrorKind::incomplete_spectrum,
                "hellmann_feynman: the gap above the last computed eigenvalue is unknown");
  }
  const double lambda = es.eigenvalues(index);
  const bool low_gap = index > 0 && lambda - es.eigenvalues(index - 1) <= 1e-6;
  const bool high_gap = index + 1 < es.count() && es.eigenvalues(index + 1) - lambda <= 1e-6;
  if (low_gap || high_gap) {
    throw Error(ErrorKind::degenerate_level,
                "hellmann_feynman: eigenvalue is degenerate; use the projected perturbation");
  }
  return hellmann_feynman(es.eigenvectors.col(index), U, grid);
}

Eigen::MatrixXcd projected_perturbation(const Eigen::MatrixXcd& phi, const PotentialSpec& U,
                                        const Grid& grid) {
  const Eigen::VectorXd samples = sample_potential(grid, U);
  return phi.adjoint() * (samples.cast<cplx>().asDiagonal() * phi);
}

}  // namespace magbloch
