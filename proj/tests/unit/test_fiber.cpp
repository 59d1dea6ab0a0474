#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "magbloch/error.hpp"
#include "magbloch/fiber.hpp"
#include "oracles.hpp"

using namespace magbloch;
using std::numbers::pi;

namespace {

const Lattice kOblique(Vec2(1.0, 0.0), Vec2(0.35, 0.9));

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no magbloch::Error thrown";
  return ErrorKind::io;
}

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(BuildGrid, SquareSteps) {
  const auto g = build_grid(make_flux(1, 1, Lattice::unit_square()), 8, 8);
  EXPECT_NEAR((g.a1 - Vec2(0.125, 0)).norm(), 0.0, 1e-16);
  EXPECT_NEAR((g.a2 - Vec2(0, 0.125)).norm(), 0.0, 1e-16);
  EXPECT_EQ(g.metric(0, 1), 0.0);
  EXPECT_FALSE(g.oblique());
}

TEST(BuildGrid, EqualPhysicalStepForLargerDenominator) {
  const auto g = build_grid(make_flux(1, 2, Lattice::unit_square()), 16, 8);
  EXPECT_NEAR((g.a1 - Vec2(0.125, 0)).norm(), 0.0, 1e-16);
  EXPECT_NEAR((g.a2 - Vec2(0, 0.125)).norm(), 0.0, 1e-16);
  EXPECT_EQ(g.size(), 128);
}

TEST(BuildGrid, ObliqueMetricIsInverseGram) {
  const auto g = build_grid(make_flux(2, 3, kOblique), 12, 8);
  Eigen::Matrix2d gram;
  gram << g.a1.dot(g.a1), g.a1.dot(g.a2), g.a2.dot(g.a1), g.a2.dot(g.a2);
  EXPECT_NEAR((g.metric * gram - Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-12);
  EXPECT_TRUE(g.oblique());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.metric);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(BuildGrid, RejectsTinyGrids) {
  const auto flux = make_flux(1, 1, Lattice::unit_square());
  EXPECT_EQ(kind_of([&] { build_grid(flux, 3, 8); }), ErrorKind::invalid_argument);
}

TEST(Assemble, SmallSquareIsHermitian) {
  const auto grid = build_grid(make_flux(1, 1, Lattice::unit_square()), 4, 4);
  const auto H = assemble(grid, PotentialSpec(grid.flux.lattice), {0, 0});
  EXPECT_LE(hermiticity_defect(H.matrix()), 1e-12);
}

TEST(Assemble, HermitianAcrossCorpus) {
  std::mt19937_64 rng(3);
  for (const auto& [p, q] : {std::pair{1L, 1L}, {1L, 2L}, {2L, 3L}, {-1L, 2L}, {3L, 2L}}) {
    const auto grid = build_grid(make_flux(p, q, kOblique), 6 * q, 6);
    const auto V = random_potential(kOblique, rng(), 2, 1.0);
    const ThetaCoords t{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0, 1)};
    EXPECT_LE(hermiticity_defect(assemble(grid, V, t).matrix()), 1e-12);
  }
}

// Product of hopping entries around each elementary plaquette, including the
// ones that cross the cell boundary, must carry the uniform flux B·(a1∧a2).
TEST(Assemble, PlaquetteHolonomyIsUniform) {
  for (const auto& [p, q] : {std::pair{1L, 1L}, {2L, 3L}, {-1L, 2L}}) {
    const auto grid = build_grid(make_flux(p, q, kOblique), 5 * q, 5);
    const auto H = assemble(grid, PotentialSpec(kOblique), {0.3, 0.6}).dense();
    const cplx expected = std::polar(1.0, -grid.flux.B * wedge(grid.a1, grid.a2));
    for (int s2 = 0; s2 < grid.N2; ++s2) {
      for (int s1 = 0; s1 < grid.N1; ++s1) {
        const int x = grid.index(s1, s2);
        const int x1 = grid.index((s1 + 1) % grid.N1, s2);
        const int x12 = grid.index((s1 + 1) % grid.N1, (s2 + 1) % grid.N2);
        const int x2 = grid.index(s1, (s2 + 1) % grid.N2);
        const cplx loop = H(x, x1) * H(x1, x12) * H(x12, x2) * H(x2, x);
        EXPECT_NEAR(std::abs(loop / std::abs(loop) - expected), 0.0, 1e-12)
            << "plaquette (" << s1 << ", " << s2 << ")";
      }
    }
  }
}

TEST(Assemble, LowestLandauLevel) {
  const auto grid = build_grid(make_flux(1, 1, Lattice::unit_square()), 32, 32);
  const auto es = eigensolve(assemble(grid, PotentialSpec(grid.flux.lattice), {0, 0}), 1);
  EXPECT_NEAR(es.eigenvalues(0), oracle::landau_level(2 * pi, 0), 0.02 * 2 * pi);
}

TEST(Assemble, LandauLadderWithFluxDegeneracy) {
  const auto grid = build_grid(make_flux(2, 3, Lattice::unit_square()), 48, 16);
  const auto es = eigensolve(assemble(grid, PotentialSpec(grid.flux.lattice), {0.2, 0.7}), 6);
  const double B = grid.flux.B;
  for (int n = 0; n < 3; ++n) {
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(es.eigenvalues(2 * n + k), oracle::landau_level(B, n), 0.03 * oracle::landau_level(B, n));
    }
    EXPECT_TRUE(same_cluster(es.eigenvalues(2 * n), es.eigenvalues(2 * n + 1)));
  }
  EXPECT_FALSE(same_cluster(es.eigenvalues(1), es.eigenvalues(2)));
}

TEST(Assemble, ConstantPotentialShiftsSpectrum) {
  const auto grid = build_grid(make_flux(1, 2, kOblique), 12, 6);
  const auto V = random_potential(kOblique, 4, 2, 0.8);
  const auto shifted = V.plus(PotentialSpec::constant(kOblique, 1.25));
  const auto a = eigensolve(assemble(grid, V, {0.1, 0.4}).dense(), 72);
  const auto b = eigensolve(assemble(grid, shifted, {0.1, 0.4}).dense(), 72);
  EXPECT_LE(max_abs_diff(b.eigenvalues.array() - 1.25, a.eigenvalues), 1e-10);
}

TEST(Assemble, ThetaPeriodic) {
  std::mt19937_64 rng(21);
  for (const auto& [p, q] : {std::pair{1L, 1L}, {1L, 2L}, {2L, 3L}}) {
    const auto grid = build_grid(make_flux(p, q, kOblique), 6 * q, 6);
    const auto V = random_potential(kOblique, rng(), 2, 1.0);
    const ThetaCoords t{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0, 1)};
    const int n = grid.size();
    const auto base = eigensolve(assemble(grid, V, t).dense(), n);
    for (const ThetaCoords s : {ThetaCoords{t.t1 + 1, t.t2}, {t.t1, t.t2 - 1}, {t.t1 + 2, t.t2 + 1}}) {
      const auto other = eigensolve(assemble(grid, V, s).dense(), n);
      EXPECT_LE(max_abs_diff(base.eigenvalues, other.eigenvalues), 1e-8);
    }
  }
}

TEST(DiscreteTranslation, CommutesWithLandauOperator) {
  for (const auto& [p, q] : {std::pair{2L, 1L}, {2L, 3L}, {3L, 2L}}) {
    const int N1 = 6 * static_cast<int>(q * p);
    const int N2 = 6 * static_cast<int>(p);
    const auto grid = build_grid(make_flux(p, q, Lattice::unit_square()), N1, N2);
    const SparseMatrix H = assemble(grid, PotentialSpec(grid.flux.lattice), {0.3, 0.8}).matrix();
    for (const auto& [k1, k2] : {std::pair{N1 / static_cast<int>(p), 0}, {0, N2 / static_cast<int>(p)}}) {
      const SparseMatrix T = discrete_translation(grid, k1, k2);
      const SparseMatrix C = T * H - H * T;
      EXPECT_LE(Eigen::MatrixXcd(C).cwiseAbs().maxCoeff(), 1e-10 * Eigen::MatrixXcd(H).cwiseAbs().maxCoeff());
      // Unitary.
      const SparseMatrix I = T.adjoint() * T;
      EXPECT_LE((Eigen::MatrixXcd(I) - Eigen::MatrixXcd::Identity(grid.size(), grid.size())).cwiseAbs().maxCoeff(),
                1e-14);
    }
  }
}

TEST(DiscreteTranslation, MagneticCellTranslationIsTrivialWithPotential) {
  const auto grid = build_grid(make_flux(1, 2, Lattice::unit_square()), 16, 8);
  const auto V = random_potential(grid.flux.lattice, 6, 2, 1.0);
  const SparseMatrix H = assemble(grid, V, {0.4, 0.1}).matrix();
  for (const auto& [k1, k2] : {std::pair{grid.N1, 0}, {0, grid.N2}}) {
    const SparseMatrix T = discrete_translation(grid, k1, k2);
    const SparseMatrix C = T * H - H * T;
    EXPECT_LE(Eigen::MatrixXcd(C).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Eigensolve, SmallExamples) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D.diagonal() << 3.0, 1.0, 2.0;
  const auto a = eigensolve(D, 3);
  EXPECT_NEAR(a.eigenvalues(0), 1.0, 1e-15);
  EXPECT_NEAR(a.eigenvalues(1), 2.0, 1e-15);
  EXPECT_NEAR(a.eigenvalues(2), 3.0, 1e-15);
  Eigen::MatrixXcd X(2, 2);
  X << 0.0, 1.0, 1.0, 0.0;
  const auto b = eigensolve(X, 2);
  EXPECT_NEAR(b.eigenvalues(0), -1.0, 1e-15);
  EXPECT_NEAR(b.eigenvalues(1), 1.0, 1e-15);
  EXPECT_TRUE(b.complete());
}

TEST(Eigensolve, MatchesBisectionOracle) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXcd A = oracle::random_hermitian(50, rng);
    const auto es = eigensolve(A, 50);
    const auto ref = oracle::hermitian_eigenvalues(A);
    for (int i = 0; i < 50; ++i) EXPECT_NEAR(es.eigenvalues(i), ref[i], 1e-8);
  }
}

TEST(Eigensolve, RejectsBadInput) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(3, 3);
  A(0, 1) = cplx(0.5, 0.0);
  EXPECT_EQ(kind_of([&] { eigensolve(A, 2); }), ErrorKind::assembly);
  EXPECT_EQ(kind_of([] { eigensolve(Eigen::MatrixXcd::Identity(3, 3), 0); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { eigensolve(Eigen::MatrixXcd::Identity(3, 3), 4); }), ErrorKind::invalid_argument);
}

TEST(Eigensolve, IterativeAgreesWithDense) {
  const auto grid = build_grid(make_flux(2, 3, kOblique), 36, 12);
  const auto H = assemble(grid, random_potential(kOblique, 8, 2, 0.5), {0.25, 0.5});
  const auto dense = eigensolve(H, 8, {.kind = SolverKind::dense});
  const auto iter = eigensolve(H, 8, {.kind = SolverKind::iterative});
  EXPECT_FALSE(iter.complete());
  EXPECT_LE(max_abs_diff(dense.eigenvalues, iter.eigenvalues), 1e-9);
}

TEST(Eigensolve, ResidualAndOrthonormalityContracts) {
  const auto grid = build_grid(make_flux(1, 2, kOblique), 32, 16);
  const auto H = assemble(grid, random_potential(kOblique, 9, 2, 0.5), {0.6, 0.2});
  for (const SolverKind kind : {SolverKind::dense, SolverKind::iterative}) {
    const auto es = eigensolve(H, 6, {.kind = kind});
    const double frob = Eigen::MatrixXcd(H.matrix()).norm();
    for (int i = 0; i < es.count(); ++i) {
      const double r = (H.matrix() * es.eigenvectors.col(i) - es.eigenvalues(i) * es.eigenvectors.col(i)).norm();
      EXPECT_LE(r, 1e-8 * frob);
      EXPECT_NEAR(es.residuals(i), r, 1e-8 * frob);
      if (i > 0) EXPECT_LE(es.eigenvalues(i - 1), es.eigenvalues(i));
    }
    const Eigen::MatrixXcd G = es.eigenvectors.adjoint() * es.eigenvectors;
    EXPECT_LE((G - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Clusters, Tolerance) {
  EXPECT_TRUE(same_cluster(1.0, 1.0 + 5e-7));
  EXPECT_FALSE(same_cluster(1.0, 1.0 + 2e-6));
  EXPECT_TRUE(same_cluster(1000.0, 1000.0 + 5e-4));
}
