#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "magbloch/fiber.hpp"

namespace magbloch {

/// θ(j1, j2) = (j1/M1)·f1 + (j2/M2)·f2, one fundamental domain of (Γ')*.
struct ThetaGrid {
  int M1 = 1;
  int M2 = 1;

  int size() const noexcept { return M1 * M2; }
  ThetaCoords point(int j1, int j2) const noexcept {
    return {static_cast<double>(j1) / M1, static_cast<double>(j2) / M2};
  }
};

ThetaGrid make_theta_grid(int M1, int M2);

struct BandProvenance {
  long p = 0;
  long q = 1;
  std::uint64_t potential_hash = 0;
  int N1 = 0;
  int N2 = 0;
};

/// E_n(θ) on a θ grid, sorted ascending in n at every θ.
struct BandStructure {
  ThetaGrid tgrid;
  int bands = 0;
  std::vector<double> energies;  // [M1][M2][bands], row-major
  BandProvenance provenance;

  double energy(int j1, int j2, int n) const {
    return energies[(static_cast<std::size_t>(j1) * tgrid.M2 + j2) * bands + n];
  }
  double& energy(int j1, int j2, int n) {
    return energies[(static_cast<std::size_t>(j1) * tgrid.M2 + j2) * bands + n];
  }
};

struct SweepOptions {
  int threads = 1;
  SolverOptions solver;
  /// Called after each completed fiber with (done, total); may be empty.
  std::function<void(int, int)> progress;
};

/// One eigensolve per θ point. The result does not depend on the number of
/// threads or the order in which fibers complete. Solver failures are
/// rethrown with the offending θ indices in the message.
BandStructure band_sweep(const Grid& grid, const PotentialSpec& V, const ThetaGrid& tgrid, int m,
                         const SweepOptions& options = {});

/// max over adjacent θ samples of |ΔE_n|/|Δθ|, per band.
std::vector<double> lipschitz_estimate(const BandStructure& bs, const Grid& grid);

struct ThresholdProvenance {
  std::string source = "explicit";  // "explicit" or "self-calibrated"
  double calibration_defect = 0.0;  // max dispersion of the V = 0 bands on the same grid
  double factor = 10.0;
  double noise_floor = 0.0;         // solver noise allowance
  double theta_spacing = 0.0;       // largest |Δθ| between neighbouring samples
};

struct FlatnessReport {
  std::vector<double> dispersion;  // d_n = max_θ E_n − min_θ E_n
  std::vector<bool> flat;          // d_n ≤ threshold
  double threshold = 0.0;
  ThresholdProvenance provenance;

  bool all_flat() const;
  bool all_dispersive(int first, int count) const;
};

/// Dispersion of every band.
std::vector<double> band_dispersions(const BandStructure& bs);

FlatnessReport flatness_test(const BandStructure& bs, double threshold,
                             ThresholdProvenance provenance = {});

struct Calibration {
  double threshold = 0.0;
  ThresholdProvenance provenance;
};

/// Threshold = max(10 × the V = 0 flatness defect on the same grid, 1e-10·‖H₀‖∞).
Calibration calibrate_threshold(const Grid& grid, const ThetaGrid& tgrid, int m,
                                const SweepOptions& options = {});

inline FlatnessReport flatness_test(const BandStructure& bs, const Calibration& cal) {
  return flatness_test(bs, cal.threshold, cal.provenance);
}

// Degeneracy tracking under V0 + tU.

struct ClusterSnapshot {
  std::vector<double> energies;   // eigenvalues in the level's tracking window
  std::vector<int> cluster_sizes;
  bool lost = false;              // window count differs from the reference size
};

struct LevelTrack {
  int first_index = 0;            // band index of the level at t = 0
  int size = 0;                   // multiplicity at t = 0
  double energy = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<ClusterSnapshot> snapshots;  // one per t value
  /// First-order branch slopes, ascending; empty when tracking was lost on a
  /// fit point.
  std::vector<double> slopes;
};

struct DegeneracyTable {
  std::vector<double> t_values;
  std::vector<LevelTrack> levels;
};

/// Throws ErrorKind::invalid_argument unless t_values contains 0.
DegeneracyTable degeneracy_tracker(const Grid& grid, const PotentialSpec& V0,
                                   const PotentialSpec& U, std::span<const double> t_values,
                                   ThetaCoords theta, int m, const SolverOptions& solver = {});

/// Cluster sizes of an ascending eigenvalue list.
std::vector<int> cluster_sizes(std::span<const double> sorted);

// Genericity probe.

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<double> dispersion;
  std::vector<bool> dispersive;
};

struct GenericityReport {
  double amplitude = 0.0;
  int max_harmonic = 0;
  int checked_bands = 0;
  double threshold = 0.0;
  ThresholdProvenance provenance;
  std::vector<SeedResult> seeds;
  double dispersive_fraction = 0.0;  // over (seed, band) pairs with band < checked_bands
};

GenericityReport genericity_experiment(const Grid& grid, const PotentialSpec& V0,
                                       std::span<const std::uint64_t> seeds, double amplitude,
                                       int max_harmonic, const ThetaGrid& tgrid, int m,
                                       int checked_bands, const Calibration& calibration,
                                       const SweepOptions& options = {});

// Spectrum against flux.

struct FluxSweepRow {
  long p = 0;
  long q = 1;
  double ratio = 0.0;  // p/q
  double B = 0.0;
  std::vector<double> energies;
  std::string error;   // non-empty when this fraction failed
};

/// The grid for p/q has sites_per_cell·q × sites_per_cell sites. Fractions are
/// reduced, duplicates dropped, rows sorted by p/q; failures stay local to a row.
std::vector<FluxSweepRow> flux_sweep(const Lattice& lattice, const PotentialSpec& V,
                                     std::span<const std::pair<long, long>> fractions,
                                     int sites_per_cell, ThetaCoords theta, int m,
                                     const SolverOptions& solver = {});

// Nodal diagnostics.

enum class ComponentShape { point, curve, region };
std::string to_string(ComponentShape shape);

struct NodalComponent {
  int cells = 0;
  int extent = 0;       // largest side of the unwrapped bounding box, in sites
  bool wraps = false;   // winds around the periodic cell
  ComponentShape shape = ComponentShape::point;
  int anchor_s1 = 0;
  int anchor_s2 = 0;
};

struct NodalReport {
  double zero_tol = 0.0;
  double min_ratio = 0.0;  // min|φ| / max|φ|
  std::vector<NodalComponent> zero_components;
  std::vector<NodalComponent> gradient_components;  // sites where φ and ∇φ are both small

  bool empty() const noexcept { return zero_components.empty(); }
};

/// Heuristic scan of sites with |φ| < zero_tol·max|φ|. Components are
/// 4-connected on the periodic grid. Reports, never proves.
NodalReport nodal_scan(const Eigen::VectorXcd& phi, const Grid& grid, double zero_tol);

/// Refuses degenerate levels (ErrorKind::degenerate_level): the nodal set of
/// a vector in a degenerate eigenspace depends on the basis.
NodalReport nodal_scan(const EigenSolution& es, int index, const Grid& grid, double zero_tol);

}  // namespace magbloch
