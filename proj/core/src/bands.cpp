#include "magbloch/bands.hpp"

#include <algorithm>
#include <limits>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <queue>
#include <sstream>
#include <thread>

#include "magbloch/error.hpp"
#include "magbloch/spectral.hpp"

namespace magbloch {

namespace {

double operator_norm_inf(const SparseMatrix& H) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(H.rows());
  for (Eigen::Index k = 0; k < H.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(H, k); it; ++it) rows(it.row()) += std::abs(it.value());
  }
  return rows.maxCoeff();
}

double theta_spacing(const Grid& grid, const ThetaGrid& tgrid) {
  return std::max(grid.sub.f1.norm() / tgrid.M1, grid.sub.f2.norm() / tgrid.M2);
}

// Runs work(i) for i in [0, total) on up to `threads` workers; rethrows the
// failure with the lowest index.
template <class Work>
void parallel_for(int total, int threads, const std::function<void(int, int)>& progress, Work work) {
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(total));
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int i = next++; i < total; i = next++) {
      try {
        work(i);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
      const int finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, total);
      }
    }
  };
  const int count = std::clamp(threads, 1, std::max(total, 1));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

NodalComponent describe_component(const std::vector<std::pair<int, int>>& cells, bool wraps,
                                  const Grid& grid, const std::vector<std::pair<int, int>>& unwrapped) {
  NodalComponent out;
  out.cells = static_cast<int>(cells.size());
  out.wraps = wraps;
  out.anchor_s1 = cells.front().first;
  out.anchor_s2 = cells.front().second;
  int lo1 = unwrapped.front().first, hi1 = lo1;
  int lo2 = unwrapped.front().second, hi2 = lo2;
  for (const auto& [u1, u2] : unwrapped) {
    lo1 = std::min(lo1, u1);
    hi1 = std::max(hi1, u1);
    lo2 = std::min(lo2, u2);
    hi2 = std::max(hi2, u2);
  }
  out.extent = std::max(hi1 - lo1, hi2 - lo2) + 1;
  if (wraps) out.extent = std::max(out.extent, std::min(grid.N1, grid.N2));
  if (!wraps && out.extent <= 3) {
    out.shape = ComponentShape::point;
  } else if (out.cells <= 3 * out.extent) {
    out.shape = ComponentShape::curve;
  } else {
    out.shape = ComponentShape::region;
  }
  return out;
}

// 4-connected components of flagged sites on the periodic N1 × N2 grid.
std::vector<NodalComponent> components(const std::vector<bool>& flagged, const Grid& grid) {
  std::vector<NodalComponent> out;
  std::vector<int> seen(flagged.size(), 0);
  std::vector<std::pair<int, int>> unwrapped_of(flagged.size());
  constexpr int kSteps[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int s2 = 0; s2 < grid.N2; ++s2) {
    for (int s1 = 0; s1 < grid.N1; ++s1) {
      const int start = grid.index(s1, s2);
      if (!flagged[start] || seen[start]) continue;
      std::vector<std::pair<int, int>> cells;
      std::vector<std::pair<int, int>> unwrapped;
      bool wraps = false;
      std::queue<std::pair<int, int>> frontier;  // unwrapped coordinates
      frontier.push({s1, s2});
      seen[start] = 1;
      unwrapped_of[start] = {s1, s2};
      while (!frontier.empty()) {
        const auto [u1, u2] = frontier.front();
        frontier.pop();
        const int c1 = ((u1 % grid.N1) + grid.N1) % grid.N1;
        const int c2 = ((u2 % grid.N2) + grid.N2) % grid.N2;
        cells.push_back({c1, c2});
        unwrapped.push_back({u1, u2});
        for (const auto& step : kSteps) {
          const int v1 = u1 + step[0];
          const int v2 = u2 + step[1];
          const int w1 = ((v1 % grid.N1) + grid.N1) % grid.N1;
          const int w2 = ((v2 % grid.N2) + grid.N2) % grid.N2;
          const int idx = grid.index(w1, w2);
          if (!flagged[idx]) continue;
          if (seen[idx]) {
            if (unwrapped_of[idx] != std::pair{v1, v2}) wraps = true;
            continue;
          }
          seen[idx] = 1;
          unwrapped_of[idx] = {v1, v2};
          frontier.push({v1, v2});
        }
      }
      out.push_back(describe_component(cells, wraps, grid, unwrapped));
    }
  }
  return out;
}

}  // namespace

ThetaGrid make_theta_grid(int M1, int M2) {
  if (M1 < 1 || M2 < 1) throw Error(ErrorKind::invalid_argument, "theta grid needs M1, M2 >= 1");
  return {M1, M2};
}

BandStructure band_sweep(const Grid& grid, const PotentialSpec& V, const ThetaGrid& tgrid, int m,
                         const SweepOptions& options) {
  if (m < 1 || m > grid.size()) {
    throw Error(ErrorKind::invalid_argument, "band_sweep: band count must lie in [1, grid size]");
  }
  BandStructure bs;
  bs.tgrid = make_theta_grid(tgrid.M1, tgrid.M2);
  bs.bands = m;
  bs.energies.assign(static_cast<std::size_t>(tgrid.size()) * m, 0.0);
  bs.provenance = {grid.flux.p, grid.flux.q, V.hash(), grid.N1, grid.N2};

  parallel_for(tgrid.size(), options.threads, options.progress, [&](int i) {
    const int j1 = i / tgrid.M2;
    const int j2 = i % tgrid.M2;
    try {
      const EigenSolution es = eigensolve(assemble(grid, V, tgrid.point(j1, j2)), m, options.solver);
      for (int n = 0; n < m; ++n) bs.energy(j1, j2, n) = es.eigenvalues(n);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << e.what() << " [theta index (" << j1 << ", " << j2 << ")]";
      throw Error(e.kind(), msg.str());
    }
  });
  return bs;
}

std::vector<double> lipschitz_estimate(const BandStructure& bs, const Grid& grid) {
  const auto& tg = bs.tgrid;
  const double step1 = grid.sub.f1.norm() / tg.M1;
  const double step2 = grid.sub.f2.norm() / tg.M2;
  std::vector<double> out(static_cast<std::size_t>(bs.bands), 0.0);
  for (int n = 0; n < bs.bands; ++n) {
    for (int j1 = 0; j1 < tg.M1; ++j1) {
      for (int j2 = 0; j2 < tg.M2; ++j2) {
        const double here = bs.energy(j1, j2, n);
        if (tg.M1 > 1) {
          out[n] = std::max(out[n], std::abs(bs.energy((j1 + 1) % tg.M1, j2, n) - here) / step1);
        }
        if (tg.M2 > 1) {
          out[n] = std::max(out[n], std::abs(bs.energy(j1, (j2 + 1) % tg.M2, n) - here) / step2);
        }
      }
    }
  }
  return out;
}

bool FlatnessReport::all_flat() const {
  return std::all_of(flat.begin(), flat.end(), [](bool f) { return f; });
}

bool FlatnessReport::all_dispersive(int first, int count) const {
  for (int n = first; n < first + count; ++n) {
    if (n >= static_cast<int>(flat.size()) || flat[n]) return false;
  }
  return true;
}

std::vector<double> band_dispersions(const BandStructure& bs) {
  std::vector<double> out(static_cast<std::size_t>(bs.bands), 0.0);
  for (int n = 0; n < bs.bands; ++n) {
    double lo = bs.energy(0, 0, n);
    double hi = lo;
    for (int j1 = 0; j1 < bs.tgrid.M1; ++j1) {
      for (int j2 = 0; j2 < bs.tgrid.M2; ++j2) {
        lo = std::min(lo, bs.energy(j1, j2, n));
        hi = std::max(hi, bs.energy(j1, j2, n));
      }
    }
    out[n] = hi - lo;
  }
  return out;
}

FlatnessReport flatness_test(const BandStructure& bs, double threshold, ThresholdProvenance provenance) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::invalid_argument, "flatness threshold must be positive");
  FlatnessReport report;
  report.dispersion = band_dispersions(bs);
  report.threshold = threshold;
  report.provenance = std::move(provenance);
  report.flat.reserve(report.dispersion.size());
  for (const double d : report.dispersion) report.flat.push_back(d <= threshold);
  return report;
}

Calibration calibrate_threshold(const Grid& grid, const ThetaGrid& tgrid, int m,
                                const SweepOptions& options) {
  const PotentialSpec zero(grid.flux.lattice);
  const BandStructure reference = band_sweep(grid, zero, tgrid, m, options);
  const std::vector<double> d = band_dispersions(reference);
  Calibration cal;
  cal.provenance.source = "self-calibrated";
  cal.provenance.calibration_defect = *std::max_element(d.begin(), d.end());
  cal.provenance.factor = 10.0;
  cal.provenance.noise_floor = 1e-10 * operator_norm_inf(assemble(grid, zero, {}).matrix());
  cal.provenance.theta_spacing = theta_spacing(grid, tgrid);
  cal.threshold = std::max(cal.provenance.factor * cal.provenance.calibration_defect,
                           cal.provenance.noise_floor);
  return cal;
}

std::vector<int> cluster_sizes(std::span<const double> sorted) {
  std::vector<int> sizes;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && same_cluster(sorted[i - 1], sorted[i])) {
      ++sizes.back();
    } else {
      sizes.push_back(1);
    }
  }
  return sizes;
}

DegeneracyTable degeneracy_tracker(const Grid& grid, const PotentialSpec& V0, const PotentialSpec& U,
                                   std::span<const double> t_values, ThetaCoords theta, int m,
                                   const SolverOptions& solver) {
  if (std::find(t_values.begin(), t_values.end(), 0.0) == t_values.end()) {
    throw Error(ErrorKind::invalid_argument, "degeneracy_tracker: t_values must include 0");
  }
  for (const double t : t_values) {
    if (!std::isfinite(t)) throw Error(ErrorKind::invalid_argument, "degeneracy_tracker: t must be finite");
  }

  DegeneracyTable table;
  table.t_values.assign(t_values.begin(), t_values.end());

  const EigenSolution base = eigensolve(assemble(grid, V0, theta), m, solver);
  std::vector<double> ref(base.eigenvalues.data(), base.eigenvalues.data() + base.count());
  const std::vector<int> sizes = cluster_sizes(ref);
  // A cluster touching the last computed eigenvalue may be truncated.
  int first = 0;
  const int usable = static_cast<int>(sizes.size()) - (base.complete() ? 0 : 1);
  for (int c = 0; c < usable; ++c) {
    LevelTrack level;
    level.first_index = first;
    level.size = sizes[c];
    level.energy = ref[first];
    const double lo = ref[first];
    const double hi = ref[first + sizes[c] - 1];
    level.window_lo = first > 0 ? 0.5 * (ref[first - 1] + lo) : -std::numeric_limits<double>::infinity();
    level.window_hi = first + sizes[c] < static_cast<int>(ref.size()) ? 0.5 * (hi + ref[first + sizes[c]])
                                                                       : std::numeric_limits<double>::infinity();
    table.levels.push_back(std::move(level));
    first += sizes[c];
  }

  for (const double t : table.t_values) {
    const PotentialSpec V = V0.plus(U, t);
    const EigenSolution es = eigensolve(assemble(grid, V, theta), m, solver);
    for (auto& level : table.levels) {
      ClusterSnapshot snap;
      for (int k = 0; k < es.count(); ++k) {
        const double e = es.eigenvalues(k);
        if (e > level.window_lo && e < level.window_hi) snap.energies.push_back(e);
      }
      snap.cluster_sizes = cluster_sizes(snap.energies);
      snap.lost = static_cast<int>(snap.energies.size()) != level.size;
      level.snapshots.push_back(std::move(snap));
    }
  }

  // Least squares over the three smallest |t|. Sorted labels are matched to
  // first-order branches: ascending for t ≥ 0, reversed for t < 0.
  std::vector<std::size_t> order(table.t_values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ta = table.t_values[a];
    const double tb = table.t_values[b];
    return std::abs(ta) != std::abs(tb) ? std::abs(ta) < std::abs(tb) : ta < tb;
  });
  order.resize(std::min<std::size_t>(3, order.size()));

  for (auto& level : table.levels) {
    bool usable_fit = order.size() >= 2;
    double t_mean = 0.0;
    for (const auto i : order) {
      usable_fit = usable_fit && !level.snapshots[i].lost;
      t_mean += table.t_values[i];
    }
    t_mean /= static_cast<double>(order.size());
    double t_var = 0.0;
    for (const auto i : order) t_var += (table.t_values[i] - t_mean) * (table.t_values[i] - t_mean);
    if (!usable_fit || t_var == 0.0) continue;
    for (int branch = 0; branch < level.size; ++branch) {
      double e_mean = 0.0;
      std::vector<double> values;
      for (const auto i : order) {
        const int label = table.t_values[i] >= 0.0 ? branch : level.size - 1 - branch;
        values.push_back(level.snapshots[i].energies[label]);
        e_mean += values.back();
      }
      e_mean /= static_cast<double>(values.size());
      double cov = 0.0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        cov += (table.t_values[order[k]] - t_mean) * (values[k] - e_mean);
      }
      level.slopes.push_back(cov / t_var);
    }
  }
  return table;
}

GenericityReport genericity_experiment(const Grid& grid, const PotentialSpec& V0,
                                       std::span<const std::uint64_t> seeds, double amplitude,
                                       int max_harmonic, const ThetaGrid& tgrid, int m,
                                       int checked_bands, const Calibration& calibration,
                                       const SweepOptions& options) {
  if (amplitude < 0.0) throw Error(ErrorKind::invalid_argument, "genericity_experiment: amplitude must be >= 0");
  if (checked_bands < 1 || checked_bands > m) {
    throw Error(ErrorKind::invalid_argument, "genericity_experiment: checked bands must lie in [1, m]");
  }
  GenericityReport report;
  report.amplitude = amplitude;
  report.max_harmonic = max_harmonic;
  report.checked_bands = checked_bands;
  report.threshold = calibration.threshold;
  report.provenance = calibration.provenance;

  int dispersive = 0;
  int total = 0;
  for (const std::uint64_t seed : seeds) {
    const PotentialSpec V = V0.plus(random_potential(grid.flux.lattice, seed, max_harmonic, amplitude));
    const FlatnessReport flat = flatness_test(band_sweep(grid, V, tgrid, m, options), calibration);
    SeedResult result;
    result.seed = seed;
    result.dispersion = flat.dispersion;
    for (const bool f : flat.flat) result.dispersive.push_back(!f);
    for (int n = 0; n < checked_bands; ++n) {
      dispersive += result.dispersive[n] ? 1 : 0;
      ++total;
    }
    report.seeds.push_back(std::move(result));
  }
  report.dispersive_fraction = total > 0 ? static_cast<double>(dispersive) / total : 0.0;
  return report;
}

std::vector<FluxSweepRow> flux_sweep(const Lattice& lattice, const PotentialSpec& V,
                                     std::span<const std::pair<long, long>> fractions,
                                     int sites_per_cell, ThetaCoords theta, int m,
                                     const SolverOptions& solver) {
  std::map<std::pair<long, long>, FluxSweepRow> rows;  // keyed by reduced (p, q)
  std::vector<FluxSweepRow> failed;
  for (const auto& [p_in, q_in] : fractions) {
    FluxSweepRow row;
    row.p = p_in;
    row.q = q_in;
    try {
      const FluxRational flux = make_flux(p_in, q_in, lattice);
      row.p = flux.p;
      row.q = flux.q;
      row.ratio = static_cast<double>(flux.p) / static_cast<double>(flux.q);
      row.B = flux.B;
      if (rows.contains({flux.p, flux.q})) continue;
      const Grid grid = build_grid(flux, sites_per_cell * static_cast<int>(flux.q), sites_per_cell);
      const EigenSolution es = eigensolve(assemble(grid, V, theta), m, solver);
      row.energies.assign(es.eigenvalues.data(), es.eigenvalues.data() + es.count());
      rows.emplace(std::pair{flux.p, flux.q}, std::move(row));
    } catch (const std::exception& e) {
      row.error = e.what();
      failed.push_back(std::move(row));
    }
  }
  std::vector<FluxSweepRow> out;
  for (auto& [key, row] : rows) out.push_back(std::move(row));
  std::stable_sort(out.begin(), out.end(), [](const FluxSweepRow& a, const FluxSweepRow& b) {
    // p_a/q_a < p_b/q_b with q > 0, exactly.
    return a.p * b.q < b.p * a.q;
  });
  for (auto& row : failed) out.push_back(std::move(row));
  return out;
}

std::string to_string(ComponentShape shape) {
  switch (shape) {
    case ComponentShape::point: return "point";
    case ComponentShape::curve: return "curve";
    case ComponentShape::region: return "region";
  }
  return "unknown";
}

NodalReport nodal_scan(const Eigen::VectorXcd& phi, const Grid& grid, double zero_tol) {
  if (phi.size() != grid.size()) throw Error(ErrorKind::invalid_argument, "nodal_scan: vector does not match the grid");
  if (!(zero_tol > 0.0)) throw Error(ErrorKind::invalid_argument, "nodal_scan: zero_tol must be positive");

  const Eigen::VectorXd modulus = phi.cwiseAbs();
  const double peak = modulus.maxCoeff();
  NodalReport report;
  report.zero_tol = zero_tol;
  report.min_ratio = peak > 0.0 ? modulus.minCoeff() / peak : 0.0;

  // Central differences of the twisted section; ψ(x ± a) across the cell
  // boundary is recovered through the boundary factor.
  auto value_at = [&](int s1, int s2) -> cplx {
    const int n1 = s1 >= grid.N1 ? 1 : (s1 < 0 ? -1 : 0);
    const int n2 = s2 >= grid.N2 ? 1 : (s2 < 0 ? -1 : 0);
    const int t1 = s1 - n1 * grid.N1;
    const int t2 = s2 - n2 * grid.N2;
    return boundary_factor(grid, grid.site(t1, t2), {n1, n2}) * phi(grid.index(t1, t2));
  };
  Eigen::VectorXd gradient(grid.size());
  const double h1 = grid.a1.norm();
  const double h2 = grid.a2.norm();
  for (int s2 = 0; s2 < grid.N2; ++s2) {
    for (int s1 = 0; s1 < grid.N1; ++s1) {
      const double g1 = std::abs(value_at(s1 + 1, s2) - value_at(s1 - 1, s2)) / (2.0 * h1);
      const double g2 = std::abs(value_at(s1, s2 + 1) - value_at(s1, s2 - 1)) / (2.0 * h2);
      gradient(grid.index(s1, s2)) = std::hypot(g1, g2);
    }
  }
  const double grad_peak = gradient.maxCoeff();

  std::vector<bool> zero(static_cast<std::size_t>(grid.size()));
  std::vector<bool> critical(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    zero[i] = modulus(i) < zero_tol * peak;
    critical[i] = zero[i] && gradient(i) < zero_tol * grad_peak;
  }
  report.zero_components = components(zero, grid);
  report.gradient_components = components(critical, grid);
  return report;
}

NodalReport nodal_scan(const EigenSolution& es, int index, const Grid& grid, double zero_tol) {
  if (index < 0 || index >= es.count()) throw Error(ErrorKind::invalid_argument, "nodal_scan: index out of range");
  const double e = es.eigenvalues(index);
  const bool below = index > 0 && same_cluster(es.eigenvalues(index - 1), e);
  const bool above = index + 1 < es.count() && same_cluster(e, es.eigenvalues(index + 1));
  if (below || above || (index + 1 == es.count() && !es.complete())) {
    throw Error(ErrorKind::degenerate_level,
                "nodal_scan: eigenvalue is degenerate or its multiplicity is unknown");
  }
  return nodal_scan(es.eigenvectors.col(index), grid, zero_tol);
}

}  // namespace magbloch
