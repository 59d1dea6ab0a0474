// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Usage: magbloch_acceptance [path-to-magbloch-cli]
// With the CLI path, criterion 9 also compares files from two CLI runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "magbloch/algebra_check.hpp"
#include "magbloch/bands.hpp"
#include "magbloch/error.hpp"
#include "magbloch/io/commands.hpp"
#include "magbloch/io/config.hpp"
#include "magbloch/spectral.hpp"
#include "oracles.hpp"

using namespace magbloch;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Grid square_grid(long p, long q, int sites_per_cell) {
  return build_grid(make_flux(p, q, Lattice::unit_square()), sites_per_cell * static_cast<int>(q),
                    sites_per_cell);
}

// 1. Translation algebra.
Outcome phase_algebra() {
  const std::vector<std::pair<long, long>> fluxes{{1, 1}, {1, 2}, {2, 3}, {-3, 5}};
  const Lattice oblique(Vec2(1.0, 0.15), Vec2(0.4, 0.95));
  double worst = 0.0;
  int failures = 0, identities = 0;
  std::string failed;
  for (const auto& [p, q] : fluxes) {
    for (const Lattice& L : {Lattice::unit_square(), oblique}) {
      for (const auto& c : check_translation_algebra(make_flux(p, q, L), 1000 + q, 10000, 1e-12)) {
        ++identities;
        worst = std::max(worst, c.max_error);
        if (!c.passed()) {
          ++failures;
          failed += " " + c.name;
        }
      }
    }
  }
  return {failures == 0, std::to_string(identities) + " identities x 10^4 samples, max error " + sci(worst) +
                             (failed.empty() ? "" : ", failed:" + failed)};
}

// 2. Landau levels: exactly p states in the lowest cluster, mean near B, flat bands.
Outcome landau_flatness() {
  bool ok = true;
  std::ostringstream detail;
  for (const auto& [p, q] : {std::pair{1L, 1L}, {1L, 2L}, {2L, 3L}}) {
    const auto grid = square_grid(p, q, 32);
    const double B = grid.flux.B;
    const int m = 2 * static_cast<int>(p) + 1;
    const ThetaGrid tg{5, 5};
    const auto bs = band_sweep(grid, PotentialSpec(grid.flux.lattice), tg, m);
    bool cluster_ok = true;
    double worst_mean = 0.0;
    for (int j1 = 0; j1 < 5; ++j1) {
      for (int j2 = 0; j2 < 5; ++j2) {
        std::vector<double> e(m);
        for (int n = 0; n < m; ++n) e[n] = bs.energy(j1, j2, n);
        if (cluster_sizes(e).front() != p) cluster_ok = false;
        double mean = 0.0;
        for (int n = 0; n < p; ++n) mean += e[n] / static_cast<double>(p);
        worst_mean = std::max(worst_mean, std::abs(mean - B) / B);
      }
    }
    const auto d = band_dispersions(bs);
    const double worst_d = *std::max_element(d.begin(), d.end());
    const bool this_ok = cluster_ok && worst_mean <= 0.03 && worst_d <= 1e-3 * B;
    ok = ok && this_ok;
    detail << p << "/" << q << ": cluster " << (cluster_ok ? "ok" : "WRONG") << ", mean err " << sci(worst_mean)
           << ", max d_n/B " << sci(worst_d / B) << "; ";
  }
  return {ok, detail.str()};
}

// 3. Second-order convergence of the lowest eigenvalue to B.
Outcome convergence_order() {
  double err[2];
  int i = 0;
  for (const int N : {32, 64}) {
    const auto grid = square_grid(1, 1, N);
    const auto es = eigensolve(assemble(grid, PotentialSpec(grid.flux.lattice), {0, 0}), 1);
    err[i++] = std::abs(es.eigenvalues(0) - 2 * pi);
  }
  const double ratio = err[0] / err[1];
  return {ratio >= 3.5, "err(32) " + sci(err[0]) + ", err(64) " + sci(err[1]) + ", ratio " + sci(ratio)};
}

// 4. Spectra agree under θ → θ + integer shifts of the dual coordinates.
Outcome theta_periodicity() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const Vec2 e1(oracle::uniform(rng, 0.8, 1.2), oracle::uniform(rng, -0.2, 0.2));
    const Vec2 e2(oracle::uniform(rng, -0.5, 0.5), oracle::uniform(rng, 0.8, 1.2));
    const long q = 1 + static_cast<long>(rng() % 3);
    long p = 1 + static_cast<long>(rng() % 4);
    if (rng() % 2) p = -p;
    const auto flux = make_flux(p, q, Lattice(e1, e2));
    const auto grid = build_grid(flux, 6 * static_cast<int>(flux.q), 6);
    const auto V = random_potential(flux.lattice, rng(), 2, oracle::uniform(rng, 0.1, 2.0));
    const ThetaCoords t{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0, 1)};
    const int k1 = static_cast<int>(rng() % 5) - 2;
    const int k2 = static_cast<int>(rng() % 5) - 2;
    const int n = grid.size();
    const auto a = eigensolve(assemble(grid, V, t).dense(), n);
    const auto b = eigensolve(assemble(grid, V, {t.t1 + k1, t.t2 + (k1 == 0 && k2 == 0 ? 1 : k2)}).dense(), n);
    worst = std::max(worst, (a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "20 configurations, max |ΔE| " + sci(worst)};
}

// Window of consecutive eigenvalues with the best contour separation. The
// trapezoid error for an eigenvalue at distance ρ from the center decays like
// (min(ρ, r)/max(ρ, r))^N, so r is the geometric mean of the innermost outside
// and outermost inside distances.
Disk gap_disk(const Eigen::VectorXd& ev, double& rate) {
  const int n = static_cast<int>(ev.size());
  rate = 1.0;
  Disk best{0.0, 0.0};
  for (int first = 0; first < n; ++first) {
    for (int count = 1; count <= 4 && first + count <= n; ++count) {
      const double c = 0.5 * (ev(first) + ev(first + count - 1));
      const double inner = 0.5 * (ev(first + count - 1) - ev(first));
      double outer = std::numeric_limits<double>::infinity();
      if (first > 0) outer = std::min(outer, c - ev(first - 1));
      if (first + count < n) outer = std::min(outer, ev(first + count) - c);
      const double r = inner > 0 ? std::sqrt(inner * outer) : 0.5 * outer;
      const double worst = std::max(inner / r, r / outer);
      if (worst < rate) {
        rate = worst;
        best = {c, r};
      }
    }
  }
  return best;
}

// 5. Projector contracts and contour quadrature.
Outcome projectors() {
  std::mt19937_64 rng(505);
  double contract = 0.0, agreement = 0.0;
  bool rank_ok = true;
  for (int k = 0; k < 20; ++k) {
    const Eigen::MatrixXcd A = oracle::random_hermitian(30, rng);
    const auto es = eigensolve(A, 30);
    double rate = 0.0;
    const Disk d = gap_disk(es.eigenvalues, rate);
    const auto P = riesz_projector(es, d.center, d.radius);
    const Eigen::MatrixXcd& M = P.matrix;
    contract = std::max({contract, (M * M - M).cwiseAbs().maxCoeff(), (M - M.adjoint()).cwiseAbs().maxCoeff(),
                         std::abs(M.trace().real() - P.rank)});
    const auto Q = riesz_projector_contour(A, d.center, d.radius, 128);
    rank_ok = rank_ok && Q.rank == P.rank;
    agreement = std::max(agreement, (Q.matrix - M).cwiseAbs().maxCoeff());
  }
  return {contract <= 1e-10 && agreement <= 1e-8 && rank_ok,
          "20 matrices, contract defect " + sci(contract) + ", contour vs eigen-sum " + sci(agreement)};
}

// 6. Hellmann–Feynman against central differences.
Outcome hellmann_feynman_check() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  int cases = 0, draws = 0;
  while (cases < 20 && draws < 200) {
    ++draws;
    const long q = 1 + static_cast<long>(rng() % 2);
    const auto grid = square_grid(1, q, 8);
    const Lattice& L = grid.flux.lattice;
    const auto V = random_potential(L, rng(), 2, 1.0);
    const auto U = random_potential(L, rng(), 2, 1.0);
    const ThetaCoords t{oracle::uniform(rng, 0, 1), oracle::uniform(rng, 0, 1)};
    const int n = static_cast<int>(rng() % 3);
    const auto es = eigensolve(assemble(grid, V, t).dense(), n + 2);
    // Simple and well separated, so the central difference is accurate.
    const double gap = std::min(n > 0 ? es.eigenvalues(n) - es.eigenvalues(n - 1) : 1e300,
                                es.eigenvalues(n + 1) - es.eigenvalues(n));
    if (gap < 1e-2) continue;
    const double analytic = hellmann_feynman(es, n, U, grid);
    const double fd = oracle::central_difference(
        [&](double s) { return eigensolve(assemble(grid, V.plus(U, s), t).dense(), n + 2).eigenvalues(n); }, 1e-4);
    if (std::abs(fd) < 1e-3) continue;  // relative error meaningless for a stationary level
    worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
    ++cases;
  }
  return {cases == 20 && worst <= 1e-5, std::to_string(cases) + " cases, max relative error " + sci(worst)};
}

// 7. Random potentials give dispersive bands 0..2p; constant potential stays flat.
Outcome genericity() {
  bool ok = true;
  std::ostringstream detail;
  std::vector<std::uint64_t> seeds(10);
  for (std::uint64_t s = 0; s < 10; ++s) seeds[s] = 7000 + s;
  for (const auto& [p, q] : {std::pair{1L, 1L}, {1L, 2L}}) {
    const auto grid = square_grid(p, q, 16);
    const ThetaGrid tg{4, 4};
    const int checked = 2 * static_cast<int>(p) + 1;
    const int m = checked + 1;
    const auto cal = calibrate_threshold(grid, tg, m);
    const PotentialSpec V0(grid.flux.lattice);
    const auto report = genericity_experiment(grid, V0, seeds, 0.5, 2, tg, m, checked, cal);
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& s : report.seeds) {
      for (int n = 0; n < checked; ++n) smallest = std::min(smallest, s.dispersion[n]);
    }
    const auto control =
        flatness_test(band_sweep(grid, PotentialSpec::constant(grid.flux.lattice, 0.37), tg, m), cal);
    const bool this_ok = report.dispersive_fraction == 1.0 && control.all_flat();
    ok = ok && this_ok;
    detail << p << "/" << q << ": dispersive " << sci(100 * report.dispersive_fraction) << "% (min d_n "
           << sci(smallest) << " vs threshold " << sci(cal.threshold) << "), control "
           << (control.all_flat() ? "flat" : "NOT FLAT") << "; ";
  }
  return {ok, detail.str()};
}

// 8. Small-t slopes about a degenerate level match eig(Π₀UΠ₀).
Outcome splitting_oracle() {
  const auto grid = square_grid(2, 1, 16);
  const Lattice& L = grid.flux.lattice;
  const PotentialSpec V0(L);
  const std::vector<double> ts{-1e-3, 0.0, 1e-3};
  const ThetaCoords theta{0.31, 0.67};
  double worst = 0.0;
  int compared = 0;
  bool ok = true;
  for (const std::uint64_t seed : {81u, 82u, 83u}) {
    const auto U = random_potential(L, seed, 2, 1.0);
    const auto table = degeneracy_tracker(grid, V0, U, ts, theta, 6);
    const auto es0 = eigensolve(assemble(grid, V0, theta), 6);
    for (const auto& level : table.levels) {
      if (level.size != 2) continue;
      if (level.slopes.size() != 2) {
        ok = false;
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> proj(
          projected_perturbation(es0.eigenvectors.middleCols(level.first_index, 2), U, grid));
      for (int k = 0; k < 2; ++k) {
        const double ref = proj.eigenvalues()(k);
        worst = std::max(worst, std::abs(level.slopes[k] - ref) / std::abs(ref));
        ++compared;
      }
    }
  }
  ok = ok && compared >= 6 && worst <= 0.05;
  return {ok, std::to_string(compared) + " slopes over 3 perturbations, max relative deviation " + sci(worst)};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

constexpr const char* kDeterminismConfig = R"({
  "lattice": {"e1": [1, 0], "e2": [0.3, 0.9]},
  "flux": {"p": 1, "q": 2},
  "seed": 17,
  "potential": {"random": {"amplitude": 0.5}},
  "grid": {"N1": 16, "N2": 8},
  "theta_grid": {"M1": 3, "M2": 3},
  "bands": 4,
  "perturb": {"seeds": [1, 2]},
  "butterfly": {"fractions": [[1, 1], [1, 2], [2, 3]], "sites_per_cell": 8},
  "algebra": {"samples": 200}
})";

// 9. Byte-identical outputs for identical configs.
Outcome determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / ("magbloch-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(root);
  const auto cfg = io::parse_config(kDeterminismConfig);
  int files = 0, differing = 0;
  const std::vector<io::Command> commands{io::Command::algebra_check, io::Command::bands, io::Command::flatness,
                                          io::Command::perturb, io::Command::butterfly, io::Command::nodal};
  for (const auto c : commands) {
    const auto a = io::run_command(c, cfg, {.out_dir = root / "a", .threads = 1, .quiet = true});
    const auto b = io::run_command(c, cfg, {.out_dir = root / "b", .threads = 2, .quiet = true});
    for (std::size_t i = 0; i < a.files.size(); ++i) {
      ++files;
      if (slurp(a.files[i]) != slurp(b.files[i])) ++differing;
    }
  }
  std::string via_cli = "CLI not given";
  if (!cli.empty()) {
    const fs::path config = root / "config.jsonc";
    std::ofstream(config) << kDeterminismConfig;
    int cli_files = 0;
    for (const auto c : commands) {
      for (const char* run : {"c1", "c2"}) {
        const std::string cmd = "\"" + cli + "\" " + std::string(io::to_string(c)) + " --config \"" +
                                config.string() + "\" --out-dir \"" + (root / run).string() + "\" --quiet > " +
                                (root / "stdout.txt").string();
        if (std::system(cmd.c_str()) != 0) ++differing;
      }
    }
    for (const auto& entry : fs::directory_iterator(root / "c1")) {
      ++cli_files;
      if (slurp(entry.path()) != slurp(root / "c2" / entry.path().filename())) ++differing;
    }
    files += cli_files;
    via_cli = std::to_string(cli_files) + " via CLI";
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {differing == 0 && files > 0,
          std::to_string(files) + " files compared (" + via_cli + "), " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "phase algebra exactness", 5, phase_algebra},
      {2, "Landau flatness and degeneracy", 120, landau_flatness},
      {3, "convergence order", 60, convergence_order},
      {4, "theta periodicity", 120, theta_periodicity},
      {5, "projector contracts", 30, projectors},
      {6, "Hellmann-Feynman", 60, hellmann_feynman_check},
      {7, "genericity probe", 600, genericity},
      {8, "first-order splitting oracle", 120, splitting_oracle},
      {9, "determinism", 600, [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = out.pass && in_time;
    while (!out.detail.empty() && (out.detail.back() == ' ' || out.detail.back() == ';')) out.detail.pop_back();
    if (!pass) ++failed;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << out.detail
              << " [" << sci(secs) << " s of " << c.budget_s << " s" << (in_time ? "" : ", OVER BUDGET") << "]"
              << std::endl;
  }
  std::cout << (failed == 0 ? "ALL CRITERIA PASS" : std::to_string(failed) + " CRITERIA FAILED") << std::endl;
  return failed == 0 ? 0 : 1;
}
