#include "magbloch/io/commands.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "magbloch/algebra_check.hpp"
#include "magbloch/io/output.hpp"
#include "magbloch/spectral.hpp"

namespace magbloch::io {

using nlohmann::json;

namespace {

struct Context {
  const RunConfig& cfg;
  const RunOptions& options;
  FileStamp stamp;

  std::ostream* progress_stream() const {
    return options.quiet ? nullptr : options.progress;
  }

  SweepOptions sweep_options(std::string_view label) const {
    SweepOptions sweep;
    sweep.threads = options.threads;
    if (std::ostream* out = progress_stream()) {
      sweep.progress = [out, label = std::string(label)](int done, int total) {
        *out << "[" << label << "] " << done << "/" << total << " fibers\n";
      };
    }
    return sweep;
  }

  void note(const std::string& line) const {
    if (std::ostream* out = progress_stream()) *out << line << "\n";
  }

  json header(std::string_view schema) const {
    json doc;
    doc["schema"] = std::string("magbloch.") + std::string(schema);
    doc["schema_version"] = kSchemaVersion;
    doc["tool_version"] = stamp.version;
    doc["config_hash"] = stamp.config_hash;
    doc["config"] = json::parse(cfg.canonical_json());
    doc["warnings"] = cfg.warnings;
    return doc;
  }

  std::filesystem::path write(const std::string& name, std::string_view content, RunResult& result) const {
    const std::filesystem::path path = options.out_dir / name;
    write_file_atomic(path, content);
    result.files.push_back(path);
    return path;
  }
};

json theta_json(ThetaCoords t) { return json::array({t.t1, t.t2}); }

json eigen_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json component_json(const NodalComponent& c) {
  return {{"cells", c.cells},
          {"extent", c.extent},
          {"wraps", c.wraps},
          {"shape", to_string(c.shape)},
          {"anchor", {c.anchor_s1, c.anchor_s2}}};
}

void run_algebra(const Context& ctx, RunResult& result) {
  const auto checks = check_translation_algebra(ctx.cfg.flux(), ctx.cfg.seed, ctx.cfg.algebra.samples);
  json doc = ctx.header("algebra");
  json rows = json::array();
  std::vector<std::string> failed;
  for (const auto& c : checks) {
    rows.push_back({{"identity", c.name},
                    {"samples", c.samples},
                    {"max_error", c.max_error},
                    {"tolerance", c.tolerance},
                    {"passed", c.passed()}});
    if (!c.passed()) failed.push_back(c.name);
  }
  doc["checks"] = rows;
  doc["ok"] = failed.empty();
  ctx.write("algebra.json", doc.dump(2) + "\n", result);
  if (failed.empty()) {
    result.summary = "OK";
  } else {
    result.summary = "FAIL:";
    for (const auto& name : failed) result.summary += " [" + name + "]";
    result.ok = false;
  }
}

BandStructure sweep(const Context& ctx, const Grid& grid, const PotentialSpec& V, std::string_view label) {
  ctx.note("[" + std::string(label) + "] sweeping " + std::to_string(ctx.cfg.M1 * ctx.cfg.M2) +
           " fibers of dimension " + std::to_string(grid.size()));
  return band_sweep(grid, V, ctx.cfg.theta_grid(), ctx.cfg.bands, ctx.sweep_options(label));
}

void run_bands(const Context& ctx, RunResult& result) {
  const Grid grid = ctx.cfg.grid();
  const BandStructure bs = sweep(ctx, grid, ctx.cfg.potential_spec(), "bands");
  ctx.write("bands.csv", bands_csv(bs, ctx.stamp), result);
  const auto d = band_dispersions(bs);
  std::ostringstream summary;
  summary << "bands: " << bs.tgrid.M1 << "x" << bs.tgrid.M2 << " theta points, " << bs.bands
          << " bands, max dispersion " << format_double(*std::max_element(d.begin(), d.end()));
  result.summary = summary.str();
}

void run_flatness(const Context& ctx, RunResult& result) {
  const Grid grid = ctx.cfg.grid();
  const BandStructure bs = sweep(ctx, grid, ctx.cfg.potential_spec(), "flatness");
  FlatnessReport report;
  if (ctx.cfg.flatness.threshold) {
    report = flatness_test(bs, *ctx.cfg.flatness.threshold);
  } else {
    ctx.note("[flatness] calibrating threshold on the V = 0 operator");
    report = flatness_test(bs, calibrate_threshold(grid, ctx.cfg.theta_grid(), ctx.cfg.bands,
                                                   ctx.sweep_options("calibration")));
  }
  ctx.write("bands.csv", bands_csv(bs, ctx.stamp), result);
  ctx.write("flatness.json", flatness_json(report, ctx.stamp), result);

  const auto dispersive = std::count(report.flat.begin(), report.flat.end(), false);
  std::ostringstream summary;
  summary << "flatness: " << dispersive << "/" << report.flat.size() << " bands dispersive (threshold "
          << format_double(report.threshold) << ")";
  result.summary = summary.str();
}

void run_perturb(const Context& ctx, RunResult& result) {
  const RunConfig& cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  const PotentialSpec V0 = cfg.potential_spec();
  const PotentialSpec U = cfg.perturb.perturbation.build(cfg.lattice());
  ctx.note("[perturb] tracking levels over " + std::to_string(cfg.perturb.t_values.size()) + " values of t");
  const DegeneracyTable table =
      degeneracy_tracker(grid, V0, U, cfg.perturb.t_values, cfg.perturb.theta, cfg.bands);
  const EigenSolution base = eigensolve(assemble(grid, V0, cfg.perturb.theta), cfg.bands);

  json doc = ctx.header("perturb");
  doc["theta"] = theta_json(cfg.perturb.theta);
  doc["t_values"] = table.t_values;
  json levels = json::array();
  for (const auto& level : table.levels) {
    json snaps = json::array();
    for (std::size_t i = 0; i < level.snapshots.size(); ++i) {
      const auto& s = level.snapshots[i];
      snaps.push_back({{"t", table.t_values[i]},
                       {"energies", s.energies},
                       {"cluster_sizes", s.cluster_sizes},
                       {"tracking_lost", s.lost}});
    }
    // First-order oracle: eigenvalues of U restricted to the unperturbed level.
    const Eigen::MatrixXcd phi = base.eigenvectors.middleCols(level.first_index, level.size);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> projected(projected_perturbation(phi, U, grid));
    levels.push_back({{"first_index", level.first_index},
                      {"multiplicity", level.size},
                      {"energy", level.energy},
                      {"window", {level.window_lo, level.window_hi}},
                      {"snapshots", snaps},
                      {"slopes", level.slopes},
                      {"projected_perturbation_eigenvalues", eigen_json(projected.eigenvalues())}});
  }
  doc["levels"] = levels;

  if (!cfg.perturb.seeds.empty()) {
    const Calibration cal = calibrate_threshold(grid, cfg.theta_grid(), cfg.bands, ctx.sweep_options("calibration"));
    const GenericityReport gen =
        genericity_experiment(grid, V0, cfg.perturb.seeds, cfg.perturb.amplitude, cfg.perturb.max_harmonic,
                              cfg.theta_grid(), cfg.bands, cfg.perturb.checked_bands, cal,
                              ctx.sweep_options("genericity"));
    json seeds = json::array();
    for (const auto& s : gen.seeds) {
      json disp = json::array();
      for (std::size_t n = 0; n < s.dispersion.size(); ++n) {
        disp.push_back({{"band", n}, {"dispersion", s.dispersion[n]}, {"dispersive", static_cast<bool>(s.dispersive[n])}});
      }
      seeds.push_back({{"seed", s.seed}, {"bands", disp}});
    }
    doc["genericity"] = {{"amplitude", gen.amplitude},
                         {"max_harmonic", gen.max_harmonic},
                         {"checked_bands", gen.checked_bands},
                         {"threshold", gen.threshold},
                         {"dispersive_fraction", gen.dispersive_fraction},
                         {"seeds", seeds}};
  }
  ctx.write("perturb.json", doc.dump(2) + "\n", result);

  std::ostringstream summary;
  summary << "perturb: " << table.levels.size() << " levels tracked";
  if (doc.contains("genericity")) {
    summary << ", dispersive fraction " << format_double(doc["genericity"]["dispersive_fraction"].get<double>());
  }
  result.summary = summary.str();
}

void run_butterfly(const Context& ctx, RunResult& result) {
  const RunConfig& cfg = ctx.cfg;
  const auto rows = flux_sweep(cfg.lattice(), cfg.potential_spec(), cfg.butterfly.fractions,
                               cfg.butterfly.sites_per_cell, cfg.butterfly.theta, cfg.bands);
  std::string csv = "# magbloch " + ctx.stamp.version + "\n# config_hash " + ctx.stamp.config_hash + "\n";
  int failures = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      csv += "# error " + std::to_string(row.p) + "/" + std::to_string(row.q) + ": " + row.error + "\n";
      ++failures;
    }
  }
  csv += "p,q,flux,band,energy\n";
  for (const auto& row : rows) {
    if (!row.error.empty()) continue;
    for (std::size_t n = 0; n < row.energies.size(); ++n) {
      csv += std::to_string(row.p) + "," + std::to_string(row.q) + "," + format_double(row.ratio) + "," +
             std::to_string(n) + "," + format_double(row.energies[n]) + "\n";
    }
  }
  ctx.write("butterfly.csv", csv, result);
  result.summary = "butterfly: " + std::to_string(rows.size() - failures) + " fractions, " +
                   std::to_string(failures) + " failed";
}

void run_nodal(const Context& ctx, RunResult& result) {
  const RunConfig& cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  const int m = std::min(grid.size(), std::max(cfg.bands, cfg.nodal.band + 2));
  const EigenSolution es = eigensolve(assemble(grid, cfg.potential_spec(), cfg.nodal.theta), m);
  const NodalReport report = nodal_scan(es, cfg.nodal.band, grid, cfg.nodal.zero_tol);

  json doc = ctx.header("nodal");
  doc["theta"] = theta_json(cfg.nodal.theta);
  doc["band"] = cfg.nodal.band;
  doc["energy"] = es.eigenvalues(cfg.nodal.band);
  doc["zero_tol"] = report.zero_tol;
  doc["min_ratio"] = report.min_ratio;
  json zeros = json::array();
  for (const auto& c : report.zero_components) zeros.push_back(component_json(c));
  json critical = json::array();
  for (const auto& c : report.gradient_components) critical.push_back(component_json(c));
  doc["zero_components"] = zeros;
  doc["gradient_components"] = critical;
  ctx.write("nodal.json", doc.dump(2) + "\n", result);
  result.summary = "nodal: " + std::to_string(report.zero_components.size()) + " zero components, " +
                   std::to_string(report.gradient_components.size()) + " critical components";
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  for (const Command c : {Command::algebra_check, Command::bands, Command::flatness, Command::perturb,
                          Command::butterfly, Command::nodal}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::algebra_check: return "algebra-check";
    case Command::bands: return "bands";
    case Command::flatness: return "flatness";
    case Command::perturb: return "perturb";
    case Command::butterfly: return "butterfly";
    case Command::nodal: return "nodal";
  }
  return "unknown";
}

RunResult run_command(Command command, const RunConfig& cfg, const RunOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create output directory " + options.out_dir.string());

  const Context ctx{cfg, options, {cfg.hash(), std::string(tool_version())}};
  for (const auto& warning : cfg.warnings) ctx.note("warning: " + warning);

  RunResult result;
  switch (command) {
    case Command::algebra_check: run_algebra(ctx, result); break;
    case Command::bands: run_bands(ctx, result); break;
    case Command::flatness: run_flatness(ctx, result); break;
    case Command::perturb: run_perturb(ctx, result); break;
    case Command::butterfly: run_butterfly(ctx, result); break;
    case Command::nodal: run_nodal(ctx, result); break;
  }
  if (options.summary != nullptr) *options.summary << result.summary << "\n";
  return result;
}

std::string error_record(std::string_view kind, std::string_view message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

}  // namespace magbloch::io
