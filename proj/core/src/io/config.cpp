#include "magbloch/io/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace magbloch::io {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream out;
  out << "invalid configuration (" << issues.size() << (issues.size() == 1 ? " issue)" : " issues)");
  for (const auto& issue : issues) out << "\n  " << issue;
  return out.str();
}

// Walks the document, recording every problem with its JSON-pointer path
// instead of stopping at the first one.
class Reader {
 public:
  std::vector<std::string> issues;

  void fail(const std::string& path, const std::string& what) { issues.push_back(path + ": " + what); }

  const json* object(const json& parent, const std::string& path, const char* key,
                     std::initializer_list<const char*> allowed, bool required = false) {
    const std::string here = path + "/" + key;
    if (!parent.contains(key)) {
      if (required) fail(here, "missing required key");
      return nullptr;
    }
    const json& node = parent.at(key);
    if (!node.is_object()) {
      fail(here, "expected an object");
      return nullptr;
    }
    reject_unknown(node, here, allowed);
    return &node;
  }

  void reject_unknown(const json& node, const std::string& path, std::initializer_list<const char*> allowed) {
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : node.items()) {
      if (!known.contains(key)) fail(path + "/" + key, "unknown key");
    }
  }

  template <class Int>
  void integer(const json* parent, const std::string& path, const char* key, Int& out,
               bool required = false) {
    const std::string here = path + "/" + key;
    if (parent == nullptr || !parent->contains(key)) {
      if (required) fail(here, "missing required key");
      return;
    }
    const json& node = parent->at(key);
    if (!node.is_number_integer()) {
      fail(here, "expected an integer");
      return;
    }
    if constexpr (std::is_unsigned_v<Int>) {
      if (node.is_number_unsigned()) {
        out = node.get<Int>();
      } else {
        fail(here, "expected a non-negative integer");
      }
    } else {
      out = node.get<Int>();
    }
  }

  void number(const json* parent, const std::string& path, const char* key, double& out) {
    const std::string here = path + "/" + key;
    if (parent == nullptr || !parent->contains(key)) return;
    const json& node = parent->at(key);
    if (!node.is_number() || !std::isfinite(node.get<double>())) {
      fail(here, "expected a finite number");
      return;
    }
    out = node.get<double>();
  }

  bool pair(const json& node, const std::string& path, double& a, double& b) {
    if (!node.is_array() || node.size() != 2 || !node[0].is_number() || !node[1].is_number() ||
        !std::isfinite(node[0].get<double>()) || !std::isfinite(node[1].get<double>())) {
      fail(path, "expected an array of two finite numbers");
      return false;
    }
    a = node[0].get<double>();
    b = node[1].get<double>();
    return true;
  }

  void theta(const json* parent, const std::string& path, ThetaCoords& out) {
    if (parent == nullptr || !parent->contains("theta")) return;
    pair(parent->at("theta"), path + "/theta", out.t1, out.t2);
  }

  void potential(const json* node, const std::string& path, PotentialConfig& out) {
    if (node == nullptr) return;
    if (node->contains("constant")) {
      double c = 0.0;
      number(node, path, "constant", c);
      out.modes.push_back({0, 0, cplx(c, 0.0)});
    }
    if (node->contains("modes")) {
      const json& modes = node->at("modes");
      const std::string mpath = path + "/modes";
      if (!modes.is_array()) {
        fail(mpath, "expected an array");
      } else {
        for (std::size_t i = 0; i < modes.size(); ++i) {
          const std::string ipath = mpath + "/" + std::to_string(i);
          const json& mode = modes[i];
          if (!mode.is_object()) {
            fail(ipath, "expected an object {\"m\": [m1, m2], \"c\": [re, im]}");
            continue;
          }
          reject_unknown(mode, ipath, {"m", "c"});
          if (!mode.contains("m") || !mode["m"].is_array() || mode["m"].size() != 2 ||
              !mode["m"][0].is_number_integer() || !mode["m"][1].is_number_integer()) {
            fail(ipath + "/m", "expected two integers");
            continue;
          }
          double re = 0.0, im = 0.0;
          if (!mode.contains("c")) {
            fail(ipath + "/c", "missing required key");
            continue;
          }
          if (!pair(mode["c"], ipath + "/c", re, im)) continue;
          out.modes.push_back({mode["m"][0].get<int>(), mode["m"][1].get<int>(), cplx(re, im)});
        }
      }
    }
    if (const json* random = object(*node, path, "random", {"seed", "max_harmonic", "amplitude"})) {
      RandomPotentialConfig r;
      const std::string rpath = path + "/random";
      integer(random, rpath, "seed", r.seed);
      integer(random, rpath, "max_harmonic", r.max_harmonic);
      number(random, rpath, "amplitude", r.amplitude);
      if (r.max_harmonic < 0) fail(rpath + "/max_harmonic", "must be >= 0");
      if (r.amplitude < 0.0) fail(rpath + "/amplitude", "must be >= 0");
      out.random = r;
    }
  }
};

json mode_json(const FourierMode& mode) {
  return {{"m", {mode.m1, mode.m2}}, {"c", {mode.c.real(), mode.c.imag()}}};
}

json potential_json(const PotentialConfig& cfg) {
  json out = json::object();
  json modes = json::array();
  for (const auto& mode : cfg.modes) modes.push_back(mode_json(mode));
  out["modes"] = modes;
  if (cfg.random) {
    out["random"] = {{"seed", cfg.random->seed},
                     {"max_harmonic", cfg.random->max_harmonic},
                     {"amplitude", cfg.random->amplitude}};
  }
  return out;
}

}  // namespace

PotentialSpec PotentialConfig::build(const Lattice& lattice) const {
  PotentialSpec spec(lattice, modes);
  if (random) {
    spec = spec.plus(random_potential(lattice, random->seed, random->max_harmonic, random->amplitude));
  }
  return spec;
}

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(ErrorKind::config, join_issues(issues)), issues_(std::move(issues)) {}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::canonical_json() const {
  json doc;
  doc["lattice"] = {{"e1", {e1.x(), e1.y()}}, {"e2", {e2.x(), e2.y()}}};
  doc["flux"] = {{"p", p}, {"q", q}};
  doc["seed"] = seed;
  doc["potential"] = potential_json(potential);
  doc["grid"] = {{"N1", N1}, {"N2", N2}};
  doc["theta_grid"] = {{"M1", M1}, {"M2", M2}};
  doc["bands"] = bands;
  doc["flatness"] = json::object();
  if (flatness.threshold) doc["flatness"]["threshold"] = *flatness.threshold;
  json fractions = json::array();
  for (const auto& [fp, fq] : butterfly.fractions) fractions.push_back({fp, fq});
  doc["perturb"] = {{"t_values", perturb.t_values},
                    {"perturbation", potential_json(perturb.perturbation)},
                    {"theta", {perturb.theta.t1, perturb.theta.t2}},
                    {"seeds", perturb.seeds},
                    {"amplitude", perturb.amplitude},
                    {"max_harmonic", perturb.max_harmonic},
                    {"checked_bands", perturb.checked_bands}};
  doc["butterfly"] = {{"fractions", fractions},
                      {"sites_per_cell", butterfly.sites_per_cell},
                      {"theta", {butterfly.theta.t1, butterfly.theta.t2}}};
  doc["nodal"] = {{"theta", {nodal.theta.t1, nodal.theta.t2}},
                  {"band", nodal.band},
                  {"zero_tol", nodal.zero_tol}};
  doc["algebra"] = {{"samples", algebra.samples}};
  return doc.dump();
}

std::string RunConfig::hash() const {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << fnv1a(canonical_json());
  return out.str();
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("/: malformed JSON: ") + e.what()});
  }
  if (!doc.is_object()) throw ConfigError({"/: expected a JSON object"});

  Reader r;
  RunConfig cfg;
  r.reject_unknown(doc, "", {"lattice", "flux", "seed", "potential", "grid", "theta_grid", "bands",
                             "flatness", "perturb", "butterfly", "nodal", "algebra"});

  if (const json* lattice = r.object(doc, "", "lattice", {"e1", "e2"}, true)) {
    for (const char* key : {"e1", "e2"}) {
      Vec2& target = std::string_view(key) == "e1" ? cfg.e1 : cfg.e2;
      if (!lattice->contains(key)) {
        r.fail(std::string("/lattice/") + key, "missing required key");
      } else {
        r.pair(lattice->at(key), std::string("/lattice/") + key, target.x(), target.y());
      }
    }
    try {
      (void)cfg.lattice();
    } catch (const Error& e) {
      r.fail("/lattice", e.what());
    }
  }

  bool flux_ok = false;
  if (const json* flux = r.object(doc, "", "flux", {"p", "q"}, true)) {
    const std::size_t before = r.issues.size();
    r.integer(flux, "/flux", "p", cfg.p, true);
    r.integer(flux, "/flux", "q", cfg.q, true);
    if (r.issues.size() == before) {
      if (cfg.q < 1) {
        r.fail("/flux/q", "must be >= 1");
      } else {
        flux_ok = true;
        const long g = std::gcd(cfg.p, cfg.q);
        if (g > 1) {
          cfg.warnings.push_back("flux " + std::to_string(cfg.p) + "/" + std::to_string(cfg.q) +
                                 " normalized to " + std::to_string(cfg.p / g) + "/" +
                                 std::to_string(cfg.q / g));
          cfg.p /= g;
          cfg.q /= g;
        }
      }
    }
  }

  r.integer(&doc, "", "seed", cfg.seed);

  if (const json* potential = r.object(doc, "", "potential", {"constant", "modes", "random"})) {
    r.potential(potential, "/potential", cfg.potential);
    if (cfg.potential.random && !potential->at("random").contains("seed")) cfg.potential.random->seed = cfg.seed;
  }

  if (const json* grid = r.object(doc, "", "grid", {"N1", "N2"})) {
    r.integer(grid, "/grid", "N1", cfg.N1);
    r.integer(grid, "/grid", "N2", cfg.N2);
  }
  if (cfg.N1 < 4) r.fail("/grid/N1", "must be >= 4");
  if (cfg.N2 < 4) r.fail("/grid/N2", "must be >= 4");

  if (const json* tgrid = r.object(doc, "", "theta_grid", {"M1", "M2"})) {
    r.integer(tgrid, "/theta_grid", "M1", cfg.M1);
    r.integer(tgrid, "/theta_grid", "M2", cfg.M2);
  }
  if (cfg.M1 < 1) r.fail("/theta_grid/M1", "must be >= 1");
  if (cfg.M2 < 1) r.fail("/theta_grid/M2", "must be >= 1");

  cfg.bands = flux_ok ? static_cast<int>(4 * std::max(1L, std::labs(cfg.p))) : 4;
  r.integer(&doc, "", "bands", cfg.bands);
  if (cfg.bands < 1) r.fail("/bands", "must be >= 1");
  if (cfg.N1 >= 4 && cfg.N2 >= 4 && cfg.bands > cfg.N1 * cfg.N2) r.fail("/bands", "exceeds the grid dimension");

  if (const json* flat = r.object(doc, "", "flatness", {"threshold"})) {
    if (flat->contains("threshold")) {
      double t = 0.0;
      r.number(flat, "/flatness", "threshold", t);
      if (!(t > 0.0)) r.fail("/flatness/threshold", "must be > 0");
      cfg.flatness.threshold = t;
    }
  }

  cfg.perturb.perturbation.random = RandomPotentialConfig{cfg.seed + 1, 2, 1.0};
  if (const json* pert = r.object(doc, "", "perturb",
                                  {"t_values", "perturbation", "theta", "seeds", "amplitude",
                                   "max_harmonic", "checked_bands"})) {
    if (pert->contains("t_values")) {
      const json& ts = pert->at("t_values");
      if (!ts.is_array() || ts.empty()) {
        r.fail("/perturb/t_values", "expected a non-empty array of numbers");
      } else {
        cfg.perturb.t_values.clear();
        for (std::size_t i = 0; i < ts.size(); ++i) {
          if (!ts[i].is_number() || !std::isfinite(ts[i].get<double>())) {
            r.fail("/perturb/t_values/" + std::to_string(i), "expected a finite number");
          } else {
            cfg.perturb.t_values.push_back(ts[i].get<double>());
          }
        }
      }
    }
    if (const json* u = r.object(*pert, "/perturb", "perturbation", {"constant", "modes", "random"})) {
      cfg.perturb.perturbation = {};
      r.potential(u, "/perturb/perturbation", cfg.perturb.perturbation);
    }
    r.theta(pert, "/perturb", cfg.perturb.theta);
    if (pert->contains("seeds")) {
      const json& seeds = pert->at("seeds");
      if (!seeds.is_array()) {
        r.fail("/perturb/seeds", "expected an array of non-negative integers");
      } else {
        for (std::size_t i = 0; i < seeds.size(); ++i) {
          if (!seeds[i].is_number_unsigned()) {
            r.fail("/perturb/seeds/" + std::to_string(i), "expected a non-negative integer");
          } else {
            cfg.perturb.seeds.push_back(seeds[i].get<std::uint64_t>());
          }
        }
      }
    }
    r.number(pert, "/perturb", "amplitude", cfg.perturb.amplitude);
    r.integer(pert, "/perturb", "max_harmonic", cfg.perturb.max_harmonic);
    r.integer(pert, "/perturb", "checked_bands", cfg.perturb.checked_bands);
  }
  if (std::find(cfg.perturb.t_values.begin(), cfg.perturb.t_values.end(), 0.0) == cfg.perturb.t_values.end()) {
    r.fail("/perturb/t_values", "must include 0");
  }
  if (cfg.perturb.amplitude < 0.0) r.fail("/perturb/amplitude", "must be >= 0");
  if (cfg.perturb.max_harmonic < 0) r.fail("/perturb/max_harmonic", "must be >= 0");
  if (cfg.perturb.checked_bands == 0) cfg.perturb.checked_bands = static_cast<int>(2 * std::labs(cfg.p) + 1);
  if (cfg.perturb.checked_bands < 1 || cfg.perturb.checked_bands > cfg.bands) {
    r.fail("/perturb/checked_bands", "must lie in [1, bands]");
  }

  if (const json* fly = r.object(doc, "", "butterfly", {"fractions", "sites_per_cell", "theta"})) {
    if (fly->contains("fractions")) {
      const json& fr = fly->at("fractions");
      cfg.butterfly.fractions.clear();
      if (!fr.is_array() || fr.empty()) {
        r.fail("/butterfly/fractions", "expected a non-empty array of [p, q] pairs");
      } else {
        for (std::size_t i = 0; i < fr.size(); ++i) {
          const std::string fpath = "/butterfly/fractions/" + std::to_string(i);
          if (!fr[i].is_array() || fr[i].size() != 2 || !fr[i][0].is_number_integer() ||
              !fr[i][1].is_number_integer()) {
            r.fail(fpath, "expected [p, q] integers");
          } else if (fr[i][1].get<long>() < 1) {
            r.fail(fpath, "q must be >= 1");
          } else {
            cfg.butterfly.fractions.emplace_back(fr[i][0].get<long>(), fr[i][1].get<long>());
          }
        }
      }
    }
    r.integer(fly, "/butterfly", "sites_per_cell", cfg.butterfly.sites_per_cell);
    r.theta(fly, "/butterfly", cfg.butterfly.theta);
  }
  if (cfg.butterfly.sites_per_cell < 4) r.fail("/butterfly/sites_per_cell", "must be >= 4");

  if (const json* nodal = r.object(doc, "", "nodal", {"theta", "band", "zero_tol"})) {
    r.theta(nodal, "/nodal", cfg.nodal.theta);
    r.integer(nodal, "/nodal", "band", cfg.nodal.band);
    r.number(nodal, "/nodal", "zero_tol", cfg.nodal.zero_tol);
  }
  if (cfg.nodal.band < 0 || cfg.nodal.band >= cfg.bands) r.fail("/nodal/band", "must lie in [0, bands)");
  if (!(cfg.nodal.zero_tol > 0.0)) r.fail("/nodal/zero_tol", "must be > 0");

  if (const json* alg = r.object(doc, "", "algebra", {"samples"})) {
    r.integer(alg, "/algebra", "samples", cfg.algebra.samples);
  }
  if (cfg.algebra.samples < 1) r.fail("/algebra/samples", "must be >= 1");

  // Potentials must be real.
  auto check_symmetric = [&](const PotentialConfig& pc, const std::string& path) {
    try {
      if (!PotentialSpec(Lattice::unit_square(), pc.modes).conjugate_symmetric()) {
        r.fail(path + "/modes", "modes are not conjugate symmetric (potential would be complex)");
      }
    } catch (const Error&) {
    }
  };
  check_symmetric(cfg.potential, "/potential");
  check_symmetric(cfg.perturb.perturbation, "/perturb/perturbation");

  if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace magbloch::io
