#include "magbloch/io/output.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "magbloch/error.hpp"

#ifndef MAGBLOCH_VERSION
#define MAGBLOCH_VERSION "0.0.0"
#endif

namespace magbloch::io {

using nlohmann::json;

namespace {

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::io, "malformed number '" + std::string(text) + "'");
  }
  return value;
}

long parse_long(std::string_view text) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::io, "malformed integer '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

std::string_view tool_version() noexcept { return MAGBLOCH_VERSION; }

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::io, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move output into place at " + path.string());
  }
}

std::string bands_csv(const BandStructure& bs, const FileStamp& stamp) {
  std::string out;
  out += "# magbloch " + stamp.version + "\n";
  out += "# config_hash " + stamp.config_hash + "\n";
  out += "# grid p=" + std::to_string(bs.provenance.p) + " q=" + std::to_string(bs.provenance.q) +
         " N1=" + std::to_string(bs.provenance.N1) + " N2=" + std::to_string(bs.provenance.N2) +
         " M1=" + std::to_string(bs.tgrid.M1) + " M2=" + std::to_string(bs.tgrid.M2) +
         " bands=" + std::to_string(bs.bands) + " potential_hash=" + std::to_string(bs.provenance.potential_hash) +
         "\n";
  out += kBandsHeader;
  out += '\n';
  for (int j1 = 0; j1 < bs.tgrid.M1; ++j1) {
    for (int j2 = 0; j2 < bs.tgrid.M2; ++j2) {
      const ThetaCoords t = bs.tgrid.point(j1, j2);
      const std::string prefix = format_double(t.t1) + "," + format_double(t.t2) + ",";
      for (int n = 0; n < bs.bands; ++n) {
        out += prefix;
        out += std::to_string(n);
        out += ',';
        out += format_double(bs.energy(j1, j2, n));
        out += '\n';
      }
    }
  }
  return out;
}

LoadedBands parse_bands_csv(std::string_view text) {
  LoadedBands loaded;
  BandStructure& bs = loaded.bands;
  bool have_grid = false;
  bool have_header = false;
  std::size_t row = 0;
  for (std::string_view rest = text; !rest.empty();) {
    const std::size_t eol = rest.find('\n');
    const std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto words = split(line.substr(2), ' ');
      if (words.size() >= 2 && words[0] == "magbloch") loaded.stamp.version = std::string(words[1]);
      if (words.size() >= 2 && words[0] == "config_hash") loaded.stamp.config_hash = std::string(words[1]);
      if (!words.empty() && words[0] == "grid") {
        for (std::size_t i = 1; i < words.size(); ++i) {
          const auto kv = split(words[i], '=');
          if (kv.size() != 2) continue;
          if (kv[0] == "p") bs.provenance.p = parse_long(kv[1]);
          if (kv[0] == "q") bs.provenance.q = parse_long(kv[1]);
          if (kv[0] == "N1") bs.provenance.N1 = static_cast<int>(parse_long(kv[1]));
          if (kv[0] == "N2") bs.provenance.N2 = static_cast<int>(parse_long(kv[1]));
          if (kv[0] == "M1") bs.tgrid.M1 = static_cast<int>(parse_long(kv[1]));
          if (kv[0] == "M2") bs.tgrid.M2 = static_cast<int>(parse_long(kv[1]));
          if (kv[0] == "bands") bs.bands = static_cast<int>(parse_long(kv[1]));
          if (kv[0] == "potential_hash") bs.provenance.potential_hash = std::stoull(std::string(kv[1]));
        }
        have_grid = true;
        bs.energies.assign(static_cast<std::size_t>(bs.tgrid.size()) * bs.bands, 0.0);
      }
      continue;
    }
    if (!have_header) {
      if (line != kBandsHeader) throw Error(ErrorKind::io, "band CSV: unexpected header '" + std::string(line) + "'");
      if (!have_grid) throw Error(ErrorKind::io, "band CSV: missing grid metadata line");
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw Error(ErrorKind::io, "band CSV: expected 4 fields per row");
    if (row >= bs.energies.size()) throw Error(ErrorKind::io, "band CSV: more rows than the grid metadata allows");
    const std::size_t n = row % static_cast<std::size_t>(bs.bands);
    if (static_cast<std::size_t>(parse_long(fields[2])) != n) throw Error(ErrorKind::io, "band CSV: rows out of order");
    bs.energies[row] = parse_double(fields[3]);
    ++row;
  }
  if (!have_header || row != bs.energies.size()) throw Error(ErrorKind::io, "band CSV: truncated file");
  return loaded;
}

LoadedBands read_bands_csv(const std::filesystem::path& path) { return parse_bands_csv(read_text(path)); }

std::string flatness_json(const FlatnessReport& report, const FileStamp& stamp) {
  json doc;
  doc["schema"] = "magbloch.flatness";
  doc["schema_version"] = kSchemaVersion;
  doc["tool_version"] = stamp.version;
  doc["config_hash"] = stamp.config_hash;
  doc["threshold"] = report.threshold;
  doc["threshold_provenance"] = {{"source", report.provenance.source},
                                 {"calibration_defect", report.provenance.calibration_defect},
                                 {"factor", report.provenance.factor},
                                 {"noise_floor", report.provenance.noise_floor},
                                 {"theta_spacing", report.provenance.theta_spacing}};
  json bands = json::array();
  for (std::size_t n = 0; n < report.dispersion.size(); ++n) {
    bands.push_back({{"band", n},
                     {"dispersion", report.dispersion[n]},
                     {"verdict", report.flat[n] ? "flat" : "dispersive"}});
  }
  doc["bands"] = bands;
  return doc.dump(2) + "\n";
}

LoadedFlatness parse_flatness_json(std::string_view text) {
  LoadedFlatness loaded;
  try {
    const json doc = json::parse(text);
    if (doc.at("schema") != "magbloch.flatness") throw Error(ErrorKind::io, "not a flatness report");
    if (doc.at("schema_version").get<int>() != kSchemaVersion) throw Error(ErrorKind::io, "unsupported schema version");
    loaded.stamp = {doc.at("config_hash").get<std::string>(), doc.at("tool_version").get<std::string>()};
    FlatnessReport& r = loaded.report;
    r.threshold = doc.at("threshold").get<double>();
    const json& prov = doc.at("threshold_provenance");
    r.provenance.source = prov.at("source").get<std::string>();
    r.provenance.calibration_defect = prov.at("calibration_defect").get<double>();
    r.provenance.factor = prov.at("factor").get<double>();
    r.provenance.noise_floor = prov.at("noise_floor").get<double>();
    r.provenance.theta_spacing = prov.at("theta_spacing").get<double>();
    for (const auto& band : doc.at("bands")) {
      r.dispersion.push_back(band.at("dispersion").get<double>());
      r.flat.push_back(band.at("verdict").get<std::string>() == "flat");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::io, std::string("flatness report: ") + e.what());
  }
  return loaded;
}

LoadedFlatness read_flatness_json(const std::filesystem::path& path) {
  return parse_flatness_json(read_text(path));
}

}  // namespace magbloch::io
