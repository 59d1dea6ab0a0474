#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "magbloch/bands.hpp"

namespace magbloch::io {

inline constexpr std::string_view kBandsHeader = "t1,t2,band,energy";
inline constexpr int kSchemaVersion = 1;

std::string_view tool_version() noexcept;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Provenance stamped into every output file.
struct FileStamp {
  std::string config_hash;
  std::string version;
};

/// Band CSV: '#' metadata lines, then `t1,t2,band,energy`, one row per
/// (θ point, band) in θ-major order.
std::string bands_csv(const BandStructure& bs, const FileStamp& stamp);

struct LoadedBands {
  BandStructure bands;
  FileStamp stamp;
};
LoadedBands parse_bands_csv(std::string_view text);
LoadedBands read_bands_csv(const std::filesystem::path& path);

/// Flatness report as JSON text (schema "magbloch.flatness").
std::string flatness_json(const FlatnessReport& report, const FileStamp& stamp);

struct LoadedFlatness {
  FlatnessReport report;
  FileStamp stamp;
};
LoadedFlatness parse_flatness_json(std::string_view text);
LoadedFlatness read_flatness_json(const std::filesystem::path& path);

}  // namespace magbloch::io
