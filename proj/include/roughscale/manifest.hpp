#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace roughscale::manifest {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kManifestName = "manifest.json";

/// Everything needed to replay a command. `options` holds the fully resolved
/// flag values (long flag name without dashes -> value), so replaying is a
/// matter of passing them back as flags.
struct RunManifest {
  std::string command;  ///< e.g. "simulate", "experiment grid"
  std::map<std::string, std::string> options;
  std::vector<std::uint64_t> seeds;
  std::string version = kToolVersion;
  std::map<std::string, std::string> input_digests;  ///< path -> fnv1a64 hex
  std::vector<std::string> outputs;
  std::string started;   ///< UTC, ISO 8601
  std::string finished;

  /// Command words followed by "--key value" pairs.
  std::vector<std::string> argv() const;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const RunManifest& m, const std::filesystem::path& dir);
RunManifest read_manifest(const std::filesystem::path& file);

/// 64-bit FNV-1a of a byte string / file, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& file);

std::string utc_now();

}  // namespace roughscale::manifest
