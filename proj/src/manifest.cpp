#include "roughscale/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include "roughscale/errors.hpp"

namespace roughscale::manifest {

using nlohmann::json;

std::vector<std::string> RunManifest::argv() const {
  std::vector<std::string> out;
  std::istringstream words(command);
  for (std::string w; words >> w;) out.push_back(w);
  for (const auto& [k, v] : options) {
    out.push_back("--" + k);
    out.push_back(v);
  }
  return out;
}

json to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["options"] = m.options;
  j["seeds"] = m.seeds;
  j["version"] = m.version;
  j["input_digests"] = m.input_digests;
  j["outputs"] = m.outputs;
  j["started"] = m.started;
  j["finished"] = m.finished;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.options = j.at("options").get<std::map<std::string, std::string>>();
    m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    m.version = j.value("version", std::string());
    m.input_digests = j.value("input_digests", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.started = j.value("started", std::string());
    m.finished = j.value("finished", std::string());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& m, const std::filesystem::path& dir) {
  const auto path = dir / kManifestName;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot write " + path.string());
  os << to_json(m).dump(2) << '\n';
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw Error(ErrorKind::io, "cannot open manifest " + file.string());
  try {
    return manifest_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::format, file.string() + ": " + e.what());
  }
}

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + file.string());
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return fnv1a64_hex(bytes);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace roughscale::manifest
