#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace golden {

inline constexpr const char* kLibraryDigest = "91d93747aa36c3d2";

inline const std::vector<std::string>& files() {
  static const std::vector<std::string> f = {"table_rv10.csv",       "table_rv5.csv",       "table_rsv.csv",
                                             "table_bv.csv",         "dependence_rv10.json", "dependence_rv5.json",
                                             "dependence_rsv.json",  "dependence_bv.json",  "cross_measure.json"};
  return f;
}

inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& f) {
  std::ifstream is(f);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(is, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

inline bool as_number(const std::string& s, double& v) {
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return !s.empty() && end == s.c_str() + s.size();
}

// CSV cells carry 6 significant digits, JSON numbers full precision.
inline void compare_json(const nlohmann::json& want, const nlohmann::json& got, const std::string& where,
                         std::vector<std::string>& diffs) {
  if (want.is_number() && got.is_number()) {
    const double a = want.get<double>(), b = got.get<double>();
    if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) diffs.push_back(where + ": " + std::to_string(a) + " vs " + std::to_string(b));
    return;
  }
  if (want.type() != got.type()) {
    diffs.push_back(where + ": type differs");
    return;
  }
  if (want.is_object()) {
    if (want.size() != got.size()) diffs.push_back(where + ": key count differs");
    for (auto it = want.begin(); it != want.end(); ++it) {
      if (!got.contains(it.key()))
        diffs.push_back(where + "/" + it.key() + ": missing");
      else
        compare_json(it.value(), got.at(it.key()), where + "/" + it.key(), diffs);
    }
  } else if (want.is_array()) {
    if (want.size() != got.size()) {
      diffs.push_back(where + ": length differs");
      return;
    }
    for (std::size_t i = 0; i < want.size(); ++i) compare_json(want[i], got[i], where + "[" + std::to_string(i) + "]", diffs);
  } else if (want != got) {
    diffs.push_back(where + ": " + want.dump() + " vs " + got.dump());
  }
}

/// Differences between the golden files in `want_dir` and the outputs in `got_dir`.
inline std::vector<std::string> compare_dirs(const std::filesystem::path& want_dir, const std::filesystem::path& got_dir) {
  std::vector<std::string> diffs;
  for (const auto& f : files()) {
    const auto want = want_dir / f, got = got_dir / f;
    if (!std::filesystem::exists(got)) {
      diffs.push_back(f + ": not produced");
      continue;
    }
    if (std::filesystem::path(f).extension() == ".csv") {
      const auto a = read_csv(want), b = read_csv(got);
      if (a.size() != b.size()) {
        diffs.push_back(f + ": row count differs");
        continue;
      }
      for (std::size_t r = 0; r < a.size(); ++r) {
        if (a[r].size() != b[r].size()) {
          diffs.push_back(f + " row " + std::to_string(r) + ": cell count differs");
          continue;
        }
        for (std::size_t c = 0; c < a[r].size(); ++c) {
          double x, y;
          const bool numeric = as_number(a[r][c], x) && as_number(b[r][c], y);
          if (numeric ? std::abs(x - y) > 2e-5 * std::abs(x) : a[r][c] != b[r][c])
            diffs.push_back(f + " row " + std::to_string(r) + " col " + std::to_string(c) + ": " + a[r][c] + " vs " + b[r][c]);
        }
      }
    } else {
      std::ifstream wa(want), ga(got);
      compare_json(nlohmann::json::parse(wa), nlohmann::json::parse(ga), f, diffs);
    }
  }
  return diffs;
}

}  // namespace golden
