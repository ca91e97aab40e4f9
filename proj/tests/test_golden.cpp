// Golden-file check of the real-data pipeline on the pinned synthetic
// 31-index library. Set ROUGHSCALE_UPDATE_GOLDEN=1 to rewrite the goldens.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cli_app.hpp"
#include "golden_compare.hpp"
#include "roughscale/manifest.hpp"

namespace fs = std::filesystem;

TEST(Golden, RealDataPipelineOnPinnedSyntheticLibrary) {
  const fs::path golden_dir = fs::path(ROUGHSCALE_TEST_DATA) / "golden";
  const fs::path dir = fs::temp_directory_path() / "roughscale_golden";
  fs::remove_all(dir);
  std::ostringstream out, err;
  ASSERT_EQ(roughscale::cli::run({"experiment", "synth-library", "--out", (dir / "lib").string()}, out, err), 0)
      << err.str();
  const fs::path lib = dir / "lib" / "library.csv";
  ASSERT_EQ(roughscale::manifest::file_digest(lib), golden::kLibraryDigest) << "synthetic library generator changed";

  ASSERT_EQ(roughscale::cli::run({"experiment", "real-data", "--input", lib.string(), "--measure", "all",
                                  "--significance", "ols", "--out", (dir / "rd").string()},
                                 out, err),
            0)
      << err.str();

  if (std::getenv("ROUGHSCALE_UPDATE_GOLDEN")) {
    for (const auto& f : golden::files())
      fs::copy_file(dir / "rd" / f, golden_dir / f, fs::copy_options::overwrite_existing);
    GTEST_SKIP() << "golden files rewritten";
  }

  const auto diffs = golden::compare_dirs(golden_dir, dir / "rd");
  for (const auto& d : diffs) ADD_FAILURE() << d;
  EXPECT_TRUE(diffs.empty());
  fs::remove_all(dir);
}
