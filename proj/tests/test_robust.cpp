#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "roughscale/errors.hpp"
#include "roughscale/experiments.hpp"
#include "roughscale/random.hpp"
#include "roughscale/robust.hpp"

using namespace roughscale;
using namespace roughscale::robust;

namespace {

std::vector<Point> gaussian_cloud(std::uint64_t seed, int n, double rho = 0.0) {
  RandomStream rng(seed);
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    const double a = rng.normal();
    p = {a, rho * a + std::sqrt(1 - rho * rho) * rng.normal()};
  }
  return pts;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no roughscale::Error thrown";
  return ErrorKind::schema;
}

}  // namespace

TEST(Carling, MultiplierAndFourths) {
  EXPECT_NEAR(carling_k(20), 2.17724, 1e-5);
  EXPECT_NEAR(carling_k(1000000), 17.63 / 7.74, 1e-4);
  std::vector<double> xs;
  for (int i = 1; i <= 10; ++i) xs.push_back(i);
  const auto [lo, hi] = ideal_fourths(xs);
  EXPECT_NEAR(lo, 2.0 + 11.0 / 12.0, 1e-12);
  EXPECT_NEAR(hi, 8.0 + 1.0 / 12.0, 1e-12);
}

TEST(Carling, ZeroSpreadFlagsTheOddValue) {
  std::vector<double> d(9, 1.0);
  d.push_back(10.0);
  const auto f = carling_fences(d);
  EXPECT_DOUBLE_EQ(f.low, 1.0);
  EXPECT_DOUBLE_EQ(f.high, 1.0);
  EXPECT_EQ(kind_of([] { carling_fences(std::vector<double>{1, 2, 3}); }), ErrorKind::size);
}

TEST(Mcd, MatchesExhaustiveSearchOnSmallSets) {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    auto pts = gaussian_cloud(seed, 9, 0.5);
    pts[seed % 9] = {4.0, -3.0};
    const int h = default_mcd_h(9);
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << 9); ++mask) {
      if (__builtin_popcount(mask) != h) continue;
      std::vector<int> idx;
      for (int i = 0; i < 9; ++i)
        if (mask >> i & 1) idx.push_back(i);
      best = std::min(best, subset_determinant(pts, idx));
    }
    const auto mcd = fast_mcd(pts, h, 500, RandomStream(seed));
    EXPECT_NEAR(mcd.determinant, best, 1e-12 * std::max(1.0, best)) << "seed " << seed;
    EXPECT_EQ(mcd.support.size(), static_cast<std::size_t>(h));
    EXPECT_TRUE(std::is_sorted(mcd.support.begin(), mcd.support.end()));
  }
}

TEST(Mcd, CenterSurvivesFortyPercentContamination) {
  auto pts = gaussian_cloud(8, 100, 0.3);
  for (int i = 0; i < 40; ++i) pts[i] = {10.0 + 0.1 * pts[i][0], 10.0 + 0.1 * pts[i][1]};
  const auto mcd = fast_mcd(pts, default_mcd_h(100), 500, RandomStream(1));
  EXPECT_LT(std::hypot(mcd.center[0], mcd.center[1]), 0.6);
  for (int i : mcd.support) EXPECT_GE(i, 40);
}

TEST(Mcd, DeterministicForAKey) {
  const auto pts = gaussian_cloud(3, 60);
  const auto a = fast_mcd(pts, default_mcd_h(60), 50, RandomStream(77));
  const auto b = fast_mcd(pts, default_mcd_h(60), 50, RandomStream(77));
  EXPECT_EQ(a.support, b.support);
  EXPECT_EQ(a.center, b.center);
}

TEST(Mcd, Errors) {
  const auto pts = gaussian_cloud(3, 4);
  EXPECT_EQ(kind_of([&] { fast_mcd(pts, 3, 10, RandomStream(1)); }), ErrorKind::size);
  const auto more = gaussian_cloud(3, 20);
  EXPECT_EQ(kind_of([&] { fast_mcd(more, 21, 10, RandomStream(1)); }), ErrorKind::argument);
  EXPECT_EQ(kind_of([&] { fast_mcd(more, 12, 0, RandomStream(1)); }), ErrorKind::argument);
  std::vector<Point> line(20);
  for (int i = 0; i < 20; ++i) line[i] = {1.0 * i, 2.0 * i};
  EXPECT_EQ(kind_of([&] { fast_mcd(line, 12, 10, RandomStream(1)); }), ErrorKind::rank);
}

TEST(Outliers, PlantedPointIsFlaggedAndRemoved) {
  auto pts = gaussian_cloud(21, 50, 0.6);
  pts.push_back({8.0, -8.0});
  const auto r = robust_correlation(pts, RandomStream(2));
  EXPECT_NE(std::find(r.report.outlier_indices.begin(), r.report.outlier_indices.end(), 50),
            r.report.outlier_indices.end());
  EXPECT_EQ(r.report.outlier_indices.size() + r.report.kept_indices.size(), pts.size());
  EXPECT_GT(r.robust.pearson.coefficient, r.raw.pearson.coefficient);
  EXPECT_EQ(r.robust.pearson.n, static_cast<int>(r.report.kept_indices.size()));
}

TEST(Outliers, PublishedTableRv10) {
  std::vector<Point> pts;
  std::vector<std::string> sym;
  for (const auto& row : experiments::table1_reference()) {
    pts.push_back({row.h_vol, row.b_price});
    sym.push_back(row.symbol);
  }
  const auto r = robust_correlation(pts, RandomStream(1));
  ASSERT_EQ(r.report.outlier_indices.size(), 1u);
  EXPECT_EQ(sym[r.report.outlier_indices[0]], "AORD");

  const int mxx = static_cast<int>(std::find(sym.begin(), sym.end(), "MXX") - sym.begin());
  const std::vector<int> drop{mxx};
  const auto c = correlations_excluding(pts, drop);
  // scipy on the printed table without MXX
  EXPECT_NEAR(c.pearson.coefficient, -0.6020642086840364, 1e-10);
  EXPECT_NEAR(c.spearman.coefficient, -0.6579332111643896, 1e-10);
  EXPECT_EQ(c.pearson.n, 30);
}

TEST(Outliers, CleanDataRarelyFlagged) {
  int flagged = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto pts = gaussian_cloud(100 + s, 200, 0.4);
    const auto rep = bivariate_outliers(pts, RandomStream(s), {0, 50});
    flagged += static_cast<int>(rep.outlier_indices.size());
    total += 200;
  }
  EXPECT_LE(static_cast<double>(flagged) / total, 0.10);
}

TEST(Intersection, SetsAndEdgeCases) {
  const std::vector<std::vector<std::string>> sets{{"MXX", "AORD", "RUT"}, {"RUT", "MXX"}, {"MXX", "RUT", "KSE"}};
  EXPECT_EQ(intersect_outliers<std::string>(sets), (std::vector<std::string>{"MXX", "RUT"}));
  const std::vector<std::vector<int>> one{{3, 1, 3}};
  EXPECT_EQ(intersect_outliers<int>(one), (std::vector<int>{1, 3}));
  const std::vector<std::vector<int>> none;
  EXPECT_EQ(kind_of([&] { intersect_outliers<int>(none); }), ErrorKind::argument);
}

TEST(Excluding, NeedsThreeRows) {
  const auto pts = gaussian_cloud(1, 4);
  const std::vector<int> drop{0, 1};
  EXPECT_EQ(kind_of([&] { correlations_excluding(pts, drop); }), ErrorKind::size);
}
