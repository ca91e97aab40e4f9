#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughscale/depmeas.hpp"
#include "roughscale/errors.hpp"
#include "roughscale/experiments.hpp"
#include "roughscale/random.hpp"

using namespace roughscale;
using namespace roughscale::depmeas;

namespace {

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

TEST(Ranks, TiesShareTheAveragePosition) {
  const std::vector<double> x{1, 2, 2, 3, 4, 4, 4, 5};
  const std::vector<double> expect{1, 2.5, 2.5, 4, 6, 6, 6, 8};
  EXPECT_EQ(average_ranks(x), expect);
  EXPECT_EQ(average_ranks(std::vector<double>{3, 1, 2}), (std::vector<double>{3, 1, 2}));
}

TEST(Correlation, ExactAffineAndMonotoneCases) {
  std::vector<double> x, up, down, curved;
  for (int i = 0; i < 25; ++i) {
    x.push_back(0.3 * i - 2.0);
    up.push_back(2.0 * x.back() + 1.0);
    down.push_back(-0.5 * x.back() + 4.0);
    curved.push_back(std::exp(x.back()));
  }
  EXPECT_NEAR(pearson(x, up).coefficient, 1.0, 1e-12);
  EXPECT_EQ(pearson(x, up).pvalue, 0.0);
  EXPECT_NEAR(pearson(x, down).coefficient, -1.0, 1e-12);
  EXPECT_NEAR(spearman(x, curved).coefficient, 1.0, 1e-12);
  EXPECT_LT(pearson(x, curved).coefficient, 0.99);
  EXPECT_EQ(spearman(x, curved).kind, CorrelationKind::spearman);
  EXPECT_EQ(pearson(x, up).n, 25);
}

TEST(Correlation, MatchesScipyWithTies) {
  const std::vector<double> x{1, 2, 2, 3, 4, 4, 4, 5};
  const std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
  const auto s = spearman(x, y);
  EXPECT_NEAR(s.coefficient, 0.5495502618648208, 1e-12);
  EXPECT_NEAR(s.pvalue, 0.1582561276787799, 1e-10);
  const auto p = pearson(x, y);
  EXPECT_NEAR(p.coefficient, 0.5030376637372141, 1e-12);
  EXPECT_NEAR(p.pvalue, 0.20384044873915955, 1e-10);
}

TEST(Correlation, BoundsAndSymmetry) {
  RandomStream rng(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(30), y(30);
    for (int i = 0; i < 30; ++i) {
      x[i] = rng.normal();
      y[i] = 0.3 * x[i] + rng.normal();
    }
    const auto a = pearson(x, y);
    EXPECT_LE(std::abs(a.coefficient), 1.0);
    EXPECT_GE(a.pvalue, 0.0);
    EXPECT_LE(a.pvalue, 1.0);
    EXPECT_DOUBLE_EQ(a.coefficient, pearson(y, x).coefficient);
    EXPECT_DOUBLE_EQ(spearman(x, y).coefficient, spearman(y, x).coefficient);
  }
  EXPECT_EQ(correlation_pvalue(0.0, 10), 1.0);
}

TEST(Correlation, PublishedTableValues) {
  std::vector<double> hv, bp;
  for (const auto& row : experiments::table1_reference()) {
    hv.push_back(row.h_vol);
    bp.push_back(row.b_price);
  }
  ASSERT_EQ(hv.size(), 31u);
  // scipy on the printed three-decimal table
  EXPECT_NEAR(pearson(hv, bp).coefficient, -0.4214323501607521, 1e-10);
  EXPECT_NEAR(pearson(hv, bp).pvalue, 0.018216707699673432, 1e-8);
  EXPECT_NEAR(spearman(hv, bp).coefficient, -0.5223762134771109, 1e-10);
  EXPECT_NEAR(spearman(hv, bp).pvalue, 0.0025737441388044356, 1e-8);
}

TEST(Correlation, Errors) {
  const std::vector<double> a{1, 2, 3}, b{1, 2}, c{5, 5, 5};
  EXPECT_EQ(kind_of([&] { pearson(a, b); }), ErrorKind::shape);
  EXPECT_EQ(kind_of([&] { pearson(b, b); }), ErrorKind::size);
  EXPECT_EQ(kind_of([&] { pearson(a, c); }), ErrorKind::zero_variance);
  EXPECT_EQ(kind_of([&] { spearman(c, a); }), ErrorKind::zero_variance);
}
