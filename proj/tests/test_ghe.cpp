#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "roughscale/errors.hpp"
#include "roughscale/ghe.hpp"
#include "roughscale/random.hpp"

using namespace roughscale;
using namespace roughscale::ghe;

namespace {

std::vector<double> brownian_prices(std::uint64_t seed, int n) {
  RandomStream rng(seed);
  std::vector<double> p(n + 1, 1.0);
  for (int i = 0; i < n; ++i) p[i + 1] = p[i] * std::exp(0.01 * rng.normal());
  return p;
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

TEST(QGrid, DefaultIsTwentyPointsOnUnitInterval) {
  const auto q = uniform_q_grid();
  ASSERT_EQ(q.size(), 20u);
  EXPECT_DOUBLE_EQ(q.front(), 0.05);
  EXPECT_DOUBLE_EQ(q.back(), 1.0);
  EXPECT_NEAR(q[1] - q[0], 0.05, 1e-12);
}

TEST(LogReturns, OverlappingLags) {
  const std::vector<double> s{1.0, std::exp(1.0), std::exp(3.0), std::exp(6.0)};
  const auto r2 = log_returns(s, 2);
  ASSERT_EQ(r2.size(), 2u);
  EXPECT_NEAR(r2[0], 3.0, 1e-12);
  EXPECT_NEAR(r2[1], 5.0, 1e-12);
  EXPECT_EQ(kind_of([&] { log_returns(std::vector<double>{1.0, 0.0, 2.0}, 1); }), ErrorKind::parameter_domain);
  EXPECT_EQ(kind_of([&] { log_returns(s, 4); }), ErrorKind::length);
}

TEST(StructureFunction, MatchesDirectSums) {
  RandomStream rng(4);
  std::vector<double> r(300);
  for (auto& x : r) x = rng.normal();
  const std::vector<double> q{0.3, 0.7, 1.0};
  const std::vector<int> taus{1, 2, 5, 17};
  const auto sf = structure_function(r, q, taus);
  for (std::size_t row = 0; row < taus.size(); ++row) {
    const int tau = taus[row];
    for (std::size_t k = 0; k < q.size(); ++k) {
      double acc = 0.0;
      int count = 0;
      for (std::size_t t = 0; t + tau <= r.size(); ++t) {
        const double agg = std::accumulate(r.begin() + t, r.begin() + t + tau, 0.0);
        acc += std::pow(std::abs(agg), q[k]);
        ++count;
      }
      EXPECT_NEAR(sf.xi_at(row, k), acc / count, 1e-10);
      EXPECT_NEAR(sf.normalized_at(row, k), std::pow(sf.xi_at(row, k) / sf.k_q[k], 1.0 / q[k]), 1e-12);
    }
  }
}

TEST(EstimateHq, RecoversExactPowerLaws) {
  StructureFunction sf;
  sf.q_grid = {0.2, 0.5, 1.0};
  sf.tau_grid = {1, 2, 3, 5, 8, 13};
  const std::vector<double> h{0.7, 0.5, 0.25};
  for (int tau : sf.tau_grid)
    for (double hq : h) sf.normalized.push_back(std::pow(tau, hq));
  sf.xi = sf.normalized;
  const auto est = estimate_hq(sf);
  for (std::size_t k = 0; k < h.size(); ++k) EXPECT_NEAR(est[k], h[k], 1e-12);
}

TEST(MultiscalingProxy, ExactLineAndConstant) {
  const auto q = uniform_q_grid();
  std::vector<double> line, flat(q.size(), 0.42);
  for (double x : q) line.push_back(0.6 - 0.2 * x);
  const auto f = multiscaling_proxy(line, q);
  EXPECT_NEAR(f.linear_index, 0.6, 1e-12);
  EXPECT_NEAR(f.multiscaling_proxy, -0.2, 1e-12);
  EXPECT_EQ(f.stderr_b, 0.0);
  EXPECT_EQ(f.pvalue, 0.0);
  const auto c = multiscaling_proxy(flat, q);
  EXPECT_EQ(c.multiscaling_proxy, 0.0);
  EXPECT_NEAR(c.linear_index, 0.42, 1e-12);
  EXPECT_EQ(c.pvalue, 1.0);
  EXPECT_EQ(kind_of([&] { multiscaling_proxy(std::vector<double>{1, 2}, std::vector<double>{1, 2}); }),
            ErrorKind::insufficient_data);
  EXPECT_EQ(kind_of([&] { multiscaling_proxy(line, std::vector<double>{1, 2, 3}); }), ErrorKind::shape);
}

TEST(EstimateScaling, BrownianPathIsNearHalf) {
  const auto p = brownian_prices(17, 5000);
  ScalingOptions o;
  o.significance = SignificanceMethod::ols;
  const auto r = estimate_scaling(p, 20, o);
  EXPECT_NEAR(r.hurst, 0.5, 0.05);
  EXPECT_NEAR(r.linear_index, 0.5, 0.06);
  EXPECT_LT(std::abs(r.multiscaling_proxy), 0.05);
  EXPECT_EQ(r.tau_max_used, 20);
  EXPECT_EQ(r.h_q.size(), 20u);
  EXPECT_DOUBLE_EQ(r.hurst, r.h_q.back());
}

TEST(EstimateScaling, LevelsTransformUsesPlainDifferences) {
  // Prices e^{x} with x Brownian: the levels transform of x must match the
  // log transform of e^{x}.
  const auto p = brownian_prices(3, 2000);
  std::vector<double> x(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) x[i] = std::log(p[i]);
  ScalingOptions logs, levels;
  logs.significance = levels.significance = SignificanceMethod::ols;
  levels.transform = SeriesTransform::levels;
  const auto a = estimate_scaling(p, 30, logs);
  const auto b = estimate_scaling(x, 30, levels);
  for (std::size_t k = 0; k < a.h_q.size(); ++k) EXPECT_NEAR(a.h_q[k], b.h_q[k], 1e-9);
}

TEST(EstimateScaling, SurrogatePvalueIsDeterministicAndOnTheRankGrid) {
  const auto p = brownian_prices(5, 3000);
  ScalingOptions o;
  o.surrogates = 19;
  o.seed = 8;
  const auto a = estimate_scaling(p, 10, o);
  const auto b = estimate_scaling(p, 10, o);
  EXPECT_EQ(a.proxy_pvalue, b.proxy_pvalue);
  const double k = a.proxy_pvalue * 20.0;
  EXPECT_NEAR(k, std::round(k), 1e-9);
  EXPECT_GE(a.proxy_pvalue, 0.05);
  EXPECT_LE(a.proxy_pvalue, 1.0);
}

TEST(EstimateScaling, RejectsShortSeriesAndBadOptions) {
  const auto p = brownian_prices(1, 150);
  EXPECT_EQ(kind_of([&] { estimate_scaling(p, 60); }), ErrorKind::insufficient_data);
  EXPECT_EQ(kind_of([&] { estimate_scaling(p, 2); }), ErrorKind::insufficient_data);
  ScalingOptions o;
  o.surrogates = 0;
  EXPECT_EQ(kind_of([&] { estimate_scaling(p, 10, o); }), ErrorKind::argument);
  o = {};
  o.q_grid = {0.5, 0.2};
  EXPECT_EQ(kind_of([&] { estimate_scaling(p, 10, o); }), ErrorKind::argument);
  EXPECT_EQ(kind_of([] { series_transform_from_string("cubic"); }), ErrorKind::argument);
  EXPECT_EQ(kind_of([] { significance_from_string("bootstrap"); }), ErrorKind::argument);
}

TEST(EstimateScaling, ConstantSeriesIsDegenerate) {
  const std::vector<double> flat(500, 2.0);
  EXPECT_EQ(kind_of([&] { estimate_scaling(flat, 10); }), ErrorKind::degenerate_moment);
}
