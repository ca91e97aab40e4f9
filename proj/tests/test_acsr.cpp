#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "roughscale/acsr.hpp"
#include "roughscale/errors.hpp"
#include "roughscale/random.hpp"

using namespace roughscale;
using namespace roughscale::acsr;

namespace {

std::vector<double> segmented(double alpha, double c, double beta, int tau_star, int n) {
  std::vector<double> acf(n);
  for (int k = 1; k <= n; ++k) acf[k - 1] = alpha + c * std::pow(std::min(k, tau_star), beta);
  return acf;
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

TEST(AbsReturnAcf, PeriodTwoSeriesUsesBiasedEstimator) {
  std::vector<double> r;
  for (int i = 0; i < 10; ++i) r.push_back(i % 2 ? -3.0 : 1.0);
  const auto acf = abs_return_acf(r, 2);
  EXPECT_NEAR(acf[0], -0.9, 1e-12);
  EXPECT_NEAR(acf[1], 0.8, 1e-12);
}

TEST(AbsReturnAcf, MatchesDirectComputation) {
  RandomStream rng(12);
  std::vector<double> r(400);
  for (auto& x : r) x = rng.normal();
  const auto acf = abs_return_acf(r, 30);
  double mean = 0.0;
  for (double x : r) mean += std::abs(x) / r.size();
  double g0 = 0.0;
  for (double x : r) g0 += (std::abs(x) - mean) * (std::abs(x) - mean);
  for (int lag = 1; lag <= 30; ++lag) {
    double g = 0.0;
    for (std::size_t t = 0; t + lag < r.size(); ++t) g += (std::abs(r[t]) - mean) * (std::abs(r[t + lag]) - mean);
    EXPECT_NEAR(acf[lag - 1], g / g0, 1e-12);
  }
}

TEST(AbsReturnAcf, Preconditions) {
  std::vector<double> r(40, 1.0);
  EXPECT_EQ(kind_of([&] { abs_return_acf(r, 10); }), ErrorKind::length);
  EXPECT_EQ(kind_of([&] { abs_return_acf(r, 0); }), ErrorKind::argument);
  EXPECT_EQ(kind_of([&] { abs_return_acf(r, 5); }), ErrorKind::zero_variance);
}

TEST(AcsrFit, RecoversPlantedBreakpointFreeAmplitude) {
  const auto acf = segmented(0.05, 0.8, -0.4, 300, 1000);
  const auto fit = acsr_fit(acf, 5, 1000);
  EXPECT_EQ(fit.tau_star, 300);
  EXPECT_NEAR(fit.beta, -0.4, 1e-6);
  EXPECT_NEAR(fit.alpha, 0.05, 1e-6);
  EXPECT_NEAR(fit.scale_c, 0.8, 1e-6);
  EXPECT_FALSE(fit.degenerate);
  const auto fitted = fitted_values(fit);
  for (std::size_t k = 0; k < acf.size(); ++k) EXPECT_NEAR(fitted[k], acf[k], 1e-6);
}

TEST(AcsrFit, RecoversPlantedBreakpointPinnedModes) {
  const auto acf = segmented(-0.7, 1.0, -0.3, 40, 200);
  const auto fit = acsr_fit(acf, 5, 200, ModelMode::pinned_phi1_minus_one);
  EXPECT_EQ(fit.tau_star, 40);
  EXPECT_NEAR(fit.beta, -0.3, 1e-6);
  EXPECT_NEAR(fit.alpha, acf[0] - 1.0, 1e-12);
  EXPECT_EQ(fit.scale_c, 1.0);

  const auto pinned = acsr_fit(acf, 5, 200, ModelMode::pinned_phi1);
  EXPECT_NEAR(pinned.alpha, acf[0], 1e-12);
}

TEST(AcsrFit, OptimumSurvivesRescan) {
  RandomStream rng(2);
  auto acf = segmented(0.1, 0.5, -0.6, 60, 300);
  for (auto& v : acf) v += 0.002 * rng.normal();
  const auto fit = acsr_fit(acf, 5, 300);
  for (int tau = 5; tau <= 300; tau += 7)
    for (double beta = -3.0; beta <= 0.0; beta += 0.05)
      EXPECT_GE(segment_sse(acf, tau, beta, ModelMode::free_amplitude) + 1e-12, fit.sse);
  EXPECT_NEAR(fit.tau_star, 60, 10);
}

TEST(AcsrFit, FlatAcfIsDegenerate) {
  const std::vector<double> acf(100, 0.2);
  const auto fit = acsr_fit(acf, 5, 100);
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.tau_star, 5);
}

TEST(AcsrFit, RangeChecks) {
  const std::vector<double> acf(50, 0.1);
  EXPECT_EQ(kind_of([&] { acsr_fit(acf, 1, 20); }), ErrorKind::range);
  EXPECT_EQ(kind_of([&] { acsr_fit(acf, 5, 51); }), ErrorKind::range);
  EXPECT_EQ(kind_of([&] { acsr_fit(acf, 30, 20); }), ErrorKind::range);
  EXPECT_EQ(kind_of([] { model_mode_from_string("loose"); }), ErrorKind::argument);
}

TEST(SelectTauMax, UsesDefaultLagCap) {
  EXPECT_EQ(default_max_lag(101), 25);
  EXPECT_EQ(default_max_lag(100000), 2000);
  RandomStream rng(31);
  std::vector<double> r(2000);
  for (auto& x : r) x = rng.normal();
  const auto fit = select_tau_max(r);
  EXPECT_EQ(fit.acf.size(), 499u);
  EXPECT_GE(fit.tau_star, kDefaultSearchMin);
  EXPECT_LE(fit.tau_star, 499);
  EXPECT_EQ(kind_of([&] { select_tau_max(std::vector<double>(20, 1.0)); }), ErrorKind::length);
}
