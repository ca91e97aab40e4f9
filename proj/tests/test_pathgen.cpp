#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "roughscale/errors.hpp"
#include "roughscale/pathgen.hpp"
#include "roughscale/random.hpp"

using namespace roughscale;
using namespace roughscale::pathgen;

namespace {

// Independent oracle for the RL covariance. With w = s - u and z = w^(a+1) the
// integrand (t - s + w)^a w^a dw becomes (t - s + z^(1/(a+1)))^a dz / (a+1),
// which has no endpoint singularity when t > s; composite Gauss-Legendre then
// converges fast.
double covariance_oracle(double h, double t, double s) {
  if (s > t) std::swap(s, t);
  const double a = h - 0.5;
  const double top = std::pow(s, a + 1.0);
  const int panels = 200;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = top * p / panels;
    const double hi = top * (p + 1) / panels;
    sum += boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double z) { return std::pow(t - s + std::pow(z, 1.0 / (a + 1.0)), a); }, lo, hi);
  }
  return 2.0 * h * sum / (a + 1.0);
}

double ks_pvalue_normal(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  boost::math::normal_distribution<> nd;
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = boost::math::cdf(nd, x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double lam = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
  return std::clamp(q, 0.0, 1.0);
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

TEST(FbmCovariance, MatchesFrozenHighPrecisionValues) {
  // mpmath, 30 digits
  EXPECT_NEAR(fbm_covariance_rl(0.1, 1.0, 0.5), 0.258801519398313855, 1e-9);
  EXPECT_NEAR(fbm_covariance_rl(0.3, 2.0, 0.7), 0.513546707118614370, 1e-9);
  EXPECT_NEAR(fbm_covariance_rl(0.8, 1.5, 1.2), 1.528600138808868713, 1e-9);
}

TEST(FbmCovariance, AgreesWithSubstitutedGaussLegendre) {
  for (double h : {0.05, 0.1, 0.3, 0.5, 0.7, 0.95}) {
    for (auto [t, s] : {std::pair{1.0, 0.5}, std::pair{0.3, 0.9}, std::pair{2.0, 1.99}}) {
      const double ref = covariance_oracle(h, t, s);
      EXPECT_NEAR(fbm_covariance_rl(h, t, s), ref, 1e-8 * std::max(1.0, std::abs(ref))) << h << " " << t << " " << s;
    }
  }
}

TEST(FbmCovariance, DiagonalAndBrownianLimit) {
  for (double h : {0.1, 0.4, 0.9})
    for (double t : {0.25, 1.0, 3.0}) EXPECT_NEAR(fbm_covariance_rl(h, t, t), std::pow(t, 2 * h), 1e-9);
  EXPECT_NEAR(fbm_covariance_rl(0.5, 2.0, 1.0), 1.0, 1e-10);
  EXPECT_EQ(fbm_covariance_rl(0.3, 1.0, 0.0), 0.0);
}

TEST(HybridScheme, HalfHurstIsCumulativeSumOfDriver) {
  RandomStream rng(7);
  const auto s = simulate_fbm_rl(0.5, 300, 0.01, rng);
  ASSERT_EQ(s.fbm.size(), 301u);
  ASSERT_EQ(s.driver.size(), 300u);
  double acc = 0.0;
  EXPECT_EQ(s.fbm[0], 0.0);
  for (int k = 0; k < 300; ++k) {
    acc += s.driver[k];
    EXPECT_NEAR(s.fbm[k + 1], acc, 1e-12);
  }
}

TEST(HybridScheme, VarianceMatchesPowerLaw) {
  const int n = 64, paths = 10000;
  const double h = 0.3, dt = 1.0 / n;
  std::vector<double> sum2(n + 1, 0.0), sum4(n + 1, 0.0);
  for (int p = 0; p < paths; ++p) {
    RandomStream rng(derive_seed(11, {static_cast<std::uint64_t>(p)}));
    const auto s = simulate_fbm_rl(h, n, dt, rng);
    for (int k = 0; k <= n; ++k) {
      sum2[k] += s.fbm[k] * s.fbm[k];
      sum4[k] += std::pow(s.fbm[k], 4);
    }
  }
  for (int k : {1, 8, 32, 64}) {
    const double m2 = sum2[k] / paths;
    const double se = std::sqrt((sum4[k] / paths - m2 * m2) / paths);
    EXPECT_NEAR(m2, std::pow(k * dt, 2 * h), 4 * se) << "k=" << k;
  }
}

TEST(HybridScheme, DriverIsStandardBrownian) {
  RandomStream rng(3);
  const double dt = 0.002;
  const auto s = simulate_fbm_rl(0.2, 20000, dt, rng);
  std::vector<double> z(s.driver.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = s.driver[i] / std::sqrt(dt);
  EXPECT_GT(ks_pvalue_normal(z), 0.01);
}

TEST(Cholesky, SizeGuard) {
  EXPECT_EQ(kind_of([] { CholeskyFbmSampler(0.3, 4096, 1e-3); }), ErrorKind::size);
  RandomStream rng(1);
  EXPECT_EQ(kind_of([&] { simulate_fbm_cholesky(0.3, kCholeskyMaxSteps + 1, 1e-3, rng); }), ErrorKind::size);
}

TEST(Cholesky, HybridCovarianceCloseToExact) {
  const int n = 32, paths = 10000;
  const double h = 0.1, dt = 1.0 / n;
  CholeskyFbmSampler chol(h, n, dt);
  std::vector<double> ch(n * n, 0.0), hy(n * n, 0.0), exact(n * n);
  for (int p = 0; p < paths; ++p) {
    RandomStream r1(derive_seed(5, {0, static_cast<std::uint64_t>(p)}));
    RandomStream r2(derive_seed(5, {1, static_cast<std::uint64_t>(p)}));
    const auto a = chol.sample(r1);
    const auto b = simulate_fbm_rl(h, n, dt, r2).fbm;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        ch[i * n + j] += a[i + 1] * a[j + 1] / paths;
        hy[i * n + j] += b[i + 1] * b[j + 1] / paths;
      }
  }
  double num_c = 0, num_h = 0, den = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double e = fbm_covariance_rl(h, (i + 1) * dt, (j + 1) * dt);
      num_c += std::pow(ch[i * n + j] - e, 2);
      num_h += std::pow(hy[i * n + j] - e, 2);
      den += e * e;
    }
  EXPECT_LT(std::sqrt(num_c / den), 0.03);
  EXPECT_LT(std::sqrt(num_h / den), 0.05);
}

TEST(RBergomi, ZeroVolOfVolGivesGaussianLogReturns) {
  RBergomiParams p;
  p.vol_of_vol = 0.0;
  p.n_steps = 10000;
  p.seed = 42;
  const auto path = simulate_rbergomi(p);
  for (double v : path.variance) ASSERT_DOUBLE_EQ(v, p.forward_variance);
  std::vector<double> z;
  const double sd = std::sqrt(p.forward_variance * p.dt);
  for (int k = 0; k < p.n_steps; ++k)
    z.push_back((std::log(path.price[k + 1] / path.price[k]) + 0.5 * p.forward_variance * p.dt) / sd);
  EXPECT_GT(ks_pvalue_normal(z), 0.01);
}

TEST(RBergomi, FullCorrelationUsesTheVolatilityDriver) {
  for (double lambda : {1.0, -1.0}) {
    RBergomiParams p;
    p.correlation = lambda;
    p.n_steps = 500;
    p.seed = 9;
    const auto path = simulate_rbergomi(p);
    for (int k = 0; k < p.n_steps; ++k) {
      const double v = path.variance[k];
      const double shock = (std::log(path.price[k + 1] / path.price[k]) + 0.5 * v * p.dt) / std::sqrt(v * p.dt);
      ASSERT_NEAR(shock, lambda * path.brownian_increments[k] / std::sqrt(p.dt), 1e-7);
    }
  }
}

TEST(RBergomi, ShapesAndInitialValues) {
  RBergomiParams p;
  p.n_steps = 100;
  p.spot = 3.5;
  const auto path = simulate_rbergomi(p);
  for (const auto* v : {&path.times, &path.price, &path.variance, &path.log_variance, &path.fbm})
    EXPECT_EQ(v->size(), 101u);
  EXPECT_EQ(path.brownian_increments.size(), 100u);
  EXPECT_EQ(path.price[0], 3.5);
  EXPECT_EQ(path.variance[0], p.forward_variance);
  EXPECT_EQ(path.fbm[0], 0.0);
  for (double v : path.variance) EXPECT_GT(v, 0.0);
  for (double s : path.price) EXPECT_GT(s, 0.0);
}

TEST(RBergomi, VarianceIsPositiveEvenWhenExponentUnderflows) {
  RBergomiParams p;
  p.hurst = 0.95;
  p.vol_of_vol = 3.0;
  p.n_steps = 5000;
  const auto path = simulate_rbergomi(p);
  for (double v : path.variance) ASSERT_GT(v, 0.0);
  for (double lv : path.log_variance) ASSERT_TRUE(std::isfinite(lv));
}

TEST(RBergomi, MeanVarianceIsForwardVariance) {
  RBergomiParams p;
  p.n_steps = 50;
  const int paths = 10000;
  std::vector<double> mean(p.n_steps + 1, 0.0);
  for (int i = 0; i < paths; ++i) {
    p.seed = derive_seed(77, {static_cast<std::uint64_t>(i)});
    const auto path = simulate_rbergomi(p);
    for (int k = 0; k <= p.n_steps; ++k) mean[k] += path.variance[k] / paths;
  }
  for (int k = 0; k <= p.n_steps; k += 10) {
    const double t = k * p.dt;
    const double sd = p.forward_variance *
                      std::sqrt(std::exp(p.vol_of_vol * p.vol_of_vol * std::pow(t, 2 * p.hurst)) - 1.0);
    EXPECT_NEAR(mean[k], p.forward_variance, 4 * sd / std::sqrt(paths) + 1e-12) << "k=" << k;
  }
}

TEST(RBergomi, SameSeedSameBits) {
  RBergomiParams p;
  p.n_steps = 1000;
  p.correlation = -0.5;
  p.seed = 123;
  const auto a = simulate_rbergomi(p);
  const auto b = simulate_rbergomi(p);
  EXPECT_EQ(a.price, b.price);
  EXPECT_EQ(a.variance, b.variance);
  p.seed = 124;
  EXPECT_NE(simulate_rbergomi(p).price, a.price);
}

TEST(RBergomi, RejectsBadParameters) {
  auto with = [](auto edit) {
    RBergomiParams p;
    edit(p);
    return kind_of([&] { simulate_rbergomi(p); });
  };
  EXPECT_EQ(with([](auto& p) { p.hurst = 0.0; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.hurst = 1.0; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.vol_of_vol = -0.1; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.forward_variance = 0.0; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.correlation = 1.5; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.spot = -1.0; }), ErrorKind::parameter_domain);
  EXPECT_EQ(with([](auto& p) { p.n_steps = 1; }), ErrorKind::grid);
  EXPECT_EQ(with([](auto& p) { p.dt = 0.0; }), ErrorKind::grid);
}

TEST(PathFiles, CsvAndBinaryRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "roughscale_test_pathgen";
  std::filesystem::create_directories(dir);
  RBergomiParams p;
  p.n_steps = 20;
  const auto path = simulate_rbergomi(p);

  write_path_csv(path, dir / "p.csv");
  std::ifstream is(dir / "p.csv");
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "step,time,price,variance,fbm");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 21);

  const auto cols = to_columns(path);
  write_columns_binary(cols, dir / "p.bin");
  const auto back = read_columns_binary(dir / "p.bin");
  EXPECT_EQ(back.names, cols.names);
  EXPECT_EQ(back.columns, cols.columns);

  std::ofstream(dir / "junk.bin") << "not a dump";
  EXPECT_EQ(kind_of([&] { read_columns_binary(dir / "junk.bin"); }), ErrorKind::format);
  EXPECT_EQ(kind_of([&] { read_columns_binary(dir / "missing.bin"); }), ErrorKind::io);
  std::filesystem::remove_all(dir);
}
