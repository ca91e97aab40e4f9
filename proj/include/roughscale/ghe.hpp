#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace roughscale::ghe {

/// q-th absolute moments of tau-aggregated increments.
///
/// Matrices are row-major with one row per tau and one column per q.
struct StructureFunction {
  std::vector<double> q_grid;
  std::vector<int> tau_grid;
  std::vector<double> xi;
  std::vector<double> k_q;
  std::vector<double> normalized;

  std::size_t n_tau() const { return tau_grid.size(); }
  std::size_t n_q() const { return q_grid.size(); }
  double xi_at(std::size_t tau_row, std::size_t q_col) const { return xi[tau_row * n_q() + q_col]; }
  double normalized_at(std::size_t tau_row, std::size_t q_col) const {
    return normalized[tau_row * n_q() + q_col];
  }
};

/// `count` evenly spaced moments on [q_min, q_max]; defaults 20 points on [0.05, 1].
std::vector<double> uniform_q_grid(double q_min = 0.05, double q_max = 1.0, int count = 20);

/// Overlapping tau-lag log increments log x[t + tau] - log x[t].
std::vector<double> log_returns(std::span<const double> series, int tau);

/// Xi(tau, q) = mean |r_tau|^q with r_tau formed from `returns_base` by
/// overlapping sums; K_q = Xi(1, q); normalized = (Xi / K_q)^{1/q}.
StructureFunction structure_function(std::span<const double> returns_base, std::span<const double> q_grid,
                                     std::span<const int> tau_grid);

/// Zero-intercept least-squares slope of log normalized(tau, q) on log tau, per q.
std::vector<double> estimate_hq(const StructureFunction& sf);

struct ProxyFit {
  double linear_index = 0.0;       ///< A
  double multiscaling_proxy = 0.0; ///< B
  double stderr_b = 0.0;
  double pvalue = 1.0;
};

/// OLS fit H_q = A + B q with a two-sided t-test on B (df = M - 2).
ProxyFit multiscaling_proxy(std::span<const double> h_q, std::span<const double> q_grid);

enum class SeriesTransform {
  log_levels,  ///< increments of log(series): prices, and variance in log mode
  levels,      ///< plain differences of the series
};

enum class SignificanceMethod {
  surrogate,  ///< shuffled-increment surrogates, two-sided rank test
  ols,        ///< t-test from the H_q-on-q regression
};

const char* to_string(SeriesTransform t);
const char* to_string(SignificanceMethod m);
SeriesTransform series_transform_from_string(const std::string& s);
SignificanceMethod significance_from_string(const std::string& s);

struct ScalingOptions {
  std::vector<double> q_grid = uniform_q_grid();
  SeriesTransform transform = SeriesTransform::log_levels;
  SignificanceMethod significance = SignificanceMethod::surrogate;
  int surrogates = 99;
  std::uint64_t seed = 0;
};

struct ScalingReport {
  std::vector<double> q_grid;
  std::vector<double> h_q;
  double linear_index = 0.0;
  double multiscaling_proxy = 0.0;
  double proxy_stderr = 0.0;
  double proxy_pvalue = 1.0;
  int tau_max_used = 0;
  double hurst = 0.0;
};

/// Minimum number of overlapping increments required at tau_max.
inline constexpr int kMinIncrementsAtTauMax = 100;

/// Full pipeline on a level series: transform to increments, structure
/// function on tau = 1..tau_max, H_q, then the multiscaling proxy and its
/// significance.
ScalingReport estimate_scaling(std::span<const double> series, int tau_max, const ScalingOptions& options = {});

/// Same pipeline starting from unit-lag increments (e.g. of a log-variance path).
ScalingReport estimate_scaling_from_increments(std::span<const double> increments, int tau_max,
                                               const ScalingOptions& options = {});

}  // namespace roughscale::ghe
