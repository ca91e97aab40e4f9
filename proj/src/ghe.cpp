#include "roughscale/ghe.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "roughscale/errors.hpp"
#include "roughscale/random.hpp"

namespace roughscale::ghe {

namespace {

// True when q_m = (m + 1) q_0 for all m, so |r|^{q_m} can be built by
// repeated multiplication of |r|^{q_0}.
bool is_multiple_grid(std::span<const double> q) {
  for (std::size_t m = 0; m < q.size(); ++m) {
    const double expected = static_cast<double>(m + 1) * q[0];
    if (std::abs(q[m] - expected) > 1e-12 * expected) return false;
  }
  return true;
}

void check_q_grid(std::span<const double> q_grid) {
  if (q_grid.empty()) throw Error(ErrorKind::argument, "q grid is empty");
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!(q_grid[i] > 0.0) || !std::isfinite(q_grid[i]))
      throw Error(ErrorKind::argument, "q grid values must be positive");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1])) throw Error(ErrorKind::argument, "q grid must be ascending");
  }
}

// Sums of |r_tau|^q over overlapping windows for every (tau, q), written to
// `sums` row-major; also returns the per-tau sample counts.
std::vector<std::size_t> moment_sums(std::span<const double> prefix, std::span<const double> q_grid,
                                     std::span<const int> tau_grid, std::vector<double>& sums) {
  const std::size_t n_q = q_grid.size();
  const std::size_t m = prefix.size() - 1;
  const bool chained = is_multiple_grid(q_grid);
  sums.assign(tau_grid.size() * n_q, 0.0);
  std::vector<std::size_t> counts(tau_grid.size());
  std::vector<double> acc(n_q);
  for (std::size_t row = 0; row < tau_grid.size(); ++row) {
    const auto tau = static_cast<std::size_t>(tau_grid[row]);
    std::fill(acc.begin(), acc.end(), 0.0);
    const std::size_t count = m - tau + 1;
    for (std::size_t t = 0; t < count; ++t) {
      const double r = std::abs(prefix[t + tau] - prefix[t]);
      if (r == 0.0) continue;
      const double log_r = std::log(r);
      if (chained) {
        const double base = std::exp(q_grid[0] * log_r);
        double p = base;
        for (std::size_t k = 0; k < n_q; ++k) {
          acc[k] += p;
          p *= base;
        }
      } else {
        for (std::size_t k = 0; k < n_q; ++k) acc[k] += std::exp(q_grid[k] * log_r);
      }
    }
    std::copy(acc.begin(), acc.end(), sums.begin() + static_cast<std::ptrdiff_t>(row * n_q));
    counts[row] = count;
  }
  return counts;
}

std::vector<double> prefix_sums(std::span<const double> increments) {
  std::vector<double> prefix(increments.size() + 1, 0.0);
  for (std::size_t i = 0; i < increments.size(); ++i) prefix[i + 1] = prefix[i] + increments[i];
  return prefix;
}

std::vector<int> unit_tau_grid(int tau_max) {
  std::vector<int> taus(static_cast<std::size_t>(tau_max));
  std::iota(taus.begin(), taus.end(), 1);
  return taus;
}

// B from increments with the surrogate-free pipeline; used for each surrogate.
double proxy_only(std::span<const double> increments, std::span<const double> q_grid, std::span<const int> taus) {
  const StructureFunction sf = structure_function(increments, q_grid, taus);
  return multiscaling_proxy(estimate_hq(sf), q_grid).multiscaling_proxy;
}

std::size_t nearest_to_one(std::span<const double> q_grid) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q_grid.size(); ++i)
    if (std::abs(q_grid[i] - 1.0) < std::abs(q_grid[best] - 1.0)) best = i;
  return best;
}

}  // namespace

std::vector<double> uniform_q_grid(double q_min, double q_max, int count) {
  if (count < 1 || !(q_min > 0.0) || !(q_max >= q_min))
    throw Error(ErrorKind::argument, "invalid moment grid specification");
  std::vector<double> q(static_cast<std::size_t>(count));
  if (count == 1) {
    q[0] = q_min;
    return q;
  }
  const double step = (q_max - q_min) / (count - 1);
  for (int i = 0; i < count; ++i) q[static_cast<std::size_t>(i)] = q_min + step * i;
  q.back() = q_max;
  return q;
}

std::vector<double> log_returns(std::span<const double> series, int tau) {
  if (tau < 1) throw Error(ErrorKind::argument, "tau must be >= 1");
  if (series.size() <= static_cast<std::size_t>(tau))
    throw Error(ErrorKind::length, "series of length " + std::to_string(series.size()) +
                                       " is too short for tau = " + std::to_string(tau));
  std::vector<double> logs(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!(series[i] > 0.0))
      throw Error(ErrorKind::parameter_domain, "log returns need positive values; index " + std::to_string(i) +
                                                   " holds " + std::to_string(series[i]));
    logs[i] = std::log(series[i]);
  }
  const auto lag = static_cast<std::size_t>(tau);
  std::vector<double> out(series.size() - lag);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logs[i + lag] - logs[i];
  return out;
}

StructureFunction structure_function(std::span<const double> returns_base, std::span<const double> q_grid,
                                     std::span<const int> tau_grid) {
  check_q_grid(q_grid);
  if (tau_grid.empty() || tau_grid.front() != 1) throw Error(ErrorKind::argument, "tau grid must start at 1");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (tau_grid[i] <= tau_grid[i - 1]) throw Error(ErrorKind::argument, "tau grid must be strictly ascending");
  if (static_cast<std::size_t>(tau_grid.back()) > returns_base.size())
    throw Error(ErrorKind::length, "tau_max " + std::to_string(tau_grid.back()) + " exceeds the " +
                                       std::to_string(returns_base.size()) + " available increments");

  const std::vector<double> prefix = prefix_sums(returns_base);
  StructureFunction sf;
  sf.q_grid.assign(q_grid.begin(), q_grid.end());
  sf.tau_grid.assign(tau_grid.begin(), tau_grid.end());
  const std::vector<std::size_t> counts = moment_sums(prefix, q_grid, tau_grid, sf.xi);

  const std::size_t n_q = q_grid.size();
  for (std::size_t row = 0; row < tau_grid.size(); ++row) {
    bool all_zero = true;
    for (std::size_t k = 0; k < n_q; ++k) {
      double& x = sf.xi[row * n_q + k];
      x /= static_cast<double>(counts[row]);
      if (x > 0.0) all_zero = false;
    }
    if (all_zero)
      throw Error(ErrorKind::degenerate_moment,
                  "all aggregated returns are zero at tau = " + std::to_string(tau_grid[row]));
  }

  sf.k_q.assign(sf.xi.begin(), sf.xi.begin() + static_cast<std::ptrdiff_t>(n_q));
  sf.normalized.resize(sf.xi.size());
  for (std::size_t row = 0; row < tau_grid.size(); ++row) {
    for (std::size_t k = 0; k < n_q; ++k) {
      const double ratio = row == 0 ? 1.0 : sf.xi[row * n_q + k] / sf.k_q[k];
      sf.normalized[row * n_q + k] = row == 0 ? 1.0 : std::pow(ratio, 1.0 / q_grid[k]);
    }
  }
  return sf;
}

std::vector<double> estimate_hq(const StructureFunction& sf) {
  if (sf.n_tau() < 3)
    throw Error(ErrorKind::insufficient_data,
                "at least 3 tau points are needed, got " + std::to_string(sf.n_tau()));
  const std::size_t n_q = sf.n_q();
  std::vector<double> num(n_q, 0.0);
  double den = 0.0;
  for (std::size_t row = 0; row < sf.n_tau(); ++row) {
    const double x = std::log(static_cast<double>(sf.tau_grid[row]));
    den += x * x;
    for (std::size_t k = 0; k < n_q; ++k) num[k] += x * std::log(sf.normalized_at(row, k));
  }
  std::vector<double> h(n_q);
  for (std::size_t k = 0; k < n_q; ++k) h[k] = num[k] / den;
  return h;
}

ProxyFit multiscaling_proxy(std::span<const double> h_q, std::span<const double> q_grid) {
  if (h_q.size() != q_grid.size()) throw Error(ErrorKind::shape, "h_q and q grid differ in length");
  const std::size_t m = q_grid.size();
  if (m < 3) throw Error(ErrorKind::insufficient_data, "at least 3 moments are needed for the proxy fit");
  const double q_mean = std::accumulate(q_grid.begin(), q_grid.end(), 0.0) / static_cast<double>(m);
  const double h_mean = std::accumulate(h_q.begin(), h_q.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (q_grid[i] - q_mean) * (q_grid[i] - q_mean);
    sxy += (q_grid[i] - q_mean) * (h_q[i] - h_mean);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::rank, "degenerate q grid: all moments are equal");

  ProxyFit fit;
  fit.multiscaling_proxy = sxy / sxx;
  fit.linear_index = h_mean - fit.multiscaling_proxy * q_mean;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = h_q[i] - fit.linear_index - fit.multiscaling_proxy * q_grid[i];
    sse += e * e;
  }
  const double df = static_cast<double>(m - 2);
  const double se = std::sqrt(sse / df / sxx);
  // Rounding-level residuals count as an exact fit.
  const double tiny = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(h_mean));
  if (se <= tiny / std::sqrt(sxx)) {
    fit.stderr_b = 0.0;
    fit.pvalue = std::abs(fit.multiscaling_proxy) <= tiny ? 1.0 : 0.0;
    if (fit.pvalue == 1.0) fit.multiscaling_proxy = 0.0;
    return fit;
  }
  fit.stderr_b = se;
  const boost::math::students_t dist(df);
  const double t = std::abs(fit.multiscaling_proxy / se);
  fit.pvalue = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
  return fit;
}

const char* to_string(SeriesTransform t) { return t == SeriesTransform::log_levels ? "logs" : "levels"; }

const char* to_string(SignificanceMethod m) { return m == SignificanceMethod::surrogate ? "surrogate" : "ols"; }

SeriesTransform series_transform_from_string(const std::string& s) {
  if (s == "logs" || s == "log") return SeriesTransform::log_levels;
  if (s == "levels") return SeriesTransform::levels;
  throw Error(ErrorKind::argument, "unknown series transform '" + s + "' (expected logs or levels)");
}

SignificanceMethod significance_from_string(const std::string& s) {
  if (s == "surrogate") return SignificanceMethod::surrogate;
  if (s == "ols") return SignificanceMethod::ols;
  throw Error(ErrorKind::argument, "unknown significance method '" + s + "' (expected surrogate or ols)");
}

ScalingReport estimate_scaling(std::span<const double> series, int tau_max, const ScalingOptions& options) {
  if (series.size() < 2) throw Error(ErrorKind::length, "series needs at least two observations");
  if (tau_max < 3 || static_cast<long>(series.size()) - tau_max < kMinIncrementsAtTauMax)
    throw Error(ErrorKind::insufficient_data,
                "series of length " + std::to_string(series.size()) + " is too short for tau_max = " +
                    std::to_string(tau_max) + " (need length - tau_max >= " +
                    std::to_string(kMinIncrementsAtTauMax) + " and tau_max >= 3)");
  std::vector<double> increments;
  if (options.transform == SeriesTransform::log_levels) {
    increments = log_returns(series, 1);
  } else {
    increments.resize(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) increments[i] = series[i + 1] - series[i];
  }
  return estimate_scaling_from_increments(increments, tau_max, options);
}

ScalingReport estimate_scaling_from_increments(std::span<const double> increments, int tau_max,
                                               const ScalingOptions& options) {
  if (tau_max < 3 || static_cast<long>(increments.size()) + 1 - tau_max < kMinIncrementsAtTauMax)
    throw Error(ErrorKind::insufficient_data,
                std::to_string(increments.size()) + " increments are too few for tau_max = " +
                    std::to_string(tau_max));
  const std::vector<int> taus = unit_tau_grid(tau_max);
  const StructureFunction sf = structure_function(increments, options.q_grid, taus);

  ScalingReport report;
  report.q_grid = options.q_grid;
  report.h_q = estimate_hq(sf);
  const ProxyFit fit = multiscaling_proxy(report.h_q, report.q_grid);
  report.linear_index = fit.linear_index;
  report.multiscaling_proxy = fit.multiscaling_proxy;
  report.tau_max_used = tau_max;
  report.hurst = report.h_q[nearest_to_one(report.q_grid)];

  if (options.significance == SignificanceMethod::ols) {
    report.proxy_stderr = fit.stderr_b;
    report.proxy_pvalue = fit.pvalue;
    return report;
  }

  if (options.surrogates < 1) throw Error(ErrorKind::argument, "surrogate count must be >= 1");
  // Shuffling destroys temporal structure but keeps the marginal law, so under
  // i.i.d. increments the observed B and the surrogate Bs are exchangeable.
  const auto s_count = static_cast<std::size_t>(options.surrogates);
  std::vector<double> all(s_count + 1);
  all[0] = fit.multiscaling_proxy;
  const RandomStream root(options.seed);
  std::vector<double> shuffled(increments.begin(), increments.end());
  for (std::size_t s = 0; s < s_count; ++s) {
    RandomStream rng = root.substream(s);
    std::copy(increments.begin(), increments.end(), shuffled.begin());
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    all[s + 1] = proxy_only(shuffled, options.q_grid, taus);
  }
  const double center = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  const double observed = std::abs(all[0] - center);
  std::size_t at_least = 0;
  for (double b : all)
    if (std::abs(b - center) >= observed) ++at_least;
  report.proxy_pvalue = static_cast<double>(at_least) / static_cast<double>(all.size());

  double ss = 0.0;
  double surrogate_mean = 0.0;
  for (std::size_t s = 1; s < all.size(); ++s) surrogate_mean += all[s];
  surrogate_mean /= static_cast<double>(s_count);
  for (std::size_t s = 1; s < all.size(); ++s) ss += (all[s] - surrogate_mean) * (all[s] - surrogate_mean);
  report.proxy_stderr = s_count > 1 ? std::sqrt(ss / static_cast<double>(s_count - 1)) : 0.0;
  return report;
}

}  // namespace roughscale::ghe
