#include "roughscale/acsr.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "roughscale/errors.hpp"

namespace roughscale::acsr {

namespace {

constexpr double kBetaLow = -3.0;
constexpr double kBetaHigh = 0.0;
constexpr double kBetaTol = 1e-8;

struct Evaluation {
  double sse = std::numeric_limits<double>::infinity();
  double alpha = 0.0;
  double c = 0.0;
};

// Profiles alpha and c out of the model at fixed (tau*, beta). `log_tau[k]`
// holds log(k + 1).
Evaluation evaluate(std::span<const double> y, std::span<const double> log_tau, int tau_star, double beta,
                    ModelMode mode, std::vector<double>& g) {
  const std::size_t n = y.size();
  const auto split = static_cast<std::size_t>(tau_star - 1);  // lags < tau* occupy [0, split)
  for (std::size_t k = 0; k < split; ++k) g[k] = std::exp(beta * log_tau[k]);
  const double g_star = std::exp(beta * log_tau[split]);
  for (std::size_t k = split; k < n; ++k) g[k] = g_star;

  Evaluation e;
  if (mode == ModelMode::free_amplitude) {
    const double nd = static_cast<double>(n);
    const double g_mean = std::accumulate(g.begin(), g.end(), 0.0) / nd;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double sgg = 0.0;
    double sgy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      sgg += (g[k] - g_mean) * (g[k] - g_mean);
      sgy += (g[k] - g_mean) * (y[k] - y_mean);
    }
    e.c = sgg > 0.0 ? sgy / sgg : 0.0;
    e.alpha = y_mean - e.c * g_mean;
  } else {
    e.c = 1.0;
    e.alpha = mode == ModelMode::pinned_phi1 ? y[0] : y[0] - 1.0;
  }
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - e.alpha - e.c * g[k];
    sse += r * r;
  }
  e.sse = sse;
  return e;
}

struct BetaFit {
  double beta = 0.0;
  Evaluation eval;
};

BetaFit golden_section(std::span<const double> y, std::span<const double> log_tau, int tau_star, ModelMode mode,
                       std::vector<double>& g) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kBetaLow;
  double b = kBetaHigh;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = evaluate(y, log_tau, tau_star, x1, mode, g).sse;
  double f2 = evaluate(y, log_tau, tau_star, x2, mode, g).sse;
  while (b - a > kBetaTol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = evaluate(y, log_tau, tau_star, x1, mode, g).sse;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = evaluate(y, log_tau, tau_star, x2, mode, g).sse;
    }
  }
  BetaFit best;
  best.beta = 0.5 * (a + b);
  best.eval = evaluate(y, log_tau, tau_star, best.beta, mode, g);
  // The bracket ends are legitimate optima (e.g. beta = 0 for a flat series).
  for (double edge : {kBetaLow, kBetaHigh}) {
    const Evaluation e = evaluate(y, log_tau, tau_star, edge, mode, g);
    if (e.sse < best.eval.sse) {
      best.beta = edge;
      best.eval = e;
    }
  }
  return best;
}

std::vector<double> log_lags(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::log(static_cast<double>(k + 1));
  return out;
}

}  // namespace

const char* to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::free_amplitude: return "free";
    case ModelMode::pinned_phi1: return "pinned-phi1";
    case ModelMode::pinned_phi1_minus_one: return "pinned-phi1-minus-1";
  }
  return "free";
}

ModelMode model_mode_from_string(const std::string& s) {
  if (s == "free") return ModelMode::free_amplitude;
  if (s == "pinned-phi1") return ModelMode::pinned_phi1;
  if (s == "pinned-phi1-minus-1") return ModelMode::pinned_phi1_minus_one;
  throw Error(ErrorKind::argument, "unknown ACSR mode '" + s + "' (expected free, pinned-phi1, pinned-phi1-minus-1)");
}

std::vector<double> abs_return_acf(std::span<const double> returns, int max_lag) {
  if (max_lag < 1) throw Error(ErrorKind::argument, "max_lag must be >= 1");
  const std::size_t n = returns.size();
  if (n <= 4 * static_cast<std::size_t>(max_lag))
    throw Error(ErrorKind::length, "ACF up to lag " + std::to_string(max_lag) + " needs more than " +
                                       std::to_string(4 * max_lag) + " returns, got " + std::to_string(n));
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(returns[i]);
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  for (auto& v : a) v -= mean;
  double gamma0 = 0.0;
  for (double v : a) gamma0 += v * v;
  if (!(gamma0 > 0.0)) throw Error(ErrorKind::zero_variance, "absolute returns are constant");

  std::vector<double> acf(static_cast<std::size_t>(max_lag));
  for (std::size_t lag = 1; lag <= acf.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += a[t] * a[t + lag];
    acf[lag - 1] = acc / gamma0;
  }
  return acf;
}

double segment_sse(std::span<const double> acf, int tau_star, double beta, ModelMode mode, double* alpha_out,
                   double* c_out) {
  if (tau_star < 1 || static_cast<std::size_t>(tau_star) > acf.size())
    throw Error(ErrorKind::range, "tau* outside the ACF range");
  std::vector<double> g(acf.size());
  const std::vector<double> log_tau = log_lags(acf.size());
  const Evaluation e = evaluate(acf, log_tau, tau_star, beta, mode, g);
  if (alpha_out) *alpha_out = e.alpha;
  if (c_out) *c_out = e.c;
  return e.sse;
}

AcsrFit acsr_fit(std::span<const double> acf, int search_min, int search_max, ModelMode mode) {
  if (search_min < 2) throw Error(ErrorKind::range, "search_min must be >= 2");
  if (static_cast<std::size_t>(std::max(search_max, 0)) > acf.size())
    throw Error(ErrorKind::range, "search_max " + std::to_string(search_max) + " exceeds the ACF length " +
                                      std::to_string(acf.size()));
  if (search_max < search_min)
    throw Error(ErrorKind::range, "empty search range [" + std::to_string(search_min) + ", " +
                                      std::to_string(search_max) + "]");

  const std::vector<double> log_tau = log_lags(acf.size());
  std::vector<double> g(acf.size());

  AcsrFit best;
  best.mode = mode;
  best.acf.assign(acf.begin(), acf.end());
  best.sse = std::numeric_limits<double>::infinity();
  for (int tau_star = search_min; tau_star <= search_max; ++tau_star) {
    const BetaFit fit = golden_section(acf, log_tau, tau_star, mode, g);
    if (fit.eval.sse < best.sse) {
      best.sse = fit.eval.sse;
      best.tau_star = tau_star;
      best.beta = fit.beta;
      best.alpha = fit.eval.alpha;
      best.scale_c = fit.eval.c;
    }
  }

  // Constant-model baseline for the degeneracy test.
  const double nd = static_cast<double>(acf.size());
  const double mean = std::accumulate(acf.begin(), acf.end(), 0.0) / nd;
  double sse0 = 0.0;
  for (double v : acf) sse0 += (v - mean) * (v - mean);
  const double scale = std::max(1.0, std::abs(mean));
  const double flat_tol = 1e-24 * scale * scale * nd;

  bool degenerate = sse0 <= flat_tol;
  const int extra_params = 3;  // tau*, beta, c
  const double df_resid = nd - 1.0 - extra_params;
  if (!degenerate && best.sse > flat_tol && df_resid > 0.0) {
    const double f = ((sse0 - best.sse) / extra_params) / (best.sse / df_resid);
    const boost::math::fisher_f dist(extra_params, df_resid);
    const double p = f > 0.0 ? boost::math::cdf(boost::math::complement(dist, f)) : 1.0;
    const double candidates = static_cast<double>(search_max - search_min + 1);
    degenerate = p * candidates > 0.05;
  }
  if (degenerate) {
    const BetaFit at_min = golden_section(acf, log_tau, search_min, mode, g);
    best.tau_star = search_min;
    best.beta = at_min.beta;
    best.alpha = at_min.eval.alpha;
    best.scale_c = at_min.eval.c;
    best.sse = at_min.eval.sse;
    best.degenerate = true;
  }
  return best;
}

std::vector<double> fitted_values(const AcsrFit& fit) {
  std::vector<double> out(fit.acf.size());
  const double g_star = std::pow(static_cast<double>(fit.tau_star), fit.beta);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto tau = static_cast<double>(k + 1);
    const double g = static_cast<int>(k + 1) < fit.tau_star ? std::pow(tau, fit.beta) : g_star;
    out[k] = fit.alpha + fit.scale_c * g;
  }
  return out;
}

int default_max_lag(std::size_t n_returns) {
  const auto by_length = static_cast<long>((n_returns - 1) / 4);
  return static_cast<int>(std::min<long>(kDefaultSearchCap, by_length));
}

AcsrFit select_tau_max(std::span<const double> returns, ModelMode mode) {
  if (returns.size() < 4 * static_cast<std::size_t>(kDefaultSearchMin) + 1)
    throw Error(ErrorKind::length, "too few returns for tau* selection");
  const int max_lag = default_max_lag(returns.size());
  const std::vector<double> acf = abs_return_acf(returns, max_lag);
  return acsr_fit(acf, kDefaultSearchMin, max_lag, mode);
}

}  // namespace roughscale::acsr
