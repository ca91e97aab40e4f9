#include "roughscale/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "roughscale/errors.hpp"
#include "roughscale/random.hpp"

namespace roughscale::experiments {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f) {
  const std::size_t n_threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

const char* to_string(ScalingMeasure m) {
  switch (m) {
    case ScalingMeasure::h_vol: return "H_v";
    case ScalingMeasure::b_vol: return "B_v";
    case ScalingMeasure::h_price: return "H_P";
    case ScalingMeasure::b_price: return "B_P";
  }
  return "?";
}

ScalingMeasure scaling_measure_from_string(const std::string& s) {
  std::string key;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c))) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "hv") return ScalingMeasure::h_vol;
  if (key == "bv") return ScalingMeasure::b_vol;
  if (key == "hp") return ScalingMeasure::h_price;
  if (key == "bp") return ScalingMeasure::b_price;
  throw Error(ErrorKind::argument, "unknown scaling measure '" + s + "' (expected H_v, B_v, H_P or B_P)");
}

double Estimates::get(ScalingMeasure m) const {
  switch (m) {
    case ScalingMeasure::h_vol: return h_vol;
    case ScalingMeasure::b_vol: return b_vol;
    case ScalingMeasure::h_price: return h_price;
    case ScalingMeasure::b_price: return b_price;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string MeasurePair::label() const { return std::string(to_string(x)) + "-" + to_string(y); }

std::vector<MeasurePair> standard_pairs() {
  return {{ScalingMeasure::h_vol, ScalingMeasure::b_price},
          {ScalingMeasure::h_vol, ScalingMeasure::h_price},
          {ScalingMeasure::b_vol, ScalingMeasure::b_price}};
}

MeasurePair measure_pair_from_string(const std::string& s) {
  const auto sep = s.find_first_of("-:,/");
  if (sep == std::string::npos) throw Error(ErrorKind::argument, "measure pair '" + s + "' must look like H_v-B_P");
  return {scaling_measure_from_string(s.substr(0, sep)), scaling_measure_from_string(s.substr(sep + 1))};
}

namespace {

int cap_tau(int tau, std::size_t n_levels) {
  const int cap = static_cast<int>(n_levels) - 1 - ghe::kMinIncrementsAtTauMax;
  if (cap < 3) throw Error(ErrorKind::length, "series of " + std::to_string(n_levels) + " points is too short");
  return std::clamp(tau, 3, cap);
}

ghe::ScalingOptions ols_options(ghe::SeriesTransform transform) {
  ghe::ScalingOptions o;
  o.transform = transform;
  o.significance = ghe::SignificanceMethod::ols;
  return o;
}

ghe::ScalingReport vol_report(const pathgen::PathPair& path, int tau, ghe::SeriesTransform transform) {
  if (transform == ghe::SeriesTransform::log_levels) {
    // The exact exponent avoids log(floor) when the variance underflows.
    std::vector<double> inc(path.log_variance.size() - 1);
    for (std::size_t i = 0; i + 1 < path.log_variance.size(); ++i) inc[i] = path.log_variance[i + 1] - path.log_variance[i];
    return ghe::estimate_scaling_from_increments(inc, tau, ols_options(transform));
  }
  return ghe::estimate_scaling(path.variance, tau, ols_options(transform));
}

std::vector<double> linspace_step(double lo, double hi, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e10) / 1e10);
  return out;
}

}  // namespace

PathEstimate estimate_path(const pathgen::PathPair& path, const TauMaxMode& mode, ghe::SeriesTransform vol_transform) {
  PathEstimate out;
  int tau = mode.fixed;
  if (mode.use_acsr) tau = acsr::select_tau_max(ghe::log_returns(path.price, 1)).tau_star;
  out.tau_max = cap_tau(tau, path.price.size());
  const auto price = ghe::estimate_scaling(path.price, out.tau_max, ols_options(ghe::SeriesTransform::log_levels));
  const auto vol = vol_report(path, out.tau_max, vol_transform);
  out.est = {vol.hurst, vol.multiscaling_proxy, price.hurst, price.multiscaling_proxy};
  return out;
}

// --- grid -----------------------------------------------------------------------

void GridConfig::validate() const {
  if (h_values.empty() || lambda_values.empty()) throw Error(ErrorKind::argument, "grid H and lambda lists must be nonempty");
  if (replications < 1) throw Error(ErrorKind::argument, "replications must be at least 1");
  for (double h : h_values)
    if (!(h > 0.0 && h < 1.0)) throw Error(ErrorKind::parameter_domain, "grid H values must lie in (0, 1)");
  for (double l : lambda_values)
    if (!(l >= -1.0 && l <= 1.0)) throw Error(ErrorKind::parameter_domain, "grid lambda values must lie in [-1, 1]");
  if (!tau_max.use_acsr && tau_max.fixed < 3) throw Error(ErrorKind::argument, "fixed tau_max must be at least 3");
  pathgen::RBergomiParams p = base;
  p.hurst = h_values.front();
  p.correlation = lambda_values.front();
  p.validate();
}

GridConfig GridConfig::desk() {
  GridConfig c;
  c.h_values = linspace_step(0.05, 0.95, 0.1);
  c.lambda_values = linspace_step(-1.0, 1.0, 0.25);
  c.replications = 20;
  return c;
}

GridConfig GridConfig::paper() {
  GridConfig c;
  c.h_values = linspace_step(0.01, 0.99, 0.01);
  c.lambda_values = linspace_step(-1.0, 1.0, 0.05);
  c.replications = 100;
  return c;
}

const CellRecord& GridResult::at(int h_index, int lambda_index, int replication) const {
  const auto n_l = config.lambda_values.size();
  const auto n_r = static_cast<std::size_t>(config.replications);
  return records.at((static_cast<std::size_t>(h_index) * n_l + static_cast<std::size_t>(lambda_index)) * n_r +
                    static_cast<std::size_t>(replication));
}

std::size_t GridResult::failures() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const CellRecord& r) { return !r.ok; }));
}

std::uint64_t cell_seed(std::uint64_t base_seed, int h_index, int lambda_index, int replication) {
  return derive_seed(base_seed, {static_cast<std::uint64_t>(h_index), static_cast<std::uint64_t>(lambda_index),
                                 static_cast<std::uint64_t>(replication)});
}

GridResult synthetic_grid(const GridConfig& config) {
  config.validate();
  GridResult result;
  result.config = config;
  const int n_h = static_cast<int>(config.h_values.size());
  const int n_l = static_cast<int>(config.lambda_values.size());
  const int n_r = config.replications;
  result.records.resize(static_cast<std::size_t>(n_h) * static_cast<std::size_t>(n_l) * static_cast<std::size_t>(n_r));

  parallel_for(result.records.size(), config.workers, [&](std::size_t k) {
    CellRecord& rec = result.records[k];
    rec.replication = static_cast<int>(k % static_cast<std::size_t>(n_r));
    rec.lambda_index = static_cast<int>((k / static_cast<std::size_t>(n_r)) % static_cast<std::size_t>(n_l));
    rec.h_index = static_cast<int>(k / (static_cast<std::size_t>(n_r) * static_cast<std::size_t>(n_l)));
    rec.hurst = config.h_values[static_cast<std::size_t>(rec.h_index)];
    rec.lambda = config.lambda_values[static_cast<std::size_t>(rec.lambda_index)];
    rec.seed = cell_seed(config.base_seed, rec.h_index, rec.lambda_index, rec.replication);
    try {
      pathgen::RBergomiParams p = config.base;
      p.hurst = rec.hurst;
      p.correlation = rec.lambda;
      p.seed = rec.seed;
      const auto path = pathgen::simulate_rbergomi(p);
      const auto pe = estimate_path(path, config.tau_max, config.vol_transform);
      rec.est = pe.est;
      rec.tau_max = pe.tau_max;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });
  return result;
}

MeanTest mean_test(const std::vector<double>& values) {
  MeanTest t;
  std::vector<double> xs;
  for (double v : values)
    if (std::isfinite(v)) xs.push_back(v);
  t.n = static_cast<int>(xs.size());
  if (xs.empty()) return t;
  double sum = 0.0;
  for (double v : xs) sum += v;
  t.mean = sum / t.n;
  if (t.n < 2) return t;
  double ss = 0.0;
  for (double v : xs) ss += (v - t.mean) * (v - t.mean);
  t.stderr_mean = std::sqrt(ss / (t.n - 1) / t.n);
  if (!(t.stderr_mean > 0.0)) {
    t.pvalue = t.mean == 0.0 ? 1.0 : 0.0;
    return t;
  }
  const boost::math::students_t dist(t.n - 1);
  t.pvalue = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t.mean / t.stderr_mean)));
  return t;
}

std::vector<std::vector<MeanTest>> cell_means(const GridResult& result, ScalingMeasure m) {
  const int n_h = static_cast<int>(result.config.h_values.size());
  const int n_l = static_cast<int>(result.config.lambda_values.size());
  std::vector<std::vector<MeanTest>> out(static_cast<std::size_t>(n_h), std::vector<MeanTest>(static_cast<std::size_t>(n_l)));
  for (int i = 0; i < n_h; ++i)
    for (int j = 0; j < n_l; ++j) {
      std::vector<double> xs;
      for (int r = 0; r < result.config.replications; ++r) {
        const auto& rec = result.at(i, j, r);
        if (rec.ok) xs.push_back(rec.est.get(m));
      }
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = mean_test(xs);
    }
  return out;
}

MeanTest h_row_mean(const GridResult& result, ScalingMeasure m, int h_index) {
  std::vector<double> xs;
  for (int j = 0; j < static_cast<int>(result.config.lambda_values.size()); ++j)
    for (int r = 0; r < result.config.replications; ++r) {
      const auto& rec = result.at(h_index, j, r);
      if (rec.ok) xs.push_back(rec.est.get(m));
    }
  return mean_test(xs);
}

std::vector<BucketRow> bucket_correlations(const GridResult& result, ScalingMeasure x, ScalingMeasure y,
                                           double bucket_width, BucketPooling pooling, bool by_lambda) {
  if (!(bucket_width > 0.0 && bucket_width <= 1.0)) throw Error(ErrorKind::argument, "bucket width must lie in (0, 1]");
  const auto& cfg = result.config;
  const int n_buckets = static_cast<int>(std::ceil(1.0 / bucket_width - 1e-9));
  std::vector<std::vector<int>> members(static_cast<std::size_t>(n_buckets));
  for (int i = 0; i < static_cast<int>(cfg.h_values.size()); ++i) {
    // (lo, hi] buckets; the small offset keeps 0.1 in (0, 0.1] despite rounding.
    const int b = std::clamp(static_cast<int>(std::ceil(cfg.h_values[static_cast<std::size_t>(i)] / bucket_width - 1e-9)) - 1, 0,
                             n_buckets - 1);
    members[static_cast<std::size_t>(b)].push_back(i);
  }

  std::vector<int> lambda_sets = {-1};
  if (by_lambda) {
    lambda_sets.clear();
    for (int j = 0; j < static_cast<int>(cfg.lambda_values.size()); ++j) lambda_sets.push_back(j);
  }

  std::vector<BucketRow> rows;
  for (int b = 0; b < n_buckets; ++b) {
    if (members[static_cast<std::size_t>(b)].empty()) continue;
    for (int lam : lambda_sets) {
      BucketRow row;
      row.lo = b * bucket_width;
      row.hi = std::min(1.0, (b + 1) * bucket_width);
      row.h_indices = members[static_cast<std::size_t>(b)];
      row.lambda_index = lam;

      auto collect = [&](int r, std::vector<double>& xs, std::vector<double>& ys) {
        for (int i : row.h_indices)
          for (int j = 0; j < static_cast<int>(cfg.lambda_values.size()); ++j) {
            if (lam >= 0 && j != lam) continue;
            const auto& rec = result.at(i, j, r);
            if (!rec.ok) continue;
            const double vx = rec.est.get(x);
            const double vy = rec.est.get(y);
            if (std::isfinite(vx) && std::isfinite(vy)) {
              xs.push_back(vx);
              ys.push_back(vy);
            }
          }
      };

      if (pooling == BucketPooling::pooled) {
        std::vector<double> xs, ys;
        for (int r = 0; r < cfg.replications; ++r) collect(r, xs, ys);
        row.pairs = static_cast<int>(xs.size());
        row.replications_used = cfg.replications;
        try {
          if (xs.size() < 3) throw Error(ErrorKind::size, "too few pairs");
          const auto p = depmeas::pearson(xs, ys);
          const auto s = depmeas::spearman(xs, ys);
          row.pearson = p.coefficient;
          row.pearson_pvalue = p.pvalue;
          row.spearman = s.coefficient;
          row.spearman_pvalue = s.pvalue;
        } catch (const Error&) {
          row.insufficient = true;
        }
      } else {
        std::vector<double> pear, spear;
        depmeas::CorrelationResult last_p, last_s;
        for (int r = 0; r < cfg.replications; ++r) {
          std::vector<double> xs, ys;
          collect(r, xs, ys);
          if (xs.size() < 3) continue;
          row.pairs = std::max(row.pairs, static_cast<int>(xs.size()));
          try {
            last_p = depmeas::pearson(xs, ys);
            last_s = depmeas::spearman(xs, ys);
          } catch (const Error&) {
            continue;
          }
          pear.push_back(last_p.coefficient);
          spear.push_back(last_s.coefficient);
        }
        row.replications_used = static_cast<int>(pear.size());
        if (pear.empty()) {
          row.insufficient = true;
        } else if (pear.size() == 1) {
          row.pearson = last_p.coefficient;
          row.pearson_pvalue = last_p.pvalue;
          row.spearman = last_s.coefficient;
          row.spearman_pvalue = last_s.pvalue;
        } else {
          const auto tp = mean_test(pear);
          const auto ts = mean_test(spear);
          row.pearson = tp.mean;
          row.pearson_pvalue = tp.pvalue;
          row.spearman = ts.mean;
          row.spearman_pvalue = ts.pvalue;
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// --- empirical H --------------------------------------------------------------

const std::vector<Table1Row>& table1_reference() {
  static const std::vector<Table1Row> rows = {
      {"AEX", 516, 0.523, -0.027, 0.130, -0.008},     {"AORD", 507, 0.510, -0.004, 0.061, -0.007},
      {"BFX", 446, 0.542, -0.032, 0.136, -0.006},     {"BSESN", 326, 0.535, -0.005, 0.104, -0.007},
      {"BVLG", 461, 0.472, -0.023, 0.107, -0.006},    {"BVSP", 335, 0.504, -0.023, 0.109, -0.004},
      {"DJI", 445, 0.479, -0.030, 0.105, -0.005},     {"FCHI", 578, 0.499, -0.032, 0.123, -0.012},
      {"FTMIB", 256, 0.485, -0.026, 0.112, -0.005},   {"FTSE", 486, 0.485, -0.022, 0.105, -0.009},
      {"GDAXI", 502, 0.519, -0.033, 0.131, -0.011},   {"GSPTSE", 337, 0.512, -0.022, 0.092, -0.002},
      {"HSI", 669, 0.503, -0.024, 0.083, -0.008},     {"IBEX", 1070, 0.520, -0.030, 0.137, -0.010},
      {"IXIC", 927, 0.529, -0.016, 0.103, -0.009},    {"KS11", 985, 0.509, -0.014, 0.088, -0.007},
      {"KSE", 103, 0.582, -0.024, 0.112, -0.000},     {"MXX", 1096, 0.540, -0.039, 0.075, -0.017},
      {"N225", 344, 0.517, -0.017, 0.096, -0.003},    {"NSEI", 477, 0.531, -0.014, 0.104, -0.005},
      {"OMXC20", 439, 0.517, -0.020, 0.104, -0.007},  {"OMXHPI", 371, 0.514, -0.017, 0.117, -0.008},
      {"OMXSPI", 444, 0.506, -0.015, 0.124, -0.007},  {"OSEAX", 332, 0.531, -0.014, 0.093, -0.008},
      {"RUT", 229, 0.470, -0.005, 0.110, -0.002},     {"SMSI", 643, 0.523, -0.032, 0.128, -0.012},
      {"SPX", 477, 0.496, -0.029, 0.115, -0.002},     {"SSEC", 511, 0.570, -0.020, 0.114, -0.007},
      {"SSMI", 528, 0.510, -0.025, 0.135, -0.004},    {"STI", 598, 0.557, -0.018, 0.072, -0.009},
      {"STOXX50E", 504, 0.504, -0.035, 0.118, -0.019},
  };
  return rows;
}

void EmpiricalHConfig::validate() const {
  if (h_list.size() != tau_max_list.size())
    throw Error(ErrorKind::shape, "H list has " + std::to_string(h_list.size()) + " entries but tau_max list has " +
                                      std::to_string(tau_max_list.size()));
  if (!symbols.empty() && symbols.size() != h_list.size())
    throw Error(ErrorKind::shape, "symbol list does not match the H list");
  if (h_list.size() < 3) throw Error(ErrorKind::size, "empirical-H needs at least 3 series");
  if (lambda_values.empty()) throw Error(ErrorKind::argument, "lambda list must be nonempty");
  if (replications < 1) throw Error(ErrorKind::argument, "replications must be at least 1");
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    pathgen::RBergomiParams p = base;
    p.hurst = h_list[i];
    p.correlation = lambda_values.front();
    p.validate();
    if (tau_max_list[i] < 3 || tau_max_list[i] > base.n_steps - ghe::kMinIncrementsAtTauMax)
      throw Error(ErrorKind::argument, "tau_max " + std::to_string(tau_max_list[i]) + " does not fit " +
                                           std::to_string(base.n_steps) + " steps");
  }
  for (double l : lambda_values) {
    if (!(l >= -1.0 && l <= 1.0)) throw Error(ErrorKind::parameter_domain, "lambda values must lie in [-1, 1]");
  }
}

EmpiricalHConfig EmpiricalHConfig::table1() {
  EmpiricalHConfig c;
  for (const auto& row : table1_reference()) {
    c.symbols.push_back(row.symbol);
    c.h_list.push_back(row.h_vol);
    c.tau_max_list.push_back(row.tau_star);
  }
  c.lambda_values = {-0.8, -0.4, 0.0, 0.4, 0.8};
  c.replications = 20;
  c.base.forward_variance = 0.01;
  return c;
}

const Estimates& EmpiricalHResult::at(int lambda_index, int replication, int series) const {
  const auto n_r = static_cast<std::size_t>(config.replications);
  return estimates.at((static_cast<std::size_t>(lambda_index) * n_r + static_cast<std::size_t>(replication)) * n_series() +
                      static_cast<std::size_t>(series));
}

robust::CorrelationPair EmpiricalHResult::cross_section(int lambda_index, int replication, MeasurePair pair) const {
  std::vector<double> xs, ys;
  for (int i = 0; i < static_cast<int>(n_series()); ++i) {
    const auto& e = at(lambda_index, replication, i);
    const double vx = e.get(pair.x);
    const double vy = e.get(pair.y);
    if (std::isfinite(vx) && std::isfinite(vy)) {
      xs.push_back(vx);
      ys.push_back(vy);
    }
  }
  return {depmeas::pearson(xs, ys), depmeas::spearman(xs, ys)};
}

std::vector<CurvePoint> EmpiricalHResult::curve(MeasurePair pair) const {
  std::vector<CurvePoint> out;
  for (int j = 0; j < static_cast<int>(config.lambda_values.size()); ++j) {
    std::vector<double> ps, ss;
    for (int r = 0; r < config.replications; ++r) {
      try {
        const auto c = cross_section(j, r, pair);
        ps.push_back(c.pearson.coefficient);
        ss.push_back(c.spearman.coefficient);
      } catch (const Error&) {
      }
    }
    CurvePoint pt;
    pt.lambda = config.lambda_values[static_cast<std::size_t>(j)];
    pt.replications = static_cast<int>(ps.size());
    const auto tp = mean_test(ps);
    const auto ts = mean_test(ss);
    pt.pearson_mean = tp.mean;
    pt.pearson_se = ps.size() > 1 ? tp.stderr_mean : 0.0;
    pt.spearman_mean = ts.mean;
    pt.spearman_se = ss.size() > 1 ? ts.stderr_mean : 0.0;
    out.push_back(pt);
  }
  return out;
}

EmpiricalHResult empirical_h_experiment(const EmpiricalHConfig& config) {
  config.validate();
  EmpiricalHResult result;
  result.config = config;
  const std::size_t n_s = config.h_list.size();
  const std::size_t n_r = static_cast<std::size_t>(config.replications);
  result.estimates.resize(config.lambda_values.size() * n_r * n_s);
  std::vector<std::string> errors(result.estimates.size());

  parallel_for(result.estimates.size(), config.workers, [&](std::size_t k) {
    const std::size_t i = k % n_s;
    const std::size_t r = (k / n_s) % n_r;
    const std::size_t j = k / (n_s * n_r);
    try {
      pathgen::RBergomiParams p = config.base;
      p.hurst = config.h_list[i];
      p.correlation = config.lambda_values[j];
      p.seed = derive_seed(config.base_seed, {j, r, i});
      const auto path = pathgen::simulate_rbergomi(p);
      result.estimates[k] = estimate_path(path, {false, config.tau_max_list[i]}, config.vol_transform).est;
    } catch (const std::exception& e) {
      errors[k] = "lambda " + std::to_string(j) + " rep " + std::to_string(r) + " series " + std::to_string(i) + ": " + e.what();
    }
  });
  for (auto& e : errors)
    if (!e.empty()) result.failures.push_back(std::move(e));
  return result;
}

// --- real data -------------------------------------------------------------------

const char* to_string(ReturnKind k) { return k == ReturnKind::open_to_close ? "open_to_close" : "close_to_close"; }

ReturnKind return_kind_from_string(const std::string& s) {
  if (s == "open_to_close" || s == "open-to-close" || s == "oc") return ReturnKind::open_to_close;
  if (s == "close_to_close" || s == "close-to-close" || s == "cc") return ReturnKind::close_to_close;
  throw Error(ErrorKind::argument, "unknown return kind '" + s + "'");
}

Estimates IndexRow::estimates() const {
  return {vol.hurst, vol.multiscaling_proxy, price.hurst, price.multiscaling_proxy};
}

const PairDependence& RealDataResult::dependence_for(MeasurePair pair) const {
  for (const auto& d : dependence)
    if (d.pair == pair) return d;
  throw Error(ErrorKind::argument, "no dependence result for pair " + pair.label());
}

IndexRow price_side(const dataio::MarketSeries& series, const PipelineOptions& options) {
  IndexRow row;
  row.symbol = series.symbol;
  const auto close = dataio::select_measure(series, dataio::Measure::close_price);
  if (options.fixed_tau_max) {
    row.tau_star = *options.fixed_tau_max;
  } else {
    const auto returns = options.return_kind == ReturnKind::open_to_close
                             ? dataio::select_measure(series, dataio::Measure::open_to_close)
                             : ghe::log_returns(close, 1);
    row.acsr = acsr::select_tau_max(returns, options.acsr_mode);
    row.tau_star = row.acsr.tau_star;
  }
  const int tau = cap_tau(row.tau_star, close.size());
  if (tau != row.tau_star)
    throw Error(ErrorKind::length, series.symbol + ": tau* = " + std::to_string(row.tau_star) +
                                       " leaves fewer than " + std::to_string(ghe::kMinIncrementsAtTauMax) +
                                       " increments");
  ghe::ScalingOptions po = options.price_options;
  po.transform = ghe::SeriesTransform::log_levels;
  row.price = ghe::estimate_scaling(close, tau, po);
  return row;
}

namespace {

void fill_vol_side(IndexRow& row, const dataio::MarketSeries& series, dataio::Measure measure,
                   const PipelineOptions& options) {
  const auto values = dataio::select_measure(series, measure);
  row.vol = ghe::estimate_scaling(values, row.tau_star, options.vol_options);
}

std::size_t measure_slot(dataio::Measure m) { return static_cast<std::size_t>(m); }

RealDataResult assemble(const std::vector<IndexRow>& price_rows, const std::map<std::string, dataio::MarketSeries>& dataset,
                        dataio::Measure measure, const PipelineOptions& options) {
  RealDataResult out;
  out.measure = measure;
  out.return_kind = options.return_kind;
  out.rows = price_rows;
  parallel_for(out.rows.size(), options.workers, [&](std::size_t i) {
    IndexRow& row = out.rows[i];
    if (!row.ok) return;
    try {
      fill_vol_side(row, dataset.at(row.symbol), measure, options);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });

  std::vector<const IndexRow*> good;
  for (const auto& row : out.rows) {
    if (row.ok)
      good.push_back(&row);
    else
      out.excluded.push_back(row.symbol);
  }
  const auto pairs = standard_pairs();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    PairDependence dep;
    dep.pair = pairs[p];
    std::vector<robust::Point> points;
    for (const IndexRow* row : good) {
      const auto e = row->estimates();
      points.push_back({e.get(dep.pair.x), e.get(dep.pair.y)});
      dep.symbols.push_back(row->symbol);
    }
    if (points.size() >= 5) {
      const RandomStream rng(derive_seed(options.seed, {measure_slot(measure), p}));
      dep.result = robust::robust_correlation(points, rng, options.outlier);
      for (int idx : dep.result.report.outlier_indices) dep.outlier_symbols.push_back(dep.symbols[static_cast<std::size_t>(idx)]);
    } else if (points.size() >= 3) {
      dep.result.raw = robust::correlations_excluding(points, {});
      dep.result.robust = dep.result.raw;
    }
    out.dependence.push_back(std::move(dep));
  }
  return out;
}

std::vector<IndexRow> all_price_sides(const std::map<std::string, dataio::MarketSeries>& dataset,
                                      const PipelineOptions& options) {
  if (dataset.empty()) throw Error(ErrorKind::argument, "dataset is empty");
  std::vector<const dataio::MarketSeries*> series;
  for (const auto& [_, s] : dataset) series.push_back(&s);
  std::vector<IndexRow> rows(series.size());
  parallel_for(series.size(), options.workers, [&](std::size_t i) {
    try {
      rows[i] = price_side(*series[i], options);
    } catch (const std::exception& e) {
      rows[i].symbol = series[i]->symbol;
      rows[i].ok = false;
      rows[i].error = e.what();
    }
  });
  return rows;
}

void require_measure(const std::map<std::string, dataio::MarketSeries>& dataset, dataio::Measure measure) {
  for (const auto& [_, s] : dataset)
    if (s.has(measure)) return;
  throw Error(ErrorKind::schema, std::string("measure '") + dataio::to_string(measure) + "' is absent from the dataset");
}

}  // namespace

RealDataResult real_data_pipeline(const std::map<std::string, dataio::MarketSeries>& dataset, dataio::Measure measure,
                                  const PipelineOptions& options) {
  require_measure(dataset, measure);
  return assemble(all_price_sides(dataset, options), dataset, measure, options);
}

CrossMeasureResult cross_measure_pipeline(const std::map<std::string, dataio::MarketSeries>& dataset,
                                          const std::vector<dataio::Measure>& measures, const PipelineOptions& options) {
  if (measures.empty()) throw Error(ErrorKind::argument, "no measures requested");
  for (auto m : measures) require_measure(dataset, m);
  CrossMeasureResult out;
  const auto price_rows = all_price_sides(dataset, options);
  for (auto m : measures) out.per_measure.push_back(assemble(price_rows, dataset, m, options));

  for (const auto& pair : standard_pairs()) {
    IntersectionResult ir;
    ir.pair = pair;
    std::vector<std::vector<std::string>> sets;
    for (const auto& res : out.per_measure) sets.push_back(res.dependence_for(pair).outlier_symbols);
    ir.outliers = robust::intersect_outliers<std::string>(sets);
    for (const auto& res : out.per_measure) {
      const auto& dep = res.dependence_for(pair);
      std::vector<robust::Point> points;
      std::vector<int> excluded;
      for (std::size_t i = 0; i < dep.symbols.size(); ++i) {
        const auto it = std::find_if(res.rows.begin(), res.rows.end(),
                                     [&](const IndexRow& r) { return r.symbol == dep.symbols[i]; });
        const auto e = it->estimates();
        points.push_back({e.get(pair.x), e.get(pair.y)});
        if (std::binary_search(ir.outliers.begin(), ir.outliers.end(), dep.symbols[i])) excluded.push_back(static_cast<int>(i));
      }
      try {
        ir.filtered[res.measure] = robust::correlations_excluding(points, excluded);
      } catch (const Error&) {
      }
    }
    out.intersections.push_back(std::move(ir));
  }
  return out;
}

// --- synthetic library ---------------------------------------------------------

SyntheticLibraryConfig SyntheticLibraryConfig::table1() {
  SyntheticLibraryConfig c;
  for (const auto& row : table1_reference()) {
    c.symbols.push_back(row.symbol);
    c.h_list.push_back(row.h_vol);
  }
  c.base.forward_variance = 0.01;
  return c;
}

std::map<std::string, dataio::MarketSeries> synthetic_library(const SyntheticLibraryConfig& config) {
  if (config.symbols.size() != config.h_list.size())
    throw Error(ErrorKind::shape, "symbol and H lists differ in length");
  if (config.n_days < 200) throw Error(ErrorKind::argument, "synthetic library needs at least 200 days");
  if (!(config.missing_fraction >= 0.0 && config.missing_fraction < 0.5))
    throw Error(ErrorKind::argument, "missing fraction must lie in [0, 0.5)");

  // Business days from the first date.
  std::vector<dataio::Date> dates;
  for (long d = config.first_date.serial(); static_cast<int>(dates.size()) < config.n_days; ++d) {
    const long weekday = ((d % 7) + 7 + 3) % 7;  // 1970-01-01 was a Thursday; 0 = Monday
    if (weekday < 5) dates.push_back(dataio::Date::from_serial(d));
  }

  std::vector<dataio::MarketSeries> built(config.symbols.size());
  for (std::size_t i = 0; i < config.symbols.size(); ++i) {
    pathgen::RBergomiParams p = config.base;
    p.hurst = config.h_list[i];
    p.n_steps = config.n_days;
    p.seed = derive_seed(config.seed, {i, 0});
    const auto path = pathgen::simulate_rbergomi(p);
    RandomStream noise(derive_seed(config.seed, {i, 1}));

    auto& s = built[i];
    s.symbol = config.symbols[i];
    s.dates = dates;
    const auto n = static_cast<std::size_t>(config.n_days);
    std::vector<double> close(n), oc(n), open(n), rv10(n), rv5(n), rsv(n), bv(n);
    for (std::size_t t = 0; t < n; ++t) {
      close[t] = path.price[t + 1];
      open[t] = path.price[t];
      oc[t] = std::log(close[t] / open[t]);
      // Integrated variance over the day, observed with multiplicative noise.
      const double iv = 0.5 * (path.variance[t] + path.variance[t + 1]) * p.dt;
      rv10[t] = iv * std::exp(0.10 * noise.normal());
      rv5[t] = iv * std::exp(0.07 * noise.normal());
      rsv[t] = 0.5 * iv * std::exp(0.12 * noise.normal());
      bv[t] = iv * std::exp(0.09 * noise.normal());
    }
    for (auto* col : {&rv10, &rv5, &rsv, &bv})
      for (std::size_t t = 0; t < n; ++t)
        if (noise.uniform() < config.missing_fraction) (*col)[t] = std::numeric_limits<double>::quiet_NaN();
    s.measures[dataio::Measure::close_price] = std::move(close);
    s.measures[dataio::Measure::open_to_close] = std::move(oc);
    s.measures[dataio::Measure::rv10] = std::move(rv10);
    s.measures[dataio::Measure::rv5] = std::move(rv5);
    s.measures[dataio::Measure::rsv] = std::move(rsv);
    s.measures[dataio::Measure::bv] = std::move(bv);
    s.open_price = std::move(open);
  }
  std::map<std::string, dataio::MarketSeries> out;
  for (auto& s : built) out.emplace(s.symbol, std::move(s));
  return out;
}

}  // namespace roughscale::experiments
