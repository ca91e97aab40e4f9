#include "roughscale/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughscale/errors.hpp"

namespace roughscale::serialize {

namespace {

// NaN and inf have no JSON spelling; store them as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double as_double(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json to_json(const ghe::ScalingReport& r) {
  json j;
  j["q_grid"] = r.q_grid;
  json hq = json::array();
  for (double h : r.h_q) hq.push_back(num(h));
  j["h_q"] = hq;
  j["linear_index"] = num(r.linear_index);
  j["multiscaling_proxy"] = num(r.multiscaling_proxy);
  j["proxy_stderr"] = num(r.proxy_stderr);
  j["proxy_pvalue"] = num(r.proxy_pvalue);
  j["tau_max_used"] = r.tau_max_used;
  j["hurst"] = num(r.hurst);
  return j;
}

ghe::ScalingReport scaling_report_from_json(const json& j) {
  try {
    ghe::ScalingReport r;
    r.q_grid = j.at("q_grid").get<std::vector<double>>();
    for (const auto& v : j.at("h_q")) r.h_q.push_back(as_double(v));
    r.linear_index = as_double(j.at("linear_index"));
    r.multiscaling_proxy = as_double(j.at("multiscaling_proxy"));
    r.proxy_stderr = as_double(j.at("proxy_stderr"));
    r.proxy_pvalue = as_double(j.at("proxy_pvalue"));
    r.tau_max_used = j.at("tau_max_used").get<int>();
    r.hurst = as_double(j.at("hurst"));
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema, std::string("malformed scaling report: ") + e.what());
  }
}

json to_json(const acsr::AcsrFit& fit, bool with_acf) {
  json j;
  j["tau_star"] = fit.tau_star;
  j["alpha"] = num(fit.alpha);
  j["beta"] = num(fit.beta);
  j["scale_c"] = num(fit.scale_c);
  j["sse"] = num(fit.sse);
  j["degenerate"] = fit.degenerate;
  j["mode"] = acsr::to_string(fit.mode);
  if (with_acf) j["acf"] = fit.acf;
  return j;
}

json to_json(const depmeas::CorrelationResult& c) {
  return {{"kind", depmeas::to_string(c.kind)}, {"coefficient", num(c.coefficient)}, {"pvalue", num(c.pvalue)}, {"n", c.n}};
}

json to_json(const robust::CorrelationPair& c) { return {{"pearson", to_json(c.pearson)}, {"spearman", to_json(c.spearman)}}; }

json to_json(const robust::OutlierReport& r) {
  json j;
  j["center"] = {r.center[0], r.center[1]};
  json d = json::array();
  for (double v : r.distances) d.push_back(num(v));
  j["distances"] = d;
  j["fences"] = {{"low", num(r.fences.low)}, {"high", num(r.fences.high)}};
  j["outlier_indices"] = r.outlier_indices;
  j["mcd_support"] = r.mcd_support;
  return j;
}

json to_json(const robust::RobustCorrelationResult& r) {
  return {{"raw", to_json(r.raw)}, {"robust", to_json(r.robust)}, {"outliers", to_json(r.report)}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  finish(os, path);
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::format, path.string() + ": " + e.what());
  }
}

void write_scaling_csv(const ghe::ScalingReport& r, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "q,h_q\n";
  for (std::size_t i = 0; i < r.q_grid.size(); ++i) os << csv_number(r.q_grid[i]) << ',' << csv_number(r.h_q[i]) << '\n';
  finish(os, path);
}

void write_grid_csv(const experiments::GridResult& g, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "h_index,lambda_index,replication,hurst,lambda,seed,tau_max,H_v,B_v,H_P,B_P,ok,error\n";
  for (const auto& r : g.records) {
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    os << r.h_index << ',' << r.lambda_index << ',' << r.replication << ',' << csv_number(r.hurst) << ','
       << csv_number(r.lambda) << ',' << r.seed << ',' << r.tau_max << ',' << csv_number(r.est.h_vol) << ','
       << csv_number(r.est.b_vol) << ',' << csv_number(r.est.h_price) << ',' << csv_number(r.est.b_price) << ','
       << (r.ok ? 1 : 0) << ',' << err << '\n';
  }
  finish(os, path);
}

void write_cell_means_csv(const experiments::GridResult& g, experiments::ScalingMeasure m,
                          const std::filesystem::path& path) {
  const auto means = experiments::cell_means(g, m);
  auto os = open_out(path);
  os << "hurst,lambda,mean,stderr,pvalue,n\n";
  for (std::size_t i = 0; i < means.size(); ++i)
    for (std::size_t j = 0; j < means[i].size(); ++j) {
      const auto& c = means[i][j];
      os << csv_number(g.config.h_values[i]) << ',' << csv_number(g.config.lambda_values[j]) << ','
         << csv_number(c.mean) << ',' << csv_number(c.stderr_mean) << ',' << csv_number(c.pvalue) << ',' << c.n << '\n';
    }
  finish(os, path);
}

void write_buckets_csv(const std::vector<experiments::BucketRow>& rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "lo,hi,lambda_index,replications,pairs,pearson,pearson_pvalue,spearman,spearman_pvalue,insufficient\n";
  for (const auto& r : rows)
    os << csv_number(r.lo) << ',' << csv_number(r.hi) << ',' << r.lambda_index << ',' << r.replications_used << ','
       << r.pairs << ',' << csv_number(r.pearson) << ',' << csv_number(r.pearson_pvalue) << ','
       << csv_number(r.spearman) << ',' << csv_number(r.spearman_pvalue) << ',' << (r.insufficient ? 1 : 0) << '\n';
  finish(os, path);
}

void write_empirical_csv(const experiments::EmpiricalHResult& r, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "lambda,replication,series,symbol,hurst,tau_max,H_v,B_v,H_P,B_P\n";
  const auto& cfg = r.config;
  for (int j = 0; j < static_cast<int>(cfg.lambda_values.size()); ++j)
    for (int rep = 0; rep < cfg.replications; ++rep)
      for (int i = 0; i < static_cast<int>(r.n_series()); ++i) {
        const auto& e = r.at(j, rep, i);
        const auto ui = static_cast<std::size_t>(i);
        os << csv_number(cfg.lambda_values[static_cast<std::size_t>(j)]) << ',' << rep << ',' << i << ','
           << (cfg.symbols.empty() ? std::string() : cfg.symbols[ui]) << ',' << csv_number(cfg.h_list[ui]) << ','
           << cfg.tau_max_list[ui] << ',' << csv_number(e.h_vol) << ',' << csv_number(e.b_vol) << ','
           << csv_number(e.h_price) << ',' << csv_number(e.b_price) << '\n';
      }
  finish(os, path);
}

void write_curve_csv(const std::vector<experiments::CurvePoint>& curve, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "lambda,pearson_mean,pearson_se,spearman_mean,spearman_se,replications\n";
  for (const auto& p : curve)
    os << csv_number(p.lambda) << ',' << csv_number(p.pearson_mean) << ',' << csv_number(p.pearson_se) << ','
       << csv_number(p.spearman_mean) << ',' << csv_number(p.spearman_se) << ',' << p.replications << '\n';
  finish(os, path);
}

void write_table_csv(const experiments::RealDataResult& r, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "symbol,tau_star,H_P,B_P,B_P_pvalue,H_v,B_v,B_v_pvalue,ok,error\n";
  for (const auto& row : r.rows) {
    std::string err = row.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    if (row.ok)
      os << row.symbol << ',' << row.tau_star << ',' << csv_number(row.price.hurst) << ','
         << csv_number(row.price.multiscaling_proxy) << ',' << csv_number(row.price.proxy_pvalue) << ','
         << csv_number(row.vol.hurst) << ',' << csv_number(row.vol.multiscaling_proxy) << ','
         << csv_number(row.vol.proxy_pvalue) << ",1,\n";
    else
      os << row.symbol << ',' << row.tau_star << ",nan,nan,nan,nan,nan,nan,0," << err << '\n';
  }
  finish(os, path);
}

json dependence_json(const experiments::RealDataResult& r) {
  json j;
  j["measure"] = dataio::to_string(r.measure);
  j["return_kind"] = experiments::to_string(r.return_kind);
  j["excluded"] = r.excluded;
  json pairs = json::array();
  for (const auto& d : r.dependence) {
    json p;
    p["pair"] = d.pair.label();
    p["symbols"] = d.symbols;
    p["outlier_symbols"] = d.outlier_symbols;
    p["result"] = to_json(d.result);
    pairs.push_back(p);
  }
  j["pairs"] = pairs;
  return j;
}

json cross_measure_json(const experiments::CrossMeasureResult& r) {
  json j;
  json per = json::object();
  for (const auto& m : r.per_measure) per[dataio::to_string(m.measure)] = dependence_json(m);
  j["per_measure"] = per;
  json inter = json::array();
  for (const auto& ir : r.intersections) {
    json x;
    x["pair"] = ir.pair.label();
    x["outliers"] = ir.outliers;
    json f = json::object();
    for (const auto& [m, c] : ir.filtered) f[dataio::to_string(m)] = to_json(c);
    x["filtered"] = f;
    inter.push_back(x);
  }
  j["intersections"] = inter;
  return j;
}

}  // namespace roughscale::serialize
