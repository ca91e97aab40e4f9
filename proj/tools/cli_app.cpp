#include "cli_app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "roughscale/acsr.hpp"
#include "roughscale/dataio.hpp"
#include "roughscale/errors.hpp"
#include "roughscale/experiments.hpp"
#include "roughscale/ghe.hpp"
#include "roughscale/manifest.hpp"
#include "roughscale/pathgen.hpp"
#include "roughscale/serialize.hpp"
#include "roughscale/svg.hpp"

namespace roughscale::cli {

namespace fs = std::filesystem;
using Options = std::map<std::string, std::string>;
namespace ex = experiments;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter_domain:
    case ErrorKind::grid:
    case ErrorKind::argument:
    case ErrorKind::shape:
    case ErrorKind::size:
      return kUsage;
    case ErrorKind::io:
    case ErrorKind::format:
    case ErrorKind::schema:
    case ErrorKind::length:
    case ErrorKind::insufficient_data:
      return kData;
    default:
      return kNumerical;
  }
}

// --- typed access to resolved string options ---------------------------------

const std::string& need(const Options& o, const std::string& key) {
  auto it = o.find(key);
  if (it == o.end() || it->second.empty()) throw Error(ErrorKind::argument, "--" + key + " is required");
  return it->second;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw Error(ErrorKind::argument, "--" + key + ": expected a number, got '" + text + "'");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorKind::argument, "--" + key + ": expected an integer, got '" + text + "'");
  return v;
}

double get_double(const Options& o, const std::string& key) { return parse_double(key, need(o, key)); }

int get_int(const Options& o, const std::string& key) {
  const long long v = parse_int(key, need(o, key));
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw Error(ErrorKind::argument, "--" + key + " is out of range");
  return static_cast<int>(v);
}

std::uint64_t get_seed(const Options& o, const std::string& key) {
  const std::string& text = need(o, key);
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorKind::argument, "--" + key + ": expected an unsigned integer");
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// "a,b,c" or "lo:step:hi".
std::vector<double> get_list(const Options& o, const std::string& key) {
  const std::string& text = need(o, key);
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw Error(ErrorKind::argument, "--" + key + ": range must be lo:step:hi");
    const double lo = parse_double(key, parts[0]);
    const double step = parse_double(key, parts[1]);
    const double hi = parse_double(key, parts[2]);
    if (!(step > 0.0) || hi < lo) throw Error(ErrorKind::argument, "--" + key + ": empty or invalid range");
    const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e10) / 1e10);
    return out;
  }
  for (const auto& p : split(text, ',')) out.push_back(parse_double(key, p));
  return out;
}

std::vector<int> get_int_list(const Options& o, const std::string& key) {
  std::vector<int> out;
  for (const auto& p : split(need(o, key), ',')) out.push_back(static_cast<int>(parse_int(key, p)));
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", xs[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s;
}

std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
  return s;
}

// --- option registry with flag > config file > preset precedence ------------------

struct OptionSpec {
  std::string name;
  std::string help;
};

class Command {
 public:
  Command(CLI::App* app, std::vector<OptionSpec> specs) : app_(app), specs_(std::move(specs)) {
    for (const auto& s : specs_) app_->add_option("--" + s.name, raw_[s.name], s.help);
    app_->add_option("--out", out_, "output directory");
    app_->add_option("--config", config_, "key=value configuration file");
  }

  CLI::App* app() const { return app_; }
  const std::string& out_dir() const { return out_; }
  const std::string& config_path() const { return config_; }

  bool given(const std::string& name) const { return app_->get_option("--" + name)->count() > 0; }

  /// Flags override the config file, which overrides `defaults`.
  Options resolve(const Options& defaults) const {
    Options cfg;
    if (!config_.empty()) cfg = read_config(config_);
    Options out;
    for (const auto& s : specs_) {
      if (given(s.name))
        out[s.name] = raw_.at(s.name);
      else if (auto it = cfg.find(s.name); it != cfg.end())
        out[s.name] = it->second;
      else if (auto d = defaults.find(s.name); d != defaults.end())
        out[s.name] = d->second;
    }
    return out;
  }

 private:
  Options read_config(const std::string& path) const {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::io, "cannot open config file " + path);
    Options cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw Error(ErrorKind::argument, path + ":" + std::to_string(lineno) + ": expected key = value");
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r\"");
        const auto b = s.find_last_not_of(" \t\r\"");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      std::string key = trim(line.substr(0, eq));
      if (key.rfind("--", 0) == 0) key.erase(0, 2);
      const bool known = std::any_of(specs_.begin(), specs_.end(), [&](const OptionSpec& s) { return s.name == key; });
      if (!known) throw Error(ErrorKind::argument, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
      cfg[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  CLI::App* app_;
  std::vector<OptionSpec> specs_;
  std::map<std::string, std::string> raw_;
  std::string out_;
  std::string config_;
};

// --- output bookkeeping ---------------------------------------------------------

class Outputs {
 public:
  explicit Outputs(const std::string& dir) : dir_(dir) {
    if (dir.empty()) throw Error(ErrorKind::argument, "--out is required");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::io, "cannot create output directory " + dir + ": " + ec.message());
  }

  fs::path path(const std::string& name) {
    files_.insert(name);
    return dir_ / name;
  }
  void text(const std::string& name, const std::string& content) { serialize::write_text(path(name), content); }
  void json(const std::string& name, const nlohmann::json& j) { serialize::write_json(path(name), j); }
  std::vector<std::string> files() const { return {files_.begin(), files_.end()}; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::set<std::string> files_;
};

void finish_manifest(manifest::RunManifest& m, Outputs& outputs, Options options) {
  options.erase("workers");  // results do not depend on it; rerun may pick any count
  m.options = std::move(options);
  m.outputs = outputs.files();
  m.finished = manifest::utc_now();
  manifest::write_manifest(m, outputs.dir());
}

manifest::RunManifest start_manifest(const std::string& command, std::vector<std::uint64_t> seeds) {
  manifest::RunManifest m;
  m.command = command;
  m.seeds = std::move(seeds);
  m.started = manifest::utc_now();
  return m;
}

int get_workers(const Options& o) {
  const int w = o.count("workers") ? get_int(o, "workers") : 1;
  if (w < 1) throw Error(ErrorKind::argument, "--workers must be at least 1");
  return w;
}

double get_dt(const Options& o, int steps) {
  const std::string& s = need(o, "dt");
  if (s == "unit") return 1.0 / steps;
  return parse_double("dt", s);
}

std::string measure_file_tag(ex::MeasurePair p) {
  std::string s = p.label();
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

// --- simulate -----------------------------------------------------------------------

const std::vector<OptionSpec> kSimulateSpecs = {
    {"hurst", "Hurst exponent H in (0, 1)"},
    {"eta", "vol of vol"},
    {"xi0", "flat forward variance"},
    {"lambda", "price/volatility correlation in [-1, 1]"},
    {"steps", "number of time steps"},
    {"dt", "years per step, or 'unit' for 1/steps"},
    {"paths", "number of independent paths"},
    {"seed", "base seed; path i uses hash(seed, i)"},
    {"spot", "initial price"},
    {"format", "csv or binary"},
};

const Options kSimulateDefaults = {{"hurst", "0.1"},   {"eta", "1.9"},        {"xi0", "0.1"},  {"lambda", "0"},
                                   {"steps", "5000"},  {"dt", "0.003968253968253968"}, {"paths", "1"}, {"seed", "0"},
                                   {"spot", "1"},      {"format", "csv"}};

int cmd_simulate(const Command& cmd, std::ostream& out) {
  const Options o = cmd.resolve(kSimulateDefaults);
  pathgen::RBergomiParams p;
  p.hurst = get_double(o, "hurst");
  p.vol_of_vol = get_double(o, "eta");
  p.forward_variance = get_double(o, "xi0");
  p.correlation = get_double(o, "lambda");
  p.n_steps = get_int(o, "steps");
  p.dt = get_dt(o, p.n_steps);
  p.spot = get_double(o, "spot");
  const std::uint64_t seed = get_seed(o, "seed");
  const int n_paths = get_int(o, "paths");
  const std::string format = need(o, "format");
  if (n_paths < 1) throw Error(ErrorKind::argument, "--paths must be at least 1");
  if (format != "csv" && format != "binary") throw Error(ErrorKind::argument, "--format must be csv or binary");
  p.validate();

  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("simulate", {seed});
  for (int i = 0; i < n_paths; ++i) {
    p.seed = derive_seed(seed, {static_cast<std::uint64_t>(i)});
    const auto path = pathgen::simulate_rbergomi(p);
    char name[32];
    std::snprintf(name, sizeof(name), "path_%05d.%s", i, format == "csv" ? "csv" : "bin");
    if (format == "csv")
      pathgen::write_path_csv(path, outputs.path(name));
    else
      pathgen::write_columns_binary(pathgen::to_columns(path), outputs.path(name));
  }
  finish_manifest(m, outputs, o);
  out << "wrote " << n_paths << " path(s) of " << p.n_steps + 1 << " rows to " << cmd.out_dir() << "\n";
  return kOk;
}

// --- estimate -------------------------------------------------------------------------

const std::vector<OptionSpec> kEstimateSpecs = {
    {"input", "series file: path CSV, library CSV or binary column dump"},
    {"column", "column to analyse (default price, or close_price for library files)"},
    {"symbol", "symbol to select in a library file"},
    {"tau-max", "integer, or 'acsr' to select it by segmented regression"},
    {"returns", "returns fed to ACSR for library files: open_to_close or close_to_close"},
    {"acsr-mode", "free, pinned-phi1 or pinned-phi1-minus-1"},
    {"transform", "log or levels"},
    {"significance", "surrogate or ols"},
    {"surrogates", "number of shuffled surrogates"},
    {"seed", "surrogate seed"},
    {"q-min", "smallest moment"},
    {"q-max", "largest moment"},
    {"q-count", "number of moments"},
};

const Options kEstimateDefaults = {{"tau-max", "acsr"},    {"returns", "open_to_close"}, {"acsr-mode", "free"},
                                   {"transform", "log"},   {"significance", "surrogate"}, {"surrogates", "99"},
                                   {"seed", "0"},          {"q-min", "0.05"},           {"q-max", "1"},
                                   {"q-count", "20"}};

ghe::SeriesTransform parse_transform(const std::string& s) {
  if (s == "log" || s == "logs" || s == "log_levels") return ghe::SeriesTransform::log_levels;
  if (s == "levels" || s == "level") return ghe::SeriesTransform::levels;
  throw Error(ErrorKind::argument, "transform must be log or levels, got '" + s + "'");
}

std::vector<std::string> read_header(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw Error(ErrorKind::io, "cannot open " + file.string());
  std::string line;
  std::getline(is, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  return cols;
}

std::vector<double> read_csv_column(const fs::path& file, const std::string& column) {
  std::ifstream is(file);
  if (!is) throw Error(ErrorKind::io, "cannot open " + file.string());
  const auto header = read_header(file);
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw Error(ErrorKind::schema, file.string() + ": no column '" + column + "'");
  const auto idx = static_cast<std::size_t>(it - header.begin());
  std::string line;
  std::getline(is, line);
  std::vector<double> values;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; k <= idx; ++k)
      if (!std::getline(ss, cell, ','))
        throw Error(ErrorKind::format, file.string() + ":" + std::to_string(lineno) + ": missing column '" + column + "'");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
      throw Error(ErrorKind::format,
                  file.string() + ":" + std::to_string(lineno) + ": column '" + column + "' holds '" + cell + "'");
    values.push_back(v);
  }
  return values;
}

bool is_binary_columns(const fs::path& file) {
  std::ifstream is(file, std::ios::binary);
  char magic[8] = {};
  is.read(magic, 8);
  return is && std::string(magic, 8) == "RSCOLS01";
}

int cmd_estimate(const Command& cmd, std::ostream& out) {
  const Options o = cmd.resolve(kEstimateDefaults);
  const fs::path input = need(o, "input");
  if (!fs::exists(input)) throw Error(ErrorKind::io, "input file " + input.string() + " does not exist");

  ghe::ScalingOptions opts;
  opts.q_grid = ghe::uniform_q_grid(get_double(o, "q-min"), get_double(o, "q-max"), get_int(o, "q-count"));
  opts.transform = parse_transform(need(o, "transform"));
  opts.significance = ghe::significance_from_string(need(o, "significance"));
  opts.surrogates = get_int(o, "surrogates");
  opts.seed = get_seed(o, "seed");
  const auto mode = acsr::model_mode_from_string(need(o, "acsr-mode"));

  std::vector<double> series;
  std::vector<double> acsr_returns;
  std::string column = o.count("column") ? o.at("column") : "";
  const auto header = is_binary_columns(input) ? std::vector<std::string>{} : read_header(input);
  const bool library =
      std::find_if(header.begin(), header.end(), [](const std::string& h) { return h == "Symbol" || h == "symbol"; }) !=
      header.end();
  if (is_binary_columns(input)) {
    if (column.empty()) column = "price";
    const auto set = pathgen::read_columns_binary(input);
    const auto it = std::find(set.names.begin(), set.names.end(), column);
    if (it == set.names.end()) throw Error(ErrorKind::schema, input.string() + ": no column '" + column + "'");
    series = set.columns[static_cast<std::size_t>(it - set.names.begin())];
  } else if (library) {
    if (column.empty()) column = "close_price";
    auto loaded = dataio::load_library_csv(input);
    std::string symbol = o.count("symbol") ? dataio::normalize_symbol(o.at("symbol")) : "";
    if (symbol.empty()) {
      if (loaded.series.size() != 1) throw Error(ErrorKind::argument, "library file holds several symbols; pass --symbol");
      symbol = loaded.series.begin()->first;
    }
    const auto it = loaded.series.find(symbol);
    if (it == loaded.series.end()) throw Error(ErrorKind::schema, input.string() + ": no symbol '" + symbol + "'");
    series = dataio::select_measure(it->second, dataio::measure_from_string(column));
    if (ex::return_kind_from_string(need(o, "returns")) == ex::ReturnKind::open_to_close &&
        (it->second.has(dataio::Measure::open_to_close) || !it->second.open_price.empty()))
      acsr_returns = dataio::select_measure(it->second, dataio::Measure::open_to_close);
  } else {
    if (column.empty()) column = "price";
    series = read_csv_column(input, column);
  }

  int tau_max = 0;
  std::optional<acsr::AcsrFit> fit;
  const std::string tau_text = need(o, "tau-max");
  if (tau_text == "acsr") {
    if (acsr_returns.empty()) {
      if (opts.transform == ghe::SeriesTransform::log_levels) {
        acsr_returns = ghe::log_returns(series, 1);
      } else {
        for (std::size_t i = 1; i < series.size(); ++i) acsr_returns.push_back(series[i] - series[i - 1]);
      }
    }
    fit = acsr::select_tau_max(acsr_returns, mode);
    tau_max = fit->tau_star;
  } else {
    tau_max = static_cast<int>(parse_int("tau-max", tau_text));
  }

  const auto report = ghe::estimate_scaling(series, tau_max, opts);
  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("estimate", {opts.seed});
  m.input_digests[fs::absolute(input).string()] = manifest::file_digest(input);
  nlohmann::json j;
  j["input"] = input.string();
  j["column"] = column;
  j["tau_max"] = tau_max;
  j["tau_max_source"] = fit ? "acsr" : "fixed";
  if (fit) j["acsr"] = serialize::to_json(*fit);
  j["significance"] = ghe::to_string(opts.significance);
  j["report"] = serialize::to_json(report);
  outputs.json("report.json", j);
  serialize::write_scaling_csv(report, outputs.path("hq.csv"));
  finish_manifest(m, outputs, o);

  out << "tau_max = " << tau_max << (fit ? " (acsr)" : " (fixed)") << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "H = %.6g  A = %.6g  B = %.6g  (p = %.4g, %s)\n", report.hurst, report.linear_index,
                report.multiscaling_proxy, report.proxy_pvalue, ghe::to_string(opts.significance));
  out << line;
  return kOk;
}

// --- experiment: grid ----------------------------------------------------------------

const std::vector<OptionSpec> kGridSpecs = {
    {"preset", "desk or paper"},
    {"h-values", "H grid: list a,b,c or range lo:step:hi"},
    {"lambda-values", "lambda grid: list or range"},
    {"replications", "replications per cell"},
    {"steps", "time steps per path"},
    {"dt", "years per step, or 'unit' for 1/steps"},
    {"eta", "vol of vol"},
    {"xi0", "flat forward variance"},
    {"spot", "initial price"},
    {"tau-max", "fixed tau_max, or 'acsr'"},
    {"vol-transform", "log or levels"},
    {"bucket-width", "H bucket width for the correlation tables"},
    {"pooling", "per-replication or pooled"},
    {"seed", "base seed"},
    {"workers", "worker threads"},
};

Options grid_defaults(const std::string& preset) {
  Options d = {{"preset", preset},       {"steps", "5000"},          {"dt", "unit"},     {"eta", "1.9"},
               {"xi0", "0.1"},           {"spot", "1"},              {"tau-max", "500"}, {"vol-transform", "log"},
               {"bucket-width", "0.1"},  {"pooling", "per-replication"}, {"seed", "1"},  {"workers", "1"}};
  if (preset == "desk") {
    d["h-values"] = "0.05:0.1:0.95";
    d["lambda-values"] = "-1:0.25:1";
    d["replications"] = "20";
  } else if (preset == "paper") {
    d["h-values"] = "0.01:0.01:0.99";
    d["lambda-values"] = "-1:0.05:1";
    d["replications"] = "100";
  } else {
    throw Error(ErrorKind::argument, "--preset must be desk or paper, got '" + preset + "'");
  }
  return d;
}

std::string preset_of(const Command& cmd) {
  // The preset itself follows flag > config precedence before the other defaults apply.
  return cmd.resolve({{"preset", "desk"}}).at("preset");
}

ex::TauMaxMode parse_tau_mode(const Options& o) {
  ex::TauMaxMode m;
  const std::string& s = need(o, "tau-max");
  if (s == "acsr")
    m.use_acsr = true;
  else
    m.fixed = static_cast<int>(parse_int("tau-max", s));
  return m;
}

ex::BucketPooling parse_pooling(const std::string& s) {
  if (s == "per-replication" || s == "per_replication") return ex::BucketPooling::per_replication;
  if (s == "pooled") return ex::BucketPooling::pooled;
  throw Error(ErrorKind::argument, "--pooling must be per-replication or pooled");
}

void base_params(const Options& o, pathgen::RBergomiParams& p) {
  p.n_steps = get_int(o, "steps");
  p.dt = get_dt(o, p.n_steps);
  p.vol_of_vol = get_double(o, "eta");
  p.forward_variance = get_double(o, "xi0");
  p.spot = get_double(o, "spot");
}

int cmd_grid(const Command& cmd, std::ostream& out, std::ostream& err) {
  const Options o = cmd.resolve(grid_defaults(preset_of(cmd)));
  ex::GridConfig c;
  c.h_values = get_list(o, "h-values");
  c.lambda_values = get_list(o, "lambda-values");
  c.replications = get_int(o, "replications");
  base_params(o, c.base);
  c.base_seed = get_seed(o, "seed");
  c.tau_max = parse_tau_mode(o);
  c.vol_transform = parse_transform(need(o, "vol-transform"));
  c.workers = get_workers(o);
  const double width = get_double(o, "bucket-width");
  const auto pooling = parse_pooling(need(o, "pooling"));
  c.validate();

  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("experiment grid", {c.base_seed});
  const auto result = ex::synthetic_grid(c);

  serialize::write_grid_csv(result, outputs.path("grid.csv"));
  nlohmann::json summary;
  summary["cells"] = result.records.size();
  summary["failures"] = result.failures();
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& r : result.records)
    if (!r.ok) failed.push_back({{"h_index", r.h_index}, {"lambda_index", r.lambda_index}, {"replication", r.replication}, {"error", r.error}});
  summary["failed_cells"] = failed;

  for (auto meas : {ex::ScalingMeasure::b_price, ex::ScalingMeasure::h_vol, ex::ScalingMeasure::b_vol, ex::ScalingMeasure::h_price}) {
    const std::string tag = ex::to_string(meas);
    serialize::write_cell_means_csv(result, meas, outputs.path("mean_" + tag + ".csv"));
    const auto means = ex::cell_means(result, meas);
    std::vector<std::vector<double>> mat(means.size());
    for (std::size_t i = 0; i < means.size(); ++i)
      for (const auto& cell : means[i]) mat[i].push_back(cell.mean);
    outputs.text("heatmap_" + tag + ".svg",
                 svg::heatmap(mat, c.h_values, c.lambda_values, {"mean " + tag + " over replications", "lambda", "H"}));
  }
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(c.h_values.size()); ++i) {
    const auto t = ex::h_row_mean(result, ex::ScalingMeasure::b_price, i);
    rows.push_back({{"hurst", c.h_values[static_cast<std::size_t>(i)]}, {"mean", serialize::json(t.mean)},
                    {"stderr", std::isfinite(t.stderr_mean) ? serialize::json(t.stderr_mean) : serialize::json(nullptr)},
                    {"pvalue", t.pvalue}, {"n", t.n}});
  }
  summary["B_P_by_h"] = rows;

  nlohmann::json buckets = nlohmann::json::object();
  for (const auto& pair : ex::standard_pairs()) {
    const auto tag = measure_file_tag(pair);
    const auto table = ex::bucket_correlations(result, pair.x, pair.y, width, pooling);
    serialize::write_buckets_csv(table, outputs.path("buckets_" + tag + ".csv"));
    const auto by_lambda = ex::bucket_correlations(result, pair.x, pair.y, width, pooling, true);
    serialize::write_buckets_csv(by_lambda, outputs.path("buckets_by_lambda_" + tag + ".csv"));
    // Heatmap rows: buckets; columns: lambda.
    std::vector<std::vector<double>> mat;
    std::vector<double> row_coords;
    for (const auto& r : by_lambda) {
      if (r.lambda_index == 0) {
        mat.emplace_back();
        row_coords.push_back(r.hi);
      }
      mat.back().push_back(r.pearson);
    }
    outputs.text("buckets_" + tag + ".svg",
                 svg::heatmap(mat, row_coords, c.lambda_values, {"bucket Pearson " + pair.label(), "lambda", "H bucket (upper edge)"}));
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : table)
      arr.push_back({{"lo", r.lo}, {"hi", r.hi}, {"pearson", serialize::json(std::isfinite(r.pearson) ? r.pearson : 0.0)},
                     {"pearson_pvalue", r.pearson_pvalue}, {"spearman_pvalue", r.spearman_pvalue},
                     {"spearman", serialize::json(std::isfinite(r.spearman) ? r.spearman : 0.0)}, {"insufficient", r.insufficient}});
    buckets[pair.label()] = arr;
  }
  summary["buckets"] = buckets;
  outputs.json("summary.json", summary);
  finish_manifest(m, outputs, o);

  out << "grid: " << result.records.size() << " cells, " << result.failures() << " failed; outputs in " << cmd.out_dir() << "\n";
  if (result.failures() > 0) {
    int shown = 0;
    for (const auto& r : result.records)
      if (!r.ok && shown++ < 10)
        err << "cell (h=" << r.hurst << ", lambda=" << r.lambda << ", rep=" << r.replication << "): " << r.error << "\n";
    return kNumerical;
  }
  return kOk;
}

// --- experiment: empirical-h ------------------------------------------------------------

const std::vector<OptionSpec> kEmpiricalSpecs = {
    {"h-list", "volatility H per series (default: published table)"},
    {"tau-list", "tau_max per series (default: published table)"},
    {"symbols", "series labels"},
    {"lambda-values", "lambda values"},
    {"replications", "replications per lambda"},
    {"steps", "time steps per path"},
    {"dt", "years per step, or 'unit' for 1/steps"},
    {"eta", "vol of vol"},
    {"xi0", "flat forward variance"},
    {"spot", "initial price"},
    {"vol-transform", "log or levels"},
    {"seed", "base seed"},
    {"workers", "worker threads"},
};

Options empirical_defaults() {
  const auto base = ex::EmpiricalHConfig::table1();
  return {{"h-list", join(base.h_list)},   {"tau-list", join(base.tau_max_list)}, {"symbols", join(base.symbols)},
          {"lambda-values", "-0.8,-0.4,0,0.4,0.8"}, {"replications", "20"},       {"steps", "5000"},
          {"dt", "unit"},                   {"eta", "1.9"},                        {"xi0", "0.01"},
          {"spot", "1"},                    {"vol-transform", "log"},              {"seed", "1"},
          {"workers", "1"}};
}

int cmd_empirical(const Command& cmd, std::ostream& out, std::ostream& err) {
  Options o = cmd.resolve(empirical_defaults());
  // A custom H list without labels drops the default labels.
  if ((cmd.given("h-list") || cmd.given("tau-list")) && !cmd.given("symbols")) o.erase("symbols");
  ex::EmpiricalHConfig c;
  c.h_list = get_list(o, "h-list");
  c.tau_max_list = get_int_list(o, "tau-list");
  if (o.count("symbols")) c.symbols = split(o.at("symbols"), ',');
  c.lambda_values = get_list(o, "lambda-values");
  c.replications = get_int(o, "replications");
  base_params(o, c.base);
  c.base_seed = get_seed(o, "seed");
  c.vol_transform = parse_transform(need(o, "vol-transform"));
  c.workers = get_workers(o);
  c.validate();

  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("experiment empirical-h", {c.base_seed});
  const auto result = ex::empirical_h_experiment(c);
  serialize::write_empirical_csv(result, outputs.path("estimates.csv"));
  nlohmann::json summary;
  summary["failures"] = result.failures;
  nlohmann::json curves = nlohmann::json::object();
  for (const auto& pair : ex::standard_pairs()) {
    const auto tag = measure_file_tag(pair);
    const auto curve = result.curve(pair);
    serialize::write_curve_csv(curve, outputs.path("curve_" + tag + ".csv"));
    svg::Series pear{"Pearson", {}, {}, {}}, spear{"Spearman", {}, {}, {}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& pt : curve) {
      pear.x.push_back(pt.lambda);
      pear.y.push_back(pt.pearson_mean);
      pear.err.push_back(pt.pearson_se);
      spear.x.push_back(pt.lambda);
      spear.y.push_back(pt.spearman_mean);
      spear.err.push_back(pt.spearman_se);
      arr.push_back({{"lambda", pt.lambda}, {"pearson_mean", serialize::json(pt.pearson_mean)},
                     {"pearson_se", pt.pearson_se}, {"spearman_mean", serialize::json(pt.spearman_mean)},
                     {"spearman_se", pt.spearman_se}, {"replications", pt.replications}});
    }
    outputs.text("curve_" + tag + ".svg", svg::line_plot({pear, spear}, {"correlation " + pair.label(), "lambda", "correlation"}));
    curves[pair.label()] = arr;
  }
  summary["curves"] = curves;
  outputs.json("summary.json", summary);
  finish_manifest(m, outputs, o);

  out << "empirical-h: " << result.estimates.size() << " paths, " << result.failures.size() << " failed; outputs in "
      << cmd.out_dir() << "\n";
  if (!result.failures.empty()) {
    for (std::size_t i = 0; i < std::min<std::size_t>(10, result.failures.size()); ++i) err << result.failures[i] << "\n";
    return kNumerical;
  }
  return kOk;
}

// --- experiment: real-data ----------------------------------------------------------------

const std::vector<OptionSpec> kRealSpecs = {
    {"input", "library CSV"},
    {"measure", "volatility measure (rv10, rv5, rsv, bv), a comma list, or 'all'"},
    {"returns", "open_to_close or close_to_close"},
    {"acsr-mode", "free, pinned-phi1 or pinned-phi1-minus-1"},
    {"tau-max", "'acsr' or a fixed integer"},
    {"vol-transform", "log or levels"},
    {"significance", "surrogate or ols"},
    {"surrogates", "number of shuffled surrogates"},
    {"mcd-starts", "random starts for the MCD"},
    {"seed", "seed for surrogates and the MCD"},
    {"workers", "worker threads"},
};

const Options kRealDefaults = {{"measure", "rv10"},        {"returns", "open_to_close"}, {"acsr-mode", "free"},
                               {"tau-max", "acsr"},        {"vol-transform", "log"},     {"significance", "surrogate"},
                               {"surrogates", "99"},       {"mcd-starts", "500"},        {"seed", "1"},
                               {"workers", "1"}};

int cmd_real(const Command& cmd, std::ostream& out, std::ostream& err) {
  const Options o = cmd.resolve(kRealDefaults);
  const fs::path input = need(o, "input");
  std::vector<dataio::Measure> measures;
  if (need(o, "measure") == "all") {
    measures.assign(std::begin(dataio::kVolatilityMeasures), std::end(dataio::kVolatilityMeasures));
  } else {
    for (const auto& s : split(need(o, "measure"), ',')) {
      const auto mm = dataio::measure_from_string(s);
      if (!dataio::is_variance_measure(mm)) throw Error(ErrorKind::argument, "--measure must name volatility measures");
      measures.push_back(mm);
    }
  }
  ex::PipelineOptions po;
  po.return_kind = ex::return_kind_from_string(need(o, "returns"));
  po.acsr_mode = acsr::model_mode_from_string(need(o, "acsr-mode"));
  if (need(o, "tau-max") != "acsr") po.fixed_tau_max = static_cast<int>(parse_int("tau-max", o.at("tau-max")));
  po.seed = get_seed(o, "seed");
  po.price_options.significance = ghe::significance_from_string(need(o, "significance"));
  po.price_options.surrogates = get_int(o, "surrogates");
  po.price_options.seed = derive_seed(po.seed, {0});
  po.vol_options = po.price_options;
  po.vol_options.seed = derive_seed(po.seed, {1});
  po.vol_options.transform = parse_transform(need(o, "vol-transform"));
  po.outlier.n_starts = get_int(o, "mcd-starts");
  po.workers = get_workers(o);

  const auto loaded = dataio::load_library_csv(input, measures);
  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("experiment real-data", {po.seed});
  m.input_digests[fs::absolute(input).string()] = manifest::file_digest(input);
  {
    std::ostringstream os;
    os << "symbol,column,row,date,value,method\n";
    for (const auto& r : loaded.repairs)
      os << r.symbol << ',' << r.column << ',' << r.row << ',' << r.date.iso() << ',' << serialize::csv_number(r.value) << ','
         << r.method << '\n';
    outputs.text("repairs.csv", os.str());
  }

  const auto result = ex::cross_measure_pipeline(loaded.series, measures, po);
  std::size_t failures = 0;
  for (const auto& res : result.per_measure) {
    const std::string tag = dataio::to_string(res.measure);
    serialize::write_table_csv(res, outputs.path("table_" + tag + ".csv"));
    outputs.json("dependence_" + tag + ".json", serialize::dependence_json(res));
    const auto& dep = res.dependence_for({ex::ScalingMeasure::h_vol, ex::ScalingMeasure::b_price});
    std::vector<double> xs, ys;
    for (const auto& sym : dep.symbols)
      for (const auto& row : res.rows)
        if (row.symbol == sym) {
          xs.push_back(row.vol.hurst);
          ys.push_back(row.price.multiscaling_proxy);
        }
    outputs.text("scatter_" + tag + "_H_v_B_P.svg",
                 svg::scatter(xs, ys, dep.symbols, dep.result.report.outlier_indices, {"H_v vs B_P (" + tag + ")", "H_v", "B_P"}));
    failures += res.excluded.size();
    for (const auto& row : res.rows)
      if (!row.ok) err << tag << " " << row.symbol << ": " << row.error << "\n";

    const auto& r = dep.result;
    char line[200];
    std::snprintf(line, sizeof(line), "%s: rho = %.3f  rho_S = %.3f  robust rho = %.3f  robust rho_S = %.3f  outliers: %s\n",
                  tag.c_str(), r.raw.pearson.coefficient, r.raw.spearman.coefficient, r.robust.pearson.coefficient,
                  r.robust.spearman.coefficient, join(dep.outlier_symbols).c_str());
    out << line;
  }
  if (measures.size() > 1) {
    outputs.json("cross_measure.json", serialize::cross_measure_json(result));
    for (const auto& ir : result.intersections)
      out << "intersection " << ir.pair.label() << ": " << (ir.outliers.empty() ? "(none)" : join(ir.outliers)) << "\n";
  }
  finish_manifest(m, outputs, o);
  return failures == 0 ? kOk : kNumerical;
}

// --- experiment: synth-library ------------------------------------------------------------

const std::vector<OptionSpec> kSynthSpecs = {
    {"days", "business days per index"},
    {"eta", "vol of vol"},
    {"xi0", "flat forward variance"},
    {"lambda", "price/volatility correlation"},
    {"dt", "years per step, or 'unit' for 1/days"},
    {"missing", "fraction of variance cells left blank"},
    {"seed", "base seed"},
};

const Options kSynthDefaults = {{"days", "5000"}, {"eta", "1.9"}, {"xi0", "0.01"},     {"lambda", "0"},
                                {"dt", "unit"},   {"missing", "0.001"}, {"seed", "20240101"}};

int cmd_synth(const Command& cmd, std::ostream& out) {
  const Options o = cmd.resolve(kSynthDefaults);
  auto c = ex::SyntheticLibraryConfig::table1();
  c.n_days = get_int(o, "days");
  c.base.n_steps = c.n_days;
  c.base.dt = get_dt(o, c.n_days);
  c.base.vol_of_vol = get_double(o, "eta");
  c.base.forward_variance = get_double(o, "xi0");
  c.base.correlation = get_double(o, "lambda");
  c.missing_fraction = get_double(o, "missing");
  c.seed = get_seed(o, "seed");
  c.base.validate();
  Outputs outputs(cmd.out_dir());
  auto m = start_manifest("experiment synth-library", {c.seed});
  dataio::write_library_csv(ex::synthetic_library(c), outputs.path("library.csv"));
  finish_manifest(m, outputs, o);
  out << "wrote " << c.symbols.size() << " synthetic indices to " << (outputs.dir() / "library.csv").string() << "\n";
  return kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir, const std::string& workers,
              std::ostream& out, std::ostream& err) {
  if (out_dir.empty()) throw Error(ErrorKind::argument, "--out is required");
  const auto m = manifest::read_manifest(manifest_path);
  for (const auto& [file, digest] : m.input_digests) {
    if (manifest::file_digest(file) != digest)
      throw Error(ErrorKind::schema, "input " + file + " changed since the manifest was written");
  }
  auto args = m.argv();
  args.push_back("--out");
  args.push_back(out_dir);
  const bool takes_workers = m.command.rfind("experiment", 0) == 0 && m.command != "experiment synth-library";
  if (!workers.empty() && takes_workers) {
    args.push_back("--workers");
    args.push_back(workers);
  }
  return dispatch(args, out, err);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"roughscale: rough volatility and price multiscaling toolkit", "roughscale"};
  app.require_subcommand(1);
  app.set_version_flag("--version", manifest::kToolVersion);

  auto* sim = app.add_subcommand("simulate", "simulate rough Bergomi price/variance paths");
  Command c_sim(sim, kSimulateSpecs);
  auto* est = app.add_subcommand("estimate", "tau_max selection and multiscaling estimate for one series");
  Command c_est(est, kEstimateSpecs);
  auto* exp = app.add_subcommand("experiment", "run an experiment");
  exp->require_subcommand(1);
  Command c_grid(exp->add_subcommand("grid", "synthetic (H, lambda) grid"), kGridSpecs);
  Command c_emp(exp->add_subcommand("empirical-h", "simulations with the published per-index H and tau_max"), kEmpiricalSpecs);
  Command c_real(exp->add_subcommand("real-data", "per-index scaling table and cross-index dependence"), kRealSpecs);
  Command c_synth(exp->add_subcommand("synth-library", "write a synthetic 31-index library file"), kSynthSpecs);
  auto* rerun = app.add_subcommand("rerun", "replay a run from its manifest");
  std::string manifest_path, rerun_out, rerun_workers;
  rerun->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();
  rerun->add_option("--out", rerun_out, "output directory")->required();
  rerun->add_option("--workers", rerun_workers, "worker threads");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();  // delegates to the deepest parsed subcommand
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << manifest::kToolVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  if (sim->parsed()) return cmd_simulate(c_sim, out);
  if (est->parsed()) return cmd_estimate(c_est, out);
  if (c_grid.app()->parsed()) return cmd_grid(c_grid, out, err);
  if (c_emp.app()->parsed()) return cmd_empirical(c_emp, out, err);
  if (c_real.app()->parsed()) return cmd_real(c_real, out, err);
  if (c_synth.app()->parsed()) return cmd_synth(c_synth, out);
  if (rerun->parsed()) return cmd_rerun(manifest_path, rerun_out, rerun_workers, out, err);
  err << app.help();
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace roughscale::cli
