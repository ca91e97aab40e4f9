#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roughscale/acsr.hpp"
#include "roughscale/dataio.hpp"
#include "roughscale/ghe.hpp"
#include "roughscale/pathgen.hpp"
#include "roughscale/robust.hpp"

namespace roughscale::experiments {

/// Runs f(0..count-1) on up to `workers` threads. Each index must write only
/// its own output slot; results are therefore independent of the worker count.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f);

/// The four scaling estimates of a (price, volatility) pair.
enum class ScalingMeasure { h_vol, b_vol, h_price, b_price };

const char* to_string(ScalingMeasure m);  // "H_v", "B_v", "H_P", "B_P"
ScalingMeasure scaling_measure_from_string(const std::string& s);

struct Estimates {
  double h_vol = std::numeric_limits<double>::quiet_NaN();
  double b_vol = std::numeric_limits<double>::quiet_NaN();
  double h_price = std::numeric_limits<double>::quiet_NaN();
  double b_price = std::numeric_limits<double>::quiet_NaN();

  double get(ScalingMeasure m) const;
};

struct MeasurePair {
  ScalingMeasure x;
  ScalingMeasure y;
  std::string label() const;  // e.g. "H_v-B_P"
  auto operator<=>(const MeasurePair&) const = default;
};

/// (H_v, B_P), (H_v, H_P), (B_v, B_P).
std::vector<MeasurePair> standard_pairs();
MeasurePair measure_pair_from_string(const std::string& s);

struct TauMaxMode {
  bool use_acsr = false;
  int fixed = 500;
};

/// Scaling estimates of one simulated path; tau_max from `mode` (ACSR on the
/// price log returns when requested, capped so the estimator precondition holds).
struct PathEstimate {
  Estimates est;
  int tau_max = 0;
};
PathEstimate estimate_path(const pathgen::PathPair& path, const TauMaxMode& mode, ghe::SeriesTransform vol_transform);

// --- synthetic (H, lambda) grid ---------------------------------------------

struct GridConfig {
  std::vector<double> h_values;
  std::vector<double> lambda_values;
  int replications = 20;
  pathgen::RBergomiParams base;  ///< hurst, correlation and seed are overwritten per cell
  std::uint64_t base_seed = 1;
  TauMaxMode tau_max;
  ghe::SeriesTransform vol_transform = ghe::SeriesTransform::log_levels;
  int workers = 1;

  void validate() const;
  /// H 0.05..0.95 step 0.1, lambda -1..1 step 0.25, 20 replications.
  static GridConfig desk();
  /// H 0.01..0.99 step 0.01, lambda -1..1 step 0.05, 100 replications.
  static GridConfig paper();
};

struct CellRecord {
  int h_index = 0;
  int lambda_index = 0;
  int replication = 0;
  double hurst = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int tau_max = 0;
  bool ok = true;
  std::string error;
  Estimates est;
};

struct GridResult {
  GridConfig config;
  std::vector<CellRecord> records;  ///< ordered by (h, lambda, replication)

  const CellRecord& at(int h_index, int lambda_index, int replication) const;
  std::size_t failures() const;
};

/// Seed of one grid cell: hash(base_seed, h_index, lambda_index, replication).
std::uint64_t cell_seed(std::uint64_t base_seed, int h_index, int lambda_index, int replication);

GridResult synthetic_grid(const GridConfig& config);

/// Mean of an estimate with a one-sample t-test against zero.
struct MeanTest {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stderr_mean = std::numeric_limits<double>::quiet_NaN();
  double pvalue = 1.0;
  int n = 0;
};
MeanTest mean_test(const std::vector<double>& values);

/// [h_index][lambda_index] mean over replications.
std::vector<std::vector<MeanTest>> cell_means(const GridResult& result, ScalingMeasure m);

/// Mean over all replications and lambdas at one H.
MeanTest h_row_mean(const GridResult& result, ScalingMeasure m, int h_index);

enum class BucketPooling {
  per_replication,  ///< correlate within each replication, then average
  pooled,           ///< pool all replications, correlate once
};

struct BucketRow {
  double lo = 0.0;  ///< bucket is (lo, hi]
  double hi = 0.0;
  std::vector<int> h_indices;
  int lambda_index = -1;  ///< -1 when pooled over lambda
  int replications_used = 0;
  int pairs = 0;  ///< pairs per replication (or in total when pooled)
  double pearson = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  double pearson_pvalue = 1.0;
  double spearman_pvalue = 1.0;
  bool insufficient = false;
};

/// Correlation of two scaling estimates within H buckets of width
/// `bucket_width`. With per_replication pooling the reported p-value is a
/// one-sample t-test of the per-replication coefficients against zero.
/// `by_lambda` splits each bucket further per lambda value.
std::vector<BucketRow> bucket_correlations(const GridResult& result, ScalingMeasure x, ScalingMeasure y,
                                           double bucket_width, BucketPooling pooling = BucketPooling::per_replication,
                                           bool by_lambda = false);

// --- empirical-H experiment -------------------------------------------------

struct Table1Row {
  std::string symbol;
  int tau_star;
  double h_price;
  double b_price;
  double h_vol;
  double b_vol;
};

/// Published per-index estimates (rv10, open-to-close returns).
const std::vector<Table1Row>& table1_reference();

struct EmpiricalHConfig {
  std::vector<std::string> symbols;
  std::vector<double> h_list;
  std::vector<int> tau_max_list;
  std::vector<double> lambda_values;
  int replications = 20;
  pathgen::RBergomiParams base;
  std::uint64_t base_seed = 1;
  ghe::SeriesTransform vol_transform = ghe::SeriesTransform::log_levels;
  int workers = 1;

  void validate() const;
  /// H and tau_max from the published table, lambda -0.8..0.8 step 0.4.
  static EmpiricalHConfig table1();
};

struct CurvePoint {
  double lambda = 0.0;
  double pearson_mean = 0.0;
  double pearson_se = 0.0;
  double spearman_mean = 0.0;
  double spearman_se = 0.0;
  int replications = 0;
};

struct EmpiricalHResult {
  EmpiricalHConfig config;
  /// estimates[(lambda_index * replications + r) * n_series + i]
  std::vector<Estimates> estimates;
  std::vector<std::string> failures;

  std::size_t n_series() const { return config.h_list.size(); }
  const Estimates& at(int lambda_index, int replication, int series) const;
  /// Cross-sectional Pearson and Spearman for one (lambda, replication).
  robust::CorrelationPair cross_section(int lambda_index, int replication, MeasurePair pair) const;
  std::vector<CurvePoint> curve(MeasurePair pair) const;
};

EmpiricalHResult empirical_h_experiment(const EmpiricalHConfig& config);

// --- real data ----------------------------------------------------------------

enum class ReturnKind { open_to_close, close_to_close };
const char* to_string(ReturnKind k);
ReturnKind return_kind_from_string(const std::string& s);

struct PipelineOptions {
  ReturnKind return_kind = ReturnKind::open_to_close;
  acsr::ModelMode acsr_mode = acsr::ModelMode::free_amplitude;
  std::optional<int> fixed_tau_max;  ///< skips ACSR when set
  ghe::ScalingOptions price_options;
  ghe::ScalingOptions vol_options;
  robust::OutlierOptions outlier;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct IndexRow {
  std::string symbol;
  bool ok = true;
  std::string error;
  int tau_star = 0;
  acsr::AcsrFit acsr;
  ghe::ScalingReport price;
  ghe::ScalingReport vol;

  Estimates estimates() const;
};

struct PairDependence {
  MeasurePair pair;
  std::vector<std::string> symbols;  ///< rows entering the correlation
  robust::RobustCorrelationResult result;
  std::vector<std::string> outlier_symbols;
};

struct RealDataResult {
  dataio::Measure measure = dataio::Measure::rv10;
  ReturnKind return_kind = ReturnKind::open_to_close;
  std::vector<IndexRow> rows;  ///< sorted by symbol
  std::vector<std::string> excluded;
  std::vector<PairDependence> dependence;

  const PairDependence& dependence_for(MeasurePair pair) const;
};

/// Price side of one index: tau* from ACSR on absolute returns, then the
/// scaling report of the closing prices at tau_max = tau*. Uses the option
/// seeds as given, so it matches calling the estimators by hand.
IndexRow price_side(const dataio::MarketSeries& series, const PipelineOptions& options);

/// Full single-measure pipeline: per index tau*, price and volatility scaling
/// reports, then robust correlations across indices for the standard pairs.
RealDataResult real_data_pipeline(const std::map<std::string, dataio::MarketSeries>& dataset,
                                  dataio::Measure measure, const PipelineOptions& options);

struct IntersectionResult {
  MeasurePair pair;
  std::vector<std::string> outliers;  ///< intersection over measures
  /// Per measure: correlations with the intersection removed.
  std::map<dataio::Measure, robust::CorrelationPair> filtered;
};

struct CrossMeasureResult {
  std::vector<RealDataResult> per_measure;
  std::vector<IntersectionResult> intersections;
};

/// Runs the pipeline for every listed measure (the price side is computed
/// once) and intersects the outlier sets across measures per pair.
CrossMeasureResult cross_measure_pipeline(const std::map<std::string, dataio::MarketSeries>& dataset,
                                          const std::vector<dataio::Measure>& measures,
                                          const PipelineOptions& options);

// --- synthetic library ---------------------------------------------------------

struct SyntheticLibraryConfig {
  std::vector<std::string> symbols;
  std::vector<double> h_list;
  int n_days = 5000;
  pathgen::RBergomiParams base;
  std::uint64_t seed = 1;
  double missing_fraction = 0.001;  ///< share of variance cells blanked out
  dataio::Date first_date{2000, 1, 3};

  /// The 31 published indices with their volatility H, 5000 business days.
  static SyntheticLibraryConfig table1();
};

/// Library-format data simulated from rough Bergomi paths: close prices,
/// open-to-close returns, and four noisy realized-variance proxies built from
/// the integrated variance of each day.
std::map<std::string, dataio::MarketSeries> synthetic_library(const SyntheticLibraryConfig& config);

}  // namespace roughscale::experiments
