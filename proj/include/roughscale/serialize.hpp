#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughscale/acsr.hpp"
#include "roughscale/depmeas.hpp"
#include "roughscale/experiments.hpp"
#include "roughscale/ghe.hpp"
#include "roughscale/robust.hpp"

namespace roughscale::serialize {

using nlohmann::json;

/// CSV cells carry 6 significant digits; JSON keeps full precision.
std::string csv_number(double v);

json to_json(const ghe::ScalingReport& r);
ghe::ScalingReport scaling_report_from_json(const json& j);
json to_json(const acsr::AcsrFit& fit, bool with_acf = false);
json to_json(const depmeas::CorrelationResult& c);
json to_json(const robust::CorrelationPair& c);
json to_json(const robust::OutlierReport& r);
json to_json(const robust::RobustCorrelationResult& r);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Pretty-printed JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// One CSV row of q, H_q.
void write_scaling_csv(const ghe::ScalingReport& r, const std::filesystem::path& path);

// Experiment tables.
void write_grid_csv(const experiments::GridResult& g, const std::filesystem::path& path);
/// Long format: h, lambda, mean, stderr, pvalue, n.
void write_cell_means_csv(const experiments::GridResult& g, experiments::ScalingMeasure m,
                          const std::filesystem::path& path);
void write_buckets_csv(const std::vector<experiments::BucketRow>& rows, const std::filesystem::path& path);
void write_empirical_csv(const experiments::EmpiricalHResult& r, const std::filesystem::path& path);
void write_curve_csv(const std::vector<experiments::CurvePoint>& curve, const std::filesystem::path& path);
/// symbol, tau*, H_P, B_P, H_v, B_v (plus p-values and status).
void write_table_csv(const experiments::RealDataResult& r, const std::filesystem::path& path);
json dependence_json(const experiments::RealDataResult& r);
json cross_measure_json(const experiments::CrossMeasureResult& r);

}  // namespace roughscale::serialize
