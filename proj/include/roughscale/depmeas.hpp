#pragma once

#include <span>
#include <vector>

namespace roughscale::depmeas {

enum class CorrelationKind { pearson, spearman };

const char* to_string(CorrelationKind kind);

struct CorrelationResult {
  double coefficient = 0.0;
  double pvalue = 1.0;
  int n = 0;
  CorrelationKind kind = CorrelationKind::pearson;
};

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Sample Pearson coefficient with a two-sided Student-t p-value (df = n - 2).
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

/// Pearson on average ranks, same p-value approximation.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value of a correlation coefficient r on n pairs.
double correlation_pvalue(double r, int n);

}  // namespace roughscale::depmeas
