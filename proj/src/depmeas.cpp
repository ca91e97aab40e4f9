#include "roughscale/depmeas.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "roughscale/errors.hpp"

namespace roughscale::depmeas {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::shape, "length mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  if (x.size() < 3) throw Error(ErrorKind::size, "correlation needs at least 3 pairs");
}

}  // namespace

const char* to_string(CorrelationKind kind) { return kind == CorrelationKind::pearson ? "pearson" : "spearman"; }

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) hold ties; their mean 1-based rank is (i + j + 1) / 2.
    const double rank = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double correlation_pvalue(double r, int n) {
  if (n < 3) return 1.0;
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  const double df = n - 2.0;
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r2));
  const boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorKind::zero_variance, "correlation input is constant");
  CorrelationResult out;
  out.coefficient = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.n = static_cast<int>(x.size());
  out.kind = CorrelationKind::pearson;
  out.pvalue = correlation_pvalue(out.coefficient, out.n);
  return out;
}

CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  CorrelationResult out = pearson(rx, ry);
  out.kind = CorrelationKind::spearman;
  return out;
}

}  // namespace roughscale::depmeas
