#include "roughscale/robust.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace roughscale::robust {

namespace {

struct Moments {
  Point mean{};
  double sxx = 0.0;  // ML (divide by count) second moments
  double syy = 0.0;
  double sxy = 0.0;
  double det() const { return sxx * syy - sxy * sxy; }
};

Moments moments(std::span<const Point> points, std::span<const int> idx) {
  Moments m;
  const double count = static_cast<double>(idx.size());
  for (int i : idx) {
    m.mean[0] += points[static_cast<std::size_t>(i)][0];
    m.mean[1] += points[static_cast<std::size_t>(i)][1];
  }
  m.mean[0] /= count;
  m.mean[1] /= count;
  for (int i : idx) {
    const double dx = points[static_cast<std::size_t>(i)][0] - m.mean[0];
    const double dy = points[static_cast<std::size_t>(i)][1] - m.mean[1];
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  m.sxx /= count;
  m.syy /= count;
  m.sxy /= count;
  return m;
}

// Relative threshold under which a 2x2 scatter counts as singular.
bool singular(const Moments& m) {
  const double scale = m.sxx * m.syy;
  return !(m.det() > 1e-12 * scale) || !(scale > 0.0);
}

// The h indices with the smallest Mahalanobis distance under m (ties by index).
std::vector<int> closest_h(std::span<const Point> points, const Moments& m, int h, std::vector<int>& order,
                           std::vector<double>& d2) {
  const double det = m.det();
  const double ixx = m.syy / det;
  const double iyy = m.sxx / det;
  const double ixy = -m.sxy / det;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dx = points[i][0] - m.mean[0];
    const double dy = points[i][1] - m.mean[1];
    d2[i] = ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy;
  }
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return d2[static_cast<std::size_t>(a)] < d2[static_cast<std::size_t>(b)];
  });
  std::vector<int> subset(order.begin(), order.begin() + h);
  std::sort(subset.begin(), subset.end());
  return subset;
}

double median_sorted(std::span<const double> xs) {
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

int default_mcd_h(int n) { return (n + 4) / 2; }

double subset_determinant(std::span<const Point> points, std::span<const int> indices) {
  return moments(points, indices).det();
}

McdResult fast_mcd(std::span<const Point> points, int h, int n_starts, const RandomStream& rng) {
  const int n = static_cast<int>(points.size());
  if (n < 5) throw Error(ErrorKind::size, "MCD needs at least 5 points, got " + std::to_string(n));
  const int h_min = default_mcd_h(n);
  if (h < h_min || h > n)
    throw Error(ErrorKind::argument, "MCD subset size h = " + std::to_string(h) + " outside [" +
                                         std::to_string(h_min) + ", " + std::to_string(n) + "]");
  if (n_starts < 1) throw Error(ErrorKind::argument, "MCD needs at least one start");

  std::vector<int> order(points.size());
  std::vector<double> d2(points.size());
  McdResult best;
  best.determinant = std::numeric_limits<double>::infinity();
  bool found = false;

  for (int s = 0; s < n_starts; ++s) {
    RandomStream stream = rng.substream(static_cast<std::uint64_t>(s));
    // Random (p + 1)-subset, grown one random point at a time while singular.
    std::vector<int> perm(points.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> start;
    Moments m;
    for (int k = 0; k < n; ++k) {
      const auto j = static_cast<std::size_t>(k) + stream.below(static_cast<std::uint64_t>(n - k));
      std::swap(perm[static_cast<std::size_t>(k)], perm[j]);
      start.push_back(perm[static_cast<std::size_t>(k)]);
      if (start.size() < 3) continue;
      m = moments(points, start);
      if (!singular(m)) break;
    }
    if (singular(m)) continue;

    std::vector<int> subset = closest_h(points, m, h, order, d2);
    m = moments(points, subset);
    for (int step = 0; step < kMaxCSteps && !singular(m); ++step) {
      std::vector<int> next = closest_h(points, m, h, order, d2);
      const Moments mn = moments(points, next);
      if (next == subset || !(mn.det() < m.det())) break;
      subset = std::move(next);
      m = mn;
    }
    if (singular(m)) continue;
    if (m.det() < best.determinant) {
      found = true;
      best.determinant = m.det();
      best.support = subset;
      best.center = m.mean;
      const double unbias = static_cast<double>(h) / static_cast<double>(h - 1);
      best.scatter = {m.sxx * unbias, m.sxy * unbias, m.sxy * unbias, m.syy * unbias};
    }
  }
  if (!found) throw Error(ErrorKind::rank, "MCD scatter is singular for every start");
  return best;
}

double carling_k(int n) {
  const double nd = static_cast<double>(n);
  return (17.63 * nd - 23.64) / (7.74 * nd - 3.71);
}

std::array<double, 2> ideal_fourths(std::span<const double> values) {
  std::vector<double> xs(values.begin(), values.end());
  std::sort(xs.begin(), xs.end());
  const double nd = static_cast<double>(xs.size());
  const double pos = nd / 4.0 + 5.0 / 12.0;
  const auto j = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(j);
  // 1-based: lower = (1-f) x_(j) + f x_(j+1); upper = (1-f) x_(n-j+1) + f x_(n-j).
  const std::size_t n = xs.size();
  const double lower = (1.0 - frac) * xs[j - 1] + frac * xs[j];
  const double upper = (1.0 - frac) * xs[n - j] + frac * xs[n - j - 1];
  return {lower, upper};
}

Fences carling_fences(std::span<const double> values) {
  if (values.size() < 5) throw Error(ErrorKind::size, "Carling fences need at least 5 values");
  std::vector<double> xs(values.begin(), values.end());
  std::sort(xs.begin(), xs.end());
  const double median = median_sorted(xs);
  const auto [q1, q3] = ideal_fourths(xs);
  const double k = carling_k(static_cast<int>(xs.size()));
  const double iqr = q3 - q1;
  return {median - k * iqr, median + k * iqr};
}

OutlierReport bivariate_outliers(std::span<const Point> points, const RandomStream& rng,
                                 const OutlierOptions& options) {
  const int n = static_cast<int>(points.size());
  if (n < 5) throw Error(ErrorKind::size, "outlier detection needs at least 5 points, got " + std::to_string(n));
  const int h = options.h > 0 ? options.h : default_mcd_h(n);
  const McdResult mcd = fast_mcd(points, h, options.n_starts, rng);

  OutlierReport report;
  report.center = mcd.center;
  report.mcd_support = mcd.support;
  report.distances.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    report.distances[i] = std::hypot(points[i][0] - mcd.center[0], points[i][1] - mcd.center[1]);
  report.fences = carling_fences(report.distances);
  for (int i = 0; i < n; ++i) {
    const double d = report.distances[static_cast<std::size_t>(i)];
    if (d > report.fences.high || d < report.fences.low)
      report.outlier_indices.push_back(i);
    else
      report.kept_indices.push_back(i);
  }
  return report;
}

CorrelationPair correlations_excluding(std::span<const Point> points, std::span<const int> excluded) {
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), static_cast<int>(i)) != excluded.end()) continue;
    x.push_back(points[i][0]);
    y.push_back(points[i][1]);
  }
  if (x.size() < 3) throw Error(ErrorKind::size, "fewer than 3 rows remain after removing outliers");
  return {depmeas::pearson(x, y), depmeas::spearman(x, y)};
}

RobustCorrelationResult robust_correlation(std::span<const Point> points, const RandomStream& rng,
                                           const OutlierOptions& options) {
  RobustCorrelationResult out;
  out.raw = correlations_excluding(points, {});
  out.report = bivariate_outliers(points, rng, options);
  out.robust = correlations_excluding(points, out.report.outlier_indices);
  return out;
}

}  // namespace roughscale::robust
