#pragma once

#include <algorithm>
#include <array>
#include <iterator>
#include <span>
#include <vector>

#include "roughscale/depmeas.hpp"
#include "roughscale/errors.hpp"
#include "roughscale/random.hpp"

namespace roughscale::robust {

using Point = std::array<double, 2>;

struct McdResult {
  Point center{};
  std::array<double, 4> scatter{};  ///< row-major 2x2, unbiased covariance of the support
  std::vector<int> support;         ///< sorted indices of the h-subset
  double determinant = 0.0;         ///< det of the support's (ML) covariance
};

/// ceil((n + p + 1) / 2) for p = 2.
int default_mcd_h(int n);
inline constexpr int kDefaultMcdStarts = 500;
inline constexpr int kMaxCSteps = 100;

/// FAST-MCD for bivariate data: random (p+1)-subsets, C-steps until the
/// determinant stops decreasing, best h-subset over all starts (ties by the
/// lowest start index). Start s draws from rng.substream(s).
McdResult fast_mcd(std::span<const Point> points, int h, int n_starts, const RandomStream& rng);

/// Determinant of the maximum-likelihood covariance of points[indices].
double subset_determinant(std::span<const Point> points, std::span<const int> indices);

struct Fences {
  double low = 0.0;
  double high = 0.0;
};

/// k = (17.63 n - 23.64) / (7.74 n - 3.71).
double carling_k(int n);

/// Lower and upper ideal fourths of `values`.
std::array<double, 2> ideal_fourths(std::span<const double> values);

/// median -/+ k IQR with Carling's sample-size-dependent k.
Fences carling_fences(std::span<const double> values);

struct OutlierReport {
  Point center{};
  std::vector<double> distances;
  std::vector<int> outlier_indices;
  std::vector<int> kept_indices;
  Fences fences;
  std::vector<int> mcd_support;
};

struct OutlierOptions {
  int h = 0;  ///< 0 selects default_mcd_h(n)
  int n_starts = kDefaultMcdStarts;
};

/// MCD center, Euclidean distances to it, and Carling fences on the
/// distances. An index is an outlier when its distance falls strictly
/// outside either fence (the lower fence can only bite when it is positive).
OutlierReport bivariate_outliers(std::span<const Point> points, const RandomStream& rng,
                                 const OutlierOptions& options = {});

struct CorrelationPair {
  depmeas::CorrelationResult pearson;
  depmeas::CorrelationResult spearman;
};

struct RobustCorrelationResult {
  CorrelationPair raw;
  CorrelationPair robust;
  OutlierReport report;
};

/// Classical correlations on all rows and on the rows kept by bivariate_outliers.
RobustCorrelationResult robust_correlation(std::span<const Point> points, const RandomStream& rng,
                                           const OutlierOptions& options = {});

/// Correlations on all rows except `excluded` (used once an outlier set has
/// been fixed, e.g. by a cross-measure intersection).
CorrelationPair correlations_excluding(std::span<const Point> points, std::span<const int> excluded);

/// Intersection of a nonempty list of outlier sets.
template <class T>
std::vector<T> intersect_outliers(std::span<const std::vector<T>> sets) {
  if (sets.empty()) throw Error(ErrorKind::argument, "intersect_outliers needs at least one set");
  std::vector<T> acc = sets.front();
  std::sort(acc.begin(), acc.end());
  acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
  for (std::size_t i = 1; i < sets.size(); ++i) {
    std::vector<T> next = sets[i];
    std::sort(next.begin(), next.end());
    std::vector<T> out;
    std::set_intersection(acc.begin(), acc.end(), next.begin(), next.end(), std::back_inserter(out));
    acc = std::move(out);
  }
  return acc;
}

}  // namespace roughscale::robust
