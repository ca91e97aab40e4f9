#pragma once

#include <span>
#include <string>
#include <vector>

namespace roughscale::acsr {

/// How the intercept and amplitude of the decay segment are treated.
enum class ModelMode {
  free_amplitude,         ///< phi = alpha + c tau^beta, alpha and c fitted
  pinned_phi1,            ///< alpha = phi_1, c = 1 (formula as printed)
  pinned_phi1_minus_one,  ///< alpha = phi_1 - 1, c = 1 (makes the fit exact at tau = 1)
};

const char* to_string(ModelMode mode);
ModelMode model_mode_from_string(const std::string& s);

struct AcsrFit {
  int tau_star = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double scale_c = 0.0;
  double sse = 0.0;
  bool degenerate = false;
  ModelMode mode = ModelMode::free_amplitude;
  std::vector<double> acf;  ///< acf[k] is the autocorrelation at lag k + 1
};

/// Sample autocorrelation of |returns| at lags 1..max_lag (biased estimator,
/// normalized by the lag-0 variance). Requires len(returns) > 4 max_lag.
std::vector<double> abs_return_acf(std::span<const double> returns, int max_lag);

/// Exhaustive search over tau* in [search_min, search_max] of the two-segment
/// model (power decay before tau*, flat from tau* on). beta is found by
/// golden-section search on [-3, 0] for each candidate. The smallest tau*
/// attaining the minimum SSE wins. When the best segmented fit is not a
/// significant improvement over a constant (F test, Bonferroni-corrected for
/// the number of candidates) the result is flagged degenerate and tau* is
/// set to search_min.
AcsrFit acsr_fit(std::span<const double> acf, int search_min, int search_max,
                 ModelMode mode = ModelMode::free_amplitude);

/// SSE of the model at a fixed (tau*, beta) with alpha and c profiled out;
/// exposed for verification by re-scan.
double segment_sse(std::span<const double> acf, int tau_star, double beta, ModelMode mode,
                   double* alpha_out = nullptr, double* c_out = nullptr);

/// Model values at lags 1..len(acf) for a fit.
std::vector<double> fitted_values(const AcsrFit& fit);

inline constexpr int kDefaultSearchMin = 5;
inline constexpr int kDefaultSearchCap = 2000;

/// min(2000, floor((n - 1) / 4)): the largest lag the ACF precondition allows.
int default_max_lag(std::size_t n_returns);

/// abs_return_acf followed by acsr_fit over the default search range.
AcsrFit select_tau_max(std::span<const double> returns, ModelMode mode = ModelMode::free_amplitude);

}  // namespace roughscale::acsr
