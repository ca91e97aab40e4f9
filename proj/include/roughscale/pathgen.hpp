#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "roughscale/random.hpp"

namespace roughscale::pathgen {

/// Parameters of one rough Bergomi simulation with a flat forward variance
/// curve. Annualized parameters with dt in years (default: one trading day).
struct RBergomiParams {
  double hurst = 0.1;
  double vol_of_vol = 1.9;
  double forward_variance = 0.1;
  double correlation = 0.0;
  int n_steps = 5000;
  double dt = 1.0 / 252.0;
  double spot = 1.0;
  std::uint64_t seed = 0;

  /// Throws Error(parameter_domain / grid) on violation.
  void validate() const;
};

/// Simulated price and variance paths on a common grid t_k = k dt.
///
/// `log_variance` carries the exact exponent of the variance process;
/// `variance` is its exponential, floored at the smallest normal double so
/// it stays strictly positive when the exponent underflows (large H, long
/// horizons).
struct PathPair {
  std::vector<double> times;
  std::vector<double> price;
  std::vector<double> variance;
  std::vector<double> log_variance;
  std::vector<double> fbm;
  std::vector<double> brownian_increments;
};

struct FbmSample {
  std::vector<double> fbm;      ///< W^H at t_0..t_n, fbm[0] = 0
  std::vector<double> driver;   ///< dW_0..dW_{n-1}, each N(0, dt)
};

/// Riemann-Liouville fBm sqrt(2H) int_0^t (t-s)^{H-1/2} dW_s on the grid k dt,
/// by the hybrid scheme with kappa = 1: the first kernel cell is simulated
/// exactly (jointly Gaussian with dW), the remaining cells use the kernel at
/// the optimal evaluation points and are summed by FFT convolution.
FbmSample simulate_fbm_rl(double hurst, int n_steps, double dt, RandomStream& rng);

/// E[W^H_t W^H_s] for Riemann-Liouville fBm, by tanh-sinh quadrature
/// (relative tolerance 1e-10).
double fbm_covariance_rl(double hurst, double t, double s);

/// Largest grid accepted by simulate_fbm_cholesky.
inline constexpr int kCholeskyMaxSteps = 2048;

/// Exact Gaussian sample of W^H on the grid via a dense Cholesky factor of
/// the analytic covariance. Returns n_steps + 1 values with fbm[0] = 0.
std::vector<double> simulate_fbm_cholesky(double hurst, int n_steps, double dt, RandomStream& rng);

/// Cholesky sampler with a precomputed factor, for drawing many paths.
class CholeskyFbmSampler {
 public:
  CholeskyFbmSampler(double hurst, int n_steps, double dt);
  std::vector<double> sample(RandomStream& rng) const;
  int n_steps() const { return n_steps_; }

 private:
  int n_steps_;
  std::vector<double> lower_;  // row-major n x n lower-triangular factor
};

/// Rough Bergomi paths: v_k = xi0 exp(eta W^H_{t_k} - eta^2 t_k^{2H} / 2) and a
/// log-Euler price step driven by lambda eps_k + sqrt(1 - lambda^2) eps_perp_k.
PathPair simulate_rbergomi(const RBergomiParams& params, RandomStream& rng);

/// Same, with the random source seeded from params.seed.
PathPair simulate_rbergomi(const RBergomiParams& params);

/// CSV with columns step,time,price,variance,fbm (6 significant digits).
void write_path_csv(const PathPair& path, const std::filesystem::path& file);

/// Named columns of doubles, used for the binary path dump.
struct ColumnSet {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

/// Binary column dump: magic "RSCOLS01", u64 rows, u64 cols, then per column
/// (u32 name length, name bytes), then column-major little-endian doubles.
void write_columns_binary(const ColumnSet& set, const std::filesystem::path& file);
ColumnSet read_columns_binary(const std::filesystem::path& file);

ColumnSet to_columns(const PathPair& path);

}  // namespace roughscale::pathgen
