#include "roughscale/pathgen.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "roughscale/errors.hpp"

namespace roughscale::pathgen {

namespace {

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw Error(ErrorKind::parameter_domain, "hurst must lie in (0, 1), got " + std::to_string(hurst));
}

void check_grid(int n_steps, double dt) {
  if (n_steps < 2) throw Error(ErrorKind::grid, "n_steps must be >= 2, got " + std::to_string(n_steps));
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw Error(ErrorKind::grid, "dt must be positive and finite");
}

// Below this size the direct O(n^2) sum is faster than the FFT round trip.
constexpr std::size_t kDirectConvolutionMax = 256;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

// FFTW planning is not thread-safe; plans are created once per size under a
// lock and then executed concurrently through the new-array interface.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = fftw_buffer<double>(n);
  auto spec = fftw_buffer<fftw_complex>(n / 2 + 1);
  PlanPair p;
  p.forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.get(), spec.get(), FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec.get(), real.get(), FFTW_ESTIMATE);
  cache.emplace(n, p);
  return p;
}

// out[k] = sum_{m <= k} kernel[k - m] * signal[m] for k < out_len.
std::vector<double> causal_convolution(std::span<const double> kernel, std::span<const double> signal,
                                       std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (signal.size() <= kDirectConvolutionMax) {
    for (std::size_t k = 0; k < out_len; ++k) {
      double acc = 0.0;
      const std::size_t upper = std::min(k, signal.size() - 1);
      for (std::size_t m = 0; m <= upper; ++m) {
        if (k - m < kernel.size()) acc += kernel[k - m] * signal[m];
      }
      out[k] = acc;
    }
    return out;
  }

  const std::size_t n = std::bit_ceil(kernel.size() + signal.size());
  const PlanPair plans = plans_for(n);
  auto a = fftw_buffer<double>(n);
  auto b = fftw_buffer<double>(n);
  auto fa = fftw_buffer<fftw_complex>(n / 2 + 1);
  auto fb = fftw_buffer<fftw_complex>(n / 2 + 1);
  std::fill_n(a.get(), n, 0.0);
  std::fill_n(b.get(), n, 0.0);
  std::copy(kernel.begin(), kernel.end(), a.get());
  std::copy(signal.begin(), signal.end(), b.get());
  fftw_execute_dft_r2c(plans.forward, a.get(), fa.get());
  fftw_execute_dft_r2c(plans.forward, b.get(), fb.get());
  for (std::size_t i = 0; i < n / 2 + 1; ++i) {
    const double re = fa[i][0] * fb[i][0] - fa[i][1] * fb[i][1];
    const double im = fa[i][0] * fb[i][1] + fa[i][1] * fb[i][0];
    fa[i][0] = re;
    fa[i][1] = im;
  }
  fftw_execute_dft_c2r(plans.backward, fa.get(), a.get());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < out_len; ++k) out[k] = a[k] * scale;
  return out;
}

}  // namespace

void RBergomiParams::validate() const {
  check_hurst(hurst);
  if (!(vol_of_vol >= 0.0) || !std::isfinite(vol_of_vol))
    throw Error(ErrorKind::parameter_domain, "vol_of_vol must be nonnegative and finite");
  if (!(forward_variance > 0.0) || !std::isfinite(forward_variance))
    throw Error(ErrorKind::parameter_domain, "forward_variance must be positive");
  if (!(correlation >= -1.0 && correlation <= 1.0))
    throw Error(ErrorKind::parameter_domain, "correlation must lie in [-1, 1]");
  if (!(spot > 0.0) || !std::isfinite(spot))
    throw Error(ErrorKind::parameter_domain, "spot must be positive");
  check_grid(n_steps, dt);
}

FbmSample simulate_fbm_rl(double hurst, int n_steps, double dt, RandomStream& rng) {
  check_hurst(hurst);
  check_grid(n_steps, dt);
  const auto n = static_cast<std::size_t>(n_steps);
  const double alpha = hurst - 0.5;
  const double sqrt_dt = std::sqrt(dt);

  // Exact first cell: Z_i = int_{t_i}^{t_{i+1}} (t_{i+1} - s)^alpha dW_s,
  // jointly Gaussian with dW_i.
  const double cov_dw_z = std::pow(dt, alpha + 1.0) / (alpha + 1.0);
  const double var_z = std::pow(dt, 2.0 * hurst) / (2.0 * hurst);
  const double z_on_dw = cov_dw_z / dt;
  const double z_residual_sd = alpha == 0.0 ? 0.0 : std::sqrt(std::max(0.0, var_z - cov_dw_z * z_on_dw));

  FbmSample out;
  out.driver.resize(n);
  std::vector<double> near(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dw = sqrt_dt * rng.normal();
    const double xi = rng.normal();
    out.driver[i] = dw;
    near[i] = alpha == 0.0 ? dw : z_on_dw * dw + z_residual_sd * xi;
  }

  out.fbm.assign(n + 1, 0.0);
  if (alpha == 0.0) {
    // Flat kernel: the scheme reduces to the cumulative sum of the driver.
    double acc = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      acc += out.driver[k - 1];
      out.fbm[k] = acc;
    }
    return out;
  }

  // Remaining cells j >= 2 use g(b_j dt) with b_j^alpha = (j^{a+1} - (j-1)^{a+1}) / (a+1).
  std::vector<double> kernel(n + 1, 0.0);
  const double dt_alpha = std::pow(dt, alpha);
  for (std::size_t j = 2; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    kernel[j] = dt_alpha * (std::pow(jd, alpha + 1.0) - std::pow(jd - 1.0, alpha + 1.0)) / (alpha + 1.0);
  }
  const std::vector<double> far = causal_convolution(kernel, out.driver, n + 1);

  const double scale = std::sqrt(2.0 * hurst);
  for (std::size_t k = 1; k <= n; ++k) out.fbm[k] = scale * (near[k - 1] + far[k]);
  return out;
}

double fbm_covariance_rl(double hurst, double t, double s) {
  check_hurst(hurst);
  if (!(t >= 0.0) || !(s >= 0.0))
    throw Error(ErrorKind::parameter_domain, "covariance times must be nonnegative");
  const double lo = std::min(t, s);
  const double hi = std::max(t, s);
  if (lo == 0.0) return 0.0;
  const double alpha = hurst - 0.5;
  const double gap = hi - lo;
  // With w = lo - u the integrable singularity sits at the left endpoint 0.
  auto integrand = [=](double w) { return std::pow(gap + w, alpha) * std::pow(w, alpha); };
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double value = integrator.integrate(integrand, 0.0, lo, 1e-10);
  return 2.0 * hurst * value;
}

CholeskyFbmSampler::CholeskyFbmSampler(double hurst, int n_steps, double dt) : n_steps_(n_steps) {
  check_hurst(hurst);
  check_grid(n_steps, dt);
  if (n_steps > kCholeskyMaxSteps)
    throw Error(ErrorKind::size, "Cholesky sampler limited to " + std::to_string(kCholeskyMaxSteps) +
                                     " steps, got " + std::to_string(n_steps));
  const auto n = static_cast<Eigen::Index>(n_steps);
  // Self-similarity: Cov(i dt, j dt) = dt^{2H} Cov(i, j).
  const double scale = std::pow(dt, 2.0 * hurst);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double c = scale * fbm_covariance_rl(hurst, static_cast<double>(i + 1), static_cast<double>(j + 1));
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }

  double jitter = 0.0;
  const double base = cov.diagonal().mean() * 1e-14;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::MatrixXd trial = cov;
    trial.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(trial);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd factor = llt.matrixL();
      lower_.assign(factor.size(), 0.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) lower_[static_cast<std::size_t>(i * n + j)] = factor(i, j);
      return;
    }
    jitter = jitter == 0.0 ? base : jitter * 100.0;
  }
  throw Error(ErrorKind::factorization, "fBm covariance matrix is not positive definite after jitter");
}

std::vector<double> CholeskyFbmSampler::sample(RandomStream& rng) const {
  const auto n = static_cast<std::size_t>(n_steps_);
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal();
  std::vector<double> path(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const double* row = lower_.data() + i * n;
    for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
    path[i + 1] = acc;
  }
  return path;
}

std::vector<double> simulate_fbm_cholesky(double hurst, int n_steps, double dt, RandomStream& rng) {
  if (n_steps > kCholeskyMaxSteps)
    throw Error(ErrorKind::size, "Cholesky sampler limited to " + std::to_string(kCholeskyMaxSteps) + " steps");
  return CholeskyFbmSampler(hurst, n_steps, dt).sample(rng);
}

PathPair simulate_rbergomi(const RBergomiParams& params, RandomStream& rng) {
  params.validate();
  const auto n = static_cast<std::size_t>(params.n_steps);
  const double dt = params.dt;
  const double eta = params.vol_of_vol;
  const double two_h = 2.0 * params.hurst;
  const double lambda = params.correlation;
  const double lambda_perp = std::sqrt(std::max(0.0, 1.0 - lambda * lambda));
  const double sqrt_dt = std::sqrt(dt);
  const double log_xi0 = std::log(params.forward_variance);

  FbmSample fbm = simulate_fbm_rl(params.hurst, params.n_steps, dt, rng);

  PathPair out;
  out.times.resize(n + 1);
  out.variance.resize(n + 1);
  out.log_variance.resize(n + 1);
  out.price.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.times[k] = t;
    const double exponent = eta * fbm.fbm[k] - 0.5 * eta * eta * std::pow(t, two_h);
    out.log_variance[k] = log_xi0 + exponent;
    out.variance[k] = std::max(params.forward_variance * std::exp(exponent), std::numeric_limits<double>::min());
  }

  double log_price = std::log(params.spot);
  out.price[0] = params.spot;
  for (std::size_t k = 0; k < n; ++k) {
    const double eps = fbm.driver[k] / sqrt_dt;
    const double eps_perp = rng.normal();
    const double shock = lambda_perp == 0.0 ? lambda * eps : lambda * eps + lambda_perp * eps_perp;
    const double v = out.variance[k];
    log_price += -0.5 * v * dt + std::sqrt(v * dt) * shock;
    out.price[k + 1] = std::exp(log_price);
  }
  out.fbm = std::move(fbm.fbm);
  out.brownian_increments = std::move(fbm.driver);
  return out;
}

PathPair simulate_rbergomi(const RBergomiParams& params) {
  RandomStream rng(params.seed);
  return simulate_rbergomi(params, rng);
}

void write_path_csv(const PathPair& path, const std::filesystem::path& file) {
  std::ofstream os(file);
  if (!os) throw Error(ErrorKind::io, "cannot open " + file.string() + " for writing");
  os << "step,time,price,variance,fbm\n";
  char buf[160];
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g,%.6g,%.6g,%.6g\n", k, path.times[k], path.price[k], path.variance[k],
                  path.fbm[k]);
    os << buf;
  }
  if (!os) throw Error(ErrorKind::io, "write failed for " + file.string());
}

ColumnSet to_columns(const PathPair& path) {
  ColumnSet set;
  set.names = {"time", "price", "variance", "log_variance", "fbm"};
  set.columns = {path.times, path.price, path.variance, path.log_variance, path.fbm};
  return set;
}

namespace {
constexpr char kMagic[8] = {'R', 'S', 'C', 'O', 'L', 'S', '0', '1'};

template <class T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error(ErrorKind::format, "truncated binary column file");
  return value;
}
}  // namespace

void write_columns_binary(const ColumnSet& set, const std::filesystem::path& file) {
  static_assert(std::endian::native == std::endian::little, "binary dump assumes little-endian host");
  if (set.names.size() != set.columns.size()) throw Error(ErrorKind::shape, "column names and data differ in count");
  const std::uint64_t rows = set.columns.empty() ? 0 : set.columns.front().size();
  for (const auto& c : set.columns)
    if (c.size() != rows) throw Error(ErrorKind::shape, "columns differ in length");
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error(ErrorKind::io, "cannot open " + file.string() + " for writing");
  os.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(os, rows);
  put<std::uint64_t>(os, set.columns.size());
  for (const auto& name : set.names) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (const auto& c : set.columns)
    os.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
  if (!os) throw Error(ErrorKind::io, "write failed for " + file.string());
}

ColumnSet read_columns_binary(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw Error(ErrorKind::io, "cannot open " + file.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorKind::format, file.string() + " is not a binary column dump");
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  ColumnSet set;
  for (std::uint64_t c = 0; c < cols; ++c) {
    const auto len = get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    set.names.push_back(std::move(name));
  }
  for (std::uint64_t c = 0; c < cols; ++c) {
    std::vector<double> col(rows);
    is.read(reinterpret_cast<char*>(col.data()), static_cast<std::streamsize>(rows * sizeof(double)));
    if (!is) throw Error(ErrorKind::format, "truncated binary column file " + file.string());
    set.columns.push_back(std::move(col));
  }
  return set;
}

}  // namespace roughscale::pathgen
