#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace roughscale {

/// Stateless 64-bit mixing function (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a substream key from a base seed and a list of indices, e.g.
/// (base_seed, h_index, lambda_index, replication). Order-sensitive.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) noexcept;

/// Counter-based random source: the k-th draw is mix64(key, k), so a stream is
/// fully determined by its key and position and never shares state with
/// another stream. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(mix64(key ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;

  /// Independent child stream; does not advance this stream.
  RandomStream substream(std::uint64_t index) const noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t position() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace roughscale
