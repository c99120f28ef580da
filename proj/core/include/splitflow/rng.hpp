#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>

namespace splitflow {

/// Counter-based random stream (Philox2x64-10).
///
/// A stream is addressed by (master seed, stream index).  Draws within a
/// stream are a pure function of the draw counter, so ensembles that assign
/// one stream per trajectory produce results independent of scheduling and
/// worker count.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix64(master_seed)), stream_(stream) {}

  std::uint64_t next_u64() {
    if (avail_ == 0) {
      next_block();
    }
    return buf_[2 - (avail_--)];
  }

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  /// Exponential with the given mean, via inverse CDF on (0,1).
  /// Strictly positive and finite by construction.
  double exponential(double mean) {
    if (!(mean > 0)) {
      throw std::invalid_argument("RngStream::exponential: mean must be > 0");
    }
    return -mean * std::log(uniform_open01());
  }

  /// Standard normal (Box-Muller, two draws per call).
  double normal() {
    const double u1 = uniform_open01();
    const double u2 = uniform_open01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform integer in [0, n).  Multiply-shift, rejection-free.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) {
      throw std::invalid_argument("RngStream::uniform_below: n must be > 0");
    }
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Fisher-Yates shuffle of 0..m-1 into `out`.
  void fill_permutation(std::span<std::uint32_t> out) {
    std::iota(out.begin(), out.end(), 0u);
    for (std::size_t i = out.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(out[i - 1], out[j]);
    }
  }

  std::uint64_t stream() const { return stream_; }

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  void next_block() {
    // Philox2x64-10: counter block (ctr_, stream_), 64-bit key.
    std::uint64_t x0 = ctr_++;
    std::uint64_t x1 = stream_;
    std::uint64_t k = key_;
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 prod =
          static_cast<unsigned __int128>(0xD2B74407B1CE6E93ull) * x0;
      const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
      const std::uint64_t lo = static_cast<std::uint64_t>(prod);
      x0 = hi ^ k ^ x1;
      x1 = lo;
      k += 0x9E3779B97F4A7C15ull;
    }
    buf_[0] = x0;
    buf_[1] = x1;
    avail_ = 2;
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t ctr_ = 0;
  std::uint64_t buf_[2] = {0, 0};
  int avail_ = 0;
};

}  // namespace splitflow
