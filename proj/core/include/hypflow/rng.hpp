#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace hypflow {

// Counter-based random stream. Every draw is a keyed mix of
// (master seed, stream index, counter), so replica streams are independent
// of scheduling order and two streams never share state.
class StreamRng {
 public:
  StreamRng(std::uint64_t master_seed, std::uint64_t stream)
      : key_(mix(master_seed ^ 0x6a09e667f3bcc909ULL, stream)), counter_(0) {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return mix(key_, ++counter_); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n >= 1. Rejection-free bounded draw is not
  // needed at the tiny moduli used here; the multiply-shift bias is < 2^-53.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>((*this)()) * n) >> 64);
  }

  // Index into a cumulative distribution (cdf nondecreasing, back() == 1).
  std::size_t categorical(std::span<const double> cdf) {
    const double u = uniform();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (u < cdf[mid]) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    return lo;
  }

  // Derived stream for an independent phase of the same replica.
  StreamRng substream(std::uint64_t salt) const {
    return StreamRng(key_, salt ^ 0xd1b54a32d192ed03ULL);
  }

 private:
  static std::uint64_t mix(std::uint64_t key, std::uint64_t ctr) {
    std::uint64_t z = key + ctr * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace hypflow
