#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace tactile {

/// Error raised by every library operation. `kind()` is a short
/// machine-readable category (e.g. "invalid_argument", "parse_error")
/// that the CLI echoes into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(const char* kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool cond, const char* message) {
  if (!cond) [[unlikely]] fail("invalid_argument", message);
}

inline void require(bool cond, const std::string& message) {
  if (!cond) [[unlikely]] fail("invalid_argument", message);
}

/// Number of whole bins of width `bin` that fit in `span`. A relative
/// slack of 1e-9 absorbs representation error such as 18.0 / 0.2.
inline std::size_t whole_bins(double span, double bin) {
  return static_cast<std::size_t>(std::floor(span / bin + 1e-9));
}

/// Bin index of `t` for bins of width `bin` starting at 0, with the same
/// slack as whole_bins so that spikes placed on a boundary land right of it.
inline std::size_t bin_index(double t, double bin) {
  const double x = std::floor(t / bin + 1e-9);
  return x <= 0.0 ? 0 : static_cast<std::size_t>(x);
}

// ---------------------------------------------------------------------------
// Seeding
//
// Every random draw in the project goes through Rng, a splitmix64-seeded
// xoshiro256** generator whose integer and normal variates are computed here
// rather than by <random> distributions, so streams are identical across
// standard libraries. Sub-seeds are derived with derive_seed(master, tags...),
// a counter scheme: each tag is folded into the state through splitmix64.
// ---------------------------------------------------------------------------

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master) noexcept { return splitmix64(master); }

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, Tags... rest) noexcept {
  return derive_seed(splitmix64(master ^ splitmix64(tag + 0x632BE59BD9B4E019ULL)), rest...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += 0x9E3779B97F4A7C15ULL;
      w = splitmix64(s);
    }
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (rejection).
  std::size_t index(std::size_t n) noexcept {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  /// Standard normal via the Marsaglia polar method (one variate per call;
  /// the pair's second value is cached).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double x, y, s;
    do {
      x = 2.0 * uniform() - 1.0;
      y = 2.0 * uniform() - 1.0;
      s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = y * f;
    has_spare_ = true;
    return x * f;
  }

  /// Exponential with the given rate.
  double exponential(double rate) noexcept {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    return -std::log(u) / rate;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tactile
