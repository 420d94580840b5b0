// Seeded random streams for reproducible simulation runs.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace crmac {

/// Independent random substreams of one simulation run.
///
/// Policy and MAC draws live on their own streams so that two runs differing
/// only in the sensing policy see identical PU and fading realizations.
enum class StreamRole : std::uint64_t {
  pu = 1,
  fading = 2,
  policy = 3,
  mac = 4,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of a substream: mix64(mix64(mix64(master) ^ run) ^ role).
///
/// This mapping is part of the reproducibility contract; changing it changes
/// every published result.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t run_index,
                                    StreamRole role) noexcept {
  return mix64(mix64(mix64(master_seed) ^ run_index) ^ static_cast<std::uint64_t>(role));
}

/// A 64-bit Mersenne Twister with fixed, library-independent transforms.
///
/// The standard distributions are implementation-defined, so the continuous
/// variates are built here from the raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master_seed, std::uint64_t run_index, StreamRole role)
      : engine_(derive_seed(master_seed, run_index, role)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Exponential with the given mean, by inversion.
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  /// Standard normal (Box-Muller; the second variate is cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phase = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phase);
    has_spare_ = true;
    return r * std::cos(phase);
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace crmac
