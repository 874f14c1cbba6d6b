#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace beamcap {

// Philox-4x32-10 counter-based generator. Every draw is a pure function of
// (seed, stream, index), so parallel workers can fill disjoint index ranges
// and still produce bit-identical values to a serial run.
class Philox {
 public:
  explicit Philox(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  // Two 64-bit words for the (stream, index) counter block.
  std::array<std::uint64_t, 2> words(std::uint64_t stream, std::uint64_t index) const noexcept {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return {ctr[0] | (std::uint64_t{ctr[1]} << 32), ctr[2] | (std::uint64_t{ctr[3]} << 32)};
  }

  // Uniform on (0, 1]; never 0, so it is safe under log().
  double uniform(std::uint64_t stream, std::uint64_t index) const noexcept {
    return to_unit(words(stream, index)[0]);
  }

  // Standard normal pair via Box-Muller on one counter block.
  std::array<double, 2> normal_pair(std::uint64_t stream, std::uint64_t index) const noexcept {
    const auto w = words(stream, index);
    const double r = std::sqrt(-2.0 * std::log(to_unit(w[0])));
    const double t = 2.0 * pi_ * to_unit(w[1]);
    return {r * std::cos(t), r * std::sin(t)};
  }

  // Circularly-symmetric complex Gaussian with E|z|^2 = 1 (real and
  // imaginary parts each have variance 1/2).
  std::complex<double> complex_normal(std::uint64_t stream, std::uint64_t index) const noexcept {
    const auto n = normal_pair(stream, index);
    return {n[0] * inv_sqrt2_, n[1] * inv_sqrt2_};
  }

 private:
  static constexpr double pi_ = 3.14159265358979323846;
  static constexpr double inv_sqrt2_ = 0.70710678118654752440;

  static double to_unit(std::uint64_t x) noexcept {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
};

// Sequential view of one Philox stream for draw-after-draw call sites
// (instance generators, oracle restarts). Position advances per call, so a
// stream is deterministic given (seed, stream).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(seed), stream_(stream) {}

  double uniform() { return gen_.uniform(stream_, pos_++); }
  double normal() { return gen_.normal_pair(stream_, pos_++)[0]; }
  std::complex<double> complex_normal() { return gen_.complex_normal(stream_, pos_++); }

  double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Log-uniform over [lo, hi], lo > 0.
  double log_uniform(double lo, double hi) { return lo * std::exp(uniform() * std::log(hi / lo)); }
  // Unbiased enough for small n: 128-bit multiply-shift.
  std::uint64_t index_below(std::uint64_t n) {
    const auto w = gen_.words(stream_, pos_++)[0];
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(w) * n) >> 64);
  }

 private:
  Philox gen_;
  std::uint64_t stream_;
  std::uint64_t pos_ = 0;
};

// splitmix64; used to derive sub-seeds that do not collide with the parent's
// counter streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace beamcap
