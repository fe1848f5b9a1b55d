#pragma once

// Counter-based random number generation (Philox 4x32-10, Salmon et al.,
// SC 2011) plus the exact samplers the diffusion needs.  Streams are keyed
// by (seed, stream id), so any path can be regenerated in isolation and
// batches merge identically regardless of worker count.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cleradii::rng {

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key0_(static_cast<std::uint32_t>(seed)),
        key1_(static_cast<std::uint32_t>(seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream)),
        ctr3_(static_cast<std::uint32_t>(stream >> 32)) {}

  std::uint32_t next_u32() {
    if (avail_ == 0) refill();
    return block_[--avail_];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on [0,1) with 53 random bits
  double next_double() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on (0,1); safe under log()
  double next_double_open() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // standard normal via Box-Muller, pair-buffered
  double next_normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

  bool next_coin() { return (next_u32() & 1u) != 0u; }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b,
                             std::uint32_t* lo) {
    const std::uint64_t p = std::uint64_t(a) * b;
    *lo = static_cast<std::uint32_t>(p);
    return static_cast<std::uint32_t>(p >> 32);
  }

  void refill() {
    std::uint32_t x0 = ctr0_, x1 = ctr1_, x2 = ctr2_, x3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t lo0, lo1;
      const std::uint32_t hi0 = mulhi(0xD2511F53u, x0, &lo0);
      const std::uint32_t hi1 = mulhi(0xCD9E8D57u, x2, &lo1);
      const std::uint32_t y0 = hi1 ^ x1 ^ k0;
      const std::uint32_t y1 = lo1;
      const std::uint32_t y2 = hi0 ^ x3 ^ k1;
      const std::uint32_t y3 = lo0;
      x0 = y0; x1 = y1; x2 = y2; x3 = y3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    block_[0] = x0; block_[1] = x1; block_[2] = x2; block_[3] = x3;
    avail_ = 4;
    if (++ctr0_ == 0) ++ctr1_;  // 64-bit block counter in words 0..1
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0, ctr2_, ctr3_;
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int avail_ = 0;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

// ---------------------------------------------------------------------------
// distributions (deterministic given the generator state)
// ---------------------------------------------------------------------------

// Poisson: Knuth product method for small mean, PTRS-style rejection
// (Hoermann) for large mean.  Exact for all mean >= 0.
inline std::uint64_t poisson(Philox& g, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    double prod = 1.0;
    std::uint64_t n = 0;
    for (;;) {
      prod *= g.next_double_open();
      if (prod <= limit) return n;
      ++n;
    }
  }
  // transformed rejection with squeeze (Hoermann's PTRS)
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = g.next_double() - 0.5;
    double v = g.next_double_open();
    double us = 0.5 - std::abs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return std::uint64_t(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kf * std::log(mean) - mean - std::lgamma(kf + 1.0)) {
      return std::uint64_t(kf);
    }
  }
}

// Gamma(shape, scale 1): Marsaglia-Tsang, with the power boost for
// shape < 1.
inline double gamma(Philox& g, double shape) {
  if (shape < 1.0) {
    const double u = g.next_double_open();
    return gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = g.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = g.next_double_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace cleradii::rng
