#pragma once
// Deterministic random utilities: seed derivation, xoshiro256** generator and
// the distribution transforms used across the simulator. Every algorithm here
// is fixed so that runs reproduce bit-for-bit independent of platform or
// standard library.

#include <cstdint>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace ecl::rng {

// splitmix64 finalizer (no increment).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-seed derivation: sub = H(master, role, a, b). Streams are keyed by the
// role string, so unrelated streams do not shift when a config field or a
// loop bound elsewhere changes.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
  std::uint64_t h = mix64(master ^ fnv1a64(role));
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0xd1b54a32d192ed03ULL));
  return h;
}

constexpr std::uint64_t splitmix_next(std::uint64_t& state) noexcept {
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(state);
}

// xoshiro256** 1.0 (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix_next(sm);
  }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

using Rng = Xoshiro256ss;

// Uniform in [0, 1), 53-bit resolution.
inline double unit_double(Rng& g) noexcept {
  return static_cast<double>(g.next() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& g, double lo, double hi) noexcept {
  return lo + (hi - lo) * unit_double(g);
}

// Standard normal via Box-Muller; always consumes exactly two raw draws.
inline double normal(Rng& g) noexcept {
  const double u1 = 1.0 - unit_double(g);  // (0, 1]
  const double u2 = unit_double(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t bounded(Rng& g, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("bounded: n must be positive");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = g.next();
    if (r >= threshold) return r % n;
  }
}

// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 boosted through shape + 1.
inline double gamma(Rng& g, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
  if (shape < 1.0) {
    const double u = 1.0 - unit_double(g);  // (0, 1]
    return gamma(g, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal(g);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = 1.0 - unit_double(g);  // (0, 1]
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

// In-place Fisher-Yates.
template <class T>
void shuffle(std::vector<T>& v, Rng& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(g, i));
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& g) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx, g);
  return idx;
}

// First k entries of a partial front-to-back shuffle of 0..n-1, in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& g) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(g, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace ecl::rng
