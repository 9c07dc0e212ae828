#pragma once

#include <cstdint>
#include <random>

namespace crater {

/// splitmix64 step; used to derive independent sub-seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Sub-seed for a parallel lane or per-item stream: hash of (root, stream).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t s = root ^ (0x9e3779b97f4a7c15ULL + (stream << 1));
  splitmix64(s);
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(root, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return derive_seed(derive_seed(root, a, b), c);
}

/// Deterministic random source. The generator is std::mt19937_64 (sequence
/// fixed by the standard); all variate transforms are implemented here rather
/// than with std:: distributions, so draws are reproducible per seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n);

  /// Standard normal via Box-Muller.
  double gauss();

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);

  /// Beta(a, b) as a ratio of Gamma draws.
  double beta(double a, double b);

  /// Poisson(lambda): product-of-uniforms inversion for small lambda,
  /// PTRS transformed rejection otherwise (valid for all lambda, no normal
  /// approximation).
  long poisson(double lambda);

  /// Binomial(n, p) as a sum of Bernoulli trials; exact, O(n).
  long binomial(long n, double p);

 private:
  std::mt19937_64 gen_;
};

}  // namespace crater
