#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pfbart {

// Deterministic generator with independent substreams. One root seed plus a
// stream index fully determines the draw sequence, so replications can run
// concurrently and still reproduce the sequential results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{seed, stream, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    engine_.seed(seq);
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Requires n >= 1.
  std::size_t uniform_int(std::size_t n) {
    const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  // Box-Muller; one value per call so the stream position is input-independent.
  double normal(double mean, double sd) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    return mean + sd * z;
  }

  // Marsaglia-Tsang; unit scale.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal(0.0, 1.0);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // sigma^2 draw for an inverse-gamma(shape, scale) target.
  double inverse_gamma(double shape, double scale) {
    return scale / gamma(shape);
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
};

// Stable derivation of per-cell seeds for benchmark orchestration.
inline std::uint64_t mix_seed(std::uint64_t root, std::uint64_t tag, std::uint64_t index) {
  auto splitmix = [](std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s = root;
  std::uint64_t h = splitmix(s);
  s ^= tag * 0xda942042e4dd58b5ULL;
  h ^= splitmix(s);
  s ^= index;
  h ^= splitmix(s);
  return h;
}

}  // namespace pfbart
