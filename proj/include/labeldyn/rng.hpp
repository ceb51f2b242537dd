#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace labeldyn {

// xoshiro256++ seeded through splitmix64. Self-contained so that streams are
// reproducible across standard libraries, which the determinism contract of
// the harness relies on.
class Rng {
  public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  double normal() {
    // Box-Muller; one value per call keeps the stream position predictable.
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  double gamma(double alpha) {
    // Marsaglia-Tsang; alpha > 0.
    if (alpha < 1.0) {
      const double g = gamma(alpha + 1.0);
      double u = uniform();
      while (u <= 1e-300) u = uniform();
      return g * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 1e-300 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::vector<double> dirichlet(int n, double alpha) {
    std::vector<double> w(n);
    double total = 0.0;
    for (int h = 0; h < n; ++h) {
      w[h] = gamma(alpha);
      total += w[h];
    }
    if (total <= 0.0) total = 1.0;
    for (auto& v : w) v /= total;
    return w;
  }

  // point uniform in the d-ball of given radius
  std::vector<double> ball(int d, double radius) {
    std::vector<double> x(d);
    for (;;) {
      double norm2 = 0.0;
      for (int j = 0; j < d; ++j) {
        x[j] = uniform(-1.0, 1.0);
        norm2 += x[j] * x[j];
      }
      if (norm2 <= 1.0) break;
    }
    for (auto& v : x) v *= radius;
    return x;
  }

  private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t state_[4];
};

}  // namespace labeldyn
