#pragma once
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace elicit {

// Counter-based seed derivation: one root seed fans out to per-trial,
// per-agent, per-purpose substreams, so adding an agent or a trial does not
// perturb any other stream.
inline uint64_t mix_seed(uint64_t h, uint64_t v) {
  uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(root, a), b), c);
}

// Seeded generator with the samplers the simulator needs.  Every draw is a
// pure function of the engine state, so a given seed replays byte-for-byte;
// none of the samplers keeps hidden state between calls.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; draws two uniforms per call.
  double normal(double mean, double sd) {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sd * z;
  }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double rate) {
    if (shape <= 0 || rate <= 0) throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      double u = uniform01();
      if (u < 0x1.0p-53) u = 0x1.0p-53;
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal(0.0, 1.0);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // Exact for any rate: large rates are split additively into chunks small
  // enough for Knuth's product method.
  long poisson(double lambda) {
    if (lambda < 0 || !std::isfinite(lambda)) throw std::invalid_argument("poisson: rate must be finite and nonnegative");
    long total = 0;
    while (lambda > 30.0) {
      total += poisson_small(30.0);
      lambda -= 30.0;
    }
    return total + poisson_small(lambda);
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> draws(alpha.size());
    double sum = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) {
      draws[i] = gamma(alpha[i], 1.0);
      sum += draws[i];
    }
    for (double& d : draws) d /= sum;
    return draws;
  }

  double pareto(double scale, double shape) {
    double u = 1.0 - uniform01();  // (0, 1]
    return scale * std::pow(u, -1.0 / shape);
  }

  // 1-based outcome index distributed per `probs` (need not be normalized
  // exactly; the last bin absorbs roundoff).
  int categorical(const std::vector<double>& probs) {
    double u = uniform01();
    double acc = 0.0;
    for (size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(probs.size());
  }

 private:
  long poisson_small(double lambda) {
    if (lambda <= 0.0) return 0;
    double limit = std::exp(-lambda);
    long k = 0;
    double prod = uniform01();
    while (prod > limit) {
      ++k;
      prod *= uniform01();
    }
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace elicit
