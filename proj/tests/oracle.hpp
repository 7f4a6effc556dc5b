// Test-side oracles kept independent of the library's numerics: fixed-panel
// Simpson integration (the library uses adaptive quadrature), hand-written
// densities, and std::random-based samplers (the library rolls its own).
#pragma once
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// Composite Simpson with a fixed even panel count.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Integral over [lo, inf) through the map x = lo + c * t / (1 - t).
inline double simpson_tail(const std::function<double(double)>& f, double lo, double scale,
                           int panels = 200000) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    double x = lo + scale * t / (1.0 - t);
    double jac = scale / ((1.0 - t) * (1.0 - t));
    return f(x) * jac;
  };
  return simpson(g, 0.0, 1.0, panels);
}

// Integral over [0, inf).
inline double simpson_halfline(const std::function<double(double)>& f, double scale,
                               int panels = 200000) {
  return simpson_tail(f, 0.0, scale, panels);
}

inline double gamma_pdf(double lambda, double shape, double rate) {
  if (lambda <= 0.0) return 0.0;
  return std::exp(shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(lambda) -
                  rate * lambda);
}

inline double poisson_pmf(long x, double lambda) {
  if (lambda <= 0.0) return x == 0 ? 1.0 : 0.0;
  return std::exp(x * std::log(lambda) - lambda - std::lgamma(x + 1.0));
}

inline double normal_pdf(double x, double mean, double var) {
  double d = x - mean;
  return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

inline double pareto_pdf(double theta, double scale, double shape) {
  if (theta < scale) return 0.0;
  return shape * std::pow(scale, shape) / std::pow(theta, shape + 1.0);
}

// Poisson-Gamma predictive mass at x by integrating the rate out numerically.
inline double poisson_ppd_quadrature(double nu, double n, long x) {
  auto f = [&](double lam) { return poisson_pmf(x, lam) * gamma_pdf(lam, nu, n); };
  double scale = (x + nu) / n + 1.0;
  return simpson_halfline(f, scale);
}

// Uniform[0, theta] predictive density at x by integrating the bound out.
// The integrand is smooth only above max(nu, x), so start the panel there.
inline double uniform_ppd_quadrature(double nu, double n, double x) {
  double lo = std::max(nu, x);
  auto f = [&](double theta) { return pareto_pdf(theta, nu, n) / theta; };
  return simpson_tail(f, lo, lo);
}

// Normal predictive density at x with known observation variance.
inline double normal_ppd_quadrature(double nu, double n, double sigma2, double x) {
  double pm = nu / n, pv = sigma2 / n;
  auto f = [&](double theta) { return normal_pdf(x, theta, sigma2) * normal_pdf(theta, pm, pv); };
  double sd = std::sqrt(pv);
  return simpson(f, pm - 14.0 * sd, pm + 14.0 * sd, 40000);
}

// std::random-based samplers, independent of the library's generator.
struct McSampler {
  std::mt19937 gen;
  explicit McSampler(unsigned seed) : gen(seed) {}

  double gamma(double shape, double rate) {
    std::gamma_distribution<double> d(shape, 1.0 / rate);
    return d(gen);
  }
  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> v(alpha.size());
    double total = 0.0;
    for (size_t i = 0; i < alpha.size(); ++i) total += v[i] = gamma(alpha[i], 1.0);
    for (double& x : v) x /= total;
    return v;
  }
  int categorical(const std::vector<double>& probs) {
    std::discrete_distribution<int> d(probs.begin(), probs.end());
    return d(gen) + 1;
  }
  double normal(double mean, double sd) {
    std::normal_distribution<double> d(mean, sd);
    return d(gen);
  }
  long poisson(double lambda) {
    std::poisson_distribution<long> d(lambda);
    return d(gen);
  }
  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen);
  }
  double pareto(double scale, double shape) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return scale * std::pow(1.0 - d(gen), -1.0 / shape);
  }
};

struct Welford {
  long count = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++count;
    double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  double variance() const { return count > 1 ? m2 / (count - 1) : 0.0; }
  double std_error() const { return std::sqrt(variance() / count); }
};

}  // namespace oracle
