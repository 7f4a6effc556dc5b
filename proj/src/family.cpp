#include "elicit/family.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace elicit {

namespace {

bool near_integer(double x, double tol = 1e-9) { return std::abs(x - std::round(x)) <= tol; }

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::normal_known_var: return "normal_known_var";
    case Family::poisson_gamma: return "poisson_gamma";
    case Family::uniform_pareto: return "uniform_pareto";
    case Family::categorical_dirichlet: return "categorical_dirichlet";
    case Family::bernoulli_beta: return "bernoulli_beta";
  }
  throw std::logic_error("family_name: bad tag");
}

Family family_from_name(const std::string& name) {
  if (name == "normal_known_var") return Family::normal_known_var;
  if (name == "poisson_gamma") return Family::poisson_gamma;
  if (name == "uniform_pareto") return Family::uniform_pareto;
  if (name == "categorical_dirichlet") return Family::categorical_dirichlet;
  if (name == "bernoulli_beta") return Family::bernoulli_beta;
  throw std::invalid_argument("unknown family: " + name);
}

FamilySpec FamilySpec::normal_known_var(double sigma2) {
  if (!(sigma2 > 0)) throw std::invalid_argument("normal_known_var: sigma2 must be positive");
  FamilySpec s;
  s.family = Family::normal_known_var;
  s.sigma2 = sigma2;
  return s;
}

FamilySpec FamilySpec::poisson_gamma() {
  FamilySpec s;
  s.family = Family::poisson_gamma;
  return s;
}

FamilySpec FamilySpec::uniform_pareto() {
  FamilySpec s;
  s.family = Family::uniform_pareto;
  return s;
}

FamilySpec FamilySpec::categorical_dirichlet(int num_outcomes) {
  if (num_outcomes < 2) throw std::invalid_argument("categorical_dirichlet: need at least 2 outcomes");
  FamilySpec s;
  s.family = Family::categorical_dirichlet;
  s.num_outcomes = num_outcomes;
  return s;
}

FamilySpec FamilySpec::bernoulli_beta() {
  FamilySpec s;
  s.family = Family::bernoulli_beta;
  s.num_outcomes = 2;
  return s;
}

Hyper scalar_hyper(double nu, double n) {
  Hyper h;
  h.nu = {nu};
  h.n = n;
  return h;
}

double DirichletHyper::n() const { return sum(alpha); }

Hyper DirichletHyper::as_hyper() const {
  Hyper h;
  h.nu = alpha;
  h.n = n();
  return h;
}

DirichletHyper DirichletHyper::from_hyper(const Hyper& h) {
  DirichletHyper d;
  d.alpha = h.nu;
  return d;
}

void validate_hyper(const FamilySpec& spec, const Hyper& h) {
  if (!(h.n > 0) || !std::isfinite(h.n)) throw std::invalid_argument("hyper: n must be positive and finite");
  for (double v : h.nu)
    if (!std::isfinite(v)) throw std::invalid_argument("hyper: nu must be finite");
  switch (spec.family) {
    case Family::normal_known_var:
      if (h.nu.size() != 1) throw std::invalid_argument("hyper: normal_known_var needs a scalar nu");
      break;
    case Family::poisson_gamma:
      if (h.nu.size() != 1) throw std::invalid_argument("hyper: poisson_gamma needs a scalar nu");
      if (!(h.nu[0] > 0)) throw std::invalid_argument("hyper: poisson_gamma needs nu > 0");
      break;
    case Family::uniform_pareto:
      if (h.nu.size() != 1) throw std::invalid_argument("hyper: uniform_pareto needs a scalar nu");
      if (!(h.nu[0] > 0)) throw std::invalid_argument("hyper: uniform_pareto needs nu > 0");
      break;
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta: {
      if (static_cast<int>(h.nu.size()) != spec.num_outcomes)
        throw std::invalid_argument("hyper: pseudo-count vector length must equal the outcome count");
      for (double a : h.nu)
        if (!(a > 0)) throw std::invalid_argument("hyper: pseudo-counts must be positive");
      double total = sum(h.nu);
      if (std::abs(total - h.n) > 1e-9 * std::max(1.0, total))
        throw std::invalid_argument("hyper: n must equal the pseudo-count total");
      break;
    }
  }
}

void validate_outcome(const FamilySpec& spec, double x) {
  if (!std::isfinite(x)) throw std::domain_error("outcome must be finite");
  switch (spec.family) {
    case Family::normal_known_var:
      return;
    case Family::poisson_gamma:
      if (x < 0 || !near_integer(x)) throw std::domain_error("poisson outcome must be a nonnegative integer");
      return;
    case Family::uniform_pareto:
      if (x < 0) throw std::domain_error("uniform outcome must be nonnegative");
      return;
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta:
      if (!near_integer(x) || x < 1 || x > spec.num_outcomes)
        throw std::domain_error("categorical outcome must be an index in 1.." + std::to_string(spec.num_outcomes));
      return;
  }
}

Hyper posterior_update(const FamilySpec& spec, const Hyper& h, double x) {
  validate_hyper(spec, h);
  validate_outcome(spec, x);
  Hyper out = h;
  switch (spec.family) {
    case Family::normal_known_var:
    case Family::poisson_gamma:
      out.nu[0] += x;
      break;
    case Family::uniform_pareto:
      out.nu[0] = std::max(out.nu[0], x);
      break;
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta:
      out.nu[static_cast<size_t>(std::lround(x)) - 1] += 1.0;
      break;
  }
  out.n += 1.0;
  return out;
}

Hyper batch_update(const FamilySpec& spec, const Hyper& h, const SampleSet& xs) {
  Hyper out = h;
  for (double x : xs.values) out = posterior_update(spec, out, x);
  return out;
}

double ppd_log_density(const FamilySpec& spec, const Hyper& h, double x) {
  validate_hyper(spec, h);
  validate_outcome(spec, x);
  switch (spec.family) {
    case Family::normal_known_var: {
      // Predictive is Normal(nu/n, sigma2 + sigma2/n): posterior variance of
      // the mean plus the observation variance.
      double mean = h.nu[0] / h.n;
      double var = spec.sigma2 * (1.0 + 1.0 / h.n);
      double d = x - mean;
      return -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
    }
    case Family::poisson_gamma: {
      // Negative binomial: Gamma(nu, n) mixed over Poisson rates.
      double nu = h.nu[0], n = h.n;
      return std::lgamma(x + nu) - std::lgamma(nu) - std::lgamma(x + 1.0) +
             nu * std::log(n / (n + 1.0)) - x * std::log(n + 1.0);
    }
    case Family::uniform_pareto: {
      // Mixture: Uniform[0, nu] with weight n/(n+1), Pareto(nu, n) tail with
      // weight 1/(n+1).
      double nu = h.nu[0], n = h.n;
      if (x <= nu) return std::log(n) - std::log(n + 1.0) - std::log(nu);
      return std::log(n / (n + 1.0)) + n * std::log(nu) - (n + 1.0) * std::log(x);
    }
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta: {
      double p = h.nu[static_cast<size_t>(std::lround(x)) - 1] / h.n;
      return std::log(p);
    }
  }
  throw std::logic_error("ppd_log_density: bad tag");
}

double ppd_density(const FamilySpec& spec, const Hyper& h, double x) {
  if (spec.categorical()) {
    validate_hyper(spec, h);
    validate_outcome(spec, x);
    return h.nu[static_cast<size_t>(std::lround(x)) - 1] / h.n;
  }
  return std::exp(ppd_log_density(spec, h, x));
}

std::vector<double> ppd_moments(const FamilySpec& spec, const Hyper& h, int order) {
  validate_hyper(spec, h);
  if (order != 1 && order != 2) throw std::invalid_argument("ppd_moments: order must be 1 or 2");
  switch (spec.family) {
    case Family::normal_known_var: {
      double m = h.nu[0] / h.n;
      if (order == 1) return {m};
      return {m, m * m + spec.sigma2 * (1.0 + 1.0 / h.n)};
    }
    case Family::poisson_gamma: {
      double nu = h.nu[0], n = h.n;
      double m1 = nu / n;
      if (order == 1) return {m1};
      return {m1, nu * (nu + n + 1.0) / (n * n)};
    }
    case Family::uniform_pareto: {
      double nu = h.nu[0], n = h.n;
      if (n <= 1.0) throw std::domain_error("uniform_pareto: first moment requires n > 1");
      double m1 = n * nu / (2.0 * (n - 1.0));
      if (order == 1) return {m1};
      if (n <= 2.0) throw std::domain_error("uniform_pareto: second moment requires n > 2");
      return {m1, n * nu * nu / (3.0 * (n - 2.0))};
    }
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta: {
      // Outcome labels 1..K treated as integers.
      double m1 = 0.0, m2 = 0.0;
      for (int i = 0; i < spec.num_outcomes; ++i) {
        double p = h.nu[i] / h.n;
        m1 += (i + 1) * p;
        m2 += double(i + 1) * (i + 1) * p;
      }
      if (order == 1) return {m1};
      return {m1, m2};
    }
  }
  throw std::logic_error("ppd_moments: bad tag");
}

std::vector<double> sample_theta(const FamilySpec& spec, const Hyper& h, Rng& rng) {
  validate_hyper(spec, h);
  switch (spec.family) {
    case Family::normal_known_var:
      return {rng.normal(h.nu[0] / h.n, std::sqrt(spec.sigma2 / h.n))};
    case Family::poisson_gamma:
      return {rng.gamma(h.nu[0], h.n)};
    case Family::uniform_pareto:
      return {rng.pareto(h.nu[0], h.n)};
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta:
      return rng.dirichlet(h.nu);
  }
  throw std::logic_error("sample_theta: bad tag");
}

double sample_x(const FamilySpec& spec, const std::vector<double>& theta, Rng& rng) {
  switch (spec.family) {
    case Family::normal_known_var:
      return rng.normal(theta.at(0), std::sqrt(spec.sigma2));
    case Family::poisson_gamma:
      return static_cast<double>(rng.poisson(theta.at(0)));
    case Family::uniform_pareto:
      if (!(theta.at(0) > 0)) throw std::invalid_argument("sample_x: uniform bound must be positive");
      return rng.uniform(0.0, theta[0]);
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta:
      if (static_cast<int>(theta.size()) != spec.num_outcomes)
        throw std::invalid_argument("sample_x: theta length must equal the outcome count");
      return static_cast<double>(rng.categorical(theta));
  }
  throw std::logic_error("sample_x: bad tag");
}

double Belief::density(double x) const { return ppd_density(spec, hyper, x); }

double Belief::log_density(double x) const { return ppd_log_density(spec, hyper, x); }

std::vector<double> Belief::moments(int order) const { return ppd_moments(spec, hyper, order); }

std::vector<double> Belief::probs() const {
  if (!spec.categorical()) throw std::invalid_argument("Belief::probs: categorical families only");
  validate_hyper(spec, hyper);
  std::vector<double> p(hyper.nu.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = hyper.nu[i] / hyper.n;
  return p;
}

}  // namespace elicit
