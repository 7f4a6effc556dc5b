#pragma once
#include <stdexcept>
#include <string>
#include <vector>

#include "elicit/rng.hpp"

namespace elicit {

// The five supported observation-family / conjugate-prior pairs.  Bernoulli
// with a Beta prior is the two-outcome categorical case and shares its code
// path everywhere except serialization.
enum class Family {
  normal_known_var,
  poisson_gamma,
  uniform_pareto,
  categorical_dirichlet,
  bernoulli_beta,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

struct FamilySpec {
  Family family = Family::normal_known_var;
  double sigma2 = 1.0;    // normal_known_var: known observation variance
  int num_outcomes = 0;   // categorical_dirichlet / bernoulli_beta: K

  static FamilySpec normal_known_var(double sigma2 = 1.0);
  static FamilySpec poisson_gamma();
  static FamilySpec uniform_pareto();
  static FamilySpec categorical_dirichlet(int num_outcomes);
  static FamilySpec bernoulli_beta();

  bool categorical() const {
    return family == Family::categorical_dirichlet || family == Family::bernoulli_beta;
  }
  // True when the sufficient statistic of a sample is integer-valued
  // (event counts or outcome indicators).
  bool integer_statistic() const { return family == Family::poisson_gamma || categorical(); }
};

// Conjugate-prior hyperparameters: nu accumulates sufficient statistics,
// n counts effective samples (prior pseudo-counts included).  For the
// categorical families nu holds the Dirichlet pseudo-counts and n == sum(nu).
struct Hyper {
  std::vector<double> nu;
  double n = 0.0;

  double nu0() const { return nu.at(0); }
};

Hyper scalar_hyper(double nu, double n);

// Dirichlet view of a categorical hyper.
struct DirichletHyper {
  std::vector<double> alpha;

  double n() const;
  Hyper as_hyper() const;
  static DirichletHyper from_hyper(const Hyper& h);
};

// A multiset of observations; duplicates allowed, order irrelevant.
struct SampleSet {
  Family family = Family::normal_known_var;
  std::vector<double> values;
};

// An agent's posterior predictive distribution.
struct Belief {
  FamilySpec spec;
  Hyper hyper;

  double density(double x) const;
  double log_density(double x) const;
  std::vector<double> moments(int order) const;
  // Categorical families only: the predictive probability vector alpha / n.
  std::vector<double> probs() const;
};

// Throws std::invalid_argument when h violates the family's invariants
// (n > 0, positive pseudo-counts, matching dimensions, ...).
void validate_hyper(const FamilySpec& spec, const Hyper& h);

// Throws std::domain_error when x lies outside the family's outcome space.
void validate_outcome(const FamilySpec& spec, double x);

// One-observation conjugate update: (nu + phi(x), n + 1) for the linear
// families; uniform_pareto uses (max(nu, x), n + 1).
Hyper posterior_update(const FamilySpec& spec, const Hyper& h, double x);

// Fold of posterior_update over the multiset; order-invariant.
Hyper batch_update(const FamilySpec& spec, const Hyper& h, const SampleSet& xs);

// Closed-form predictive density / mass at x.
double ppd_density(const FamilySpec& spec, const Hyper& h, double x);
double ppd_log_density(const FamilySpec& spec, const Hyper& h, double x);

// First `order` raw moments of the predictive, order in {1, 2}.  The
// uniform_pareto moments require n > 1 (first) and n > 2 (second).
std::vector<double> ppd_moments(const FamilySpec& spec, const Hyper& h, int order);

// Draw a parameter from the prior/posterior p(theta | nu, n).  Scalar
// families return a length-1 vector; categorical returns the probability
// vector theta.
std::vector<double> sample_theta(const FamilySpec& spec, const Hyper& h, Rng& rng);

// Draw one observation from p(x | theta).
double sample_x(const FamilySpec& spec, const std::vector<double>& theta, Rng& rng);

}  // namespace elicit
