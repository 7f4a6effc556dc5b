#pragma once
#include <optional>
#include <vector>

#include "elicit/scoring.hpp"

namespace elicit {

// A report that is internally consistent as a report but matches no
// hyperparameter reachable from the prior (possible under model
// misspecification).  Distinct from std::domain_error, which flags inputs
// outside the report space itself.
struct InversionError : std::runtime_error {
  explicit InversionError(const std::string& what) : std::runtime_error(what) {}
};

enum class MechanismTag { single_sample_moments, single_sample_full_ppd, two_sample_dirichlet };

std::string mechanism_name(MechanismTag tag);
MechanismTag mechanism_from_name(const std::string& name);

// An elicitation scheme: a scoring rule plus the decode map that recovers
// hyperparameters from truthful reports.  Single-sample schemes are refused
// for the categorical families, whose predictive distribution does not
// determine its pseudo-count scale.
struct Mechanism {
  MechanismTag tag = MechanismTag::single_sample_moments;
  FamilySpec spec;
  Hyper prior;

  static Mechanism make(MechanismTag tag, FamilySpec spec, Hyper prior);
  static Mechanism single_sample_moments(FamilySpec spec, Hyper prior);
  static Mechanism single_sample_full_ppd(FamilySpec spec, Hyper prior);
  static Mechanism two_sample_dirichlet(FamilySpec spec, Hyper prior);

  ScoreRule rule() const;
  // Number of samples the principal scores against (1 or 2).
  int principal_samples() const { return tag == MechanismTag::two_sample_dirichlet ? 2 : 1; }
};

// Normal with known observation variance: the predictive mean mu1 and
// variance v give n = sigma2 / (v - sigma2), nu = n * mu1.
Hyper invert_normal(double mu1, double v, double sigma2);

// Poisson-Gamma: n = mu1 / (mu2 - mu1^2 - mu1), nu = n * mu1, the unique
// solution of the negative-binomial moment equations.
Hyper invert_poisson(double mu1, double mu2);

// Uniform-Pareto: eliminating nu from the moment formulas leaves a quadratic
// in n with a unique root above 2; then nu = 2 mu1 (n - 1) / n.
Hyper invert_uniform(double mu1, double mu2);

// Two-sample categorical: n = (1 - b) / (b - ||p||^2), alpha = n * p.
DirichletHyper invert_dirichlet_two_sample(const std::vector<double>& p, double b);

// The believed probability that two future samples coincide,
// (1 - ||p||^2) / (n + 1) + ||p||^2 with p = alpha / n.  Equals the
// posterior expectation of sum_i theta_i^2.
double match_probability(const DirichletHyper& h);

// The truthful report of an expected-score-maximizing agent holding
// `agent` as posterior hyperparameters.
Report elicit(const Mechanism& mech, const Hyper& agent);

// Recover the agent's hyperparameters from a report; inverse of elicit.
Hyper decode(const Mechanism& mech, const Report& r);

// Two hypers reachable from the prior with pointwise-identical predictives
// that a further multiset of observations tells apart.
struct InjectivityWitness {
  Hyper first, second;
  std::vector<double> distinguishing;  // the multiset X1
  double ppd_agreement_gap;            // max predictive gap before X1 (<= 1e-12)
  double distinguished_gap;            // max predictive gap after X1 (> 1e-6)
};

struct InjectivityProbe {
  bool witness_found = false;
  std::optional<InjectivityWitness> witness;
  int budget = 0;
  long pairs_checked = 0;
};

// Searches hyperparameter pairs reachable from the prior for predictive
// collisions.  Discrete families enumerate sample multisets up to `budget`
// elements; continuous families compare randomly sampled multisets at 64
// support points.  Exhausting the budget without a collision returns ok.
InjectivityProbe probe_injectivity(const FamilySpec& spec, const Hyper& prior, int budget, Rng& rng);

// Two categorical worlds whose agents send identical full-predictive
// reports while the pooled-sample targets differ; the numerical face of the
// single-sample impossibility.
struct NonAggregabilityDemo {
  Hyper agent2_world_a, agent2_world_b;
  std::vector<double> agent1_samples;
  std::vector<double> report_a, report_b;  // single-sample predictive reports
  Hyper oracle_a, oracle_b;
  double report_gap;     // max |report_a - report_b|, zero by construction
  double oracle_tv_gap;  // total variation between the two targets
};

NonAggregabilityDemo non_aggregability_demo(const FamilySpec& spec, const Hyper& prior);

}  // namespace elicit
