#pragma once
#include <vector>

#include "elicit/mechanism.hpp"

namespace elicit {

// A decoded hyper that is not reachable from the prior (negative or
// non-integer implied sample count).
struct AggregationError : std::runtime_error {
  explicit AggregationError(const std::string& what) : std::runtime_error(what) {}
};

struct PoolOptions {
  // Scenarios hand each agent a whole number of samples; with this set,
  // pool() checks that each decoded n exceeds the prior's by an integer
  // (within integrality_tol) and snaps the offset, so that pooling decoded
  // reports reproduces the pooled-sample hyper bit for bit.  Sufficient
  // statistics are snapped the same way for the integer-statistic families.
  bool integer_counts = true;
  double integrality_tol = 1e-9;
  double statistic_tol = 1e-6;
};

// Discount the prior from each agent and sum: nu = nu0 + sum(nu_i - nu0),
// n = n0 + sum(n_i - n0).  uniform_pareto pools nu by max over the prior
// and all agents instead.
Hyper pool(const FamilySpec& spec, const Hyper& prior, const std::vector<Hyper>& decoded,
           const PoolOptions& opts = {});

// Ground truth: the posterior hyper given every agent's samples at once.
Hyper oracle_global(const FamilySpec& spec, const Hyper& prior, const SampleSet& all_samples);

// decode every report, pool, and wrap as the aggregate predictive.
Belief aggregate_end_to_end(const Mechanism& mech, const std::vector<Report>& reports,
                            const PoolOptions& opts = {});

}  // namespace elicit
