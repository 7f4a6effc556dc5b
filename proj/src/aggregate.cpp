#include "elicit/aggregate.hpp"

#include <algorithm>
#include <cmath>

namespace elicit {

namespace {

double snapped_count_offset(double ni, double n0, const PoolOptions& opts) {
  double dn = ni - n0;
  if (dn < -opts.integrality_tol)
    throw AggregationError("pool: decoded hyper implies a negative sample count");
  if (!opts.integer_counts) return std::max(dn, 0.0);
  double snapped = std::round(dn);
  if (std::abs(dn - snapped) > opts.integrality_tol)
    throw AggregationError("pool: decoded sample count is not an integer offset from the prior");
  return std::max(snapped, 0.0);
}

double snap_statistic(double d, double tol) {
  double snapped = std::round(d);
  return std::abs(d - snapped) <= tol ? snapped : d;
}

}  // namespace

Hyper pool(const FamilySpec& spec, const Hyper& prior, const std::vector<Hyper>& decoded,
           const PoolOptions& opts) {
  validate_hyper(spec, prior);
  Hyper out = prior;
  for (const Hyper& h : decoded) {
    validate_hyper(spec, h);
    out.n += snapped_count_offset(h.n, prior.n, opts);
    if (spec.family == Family::uniform_pareto) {
      out.nu[0] = std::max(out.nu[0], h.nu[0]);
      continue;
    }
    for (size_t i = 0; i < out.nu.size(); ++i) {
      double d = h.nu[i] - prior.nu[i];
      if (opts.integer_counts && spec.integer_statistic()) d = snap_statistic(d, opts.statistic_tol);
      out.nu[i] += d;
    }
  }
  return out;
}

Hyper oracle_global(const FamilySpec& spec, const Hyper& prior, const SampleSet& all_samples) {
  return batch_update(spec, prior, all_samples);
}

Belief aggregate_end_to_end(const Mechanism& mech, const std::vector<Report>& reports,
                            const PoolOptions& opts) {
  std::vector<Hyper> decoded;
  decoded.reserve(reports.size());
  for (const Report& r : reports) decoded.push_back(decode(mech, r));
  return Belief{mech.spec, pool(mech.spec, mech.prior, decoded, opts)};
}

}  // namespace elicit
