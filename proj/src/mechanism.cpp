#include "elicit/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace elicit {

namespace {

double norm_sq(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

bool hyper_close(const Hyper& a, const Hyper& b, double rel) {
  if (a.nu.size() != b.nu.size()) return false;
  auto close = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max(1.0, std::abs(y)); };
  if (!close(a.n, b.n)) return false;
  for (size_t i = 0; i < a.nu.size(); ++i)
    if (!close(a.nu[i], b.nu[i])) return false;
  return true;
}

// Max predictive discrepancy over a fixed desk-scale grid of support points.
double ppd_gap(const FamilySpec& spec, const Hyper& a, const Hyper& b) {
  if (spec.categorical()) {
    double gap = 0.0;
    for (int i = 0; i < spec.num_outcomes; ++i)
      gap = std::max(gap, std::abs(a.nu[i] / a.n - b.nu[i] / b.n));
    return gap;
  }
  if (spec.family == Family::poisson_gamma) {
    double gap = 0.0;
    for (int x = 0; x <= 60; ++x)
      gap = std::max(gap, std::abs(ppd_density(spec, a, x) - ppd_density(spec, b, x)));
    return gap;
  }
  double lo, hi;
  if (spec.family == Family::normal_known_var) {
    double ma = a.nu[0] / a.n, mb = b.nu[0] / b.n;
    double sd = std::sqrt(spec.sigma2 * (1.0 + 1.0 / std::min(a.n, b.n)));
    lo = std::min(ma, mb) - 6.0 * sd;
    hi = std::max(ma, mb) + 6.0 * sd;
  } else {
    lo = 0.0;
    hi = 2.0 * std::max(a.nu[0], b.nu[0]);
  }
  double gap = 0.0;
  for (int i = 0; i < 64; ++i) {
    double x = lo + (hi - lo) * i / 63.0;
    gap = std::max(gap, std::abs(ppd_density(spec, a, x) - ppd_density(spec, b, x)));
  }
  return gap;
}

}  // namespace

std::string mechanism_name(MechanismTag tag) {
  switch (tag) {
    case MechanismTag::single_sample_moments: return "single_sample_moments";
    case MechanismTag::single_sample_full_ppd: return "single_sample_full_ppd";
    case MechanismTag::two_sample_dirichlet: return "two_sample_dirichlet";
  }
  throw std::logic_error("mechanism_name: bad tag");
}

MechanismTag mechanism_from_name(const std::string& name) {
  if (name == "single_sample_moments") return MechanismTag::single_sample_moments;
  if (name == "single_sample_full_ppd") return MechanismTag::single_sample_full_ppd;
  if (name == "two_sample_dirichlet") return MechanismTag::two_sample_dirichlet;
  throw std::invalid_argument("unknown mechanism: " + name);
}

Mechanism Mechanism::make(MechanismTag tag, FamilySpec spec, Hyper prior) {
  validate_hyper(spec, prior);
  if (tag == MechanismTag::two_sample_dirichlet) {
    if (!spec.categorical())
      throw std::invalid_argument("two_sample_dirichlet requires a categorical family");
  } else if (spec.categorical()) {
    throw std::invalid_argument(
        "single-sample mechanisms cannot aggregate categorical beliefs: the predictive "
        "distribution does not determine its pseudo-count scale; use two_sample_dirichlet");
  }
  Mechanism m;
  m.tag = tag;
  m.spec = std::move(spec);
  m.prior = std::move(prior);
  return m;
}

Mechanism Mechanism::single_sample_moments(FamilySpec spec, Hyper prior) {
  return make(MechanismTag::single_sample_moments, std::move(spec), std::move(prior));
}

Mechanism Mechanism::single_sample_full_ppd(FamilySpec spec, Hyper prior) {
  return make(MechanismTag::single_sample_full_ppd, std::move(spec), std::move(prior));
}

Mechanism Mechanism::two_sample_dirichlet(FamilySpec spec, Hyper prior) {
  return make(MechanismTag::two_sample_dirichlet, std::move(spec), std::move(prior));
}

ScoreRule Mechanism::rule() const {
  switch (tag) {
    case MechanismTag::single_sample_moments: return ScoreRule::brier_moments(2);
    case MechanismTag::single_sample_full_ppd: return ScoreRule::log_score();
    case MechanismTag::two_sample_dirichlet: return ScoreRule::two_sample_composite();
  }
  throw std::logic_error("Mechanism::rule: bad tag");
}

Hyper invert_normal(double mu1, double v, double sigma2) {
  if (!(sigma2 > 0)) throw std::domain_error("invert_normal: sigma2 must be positive");
  if (!(v > sigma2))
    throw InversionError("invert_normal: reported variance must exceed the observation variance");
  double n = sigma2 / (v - sigma2);
  return scalar_hyper(n * mu1, n);
}

Hyper invert_poisson(double mu1, double mu2) {
  if (!(mu1 > 0)) throw InversionError("invert_poisson: mean must be positive");
  double denom = mu2 - mu1 * mu1 - mu1;
  if (!(denom > 0))
    throw InversionError("invert_poisson: moment pair matches no finite-confidence hyper");
  double n = mu1 / denom;
  return scalar_hyper(n * mu1, n);
}

Hyper invert_uniform(double mu1, double mu2) {
  if (!(mu1 > 0) || !(mu2 > 0)) throw InversionError("invert_uniform: moments must be positive");
  // mu2 = 4 mu1^2 (n-1)^2 / (3 n (n-2)); with r = 3 mu2 / (4 mu1^2) and
  // u = n^2 - 2n this is (r - 1) u = 1, whose n > 2 root is 1 + sqrt(1 + u).
  double r = 3.0 * mu2 / (4.0 * mu1 * mu1);
  if (!(r > 1.0)) throw InversionError("invert_uniform: no hyper with n > 2 matches the moments");
  double u = 1.0 / (r - 1.0);
  double n = 1.0 + std::sqrt(1.0 + u);
  double nu = 2.0 * mu1 * (n - 1.0) / n;
  return scalar_hyper(nu, n);
}

DirichletHyper invert_dirichlet_two_sample(const std::vector<double>& p, double b) {
  if (p.empty()) throw std::domain_error("invert_dirichlet_two_sample: empty report");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0)) throw std::domain_error("invert_dirichlet_two_sample: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("invert_dirichlet_two_sample: probabilities must sum to 1");
  if (!(b >= 0.0) || b >= 1.0) throw std::domain_error("invert_dirichlet_two_sample: match probability must lie in [0, 1)");
  double p2 = norm_sq(p);
  if (!(b > p2))
    throw InversionError("invert_dirichlet_two_sample: match probability at or below ||p||^2 matches no finite hyper");
  double n = (1.0 - b) / (b - p2);
  DirichletHyper h;
  h.alpha.resize(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    h.alpha[i] = n * p[i];
    if (!(h.alpha[i] > 0))
      throw InversionError("invert_dirichlet_two_sample: report implies a zero pseudo-count");
  }
  return h;
}

double match_probability(const DirichletHyper& h) {
  double n = h.n();
  if (!(n > 0)) throw std::invalid_argument("match_probability: pseudo-counts must be positive");
  std::vector<double> p(h.alpha.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = h.alpha[i] / n;
  double p2 = norm_sq(p);
  return (1.0 - p2) / (n + 1.0) + p2;
}

Report elicit(const Mechanism& mech, const Hyper& agent) {
  validate_hyper(mech.spec, agent);
  switch (mech.tag) {
    case MechanismTag::single_sample_moments:
      return Report::from_moments(ppd_moments(mech.spec, agent, 2));
    case MechanismTag::single_sample_full_ppd:
      return Report::from_belief(Belief{mech.spec, agent});
    case MechanismTag::two_sample_dirichlet: {
      Belief belief{mech.spec, agent};
      return Report::from_composite(belief.probs(),
                                    match_probability(DirichletHyper::from_hyper(agent)));
    }
  }
  throw std::logic_error("elicit: bad tag");
}

Hyper decode(const Mechanism& mech, const Report& r) {
  std::vector<double> mu;
  switch (mech.tag) {
    case MechanismTag::single_sample_moments:
      if (r.kind != Report::Kind::moments || r.values.size() != 2)
        throw std::invalid_argument("decode: expected a two-moment report");
      mu = r.values;
      break;
    case MechanismTag::single_sample_full_ppd:
      if (r.kind != Report::Kind::distribution || !r.belief ||
          r.belief->spec.family != mech.spec.family)
        throw std::invalid_argument("decode: expected a predictive report for the mechanism's family");
      mu = ppd_moments(r.belief->spec, r.belief->hyper, 2);
      break;
    case MechanismTag::two_sample_dirichlet: {
      if (r.kind != Report::Kind::composite)
        throw std::invalid_argument("decode: expected a composite report");
      if (static_cast<int>(r.values.size()) != mech.spec.num_outcomes)
        throw std::invalid_argument("decode: report arity does not match the outcome count");
      return invert_dirichlet_two_sample(r.values, r.match_prob).as_hyper();
    }
  }
  switch (mech.spec.family) {
    case Family::normal_known_var:
      return invert_normal(mu[0], mu[1] - mu[0] * mu[0], mech.spec.sigma2);
    case Family::poisson_gamma:
      return invert_poisson(mu[0], mu[1]);
    case Family::uniform_pareto:
      return invert_uniform(mu[0], mu[1]);
    default:
      throw std::logic_error("decode: bad family");
  }
}

namespace {

// Count vectors c with sum(c) <= budget, enumerated by total then
// lexicographically; each is a multiset of categorical outcomes.
void enumerate_count_vectors(int dims, int budget,
                             const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> c(dims, 0);
  for (int total = 0; total <= budget; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == dims - 1) {
        c[pos] = left;
        visit(c);
        return;
      }
      for (int v = 0; v <= left; ++v) {
        c[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
}

InjectivityProbe probe_categorical(const FamilySpec& spec, const Hyper& prior, int budget) {
  InjectivityProbe result;
  result.budget = budget;
  std::vector<Hyper> hypers;
  std::vector<std::vector<int>> multisets;
  enumerate_count_vectors(spec.num_outcomes, budget, [&](const std::vector<int>& c) {
    Hyper h = prior;
    for (int i = 0; i < spec.num_outcomes; ++i) {
      h.nu[i] += c[i];
      h.n += c[i];
    }
    hypers.push_back(std::move(h));
    multisets.push_back(c);
  });
  for (size_t i = 0; i < hypers.size(); ++i)
    for (size_t j = i + 1; j < hypers.size(); ++j) {
      ++result.pairs_checked;
      if (hyper_close(hypers[i], hypers[j], 1e-12)) continue;
      if (ppd_gap(spec, hypers[i], hypers[j]) > 1e-12) continue;
      // Predictive collision between distinct hypers: find a multiset that
      // updates them apart.
      InjectivityWitness w;
      w.first = hypers[i];
      w.second = hypers[j];
      w.ppd_agreement_gap = ppd_gap(spec, w.first, w.second);
      bool found = false;
      enumerate_count_vectors(spec.num_outcomes, 3, [&](const std::vector<int>& c) {
        if (found) return;
        Hyper a = w.first, b = w.second;
        std::vector<double> xs;
        for (int o = 0; o < spec.num_outcomes; ++o)
          for (int rep = 0; rep < c[o]; ++rep) xs.push_back(o + 1);
        if (xs.empty()) return;
        for (double x : xs) {
          a = posterior_update(spec, a, x);
          b = posterior_update(spec, b, x);
        }
        double gap = ppd_gap(spec, a, b);
        if (gap > 1e-6) {
          w.distinguishing = xs;
          w.distinguished_gap = gap;
          found = true;
        }
      });
      if (found) {
        result.witness_found = true;
        result.witness = std::move(w);
        return result;
      }
    }
  return result;
}

InjectivityProbe probe_poisson(const FamilySpec& spec, const Hyper& prior, int budget) {
  InjectivityProbe result;
  result.budget = budget;
  // A multiset of counts in 0..budget with at most `budget` elements reaches
  // exactly the hypers (nu0 + sum, n0 + size).
  std::vector<Hyper> hypers;
  for (int size = 0; size <= budget; ++size)
    for (int total = 0; total <= size * budget; ++total) {
      Hyper h = prior;
      h.nu[0] += total;
      h.n += size;
      hypers.push_back(std::move(h));
    }
  for (size_t i = 0; i < hypers.size(); ++i)
    for (size_t j = i + 1; j < hypers.size(); ++j) {
      ++result.pairs_checked;
      if (hyper_close(hypers[i], hypers[j], 1e-12)) continue;
      auto ma = ppd_moments(spec, hypers[i], 2);
      auto mb = ppd_moments(spec, hypers[j], 2);
      double scale = std::max({1.0, std::abs(ma[0]), std::abs(ma[1])});
      if (std::abs(ma[0] - mb[0]) > 1e-12 * scale || std::abs(ma[1] - mb[1]) > 1e-12 * scale)
        continue;  // distinct moments, distinct predictives
      if (ppd_gap(spec, hypers[i], hypers[j]) <= 1e-12) {
        InjectivityWitness w;
        w.first = hypers[i];
        w.second = hypers[j];
        w.ppd_agreement_gap = ppd_gap(spec, w.first, w.second);
        Hyper a = posterior_update(spec, w.first, 0.0);
        Hyper b = posterior_update(spec, w.second, 0.0);
        w.distinguishing = {0.0};
        w.distinguished_gap = ppd_gap(spec, a, b);
        result.witness_found = true;
        result.witness = std::move(w);
        return result;
      }
    }
  return result;
}

InjectivityProbe probe_continuous(const FamilySpec& spec, const Hyper& prior, int budget, Rng& rng) {
  InjectivityProbe result;
  result.budget = budget;
  const int pairs = 10000;
  for (int it = 0; it < pairs; ++it) {
    ++result.pairs_checked;
    Hyper hs[2];
    for (Hyper& h : hs) {
      auto theta = sample_theta(spec, prior, rng);
      int size = static_cast<int>(rng.uniform01() * (budget + 1));
      h = prior;
      for (int s = 0; s < size; ++s) h = posterior_update(spec, h, sample_x(spec, theta, rng));
    }
    if (hyper_close(hs[0], hs[1], 1e-9)) continue;
    if (ppd_gap(spec, hs[0], hs[1]) > 1e-12) continue;
    InjectivityWitness w;
    w.first = hs[0];
    w.second = hs[1];
    w.ppd_agreement_gap = ppd_gap(spec, hs[0], hs[1]);
    // Look for a separating multiset among random small ones.
    auto theta = sample_theta(spec, prior, rng);
    for (int attempt = 0; attempt < 100; ++attempt) {
      Hyper a = hs[0], b = hs[1];
      std::vector<double> xs;
      int size = 1 + static_cast<int>(rng.uniform01() * 3);
      for (int s = 0; s < size; ++s) {
        double x = sample_x(spec, theta, rng);
        xs.push_back(x);
        a = posterior_update(spec, a, x);
        b = posterior_update(spec, b, x);
      }
      double gap = ppd_gap(spec, a, b);
      if (gap > 1e-6) {
        w.distinguishing = xs;
        w.distinguished_gap = gap;
        result.witness_found = true;
        result.witness = std::move(w);
        return result;
      }
    }
  }
  return result;
}

}  // namespace

InjectivityProbe probe_injectivity(const FamilySpec& spec, const Hyper& prior, int budget, Rng& rng) {
  validate_hyper(spec, prior);
  if (budget < 1) throw std::invalid_argument("probe_injectivity: budget must be positive");
  if (spec.categorical()) return probe_categorical(spec, prior, budget);
  if (spec.family == Family::poisson_gamma) return probe_poisson(spec, prior, budget);
  return probe_continuous(spec, prior, budget, rng);
}

NonAggregabilityDemo non_aggregability_demo(const FamilySpec& spec, const Hyper& prior) {
  if (!spec.categorical())
    throw std::invalid_argument("non_aggregability_demo: categorical families only");
  validate_hyper(spec, prior);
  for (double a : prior.nu)
    if (std::abs(a - prior.nu[0]) > 1e-12)
      throw std::invalid_argument("non_aggregability_demo: needs a symmetric prior");

  NonAggregabilityDemo demo;
  SampleSet xa{spec.family, {}}, xb{spec.family, {}};
  for (int i = 1; i <= spec.num_outcomes; ++i) {
    xa.values.push_back(i);
    for (int rep = 0; rep < 3; ++rep) xb.values.push_back(i);
  }
  demo.agent2_world_a = batch_update(spec, prior, xa);
  demo.agent2_world_b = batch_update(spec, prior, xb);
  demo.report_a = Belief{spec, demo.agent2_world_a}.probs();
  demo.report_b = Belief{spec, demo.agent2_world_b}.probs();
  demo.report_gap = 0.0;
  for (int i = 0; i < spec.num_outcomes; ++i)
    demo.report_gap = std::max(demo.report_gap, std::abs(demo.report_a[i] - demo.report_b[i]));

  demo.agent1_samples = {1.0};
  SampleSet pooled_a = xa, pooled_b = xb;
  pooled_a.values.insert(pooled_a.values.end(), demo.agent1_samples.begin(), demo.agent1_samples.end());
  pooled_b.values.insert(pooled_b.values.end(), demo.agent1_samples.begin(), demo.agent1_samples.end());
  demo.oracle_a = batch_update(spec, prior, pooled_a);
  demo.oracle_b = batch_update(spec, prior, pooled_b);

  demo.oracle_tv_gap = 0.0;
  auto pa = Belief{spec, demo.oracle_a}.probs();
  auto pb = Belief{spec, demo.oracle_b}.probs();
  for (int i = 0; i < spec.num_outcomes; ++i) demo.oracle_tv_gap += 0.5 * std::abs(pa[i] - pb[i]);
  return demo;
}

}  // namespace elicit
