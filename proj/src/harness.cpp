#include "elicit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elicit/rng.hpp"

namespace elicit {

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double hyper_rel_err(const Hyper& a, const Hyper& b) {
  double err = rel_err(a.n, b.n);
  for (size_t i = 0; i < a.nu.size(); ++i) err = std::max(err, rel_err(a.nu[i], b.nu[i]));
  return err;
}

double predictive_gap(const FamilySpec& spec, const Hyper& a, const Hyper& b) {
  switch (spec.family) {
    case Family::categorical_dirichlet:
    case Family::bernoulli_beta: {
      double tv = 0.0;
      for (int i = 0; i < spec.num_outcomes; ++i)
        tv += 0.5 * std::abs(a.nu[i] / a.n - b.nu[i] / b.n);
      return tv;
    }
    case Family::poisson_gamma: {
      double tv = 0.0, cum_a = 0.0, cum_b = 0.0;
      for (int x = 0; x < 10000; ++x) {
        double pa = ppd_density(spec, a, x), pb = ppd_density(spec, b, x);
        tv += 0.5 * std::abs(pa - pb);
        cum_a += pa;
        cum_b += pb;
        if (cum_a >= 1.0 - 1e-12 && cum_b >= 1.0 - 1e-12) break;
      }
      return tv;
    }
    case Family::normal_known_var: {
      double ma = a.nu[0] / a.n, mb = b.nu[0] / b.n;
      double sd = std::sqrt(spec.sigma2 * (1.0 + 1.0 / std::min(a.n, b.n)));
      double lo = std::min(ma, mb) - 8.0 * sd, hi = std::max(ma, mb) + 8.0 * sd;
      double gap = 0.0;
      for (int i = 0; i < 257; ++i) {
        double x = lo + (hi - lo) * i / 256.0;
        gap = std::max(gap, std::abs(ppd_density(spec, a, x) - ppd_density(spec, b, x)));
      }
      return gap;
    }
    case Family::uniform_pareto: {
      double hi = 2.0 * std::max(a.nu[0], b.nu[0]);
      double gap = 0.0;
      for (int i = 0; i < 257; ++i) {
        double x = hi * i / 256.0;
        gap = std::max(gap, std::abs(ppd_density(spec, a, x) - ppd_density(spec, b, x)));
      }
      return gap;
    }
  }
  throw std::logic_error("predictive_gap: bad tag");
}

int draw_count(const SampleCountLaw& law, int agent, Rng& rng) {
  if (law.kind == SampleCountLaw::Kind::fixed) return law.counts[agent];
  int span = law.hi - law.lo + 1;
  int c = law.lo + static_cast<int>(rng.uniform01() * span);
  return std::min(c, law.hi);
}

Report truthful_report(const ScoreRule& rule, const FamilySpec& spec, const Hyper& h) {
  switch (rule.rule) {
    case Rule::log_score:
      if (spec.categorical()) return Report::from_probs(Belief{spec, h}.probs());
      return Report::from_belief(Belief{spec, h});
    case Rule::brier_mean:
      return Report::from_moments(ppd_moments(spec, h, 1));
    case Rule::brier_moments:
      return Report::from_moments(ppd_moments(spec, h, rule.order));
    case Rule::two_sample_composite:
      return Report::from_composite(Belief{spec, h}.probs(),
                                    match_probability(DirichletHyper::from_hyper(h)));
  }
  throw std::logic_error("truthful_report: bad tag");
}

}  // namespace

void ScenarioConfig::validate() const {
  try {
    validate_hyper(spec, prior);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("prior: ") + e.what());
  }
  if (agent_count < 0) throw ConfigError("agent count must be nonnegative");
  if (trials < 1) throw ConfigError("trial count must be at least 1");
  if (law.kind == SampleCountLaw::Kind::fixed) {
    if (static_cast<int>(law.counts.size()) != agent_count)
      throw ConfigError("fixed sample counts must list one count per agent");
    for (int c : law.counts)
      if (c < 0) throw ConfigError("sample counts must be nonnegative");
  } else {
    if (law.lo < 0 || law.hi < law.lo) throw ConfigError("sample count range must satisfy 0 <= lo <= hi");
  }
  if (mechanism == MechanismTag::two_sample_dirichlet) {
    if (!spec.categorical())
      throw ConfigError("two_sample_dirichlet requires a categorical family");
  } else {
    if (spec.categorical())
      throw ConfigError(
          "single-sample mechanisms cannot aggregate categorical beliefs: the predictive "
          "distribution does not determine its pseudo-count scale; use two_sample_dirichlet");
    if (spec.family == Family::uniform_pareto && !(prior.n > 2))
      throw ConfigError("uniform_pareto moment reports require a prior with n > 2");
  }
  if (propriety_rule) {
    if (propriety_rule->rule == Rule::two_sample_composite && !spec.categorical())
      throw ConfigError("composite rule requires a categorical family");
  }
}

std::vector<TrialResult> run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Mechanism mech = Mechanism::make(cfg.mechanism, cfg.spec, cfg.prior);
  ScoreRule rule = mech.rule();
  std::vector<TrialResult> results;
  results.reserve(cfg.trials);

  for (int t = 0; t < cfg.trials; ++t) {
    TrialResult tr;
    tr.index = t;
    Rng r_theta(derive_seed(cfg.seed, t, 0, 0));
    tr.theta_star = sample_theta(cfg.spec, cfg.prior, r_theta);

    Rng r_principal(derive_seed(cfg.seed, t, 0, 1));
    for (int s = 0; s < mech.principal_samples(); ++s)
      tr.principal_samples.push_back(sample_x(cfg.spec, tr.theta_star, r_principal));

    SampleSet all{cfg.spec.family, {}};
    std::vector<Hyper> decoded;
    for (int i = 0; i < cfg.agent_count; ++i) {
      Rng r_count(derive_seed(cfg.seed, t, i + 1, 0));
      Rng r_sample(derive_seed(cfg.seed, t, i + 1, 1));
      AgentTrial agent;
      agent.sample_count = draw_count(cfg.law, i, r_count);
      SampleSet own{cfg.spec.family, {}};
      for (int s = 0; s < agent.sample_count; ++s)
        own.values.push_back(sample_x(cfg.spec, tr.theta_star, r_sample));
      agent.true_hyper = batch_update(cfg.spec, cfg.prior, own);
      all.values.insert(all.values.end(), own.values.begin(), own.values.end());
      agent.report = elicit(mech, agent.true_hyper);
      agent.decoded = decode(mech, agent.report);
      agent.realized_score =
          mech.principal_samples() == 2
              ? score(rule, agent.report, tr.principal_samples[0], tr.principal_samples[1])
              : score(rule, agent.report, tr.principal_samples[0]);
      decoded.push_back(agent.decoded);
      tr.agents.push_back(std::move(agent));
    }

    tr.pooled = pool(cfg.spec, cfg.prior, decoded);
    tr.oracle = oracle_global(cfg.spec, cfg.prior, all);
    tr.max_rel_hyper_err = hyper_rel_err(tr.pooled, tr.oracle);
    tr.ppd_gap = predictive_gap(cfg.spec, tr.pooled, tr.oracle);
    tr.pass = hypers_match(cfg.spec, tr.pooled, tr.oracle);
    results.push_back(std::move(tr));
  }
  return results;
}

ProprietyResult propriety_sweep(const ScenarioConfig& cfg) {
  cfg.validate();
  Mechanism mech = Mechanism::make(cfg.mechanism, cfg.spec, cfg.prior);
  ProprietyResult result;
  result.rule = cfg.propriety_rule.value_or(mech.rule());
  result.min_margin = std::numeric_limits<double>::infinity();

  for (int t = 0; t < cfg.trials; ++t) {
    Rng r_theta(derive_seed(cfg.seed, t, 0, 0));
    auto theta = sample_theta(cfg.spec, cfg.prior, r_theta);
    for (int i = 0; i < cfg.agent_count; ++i) {
      Rng r_count(derive_seed(cfg.seed, t, i + 1, 0));
      Rng r_sample(derive_seed(cfg.seed, t, i + 1, 1));
      int count = draw_count(cfg.law, i, r_count);
      Hyper h = cfg.prior;
      for (int s = 0; s < count; ++s)
        h = posterior_update(cfg.spec, h, sample_x(cfg.spec, theta, r_sample));
      Belief belief{cfg.spec, h};
      Report truth = truthful_report(result.rule, cfg.spec, h);
      auto candidates = propriety_candidates(result.rule, belief, truth);
      double margin = propriety_margin(result.rule, belief, truth, candidates);
      result.entries.push_back({t, i, margin});
      result.min_margin = std::min(result.min_margin, margin);
    }
  }
  return result;
}

bool hypers_match(const FamilySpec& spec, const Hyper& pooled, const Hyper& oracle) {
  if (pooled.nu.size() != oracle.nu.size()) return false;
  if (spec.integer_statistic()) {
    if (pooled.n != oracle.n) return false;
    for (size_t i = 0; i < pooled.nu.size(); ++i)
      if (pooled.nu[i] != oracle.nu[i]) return false;
    return true;
  }
  return hyper_rel_err(pooled, oracle) <= 1e-10;
}

}  // namespace elicit
