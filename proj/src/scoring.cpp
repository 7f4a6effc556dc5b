#include "elicit/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "elicit/quadrature.hpp"

namespace elicit {

namespace {

double log_or_sentinel(double p) {
  if (p <= 0.0) return k_log_zero_score;
  return std::log(p);
}

void check_prob_vector(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("probability vector must be nonempty");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
}

int outcome_index(const std::vector<double>& p, double x) {
  long i = std::lround(x);
  if (std::abs(x - static_cast<double>(i)) > 1e-9 || i < 1 || i > static_cast<long>(p.size()))
    throw std::domain_error("outcome must be an index in 1.." + std::to_string(p.size()));
  return static_cast<int>(i) - 1;
}

// Log mass/density the report assigns to x, sentinel at zero mass.
double report_log_density(const Report& r, double x) {
  if (r.kind == Report::Kind::distribution && r.belief)
    return std::max(r.belief->log_density(x), k_log_zero_score);
  if (r.kind == Report::Kind::distribution || r.kind == Report::Kind::composite)
    return log_or_sentinel(r.values[outcome_index(r.values, x)]);
  throw std::invalid_argument("log score needs a distribution report");
}

// Believed probability that two exchangeable future samples coincide,
// summed directly from the pseudo-counts.
double pair_match_probability(const Hyper& h) {
  double total = 0.0;
  for (double a : h.nu) total += a * (a + 1.0);
  return total / (h.n * (h.n + 1.0));
}

double brier_expected(const ScoreRule& rule, const Report& r, const std::vector<double>& mu) {
  double e = 0.0;
  for (int i = 0; i < rule.order; ++i) e += 2.0 * r.values[i] * mu[i] - r.values[i] * r.values[i];
  return e;
}

void check_moment_arity(const ScoreRule& rule, const Report& r) {
  if (r.kind != Report::Kind::moments) throw std::invalid_argument("rule expects a moment report");
  if (static_cast<int>(r.values.size()) != rule.order)
    throw std::invalid_argument("moment report arity does not match the rule");
}

// E[log f_r(x)] under a Poisson-Gamma belief, tail-truncated.
double expected_log_poisson(const Belief& belief, const Report& r) {
  double cum = 0.0, e = 0.0;
  for (long x = 0; x < 200000; ++x) {
    double p = belief.density(static_cast<double>(x));
    e += p * report_log_density(r, static_cast<double>(x));
    cum += p;
    if (cum >= 1.0 - 1e-13) break;
  }
  return e;
}

double expected_log_normal(const Belief& belief, const Report& r) {
  double m = belief.hyper.nu[0] / belief.hyper.n;
  double sd = std::sqrt(belief.spec.sigma2 * (1.0 + 1.0 / belief.hyper.n));
  double lo = m - 12.0 * sd, hi = m + 12.0 * sd;
  if (r.belief) {
    double mr = r.belief->hyper.nu[0] / r.belief->hyper.n;
    double sdr = std::sqrt(r.belief->spec.sigma2 * (1.0 + 1.0 / r.belief->hyper.n));
    lo = std::min(lo, mr - 12.0 * sdr);
    hi = std::max(hi, mr + 12.0 * sdr);
  }
  auto f = [&](double x) { return belief.density(x) * report_log_density(r, x); };
  return integrate(f, lo, hi, 1e-9);
}

double expected_log_uniform(const Belief& belief, const Report& r) {
  if (!r.belief || r.belief->spec.family != Family::uniform_pareto)
    throw std::invalid_argument("log score over uniform outcomes needs a uniform_pareto belief report");
  double vb = belief.hyper.nu[0], nb = belief.hyper.n;
  double vr = r.belief->hyper.nu[0];
  double v1 = std::min(vb, vr), v2 = std::max(vb, vr);
  auto f = [&](double x) { return belief.density(x) * report_log_density(r, x); };
  double head = integrate(f, 0.0, v1, 1e-9);
  double mid = v1 < v2 ? integrate(f, v1, v2, 1e-9) : 0.0;
  // Tail beyond v2 via x = v2 / t; the transformed integrand is
  // c * t^(nb-1) * log f_r(v2/t), smooth on (0, 1] for nb > 1.
  double c = nb / (nb + 1.0) * std::pow(vb / v2, nb);
  auto g = [&](double t) {
    if (t <= 0.0) return 0.0;
    return c * std::pow(t, nb - 1.0) * report_log_density(r, v2 / t);
  };
  double tail = integrate(g, 0.0, 1.0, 1e-9);
  return head + mid + tail;
}

}  // namespace

ScoreRule ScoreRule::log_score() { return {Rule::log_score, 1}; }
ScoreRule ScoreRule::brier_mean() { return {Rule::brier_mean, 1}; }
ScoreRule ScoreRule::brier_moments(int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("brier_moments: order must be 1 or 2");
  return {Rule::brier_moments, order};
}
ScoreRule ScoreRule::two_sample_composite() { return {Rule::two_sample_composite, 1}; }

std::string rule_name(const ScoreRule& r) {
  switch (r.rule) {
    case Rule::log_score: return "log";
    case Rule::brier_mean: return "brier_mean";
    case Rule::brier_moments: return "brier_moments";
    case Rule::two_sample_composite: return "composite";
  }
  throw std::logic_error("rule_name: bad tag");
}

ScoreRule rule_from_name(const std::string& name) {
  if (name == "log") return ScoreRule::log_score();
  if (name == "brier_mean") return ScoreRule::brier_mean();
  if (name == "brier_moments") return ScoreRule::brier_moments(2);
  if (name == "composite") return ScoreRule::two_sample_composite();
  throw std::invalid_argument("unknown scoring rule: " + name);
}

Report Report::from_moments(std::vector<double> moments) {
  if (moments.empty()) throw std::invalid_argument("moment report must be nonempty");
  Report r;
  r.kind = Kind::moments;
  r.values = std::move(moments);
  return r;
}

Report Report::from_belief(Belief belief) {
  validate_hyper(belief.spec, belief.hyper);
  Report r;
  r.kind = Kind::distribution;
  r.belief = std::move(belief);
  return r;
}

Report Report::from_probs(std::vector<double> probs) {
  check_prob_vector(probs);
  Report r;
  r.kind = Kind::distribution;
  r.values = std::move(probs);
  return r;
}

Report Report::from_composite(std::vector<double> probs, double match_prob) {
  check_prob_vector(probs);
  if (!(match_prob >= 0.0 && match_prob <= 1.0))
    throw std::domain_error("match probability must lie in [0, 1]");
  Report r;
  r.kind = Kind::composite;
  r.values = std::move(probs);
  r.match_prob = match_prob;
  return r;
}

double score(const ScoreRule& rule, const Report& r, double x) {
  switch (rule.rule) {
    case Rule::log_score:
      if (r.kind != Report::Kind::distribution)
        throw std::invalid_argument("log score needs a distribution report");
      return report_log_density(r, x);
    case Rule::brier_mean:
      check_moment_arity(rule, r);
      return 2.0 * r.values[0] * x - r.values[0] * r.values[0];
    case Rule::brier_moments: {
      check_moment_arity(rule, r);
      double s = 0.0, xp = 1.0;
      for (int i = 0; i < rule.order; ++i) {
        xp *= x;
        s += 2.0 * r.values[i] * xp - r.values[i] * r.values[i];
      }
      return s;
    }
    case Rule::two_sample_composite:
      throw std::invalid_argument("composite rule scores two outcomes");
  }
  throw std::logic_error("score: bad tag");
}

double score(const ScoreRule& rule, const Report& r, double x1, double x2) {
  if (rule.rule != Rule::two_sample_composite)
    throw std::invalid_argument("two-outcome scoring is for the composite rule");
  if (r.kind != Report::Kind::composite) throw std::invalid_argument("composite rule needs a composite report");
  double match = outcome_index(r.values, x1) == outcome_index(r.values, x2) ? 1.0 : 0.0;
  return log_or_sentinel(r.values[outcome_index(r.values, x1)]) +
         2.0 * r.match_prob * match - r.match_prob * r.match_prob;
}

double expected_score(const ScoreRule& rule, const Report& r, const Belief& belief) {
  validate_hyper(belief.spec, belief.hyper);
  switch (rule.rule) {
    case Rule::brier_mean:
      check_moment_arity(rule, r);
      return 2.0 * r.values[0] * belief.moments(1)[0] - r.values[0] * r.values[0];
    case Rule::brier_moments:
      check_moment_arity(rule, r);
      return brier_expected(rule, r, belief.moments(rule.order));
    case Rule::log_score: {
      if (r.kind != Report::Kind::distribution)
        throw std::invalid_argument("log score needs a distribution report");
      if (belief.spec.categorical()) return expected_score(rule, r, belief.probs());
      if (belief.spec.family == Family::poisson_gamma) return expected_log_poisson(belief, r);
      if (belief.spec.family == Family::normal_known_var) return expected_log_normal(belief, r);
      return expected_log_uniform(belief, r);
    }
    case Rule::two_sample_composite: {
      if (r.kind != Report::Kind::composite)
        throw std::invalid_argument("composite rule needs a composite report");
      if (!belief.spec.categorical())
        throw std::invalid_argument("composite rule needs a categorical belief");
      std::vector<double> p = belief.probs();
      if (p.size() != r.values.size()) throw std::invalid_argument("composite report arity mismatch");
      double e = 0.0;
      for (size_t i = 0; i < p.size(); ++i) e += p[i] * log_or_sentinel(r.values[i]);
      double match = pair_match_probability(belief.hyper);
      return e + 2.0 * r.match_prob * match - r.match_prob * r.match_prob;
    }
  }
  throw std::logic_error("expected_score: bad tag");
}

double expected_score(const ScoreRule& rule, const Report& r, const std::vector<double>& pmf) {
  check_prob_vector(pmf);
  switch (rule.rule) {
    case Rule::log_score: {
      if (r.kind != Report::Kind::distribution || r.belief)
        throw std::invalid_argument("log score over a pmf needs a categorical report");
      if (r.values.size() != pmf.size()) throw std::invalid_argument("report arity mismatch");
      double e = 0.0;
      for (size_t i = 0; i < pmf.size(); ++i)
        if (pmf[i] > 0.0) e += pmf[i] * log_or_sentinel(r.values[i]);
      return e;
    }
    case Rule::brier_mean:
    case Rule::brier_moments: {
      check_moment_arity(rule, r);
      std::vector<double> mu(rule.order, 0.0);
      for (size_t i = 0; i < pmf.size(); ++i) {
        double xp = 1.0;
        for (int j = 0; j < rule.order; ++j) {
          xp *= static_cast<double>(i + 1);
          mu[j] += pmf[i] * xp;
        }
      }
      return brier_expected(rule, r, mu);
    }
    case Rule::two_sample_composite:
      throw std::invalid_argument("composite expectation needs a pseudo-count belief");
  }
  throw std::logic_error("expected_score: bad tag");
}

Report best_response(const ScoreRule& rule, const Belief& belief, const std::vector<Report>& grid) {
  if (grid.empty()) throw std::invalid_argument("best_response: empty grid");
  size_t best = 0;
  double best_score = expected_score(rule, grid[0], belief);
  for (size_t i = 1; i < grid.size(); ++i) {
    double s = expected_score(rule, grid[i], belief);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return grid[best];
}

namespace {

bool same_vector(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  return true;
}

// All probability vectors on the K-simplex with coordinates that are
// multiples of `step`.
void simplex_mesh(int dim, double step, std::vector<double>& prefix,
                  std::vector<std::vector<double>>& out, int remaining_ticks) {
  if (dim == 1) {
    prefix.push_back(remaining_ticks * step);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int t = 0; t <= remaining_ticks; ++t) {
    prefix.push_back(t * step);
    simplex_mesh(dim - 1, step, prefix, out, remaining_ticks - t);
    prefix.pop_back();
  }
}

std::vector<std::vector<double>> categorical_candidates(const std::vector<double>& truth) {
  static const double k_deltas[] = {0.01, 0.05, 0.1};
  std::vector<std::vector<double>> out;
  int k = static_cast<int>(truth.size());
  if (k <= 3) {
    const double step = 0.05;
    std::vector<double> prefix;
    simplex_mesh(k, step, prefix, out, 20);
  } else {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        for (double d : k_deltas) {
          if (truth[i] < d) continue;
          std::vector<double> p = truth;
          p[i] -= d;
          p[j] += d;
          out.push_back(std::move(p));
        }
      }
  }
  std::erase_if(out, [&](const std::vector<double>& p) { return same_vector(p, truth); });
  return out;
}

std::vector<Report> moment_candidates(int order, const std::vector<double>& truth) {
  static const double k_deltas[] = {-0.1, -0.05, -0.01, 0.0, 0.01, 0.05, 0.1};
  std::vector<Report> out;
  if (order == 1) {
    for (double d : k_deltas)
      if (d != 0.0) out.push_back(Report::from_moments({truth[0] + d}));
    return out;
  }
  for (double d1 : k_deltas)
    for (double d2 : k_deltas) {
      if (d1 == 0.0 && d2 == 0.0) continue;
      out.push_back(Report::from_moments({truth[0] + d1, truth[1] + d2}));
    }
  return out;
}

std::vector<Report> belief_candidates(const Belief& belief) {
  static const double k_deltas[] = {0.01, 0.05, 0.1};
  std::vector<Report> out;
  const Hyper& h = belief.hyper;
  for (double d : k_deltas)
    for (int sign : {-1, 1}) {
      Hyper shifted = h;
      shifted.nu[0] += sign * d * std::max(1.0, std::abs(h.nu[0]));
      Hyper scaled = h;
      scaled.n *= 1.0 + sign * d;
      scaled.nu[0] *= 1.0 + sign * d;  // keep the posterior mean, vary confidence
      for (const Hyper& cand : {shifted, scaled}) {
        try {
          out.push_back(Report::from_belief(Belief{belief.spec, cand}));
        } catch (const std::invalid_argument&) {
        }
      }
    }
  return out;
}

}  // namespace

std::vector<Report> propriety_candidates(const ScoreRule& rule, const Belief& belief,
                                         const Report& truthful) {
  static const double k_deltas[] = {0.01, 0.05, 0.1};
  switch (rule.rule) {
    case Rule::log_score: {
      if (truthful.belief) return belief_candidates(belief);
      std::vector<Report> out;
      for (auto& p : categorical_candidates(truthful.values)) out.push_back(Report::from_probs(std::move(p)));
      return out;
    }
    case Rule::brier_mean:
    case Rule::brier_moments:
      return moment_candidates(rule.order, truthful.values);
    case Rule::two_sample_composite: {
      std::vector<Report> out;
      auto p_perturbs = categorical_candidates(truthful.values);
      for (const auto& p : p_perturbs) out.push_back(Report::from_composite(p, truthful.match_prob));
      std::vector<double> b_grid;
      for (double d : k_deltas)
        for (int sign : {-1, 1}) {
          double b = std::clamp(truthful.match_prob + sign * d, 0.0, 1.0);
          if (std::abs(b - truthful.match_prob) > 1e-12) b_grid.push_back(b);
        }
      for (double b : b_grid) out.push_back(Report::from_composite(truthful.values, b));
      for (const auto& p : p_perturbs)
        for (double b : b_grid) out.push_back(Report::from_composite(p, b));
      return out;
    }
  }
  throw std::logic_error("propriety_candidates: bad tag");
}

double propriety_margin(const ScoreRule& rule, const Belief& belief, const Report& truthful,
                        const std::vector<Report>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("propriety_margin: no candidates");
  double truth = expected_score(rule, truthful, belief);
  double best = -std::numeric_limits<double>::infinity();
  for (const Report& r : candidates) best = std::max(best, expected_score(rule, r, belief));
  return truth - best;
}

}  // namespace elicit
