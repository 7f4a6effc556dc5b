#pragma once
#include <optional>
#include <vector>

#include "elicit/family.hpp"

namespace elicit {

// Returned by the log score when the report puts zero mass on the realized
// outcome.  A large finite sentinel keeps expected-score arithmetic total;
// truthful reports never attain it.
inline constexpr double k_log_zero_score = -1e12;

enum class Rule { log_score, brier_mean, brier_moments, two_sample_composite };

struct ScoreRule {
  Rule rule = Rule::log_score;
  int order = 1;  // brier_moments: number of elicited raw moments (1 or 2)

  static ScoreRule log_score();
  static ScoreRule brier_mean();
  static ScoreRule brier_moments(int order);
  static ScoreRule two_sample_composite();
};

std::string rule_name(const ScoreRule& r);
ScoreRule rule_from_name(const std::string& name);

// What a mechanism elicits.  A distribution report is either a categorical
// probability vector or a parametric belief; a composite report is a
// probability vector plus the believed chance that two future samples match.
struct Report {
  enum class Kind { moments, distribution, composite };

  Kind kind = Kind::moments;
  std::vector<double> values;   // moment vector, or outcome probabilities
  std::optional<Belief> belief; // parametric distribution report
  double match_prob = 0.0;      // composite only

  static Report from_moments(std::vector<double> moments);
  static Report from_belief(Belief belief);
  static Report from_probs(std::vector<double> probs);
  static Report from_composite(std::vector<double> probs, double match_prob);
};

// Score against one realized outcome (log, Brier mean, Brier moments).
double score(const ScoreRule& rule, const Report& r, double x);

// Score against two realized outcomes (two-sample composite rule).
double score(const ScoreRule& rule, const Report& r, double x1, double x2);

// Expectation of score(rule, r, .) when the next outcome(s) follow `belief`.
// Discrete families sum exactly (Poisson sums are tail-truncated below
// 1e-13 mass); continuous families integrate to 1e-8.  For the composite
// rule the pair distribution is the exchangeable two-sample predictive
// implied by the belief's pseudo-counts.
double expected_score(const ScoreRule& rule, const Report& r, const Belief& belief);

// Same, for a belief given directly as a categorical pmf over outcomes 1..K.
double expected_score(const ScoreRule& rule, const Report& r, const std::vector<double>& pmf);

// Grid maximizer of the expected score; the grid must contain the truthful
// report for propriety checks to be meaningful.
Report best_response(const ScoreRule& rule, const Belief& belief, const std::vector<Report>& grid);

// Non-truthful candidate reports surrounding `truthful`: a 0.05-step simplex
// mesh for categorical reports with K <= 3, coordinate perturbations of
// +/-{0.01, 0.05, 0.1} otherwise.
std::vector<Report> propriety_candidates(const ScoreRule& rule, const Belief& belief,
                                         const Report& truthful);

// expected_score(truthful) minus the best candidate's expected score;
// strictly positive for a strictly proper rule.
double propriety_margin(const ScoreRule& rule, const Belief& belief, const Report& truthful,
                        const std::vector<Report>& candidates);

}  // namespace elicit
