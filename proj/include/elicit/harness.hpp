#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "elicit/aggregate.hpp"

namespace elicit {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// How many samples each agent receives: a fixed per-agent vector or an
// i.i.d. uniform integer range.
struct SampleCountLaw {
  enum class Kind { fixed, uniform_range };
  Kind kind = Kind::fixed;
  std::vector<int> counts;
  int lo = 0, hi = 0;
};

struct ScenarioConfig {
  FamilySpec spec;
  Hyper prior;
  int agent_count = 0;
  SampleCountLaw law;
  MechanismTag mechanism = MechanismTag::single_sample_moments;
  std::optional<ScoreRule> propriety_rule;  // check-propriety override
  int trials = 1;
  uint64_t seed = 0;
  std::string out_path;

  // Throws ConfigError on any invariant violation, including mechanism /
  // family pairings that cannot aggregate.
  void validate() const;
};

struct AgentTrial {
  int sample_count = 0;
  Hyper true_hyper;
  Report report;
  Hyper decoded;
  double realized_score = 0.0;
};

struct TrialResult {
  int index = 0;
  std::vector<double> theta_star;
  std::vector<AgentTrial> agents;
  std::vector<double> principal_samples;
  Hyper pooled, oracle;
  double max_rel_hyper_err = 0.0;
  double ppd_gap = 0.0;  // total variation (discrete) or sup-density gap
  bool pass = false;
};

// Runs the full elicit -> decode -> pool pipeline against truthful agents
// and compares with the pooled-sample oracle.  Deterministic in the seed:
// every random draw comes from a counter-derived substream.
std::vector<TrialResult> run_scenario(const ScenarioConfig& cfg);

struct ProprietyEntry {
  int trial = 0;
  int agent = 0;
  double margin = 0.0;
};

struct ProprietyResult {
  ScoreRule rule;
  std::vector<ProprietyEntry> entries;
  double min_margin = 0.0;
};

// For every simulated agent belief, the expected-score gap between the
// truthful report and the best non-truthful grid report.  All margins are
// positive for a strictly proper rule.
ProprietyResult propriety_sweep(const ScenarioConfig& cfg);

// Pass tolerance used by run_scenario: integer-statistic families must
// match the oracle exactly, the rest to 1e-10 relative.
bool hypers_match(const FamilySpec& spec, const Hyper& pooled, const Hyper& oracle);

}  // namespace elicit
