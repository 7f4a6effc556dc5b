// Command-line front end: scenario execution, propriety sweeps, injectivity
// probes, finite-family evidence sweeps, and record summaries.
//
// Exit codes: 0 success, 1 scientific failure (oracle mismatch or a
// non-positive propriety margin), 2 usage or configuration error.
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "elicit/expfam.hpp"
#include "elicit/records.hpp"

namespace {

using namespace elicit;

constexpr int k_exit_ok = 0;
constexpr int k_exit_scientific = 1;
constexpr int k_exit_usage = 2;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string records_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  bool trials_set = false;
  int budget = 6;
  bool verbose = false;
};

ScenarioConfig load_config(const Options& opt) {
  ScenarioConfig cfg = load_scenario_config(opt.config_path);
  if (opt.seed_set) cfg.seed = opt.seed;
  if (opt.trials_set) cfg.trials = opt.trials;
  if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
  cfg.validate();
  return cfg;
}

// Records go to the configured sink, or to stdout when none is set.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_run(const Options& opt) {
  ScenarioConfig cfg = load_config(opt);
  auto results = run_scenario(cfg);
  Sink sink(cfg.out_path);
  write_run_records(sink.stream(), cfg, results);
  if (opt.verbose && !cfg.out_path.empty()) write_run_records(std::cout, cfg, results);

  long passed = 0;
  const TrialResult* first_fail = nullptr;
  for (const TrialResult& tr : results) {
    if (tr.pass)
      ++passed;
    else if (!first_fail)
      first_fail = &tr;
  }
  double pass_rate = results.empty() ? 1.0 : static_cast<double>(passed) / results.size();
  if (!cfg.out_path.empty())
    std::cout << "summary kind=run family=" << family_name(cfg.spec.family)
              << " trials=" << results.size() << " pass_rate=" << format_double(pass_rate) << "\n";
  if (first_fail) {
    std::ostringstream dump;
    write_run_records(dump, cfg, {*first_fail});
    std::cerr << "first failing trial:\n" << dump.str();
    return k_exit_scientific;
  }
  return k_exit_ok;
}

int cmd_check_propriety(const Options& opt) {
  ScenarioConfig cfg = load_config(opt);
  ProprietyResult result = propriety_sweep(cfg);
  Sink sink(cfg.out_path);
  write_propriety_records(sink.stream(), cfg, result);
  if (opt.verbose && !cfg.out_path.empty()) write_propriety_records(std::cout, cfg, result);
  if (!cfg.out_path.empty())
    std::cout << "summary kind=propriety family=" << family_name(cfg.spec.family)
              << " rule=" << rule_name(result.rule) << " entries=" << result.entries.size()
              << " min_margin=" << format_double(result.min_margin) << "\n";
  return result.entries.empty() || result.min_margin > 0 ? k_exit_ok : k_exit_scientific;
}

int cmd_probe_injectivity(const Options& opt) {
  ScenarioConfig cfg = load_config(opt);
  Rng rng(derive_seed(cfg.seed, 0x9e3779b9));
  InjectivityProbe probe = probe_injectivity(cfg.spec, cfg.prior, opt.budget, rng);
  Sink sink(cfg.out_path);
  std::ostream& out = sink.stream();
  out << "probe family=" << family_name(cfg.spec.family) << " budget=" << probe.budget
      << " pairs=" << probe.pairs_checked << " witness=" << (probe.witness_found ? 1 : 0) << "\n";
  if (probe.witness) {
    const InjectivityWitness& w = *probe.witness;
    auto joined = [](const std::vector<double>& v) {
      std::string s;
      for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += format_double(v[i]);
      }
      return s;
    };
    out << "witness first=" << joined(w.first.nu) << ";" << format_double(w.first.n)
        << " second=" << joined(w.second.nu) << ";" << format_double(w.second.n)
        << " x1=" << joined(w.distinguishing)
        << " agreement_gap=" << format_double(w.ppd_agreement_gap)
        << " distinguished_gap=" << format_double(w.distinguished_gap) << "\n";
  }
  if (!cfg.out_path.empty())
    std::cout << "summary kind=probe family=" << family_name(cfg.spec.family)
              << " witness=" << (probe.witness_found ? 1 : 0) << "\n";
  return k_exit_ok;
}

void emit_credible_mean(std::ostream& out, const std::string& label, const FiniteExpFamily& fam,
                        const std::vector<double>& mu) {
  for (double n : {1.0, 5.0, 20.0, 1000.0}) {
    ExpFamHyper h;
    h.n = n;
    h.nu.resize(mu.size());
    for (size_t j = 0; j < mu.size(); ++j) h.nu[j] = n * mu[j];
    out << "evidence probe=credible_mean family=" << label << " outcomes=" << fam.outcomes()
        << " dim=" << fam.dim() << " n=" << format_double(n)
        << " deviation=" << format_double(credible_mean_check(fam, h)) << "\n";
  }
}

void emit_injectivity(std::ostream& out, const std::string& label, const FiniteExpFamily& fam,
                      const std::vector<double>& mu) {
  InjectivitySweep sweep = injectivity_sweep(fam, mu, {1.0, 2.0, 4.0, 8.0});
  const char* flag = sweep.flag == SweepFlag::injective
                         ? "injective"
                         : sweep.flag == SweepFlag::non_injective ? "non_injective" : "mixed";
  out << "evidence probe=injectivity family=" << label << " outcomes=" << fam.outcomes()
      << " dim=" << fam.dim() << " flag=" << flag
      << " min_gap=" << format_double(sweep.min_pairwise_gap)
      << " max_gap=" << format_double(sweep.max_pairwise_gap) << "\n";
  for (size_t i = 0; i < sweep.n_values.size(); ++i)
    out << "evidence probe=injectivity_point family=" << label
        << " n=" << format_double(sweep.n_values[i])
        << " kl_to_mode=" << format_double(sweep.kl_to_mode[i]) << "\n";
}

int cmd_conjectures(const Options& opt) {
  Sink sink(opt.out_path);
  std::ostream& out = sink.stream();
  out << "# elicit-records v1\n";

  FiniteExpFamily coin({{0.0}, {1.0}}, {-200.0}, {200.0});
  FiniteExpFamily counts3({{0.0}, {1.0}, {2.0}}, {-200.0}, {200.0});
  FiniteExpFamily full3({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {-200.0, -200.0}, {200.0, 200.0});

  emit_credible_mean(out, "two_outcome", coin, coin.grad_cumulant({0.3}));
  emit_credible_mean(out, "three_outcome_1d", counts3, counts3.grad_cumulant({0.3}));
  emit_credible_mean(out, "three_outcome_2d", full3, full3.grad_cumulant({0.3, -0.2}));

  emit_injectivity(out, "three_outcome_1d", counts3, counts3.grad_cumulant({0.3}));
  emit_injectivity(out, "three_outcome_2d", full3, full3.grad_cumulant({0.3, -0.2}));

  std::vector<double> n_grid;
  for (int n = 2; n <= 100; ++n) n_grid.push_back(n);
  VarianceSweep var = dirichlet_variance_sweep({0.5, 0.3, 0.2}, n_grid);
  for (size_t i = 0; i < var.n_values.size(); i += 7)
    out << "evidence probe=variance_trace n=" << format_double(var.n_values[i])
        << " trace=" << format_double(var.traces[i]) << "\n";
  out << "evidence probe=variance_monotone strictly_decreasing=" << (var.strictly_decreasing ? 1 : 0)
      << "\n";
  out << "summary kind=conjectures families=3 variance_decreasing="
      << (var.strictly_decreasing ? 1 : 0) << "\n";
  return k_exit_ok;
}

int cmd_report(const Options& opt) {
  std::ifstream in(opt.records_path);
  if (!in) throw ConfigError("cannot open records file: " + opt.records_path);
  auto records = parse_records(in);
  std::cout << report_table(records);
  return k_exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"proper-scoring-rule elicitation and aggregation simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", opt.config_path, "scenario config path")->required();
    sub->add_option("--out", opt.out_path, "record output path (default: config's out, else stdout)");
    sub->add_option("--seed", opt.seed, "root seed override")->each([&](const std::string&) {
      opt.seed_set = true;
    });
    sub->add_option("--trials", opt.trials, "trial count override")->each([&](const std::string&) {
      opt.trials_set = true;
    });
    sub->add_flag("-v,--verbose", opt.verbose, "verbose output");
  };

  CLI::App* run = app.add_subcommand("run", "run a scenario against the pooled-sample oracle");
  add_common(run, true);
  CLI::App* prop = app.add_subcommand("check-propriety", "expected-score margins of truthful reports");
  add_common(prop, true);
  CLI::App* probe = app.add_subcommand("probe-injectivity",
                                       "search for predictive collisions among reachable hypers");
  add_common(probe, true);
  probe->add_option("--budget", opt.budget, "multiset enumeration bound");
  CLI::App* conj = app.add_subcommand("conjectures", "finite-family evidence sweeps");
  conj->add_option("--out", opt.out_path, "record output path (default stdout)");
  CLI::App* rep = app.add_subcommand("report", "summarize a record file as a table");
  rep->add_option("path", opt.records_path, "record file path");
  rep->add_option("--records", opt.records_path, "record file path (alternative to the positional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return k_exit_usage;
  }

  try {
    if (run->parsed()) return cmd_run(opt);
    if (prop->parsed()) return cmd_check_propriety(opt);
    if (probe->parsed()) return cmd_probe_injectivity(opt);
    if (conj->parsed()) return cmd_conjectures(opt);
    if (rep->parsed()) {
      if (opt.records_path.empty()) {
        std::cerr << "error: report needs a records path\n";
        return k_exit_usage;
      }
      return cmd_report(opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return k_exit_usage;
  } catch (const ParseError& e) {
    std::cerr << "record error: " << e.what() << "\n";
    return k_exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return k_exit_usage;
  }
  return k_exit_usage;
}
