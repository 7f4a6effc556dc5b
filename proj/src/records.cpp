#include "elicit/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace elicit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number for " + what + ", got '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an integer for " + what + ", got '" + s + "'");
  }
}

uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    size_t used = 0;
    uint64_t v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("expected an unsigned integer for " + what + ", got '" + s + "'");
  }
}

std::vector<double> parse_vector(const std::string& s, const std::string& what) {
  std::string norm = s;
  std::replace(norm.begin(), norm.end(), ',', ' ');
  std::istringstream in(norm);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, what));
  if (out.empty()) throw std::invalid_argument("expected values for " + what);
  return out;
}

std::string join(const std::vector<double>& v, char sep = ',') {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

// Hyper fields under their canonical names: categorical families carry
// `alpha`, the rest `nu` and `n`.
std::string hyper_fields(const std::string& prefix, const FamilySpec& spec, const Hyper& h) {
  if (spec.categorical()) return prefix + "alpha=" + join(h.nu);
  return prefix + "nu=" + join(h.nu) + " " + prefix + "n=" + format_double(h.n);
}

std::string report_field(const Report& r) {
  switch (r.kind) {
    case Report::Kind::moments:
      return "moments:" + join(r.values);
    case Report::Kind::distribution:
      if (r.belief) return "belief:" + join(r.belief->hyper.nu) + ";" + format_double(r.belief->hyper.n);
      return "probs:" + join(r.values);
    case Report::Kind::composite:
      return "composite:" + join(r.values) + ";" + format_double(r.match_prob);
  }
  throw std::logic_error("report_field: bad kind");
}

std::string constants_field(const FamilySpec& spec) {
  if (spec.family == Family::normal_known_var) return "sigma2:" + format_double(spec.sigma2);
  if (spec.categorical()) return "K:" + std::to_string(spec.num_outcomes);
  return "";
}

std::string samples_field(const SampleCountLaw& law) {
  if (law.kind == SampleCountLaw::Kind::uniform_range)
    return std::to_string(law.lo) + ".." + std::to_string(law.hi);
  std::string out = "fixed:";
  for (size_t i = 0; i < law.counts.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(law.counts[i]);
  }
  return out;
}

void write_config_header(std::ostream& out, const ScenarioConfig& cfg) {
  out << "# elicit-records v1\n";
  out << "config family=" << family_name(cfg.spec.family) << "\n";
  out << "config constants=" << constants_field(cfg.spec) << "\n";
  if (cfg.spec.categorical()) {
    out << "config alpha=" << join(cfg.prior.nu) << "\n";
  } else {
    out << "config nu=" << join(cfg.prior.nu) << "\n";
    out << "config n=" << format_double(cfg.prior.n) << "\n";
  }
  out << "config agents=" << cfg.agent_count << "\n";
  out << "config samples=" << samples_field(cfg.law) << "\n";
  out << "config mechanism=" << mechanism_name(cfg.mechanism) << "\n";
  if (cfg.propriety_rule) out << "config rule=" << rule_name(*cfg.propriety_rule) << "\n";
  out << "config trials=" << cfg.trials << "\n";
  out << "config seed=" << cfg.seed << "\n";
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_run_records(std::ostream& out, const ScenarioConfig& cfg,
                       const std::vector<TrialResult>& results) {
  write_config_header(out, cfg);
  const std::string family = family_name(cfg.spec.family);
  int passed = 0;
  double max_err = 0.0, max_gap = 0.0, score_sum = 0.0;
  long score_count = 0;
  for (const TrialResult& tr : results) {
    passed += tr.pass ? 1 : 0;
    max_err = std::max(max_err, tr.max_rel_hyper_err);
    max_gap = std::max(max_gap, tr.ppd_gap);
    double trial_score = 0.0;
    for (const AgentTrial& a : tr.agents) trial_score += a.realized_score;
    if (!tr.agents.empty()) {
      trial_score /= static_cast<double>(tr.agents.size());
      score_sum += trial_score;
      ++score_count;
    }
    out << "trial index=" << tr.index << " family=" << family << " pass=" << (tr.pass ? 1 : 0)
        << " max_rel_err=" << format_double(tr.max_rel_hyper_err)
        << " ppd_gap=" << format_double(tr.ppd_gap) << " mean_score=" << format_double(trial_score)
        << " theta=" << join(tr.theta_star) << " principal=" << join(tr.principal_samples) << " "
        << hyper_fields("pooled_", cfg.spec, tr.pooled) << " "
        << hyper_fields("oracle_", cfg.spec, tr.oracle);
    for (size_t i = 0; i < tr.agents.size(); ++i) {
      const AgentTrial& a = tr.agents[i];
      std::string p = "a" + std::to_string(i) + "_";
      out << " " << p << "count=" << a.sample_count << " " << hyper_fields(p, cfg.spec, a.true_hyper)
          << " " << p << "report=" << report_field(a.report) << " "
          << hyper_fields(p + "dec_", cfg.spec, a.decoded) << " " << p
          << "score=" << format_double(a.realized_score);
    }
    out << "\n";
  }
  double pass_rate = results.empty() ? 1.0 : static_cast<double>(passed) / results.size();
  out << "summary kind=run family=" << family << " trials=" << results.size()
      << " pass_rate=" << format_double(pass_rate) << " max_rel_err=" << format_double(max_err)
      << " max_ppd_gap=" << format_double(max_gap)
      << " mean_score=" << format_double(score_count ? score_sum / score_count : 0.0) << "\n";
}

void write_propriety_records(std::ostream& out, const ScenarioConfig& cfg,
                             const ProprietyResult& result) {
  write_config_header(out, cfg);
  const std::string family = family_name(cfg.spec.family);
  for (const ProprietyEntry& e : result.entries)
    out << "margin trial=" << e.trial << " agent=" << e.agent << " family=" << family
        << " rule=" << rule_name(result.rule) << " margin=" << format_double(e.margin) << "\n";
  out << "summary kind=propriety family=" << family << " rule=" << rule_name(result.rule)
      << " entries=" << result.entries.size()
      << " min_margin=" << format_double(result.min_margin) << "\n";
}

namespace {

struct ConfigLines {
  // section -> key -> (value, line)
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> values;

  const std::pair<std::string, int>* find(const std::string& sec, const std::string& key) const {
    auto s = values.find(sec);
    if (s == values.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
  }

  std::string require(const std::string& sec, const std::string& key) const {
    const auto* v = find(sec, key);
    if (!v) throw ConfigError("missing key '" + key + "' in section [" + sec + "]");
    return v->first;
  }
};

const std::map<std::string, std::vector<std::string>> k_known_keys = {
    {"family", {"family", "constants"}},
    {"prior", {"nu", "n", "alpha"}},
    {"scenario", {"agents", "samples", "mechanism", "rule", "trials", "seed", "out"}},
};

FamilySpec parse_family(const ConfigLines& lines) {
  std::string name = lines.require("family", "family");
  Family fam;
  try {
    fam = family_from_name(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::string constants;
  if (const auto* c = lines.find("family", "constants")) constants = trim(c->first);
  std::map<std::string, double> consts;
  if (!constants.empty()) {
    for (const std::string& part : split(constants, ',')) {
      auto kv = split(trim(part), ':');
      if (kv.size() != 2) throw ConfigError("constants must be name:value pairs, got '" + part + "'");
      try {
        consts[trim(kv[0])] = parse_double(trim(kv[1]), "constant " + kv[0]);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  try {
    switch (fam) {
      case Family::normal_known_var:
        return FamilySpec::normal_known_var(consts.count("sigma2") ? consts["sigma2"] : 1.0);
      case Family::poisson_gamma:
        return FamilySpec::poisson_gamma();
      case Family::uniform_pareto:
        return FamilySpec::uniform_pareto();
      case Family::categorical_dirichlet: {
        if (!consts.count("K")) throw ConfigError("categorical_dirichlet needs constants=K:<outcomes>");
        double k = consts["K"];
        if (k != std::floor(k)) throw ConfigError("K must be an integer");
        return FamilySpec::categorical_dirichlet(static_cast<int>(k));
      }
      case Family::bernoulli_beta:
        return FamilySpec::bernoulli_beta();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown family");
}

Hyper parse_prior(const ConfigLines& lines, const FamilySpec& spec) {
  Hyper h;
  try {
    if (spec.categorical()) {
      if (lines.find("prior", "nu")) throw ConfigError("categorical priors use 'alpha', not 'nu'");
      h.nu = parse_vector(lines.require("prior", "alpha"), "alpha");
      h.n = std::accumulate(h.nu.begin(), h.nu.end(), 0.0);
      if (const auto* n = lines.find("prior", "n")) {
        double given = parse_double(n->first, "n");
        if (std::abs(given - h.n) > 1e-6)
          throw ConfigError("prior n disagrees with the pseudo-count total");
      }
    } else {
      if (lines.find("prior", "alpha")) throw ConfigError("'alpha' is only for categorical priors");
      h.nu = parse_vector(lines.require("prior", "nu"), "nu");
      h.n = parse_double(lines.require("prior", "n"), "n");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return h;
}

SampleCountLaw parse_samples(const std::string& value, int agents) {
  SampleCountLaw law;
  std::string v = trim(value);
  size_t dots = v.find("..");
  try {
    if (dots != std::string::npos) {
      law.kind = SampleCountLaw::Kind::uniform_range;
      law.lo = static_cast<int>(parse_long(trim(v.substr(0, dots)), "samples"));
      law.hi = static_cast<int>(parse_long(trim(v.substr(dots + 2)), "samples"));
      return law;
    }
    law.kind = SampleCountLaw::Kind::fixed;
    std::string norm = v;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream in(norm);
    std::string tok;
    while (in >> tok) law.counts.push_back(static_cast<int>(parse_long(tok, "samples")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (law.counts.size() == 1 && agents > 1) law.counts.assign(agents, law.counts[0]);
  return law;
}

}  // namespace

ScenarioConfig parse_scenario_config(std::istream& in) {
  ConfigLines lines;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!k_known_keys.count(section))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(line.substr(0, eq));
    const auto& known = k_known_keys.at(section);
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "' in [" + section + "]");
    if (lines.values[section].count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    lines.values[section][key] = {trim(line.substr(eq + 1)), lineno};
  }

  ScenarioConfig cfg;
  cfg.spec = parse_family(lines);
  cfg.prior = parse_prior(lines, cfg.spec);
  try {
    cfg.agent_count = static_cast<int>(parse_long(lines.require("scenario", "agents"), "agents"));
    cfg.mechanism = mechanism_from_name(lines.require("scenario", "mechanism"));
    if (const auto* t = lines.find("scenario", "trials"))
      cfg.trials = static_cast<int>(parse_long(t->first, "trials"));
    if (const auto* s = lines.find("scenario", "seed")) cfg.seed = parse_u64(s->first, "seed");
    if (const auto* r = lines.find("scenario", "rule")) cfg.propriety_rule = rule_from_name(r->first);
    if (const auto* o = lines.find("scenario", "out")) cfg.out_path = o->first;
    if (const auto* s = lines.find("scenario", "samples")) {
      cfg.law = parse_samples(s->first, cfg.agent_count);
    } else if (cfg.agent_count != 0) {
      throw ConfigError("missing key 'samples' in section [scenario]");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_scenario_config(in);
}

std::vector<Record> parse_records(std::istream& in) {
  static const std::vector<std::string> k_kinds = {"config", "trial", "margin", "summary",
                                                   "evidence", "probe", "witness"};
  std::vector<Record> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls(t);
    Record rec;
    rec.line = lineno;
    ls >> rec.kind;
    if (std::find(k_kinds.begin(), k_kinds.end(), rec.kind) == k_kinds.end())
      throw ParseError(lineno, "unknown record kind '" + rec.kind + "'");
    std::string tok;
    while (ls >> tok) {
      size_t eq = tok.find('=');
      if (eq == std::string::npos) throw ParseError(lineno, "expected key=value, got '" + tok + "'");
      rec.fields[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct FamilyStats {
  long trials = 0;
  long passed = 0;
  double max_err = 0.0;
  double min_margin = std::numeric_limits<double>::infinity();
  bool has_margin = false;
  double score_sum = 0.0;
  long score_count = 0;
};

std::string field_or_throw(const Record& r, const std::string& key) {
  auto it = r.fields.find(key);
  if (it == r.fields.end()) throw ParseError(r.line, "missing field '" + key + "'");
  return it->second;
}

double num_field(const Record& r, const std::string& key) {
  try {
    return parse_double(field_or_throw(r, key), key);
  } catch (const std::invalid_argument& e) {
    throw ParseError(r.line, e.what());
  }
}

}  // namespace

std::string report_table(const std::vector<Record>& records) {
  std::map<std::string, FamilyStats> stats;
  std::vector<const Record*> evidence;
  for (const Record& r : records) {
    if (r.kind == "trial") {
      FamilyStats& s = stats[field_or_throw(r, "family")];
      ++s.trials;
      s.passed += num_field(r, "pass") != 0.0 ? 1 : 0;
      s.max_err = std::max(s.max_err, num_field(r, "max_rel_err"));
      s.score_sum += num_field(r, "mean_score");
      ++s.score_count;
    } else if (r.kind == "margin") {
      FamilyStats& s = stats[field_or_throw(r, "family")];
      s.min_margin = std::min(s.min_margin, num_field(r, "margin"));
      s.has_margin = true;
    } else if (r.kind == "evidence") {
      evidence.push_back(&r);
    }
  }

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-24s %8s %10s %12s %12s %12s\n", "family", "trials",
                "pass_rate", "max_err", "min_margin", "mean_score");
  out << buf;
  for (const auto& [family, s] : stats) {
    std::string pass = s.trials ? format_double(static_cast<double>(s.passed) / s.trials) : "-";
    std::string margin = s.has_margin ? format_double(s.min_margin) : "-";
    std::string score = s.score_count ? format_double(s.score_sum / s.score_count) : "-";
    std::snprintf(buf, sizeof buf, "%-24s %8ld %10s %12s %12s %12s\n", family.c_str(), s.trials,
                  pass.c_str(), s.max_err > 0 || s.trials ? format_double(s.max_err).c_str() : "-",
                  margin.c_str(), score.c_str());
    out << buf;
  }
  if (!evidence.empty()) {
    out << "\nevidence:\n";
    for (const Record* r : evidence) {
      out << "  ";
      bool first = true;
      for (const auto& [k, v] : r->fields) {
        if (!first) out << " ";
        out << k << "=" << v;
        first = false;
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace elicit
