#pragma once
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "elicit/harness.hpp"

namespace elicit {

// Malformed record input; carries the 1-based line number.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

// Shortest repeatable decimal form of v ("%.17g").
std::string format_double(double v);

// Line-oriented key=value scenario configuration with [family], [prior] and
// [scenario] sections.  Throws ConfigError with the offending line.
ScenarioConfig parse_scenario_config(std::istream& in);
ScenarioConfig load_scenario_config(const std::string& path);

// Record emission.  Every output starts with a header that embeds the full
// resolved configuration (seed included), then one record line per trial,
// then a summary record.
void write_run_records(std::ostream& out, const ScenarioConfig& cfg,
                       const std::vector<TrialResult>& results);
void write_propriety_records(std::ostream& out, const ScenarioConfig& cfg,
                             const ProprietyResult& result);

struct Record {
  int line = 0;
  std::string kind;
  std::map<std::string, std::string> fields;
};

// Parses a record stream into kind + fields; throws ParseError on lines that
// are not comments, `config` lines, or known record kinds.
std::vector<Record> parse_records(std::istream& in);

// Per-family table over trial/margin records: trials, pass rate, max hyper
// error, min propriety margin, mean realized score.  Evidence records are
// appended verbatim underneath.
std::string report_table(const std::vector<Record>& records);

}  // namespace elicit
