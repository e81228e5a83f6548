#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "birthtail/config.hpp"

namespace birthtail {

enum class Verdict { pass, fail, flagged };
const char* to_string(Verdict v);

struct Metric {
  std::string name;
  std::optional<double> value;
  // target is a point (target_lo == target_hi, with tolerance) or an interval
  double target_lo = 0.0, target_hi = 0.0;
  std::optional<double> tolerance;
  Verdict verdict = Verdict::flagged;
  std::string provenance;  // "paper" or "derived"
  std::string note;
};

struct ExperimentInfo {
  std::string name;
  std::string description;
};

struct ExperimentOptions {
  std::string output_dir = ".";
  int workers = 0;  // 0: default_workers()
  std::string config_text;  // contents of a key=value config file
  std::map<std::string, std::string> overrides;
  bool write_files = true;
};

struct ExperimentReport {
  std::string name;
  std::map<std::string, std::string> parameters;
  std::vector<Metric> metrics;
  std::vector<std::string> artifacts;
  // curve name -> CSV text, in write order
  std::vector<std::pair<std::string, std::string>> curves;
  double wall_time = 0.0;

  const Metric* metric(const std::string& name) const;
  bool all_pass() const;
};

std::vector<ExperimentInfo> list_experiments();
// documented keys and defaults of an experiment
std::map<std::string, std::string> experiment_defaults(const std::string& name);
ExperimentReport run_experiment(const std::string& name, const ExperimentOptions& opt);

// JSON lines: one header record, then one record per metric
std::string to_jsonl(const ExperimentReport& r);

}  // namespace birthtail
