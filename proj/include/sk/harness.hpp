#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace sk {

enum class OutputFormat { Csv, Json };

/// Typed experiment configuration.  Populated from CLI flags and/or a flat
/// key=value config file (unknown keys are rejected).
struct ExperimentConfig {
  std::string command;
  double beta = 0.3;
  double h = 0.5;
  std::vector<int> n_values = {200};
  std::vector<std::uint64_t> seeds = {1};
  int k_max = 12;
  int n_points = 20;
  int restarts = 16;
  int order = 120;
  double rho = 0.9;
  double eps = 0.5;
  std::string scan = "cube";        // hessian-scan set: cube | shell | shell-rejection
  std::string axis;                 // sweep parameter name
  std::vector<double> values;       // sweep values
  std::string output_path;          // empty = stdout
  OutputFormat format = OutputFormat::Csv;
  int threads = 0;                  // 0 = hardware concurrency
  bool assert_checks = false;
  bool timings = false;
  std::map<std::string, double> tolerances;  // overrides for named tolerances

  void validate() const;            // throws std::invalid_argument with the field name
  double tolerance(const std::string& name, double fallback) const;
};

/// Parses a flat key=value file into cfg; rejects unknown keys.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

/// One experiment's output: parameter echo, a per-seed metric table ordered
/// by (n, seed), aggregates recomputed from the rows, and named pass/fail
/// checks.
struct ResultRecord {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::array<double, 4>> aggregates;  // mean, std, min, max per column
  std::vector<std::pair<std::string, bool>> checks;
  double wall_time_s = 0.0;

  void recompute_aggregates();
  bool all_checks_pass() const;
};

/// Runs the configured experiment.  Deterministic for a fixed config.
ResultRecord run_experiment(const ExperimentConfig& cfg);

/// One record per value of the swept parameter.
std::vector<ResultRecord> sweep(const ExperimentConfig& cfg_template,
                                const std::string& axis,
                                const std::vector<double>& values);

/// Serialization (bytes are deterministic; wall time only with timings=true).
std::string to_csv(const ResultRecord& rec, bool timings);
std::string to_json_lines(const ResultRecord& rec, bool timings);
std::string render(const std::vector<ResultRecord>& recs, const ExperimentConfig& cfg);

/// Writes to cfg.output_path or returns false to signal stdout emission.
bool emit(const std::vector<ResultRecord>& recs, const ExperimentConfig& cfg);

}  // namespace sk
