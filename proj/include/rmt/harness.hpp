#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmt/ensembles.hpp"

namespace rmt {

enum class Mode { Sample, ExactDensity, Hole, SvDensity, Kernel, Converge, Lyapunov, Stability, Verify };

std::string to_string(Mode m);
// UsageError for an unknown name.
Mode mode_from_string(const std::string& s);
bool is_sampling(Mode m);

struct ExperimentConfig {
  Mode mode = Mode::Verify;
  std::optional<ProductSpec> spec;
  std::optional<std::uint64_t> seed;
  long samples = 0;
  std::string out = ".";
  // Grid / range parameters.
  double r_max = 0.0;              // 0: chosen from the spec
  int bins = 40;
  int points = 41;
  std::vector<double> radii;       // hole mode
  std::vector<double> x;           // kernel / sv-density points
  std::vector<int> N_list;         // converge mode
  std::string limit = "origin";    // converge: origin | hard_edge
  long steps = 10000;              // lyapunov / stability M
  long replicas = 200;
  std::vector<int> criteria;       // verify: subset, empty = all
  std::map<std::string, double> tolerances;

  double tolerance(const std::string& key, double fallback) const;
  nlohmann::ordered_json to_json() const;
};

// Schema-checked parse; unknown fields, wrong types and a missing seed for a
// sampling mode raise UsageError.
ExperimentConfig config_from_json(const nlohmann::json& j);
void validate_config(const ExperimentConfig& c);

struct RunResult {
  int exit_code = 0;                // 0 ok, 1 numerical failure, 3 statistical failure
  bool pass = true;
  std::vector<std::string> files;
  nlohmann::ordered_json report;
};

// Writes <mode>.csv, <mode>.json and summary.json into config.out.
RunResult run(const ExperimentConfig& config);

// Write-temp-then-rename.
void write_atomic(const std::string& path, const std::string& content);

// CSV number format: 17 significant digits.
std::string csv_number(double v);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool statistical = false;
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;
};

// The acceptance suite; `which` empty runs all criteria. `progress` is
// called after each criterion.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const std::vector<int>& which = {},
                                            const std::function<void(const CriterionResult&)>& progress = {});

}  // namespace rmt
