#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crkl/diagnostics.hpp"
#include "crkl/objectives.hpp"
#include "crkl/optimizer.hpp"
#include "crkl/rate_fit.hpp"
#include "json.hpp"

namespace crkl {

/// Invalid experiment configuration; `field` is a dotted path into the JSON
/// document ("algorithm.mu_tol") or empty for syntax errors.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct AlgorithmConfig {
  Algorithm kind = Algorithm::CR;
  std::optional<double> m;  // "auto" when unset
  double mu_tol = 1e-10;
  int max_iter = 1000;
  std::optional<bool> record_x;  // default: dim <= 50
  double c1 = 0.0;
  double c2 = 0.0;
  double retry_shrink = 0.01;
  std::optional<double> step_size;  // GD; "auto" = 1 / gradient Lipschitz constant
  double grad_tol = 1e-10;
};

struct StartSpec {
  enum class Kind { Explicit, RandomSphere, Canonical };
  Kind kind = Kind::Canonical;
  Vector x;
  double radius = 1.0;
  std::optional<std::uint64_t> seed;  // RandomSphere; falls back to the config seed
};

struct ExperimentConfig {
  ObjectiveSpec objective;
  AlgorithmConfig algorithm;
  StartSpec x0;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  double burn_in = 0.2;
};

ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Objective spec from a name and a JSON object of parameters, as on the command line.
ObjectiveSpec parse_objective_spec(const std::string& name, std::string_view params_json);

/// Starting point described by the config, drawn from the config seed when random.
Vector resolve_start(const ExperimentConfig& cfg);

struct MeasureReport {
  Measure measure = Measure::FGap;
  RateEstimate estimate;
  std::optional<TheoreticalRate> predicted;
  std::optional<RateVerdict> verdict;
  std::string note;
};

/// Sequence used to fit the rate of `m`. IterateDist measures ||x_k - xbar||
/// with xbar the oracle's nearest point to the final iterate (the final
/// iterate itself without an oracle). Throws std::invalid_argument when the
/// trace lacks the data.
Vector measure_series(const Trace& trace, Measure m, const SolutionOracle* oracle);

std::vector<Measure> default_measures(Algorithm a);

/// classify_rate against theoretical_rate for each measure. Measures the
/// trace cannot supply or the theory does not cover carry a note instead.
std::vector<MeasureReport> rate_report(const Trace& trace, std::optional<double> theta,
                                       const std::vector<Measure>& measures, const SolutionOracle* oracle,
                                       double burn_in, const RateTolerances& tol = {});

struct RunSummary {
  std::string objective;
  Algorithm algorithm = Algorithm::CR;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  double final_lambda_min = 0.0;
  double final_mu = 0.0;
  double path_length = 0.0;
  double L = 0.0;
  double M = 0.0;
  std::optional<double> step_size;
  std::optional<double> theta;
  std::vector<MeasureReport> rates;
  DynamicsReport dynamics;
};

struct ExperimentResult {
  Objective objective;
  Vector x0;
  Trace trace;
  RunSummary summary;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

RunSummary summarize(const Trace& trace, const Objective& obj, double burn_in);

nlohmann::json to_json(const RunSummary& s);
nlohmann::json to_json(const DynamicsReport& r);
nlohmann::json to_json(const MeasureReport& r);

/// Writes trace.csv, summary.json and (when iterates are stored) trace_x.csv
/// into cfg.output_dir, each via temp file + rename.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace crkl
