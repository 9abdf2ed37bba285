#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "omle/eluder.hpp"
#include "omle/learner.hpp"
#include "omle/pomdp.hpp"

namespace omle {

namespace fs = std::filesystem;

/// Reads a config or instance-spec document. Files ending in .toml are parsed
/// as TOML and converted to the equivalent JSON tree; anything else is JSON.
nlohmann::json read_document(const fs::path& path);

/// Builds a model from a generator spec such as
///   {"generator": "lock_under", "H": 3, "A": 2, "alpha": 0.3, "good_actions": [1, 0]}.
/// Generators: lock_under, lock_over, random, random_revealing, block_mdp.
/// Randomized generators read "seed" (default 0).
TabularPomdp generate_instance(const nlohmann::json& spec);

struct ExperimentConfig {
  nlohmann::json env;         // {"path": file} or a generator spec
  nlohmann::json candidates;  // {"path": file}, {"paths": [files]}, {"generator": "lock_family", ...} or {"generator": "env"}
  std::string learner = "omle";  // omle | multistep_omle
  int K = 100;
  std::optional<double> beta_value;
  double beta_c = 1.0;
  double beta_delta = 0.1;
  int m = 1;
  double alpha = 0.0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t enum_cap = default_enumeration_cap();
  int threads = 0;            // 0 = hardware concurrency
  bool mle_validity = false;  // also report the MLE validity ratio per seed
  fs::path output_dir = "omle_out";
  fs::path base_dir = ".";    // relative paths in the config resolve against this
};

/// Throws ConfigError naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir = ".");
ExperimentConfig load_config(const fs::path& path);

TabularPomdp build_env(const ExperimentConfig& cfg);
std::vector<TabularPomdp> build_candidates(const ExperimentConfig& cfg, const TabularPomdp& env);
double resolve_beta(const ExperimentConfig& cfg, const TabularPomdp& env);

struct SeedRun {
  std::uint64_t seed = 0;
  RegretTrace trace;
  bool final_policy_optimal = false;
  std::optional<double> max_mle_ratio;
  double wall_seconds = 0.0;
};

struct RunSummary {
  std::vector<SeedRun> runs;  // in config seed order
  double beta = 0.0;
  double optimal_value = 0.0;
  std::optional<int> truth_index;
  std::size_t num_candidates = 0;
  double wall_seconds = 0.0;

  /// Summary document (schema_version 1): per-seed records plus aggregates.
  [[nodiscard]] nlohmann::json to_json(const ExperimentConfig& cfg) const;
};

inline constexpr int kSummarySchemaVersion = 1;
inline constexpr const char* kTraceCsvHeader =
    "k,candidate,opt_value,true_value,cum_regret,conf_size,contains_truth";

/// Runs every seed (concurrently, results in seed order).
RunSummary run_experiment(const ExperimentConfig& cfg);

void write_trace_csv(const RegretTrace& trace, std::ostream& out);

/// Writes seed_<seed>.csv for each run and summary.json into cfg.output_dir.
void write_outputs(const RunSummary& summary, const ExperimentConfig& cfg);

/// Validation status, margins, and confusable-mixture witnesses for singular emissions.
nlohmann::json check_report(const TabularPomdp& model, std::span<const int> windows);

/// Policy spec: "uniform", "optimal", "random:<seed>", "deterministic:<seed>",
/// or "open_loop:a1,a2,...".
HistoryPolicy parse_policy_spec(const std::string& spec, const TabularPomdp& model);

/// Operator-vs-forward deviation over all trajectories, normalization of the
/// forward, enumeration and operator paths, and operator norm checks (m = 1).
nlohmann::json oracle_report(const TabularPomdp& model, const HistoryPolicy& policy, int m,
                             std::uint64_t cap = default_enumeration_cap());

/// {"domain_size": n, "functions": [[...], ...]} with optional "bound".
FiniteFunctionClass load_function_class(const fs::path& path);
FiniteFunctionClass function_class_from_json(const nlohmann::json& j);

/// l1 and l2 dimensions over the default breakpoint grids, with witnesses.
nlohmann::json eluder_report(const FiniteFunctionClass& F, double eps,
                             std::uint64_t cap = kDefaultEluderCap);

/// Timings of sampling, forward probabilities, enumeration, operators and
/// planning on random models of the given size.
nlohmann::json bench_report(int S, int A, int O, int H, int repeats, std::uint64_t seed);

}  // namespace omle
