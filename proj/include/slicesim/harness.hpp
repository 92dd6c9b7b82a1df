#ifndef SLICESIM_HARNESS_HPP
#define SLICESIM_HARNESS_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slicesim/config.hpp"
#include "slicesim/incremental.hpp"

namespace slicesim {

namespace fs = std::filesystem;

// Locations of one (config, seed) cell's outputs.
struct RunPaths {
  fs::path dir;
  fs::path manifest;
  fs::path trace;
  std::vector<fs::path> checkpoints;  // agent_<i>.json
};

struct SeedStats {
  std::uint64_t seed = 0;
  double max = 0.0;
  double min = 0.0;
  double average = 0.0;
  double variance = 0.0;  // population variance
};

// Per-slot utility record for one policy over one scenario.
struct EvalSummary {
  std::string policy;
  std::string config_hash;
  std::string scenario_hash;
  int horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> utilities;  // pooled across seeds, slot-major per seed
  std::vector<SeedStats> per_seed;
  SeedStats pooled;  // seed field unused

  nlohmann::json to_json() const;
  static EvalSummary from_json(const nlohmann::json& j);
  static EvalSummary load(const fs::path& path);
};

SeedStats compute_stats(std::span<const double> values);

// Agent checkpoints: versioned JSON with all four networks.
void save_agent(const Agent& agent, const fs::path& path);
Agent load_agent(const fs::path& path);

// Trains one seed cell: out_dir/seed_<s>/{manifest.json, agent_<i>.json, trace.csv}.
RunPaths run_train(const ExperimentConfig& config, std::uint64_t seed,
                   const fs::path& out_dir);

// All seeds in config.seeds; jobs > 1 runs cells in parallel (cells are
// independent and each internally single-threaded).
std::vector<RunPaths> run_train_campaign(const ExperimentConfig& config,
                                         const fs::path& out_dir, int jobs = 1);

// Rolls the environment for config.eval_horizon slots per seed with no
// exploration, collecting per-slot utilities. For the maddpg policy,
// checkpoint_root must contain seed_<s>/agent_<i>.json for every seed.
// Writes out_dir/summary.json and per-seed eval_trace.csv files.
EvalSummary run_eval(const ExperimentConfig& config,
                     const std::optional<fs::path>& checkpoint_root,
                     const fs::path& out_dir);

// Agent-count transition + fine-tuning for one seed cell. base_run_dir is a
// run_train/run_incremental output root holding seed_<s>/ subdirectories.
RunPaths run_incremental(const ExperimentConfig& base_config, std::uint64_t seed,
                         const fs::path& base_run_dir, int new_count,
                         const fs::path& out_dir);
std::vector<RunPaths> run_incremental_campaign(const ExperimentConfig& base_config,
                                               const fs::path& base_run_dir,
                                               int new_count, const fs::path& out_dir,
                                               int jobs = 1);

struct ComparisonRow {
  std::string policy;
  double max = 0.0;
  double min = 0.0;
  double average = 0.0;
  double variance = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // random, over, maddpg, static order
  // (numerator policy, denominator policy, ratio of averages)
  std::vector<std::tuple<std::string, std::string, double>> average_ratios;
  std::string table_text;
};

// Requires >= 2 summaries over the same scenario (hash + horizon), else
// MismatchedScenario.
Comparison compare(std::span<const EvalSummary> summaries);
void write_comparison(const Comparison& comparison, const fs::path& out_dir);

// Shortest-round-trip decimal formatting used by every CSV/JSON writer.
std::string format_double(double v);
void write_file_atomic(const fs::path& path, const std::string& content);

}  // namespace slicesim

#endif  // SLICESIM_HARNESS_HPP
