#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "slicesim/harness.hpp"

namespace {

using slicesim::ExperimentConfig;
namespace fs = std::filesystem;

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed,
                             const std::string& policy) {
  ExperimentConfig config = ExperimentConfig::load(path);
  if (seed.has_value()) config.seeds = {*seed};
  if (!policy.empty()) config.policy = slicesim::policy_from_name(policy);
  return config;
}

fs::path resolve_out(const ExperimentConfig& config, const std::string& out_flag,
                     const char* fallback) {
  if (!out_flag.empty()) return out_flag;
  if (!config.out_dir.empty()) return config.out_dir;
  return fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edge network slicing simulator and multi-agent learning engine"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::optional<std::uint64_t> seed_flag;
  int jobs = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config")->required();
    cmd->add_option("--out", out_flag, "output directory");
    cmd->add_option("--seed", seed_flag, "override the config's seed list");
    cmd->add_option("--jobs", jobs, "parallel seed cells");
  };

  CLI::App* train_cmd = app.add_subcommand("train", "train MADDPG agents per seed");
  add_common(train_cmd);

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "roll the environment and summarize utility");
  add_common(eval_cmd);
  std::string eval_policy;
  std::string checkpoints;
  eval_cmd->add_option("--policy", eval_policy,
                       "policy override: maddpg | random | over | static");
  eval_cmd->add_option("--checkpoints", checkpoints,
                       "train output dir with seed_<n>/agent_<i>.json");
  int horizon_flag = 0;
  eval_cmd->add_option("--horizon", horizon_flag, "override eval horizon (slots)");

  CLI::App* inc_cmd =
      app.add_subcommand("increment", "grow the agent population and fine-tune");
  add_common(inc_cmd);
  std::string base_dir;
  int target_count = 0;
  double fraction_flag = 0.0;
  inc_cmd->add_option("--base", base_dir, "base train output dir")->required();
  inc_cmd->add_option("--count", target_count, "new slice count")->required();
  inc_cmd->add_option("--fraction", fraction_flag, "fine-tuning budget fraction");

  CLI::App* dec_cmd =
      app.add_subcommand("decrement", "shrink the agent population and fine-tune");
  add_common(dec_cmd);
  dec_cmd->add_option("--base", base_dir, "base train output dir")->required();
  dec_cmd->add_option("--count", target_count, "new slice count")->required();
  dec_cmd->add_option("--fraction", fraction_flag, "fine-tuning budget fraction");

  CLI::App* compare_cmd =
      app.add_subcommand("compare", "tabulate eval summaries over one scenario");
  std::vector<std::string> summary_paths;
  std::string compare_out;
  compare_cmd->add_option("summaries", summary_paths, "summary.json files")
      ->required()
      ->expected(-2);
  compare_cmd->add_option("--out", compare_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) {
      ExperimentConfig config = load_config(config_path, seed_flag, "");
      fs::path out = resolve_out(config, out_flag, "out/train");
      auto runs = slicesim::run_train_campaign(config, out, jobs);
      for (const auto& run : runs) std::cout << "wrote " << run.manifest.string() << '\n';
    } else if (eval_cmd->parsed()) {
      ExperimentConfig config = load_config(config_path, seed_flag, eval_policy);
      if (horizon_flag > 0) config.eval_horizon = horizon_flag;
      fs::path out = resolve_out(config, out_flag, "out/eval");
      std::optional<fs::path> ckpt;
      if (!checkpoints.empty()) ckpt = checkpoints;
      slicesim::EvalSummary summary = slicesim::run_eval(config, ckpt, out);
      std::cout << "policy " << summary.policy << " average "
                << slicesim::format_double(summary.pooled.average) << " variance "
                << slicesim::format_double(summary.pooled.variance) << '\n'
                << "wrote " << (out / "summary.json").string() << '\n';
    } else if (inc_cmd->parsed() || dec_cmd->parsed()) {
      ExperimentConfig config = load_config(config_path, seed_flag, "");
      if (fraction_flag > 0.0) config.incremental_fraction = fraction_flag;
      if (inc_cmd->parsed() && target_count <= config.env.num_slices) {
        throw slicesim::CountError("increment: --count must exceed the config's slice count");
      }
      if (dec_cmd->parsed() && target_count >= config.env.num_slices) {
        throw slicesim::CountError("decrement: --count must be below the config's slice count");
      }
      fs::path out = resolve_out(config, out_flag, "out/incremental");
      auto runs =
          slicesim::run_incremental_campaign(config, base_dir, target_count, out, jobs);
      for (const auto& run : runs) std::cout << "wrote " << run.manifest.string() << '\n';
    } else if (compare_cmd->parsed()) {
      std::vector<slicesim::EvalSummary> summaries;
      for (const std::string& p : summary_paths) {
        summaries.push_back(slicesim::EvalSummary::load(p));
      }
      slicesim::Comparison cmp = slicesim::compare(summaries);
      slicesim::write_comparison(cmp, compare_out);
      std::cout << cmp.table_text;
    }
  } catch (const slicesim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
