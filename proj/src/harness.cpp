#include "slicesim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

using nlohmann::json;

int display_rank(const std::string& policy) {
  if (policy == "random") return 0;
  if (policy == "over") return 1;
  if (policy == "maddpg") return 2;
  if (policy == "static") return 3;
  return 4;
}

json mlp_as_json(const Mlp& net) { return json::parse(mlp_to_json(net)); }

Mlp mlp_from_json_value(const json& j) { return mlp_from_json(j.dump()); }

std::string seed_dir_name(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

void append_metrics_row(std::string& out, const StepMetrics& m) {
  out += std::to_string(m.step);
  out += ',';
  out += std::to_string(m.stage);
  out += ',';
  out += format_double(m.epsilon);
  out += ',';
  out += format_double(m.shared_reward);
  for (double r : m.rewards) {
    out += ',';
    out += format_double(r);
  }
  for (double l : m.critic_loss) {
    out += ',';
    out += format_double(l);
  }
  for (double q : m.mean_q) {
    out += ',';
    out += format_double(q);
  }
  out += '\n';
}

std::string trace_header(const ExperimentConfig& config, std::uint64_t seed,
                         const std::string& kind, int num_agents) {
  std::string header = "# config_hash=" + config.config_hash() +
                       " scenario_hash=" + config.scenario_hash() +
                       " seed=" + std::to_string(seed) + " kind=" + kind + "\n";
  header += "step,stage,epsilon,r_t";
  for (int i = 0; i < num_agents; ++i) header += ",r_" + std::to_string(i);
  for (int i = 0; i < num_agents; ++i) header += ",loss_" + std::to_string(i);
  for (int i = 0; i < num_agents; ++i) header += ",q_" + std::to_string(i);
  header += '\n';
  return header;
}

std::vector<Agent> make_agents(const ExperimentConfig& config, std::uint64_t seed) {
  std::vector<Agent> agents;
  agents.reserve(config.env.num_slices);
  for (int i = 0; i < config.env.num_slices; ++i) {
    Rng init_rng(derive_seed(seed, "init/agent/" + std::to_string(i)));
    agents.push_back(make_agent(i, config.global_observation_dim(),
                                config.schedule.learning_rate, init_rng));
  }
  return agents;
}

void write_run_outputs(const ExperimentConfig& config, std::uint64_t seed,
                       const std::string& kind, const std::vector<Agent>& agents,
                       const std::string& trace_text, json extra_manifest,
                       RunPaths& paths) {
  fs::create_directories(paths.dir);
  write_file_atomic(paths.trace, trace_text);
  for (const Agent& agent : agents) {
    fs::path file = paths.dir / ("agent_" + std::to_string(agent.slice_id) + ".json");
    save_agent(agent, file);
    paths.checkpoints.push_back(file);
  }
  json manifest = std::move(extra_manifest);
  manifest["format_version"] = 1;
  manifest["kind"] = kind;
  manifest["seed"] = seed;
  manifest["config_hash"] = config.config_hash();
  manifest["scenario_hash"] = config.scenario_hash();
  manifest["num_slices"] = config.env.num_slices;
  manifest["config"] = config.to_json();
  json agent_files = json::array();
  for (const fs::path& p : paths.checkpoints) agent_files.push_back(p.filename().string());
  manifest["agents"] = agent_files;
  manifest["trace"] = paths.trace.filename().string();
  write_file_atomic(paths.manifest, manifest.dump(2) + "\n");
}

RunPaths seed_cell_paths(const fs::path& out_dir, std::uint64_t seed) {
  RunPaths paths;
  paths.dir = out_dir / seed_dir_name(seed);
  paths.manifest = paths.dir / "manifest.json";
  paths.trace = paths.dir / "trace.csv";
  return paths;
}

std::vector<Agent> load_run_agents(const ExperimentConfig& config,
                                   const fs::path& run_dir, int expected_count) {
  std::vector<Agent> agents;
  for (int i = 0; i < expected_count; ++i) {
    fs::path file = run_dir / ("agent_" + std::to_string(i) + ".json");
    if (!fs::exists(file)) {
      throw IoError("missing agent checkpoint: " + file.string());
    }
    Agent agent = load_agent(file);
    if (agent.actor.layer_sizes != actor_layer_sizes() ||
        agent.critic.layer_sizes !=
            critic_layer_sizes(config.global_observation_dim())) {
      throw CheckpointMismatch(
          "checkpoint network shapes do not match the configured topology and "
          "max_slices: " +
          file.string());
    }
    agent.slice_id = i;
    agent.actor_opt = AdamState(agent.actor.num_params(), config.schedule.learning_rate);
    agent.critic_opt =
        AdamState(agent.critic.num_params(), config.schedule.learning_rate);
    agents.push_back(std::move(agent));
  }
  return agents;
}

template <typename Fn>
void run_cells(const std::vector<std::uint64_t>& seeds, int jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (std::uint64_t s : seeds) fn(s);
    return;
  }
  std::vector<std::future<void>> pending;
  for (std::uint64_t s : seeds) {
    pending.push_back(std::async(std::launch::async, fn, s));
    if (static_cast<int>(pending.size()) == jobs) {
      for (auto& f : pending) f.get();
      pending.clear();
    }
  }
  for (auto& f : pending) f.get();
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

SeedStats compute_stats(std::span<const double> values) {
  SeedStats stats;
  if (values.empty()) return stats;
  stats.max = values[0];
  stats.min = values[0];
  double sum = 0.0;
  for (double v : values) {
    stats.max = std::max(stats.max, v);
    stats.min = std::min(stats.min, v);
    sum += v;
  }
  stats.average = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - stats.average) * (v - stats.average);
  stats.variance = sq / static_cast<double>(values.size());
  return stats;
}

void save_agent(const Agent& agent, const fs::path& path) {
  json j;
  j["format_version"] = 1;
  j["slice_id"] = agent.slice_id;
  j["actor"] = mlp_as_json(agent.actor);
  j["target_actor"] = mlp_as_json(agent.target_actor);
  j["critic"] = mlp_as_json(agent.critic);
  j["target_critic"] = mlp_as_json(agent.target_critic);
  write_file_atomic(path, j.dump() + "\n");
}

Agent load_agent(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw CheckpointMismatch("checkpoint parse error in " + path.string() + ": " +
                             e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != 1) {
    throw CheckpointMismatch("unsupported checkpoint version: " + path.string());
  }
  Agent agent;
  agent.slice_id = j.at("slice_id").get<int>();
  agent.actor = mlp_from_json_value(j.at("actor"));
  agent.target_actor = mlp_from_json_value(j.at("target_actor"));
  agent.critic = mlp_from_json_value(j.at("critic"));
  agent.target_critic = mlp_from_json_value(j.at("target_critic"));
  agent.actor_opt = AdamState(agent.actor.num_params(), 1e-3);
  agent.critic_opt = AdamState(agent.critic.num_params(), 1e-3);
  return agent;
}

RunPaths run_train(const ExperimentConfig& config, std::uint64_t seed,
                   const fs::path& out_dir) {
  config.validate();
  RunPaths paths = seed_cell_paths(out_dir, seed);

  Environment env(config.env, derive_seed(seed, "train/requests"));
  std::vector<Agent> agents = make_agents(config, seed);
  TrainStreams streams = TrainStreams::from_root(seed);

  std::string trace_text =
      trace_header(config, seed, "train", config.env.num_slices);
  train(env, agents, config.schedule, config.ou, streams,
        [&trace_text](const StepMetrics& m) { append_metrics_row(trace_text, m); });

  write_run_outputs(config, seed, "train", agents, trace_text, json::object(), paths);
  return paths;
}

std::vector<RunPaths> run_train_campaign(const ExperimentConfig& config,
                                         const fs::path& out_dir, int jobs) {
  config.validate();
  std::vector<RunPaths> all(config.seeds.size());
  run_cells(config.seeds, jobs, [&](std::uint64_t seed) {
    auto it = std::find(config.seeds.begin(), config.seeds.end(), seed);
    all[it - config.seeds.begin()] = run_train(config, seed, out_dir);
  });
  return all;
}

EvalSummary run_eval(const ExperimentConfig& config,
                     const std::optional<fs::path>& checkpoint_root,
                     const fs::path& out_dir) {
  config.validate();
  if (config.policy == PolicyKind::maddpg && !checkpoint_root.has_value()) {
    throw ConfigError("eval: the maddpg policy requires trained checkpoints");
  }

  EvalSummary summary;
  summary.policy = policy_name(config.policy);
  summary.config_hash = config.config_hash();
  summary.scenario_hash = config.scenario_hash();
  summary.horizon = config.eval_horizon;
  summary.seeds = config.seeds;

  fs::create_directories(out_dir);
  const int I = config.env.num_slices;
  for (std::uint64_t seed : config.seeds) {
    Environment env(config.env, derive_seed(seed, "eval/requests"));

    std::vector<Agent> agents;
    std::optional<BaselinePolicy> baseline;
    switch (config.policy) {
      case PolicyKind::maddpg:
        agents = load_run_agents(config, *checkpoint_root / seed_dir_name(seed), I);
        break;
      case PolicyKind::random:
        baseline = BaselinePolicy::make_random(derive_seed(seed, "eval/policy"));
        break;
      case PolicyKind::over_allocation:
        baseline = BaselinePolicy::make_over_allocation();
        break;
      case PolicyKind::static_slicing:
        baseline = BaselinePolicy::make_static_slicing(config.static_shares);
        break;
    }

    std::string trace = "# config_hash=" + summary.config_hash +
                        " scenario_hash=" + summary.scenario_hash +
                        " seed=" + std::to_string(seed) +
                        " policy=" + summary.policy + "\n";
    trace += "slot";
    for (int i = 0; i < I; ++i) {
      std::string n = std::to_string(i);
      trace += ",served_" + n + ",latency_" + n + ",energy_" + n + ",reward_" + n;
    }
    trace += ",utility\n";

    std::vector<double> seed_utilities;
    seed_utilities.reserve(config.eval_horizon);
    for (int slot = 0; slot < config.eval_horizon; ++slot) {
      std::vector<Action> actions;
      if (config.policy == PolicyKind::maddpg) {
        actions.resize(I);
        for (int i = 0; i < I; ++i) {
          actions[i] = act_deterministic(agents[i], env.observe_local(i));
        }
      } else {
        actions = baseline->act(I);
      }
      StepOutcome outcome = env.step(actions);
      double utility = eval_utility(outcome);
      seed_utilities.push_back(utility);

      trace += std::to_string(outcome.slot);
      for (const SliceOutcome& s : outcome.slices) {
        trace += ',';
        trace += s.status == SliceStatus::served ? '1' : '0';
        trace += ',';
        trace += format_double(s.latency);
        trace += ',';
        trace += format_double(s.energy);
        trace += ',';
        trace += format_double(s.reward);
      }
      trace += ',';
      trace += format_double(utility);
      trace += '\n';
    }

    fs::path seed_dir = out_dir / seed_dir_name(seed);
    fs::create_directories(seed_dir);
    write_file_atomic(seed_dir / "eval_trace.csv", trace);

    SeedStats stats = compute_stats(seed_utilities);
    stats.seed = seed;
    summary.per_seed.push_back(stats);
    summary.utilities.insert(summary.utilities.end(), seed_utilities.begin(),
                             seed_utilities.end());
  }

  summary.pooled = compute_stats(summary.utilities);
  write_file_atomic(out_dir / "summary.json", summary.to_json().dump(2) + "\n");
  return summary;
}

RunPaths run_incremental(const ExperimentConfig& base_config, std::uint64_t seed,
                         const fs::path& base_run_dir, int new_count,
                         const fs::path& out_dir) {
  base_config.validate();
  const int base_count = base_config.env.num_slices;
  if (new_count == base_count) {
    throw CountError("incremental: new count equals current count");
  }

  ExperimentConfig new_config = base_config;
  new_config.env.num_slices = new_count;
  new_config.validate();  // also rejects new_count > max_slices

  fs::path base_cell = base_run_dir / seed_dir_name(seed);
  std::vector<Agent> agents = load_run_agents(base_config, base_cell, base_count);

  GeneralizedModel model = average_params(agents);
  model.provenance = (base_cell / "manifest.json").string();
  if (new_count > base_count) {
    grow(agents, new_count, model, base_config.env.max_slices,
         base_config.schedule.learning_rate);
  } else {
    shrink(agents, new_count, model);
  }

  Environment env(new_config.env, derive_seed(seed, "train/requests"));
  TrainStreams streams = TrainStreams::from_root(seed);

  RunPaths paths = seed_cell_paths(out_dir, seed);
  std::string trace_text = trace_header(new_config, seed, "incremental", new_count);
  incremental_train(env, agents, base_config.schedule,
                    base_config.incremental_fraction, base_config.incremental_batch,
                    base_config.ou, streams, [&trace_text](const StepMetrics& m) {
                      append_metrics_row(trace_text, m);
                    });

  json extra;
  extra["transition"] = new_count > base_count ? "grow" : "shrink";
  extra["base_count"] = base_count;
  extra["new_count"] = new_count;
  extra["fraction"] = base_config.incremental_fraction;
  extra["batch"] = base_config.incremental_batch;
  extra["base_manifest"] = model.provenance;
  extra["base_config_hash"] = base_config.config_hash();
  write_run_outputs(new_config, seed, "incremental", agents, trace_text, extra, paths);
  return paths;
}

std::vector<RunPaths> run_incremental_campaign(const ExperimentConfig& base_config,
                                               const fs::path& base_run_dir,
                                               int new_count, const fs::path& out_dir,
                                               int jobs) {
  base_config.validate();
  std::vector<RunPaths> all(base_config.seeds.size());
  run_cells(base_config.seeds, jobs, [&](std::uint64_t seed) {
    auto it = std::find(base_config.seeds.begin(), base_config.seeds.end(), seed);
    all[it - base_config.seeds.begin()] =
        run_incremental(base_config, seed, base_run_dir, new_count, out_dir);
  });
  return all;
}

json EvalSummary::to_json() const {
  json j;
  j["format_version"] = 1;
  j["policy"] = policy;
  j["config_hash"] = config_hash;
  j["scenario_hash"] = scenario_hash;
  j["horizon"] = horizon;
  j["seeds"] = seeds;
  j["max"] = pooled.max;
  j["min"] = pooled.min;
  j["average"] = pooled.average;
  j["variance"] = pooled.variance;
  json per = json::array();
  for (const SeedStats& s : per_seed) {
    per.push_back({{"seed", s.seed},
                   {"max", s.max},
                   {"min", s.min},
                   {"average", s.average},
                   {"variance", s.variance}});
  }
  j["per_seed"] = per;
  j["utilities"] = utilities;
  return j;
}

EvalSummary EvalSummary::from_json(const json& j) {
  EvalSummary s;
  s.policy = j.at("policy").get<std::string>();
  s.config_hash = j.at("config_hash").get<std::string>();
  s.scenario_hash = j.at("scenario_hash").get<std::string>();
  s.horizon = j.at("horizon").get<int>();
  s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  s.utilities = j.at("utilities").get<std::vector<double>>();
  s.pooled.max = j.at("max").get<double>();
  s.pooled.min = j.at("min").get<double>();
  s.pooled.average = j.at("average").get<double>();
  s.pooled.variance = j.at("variance").get<double>();
  for (const auto& p : j.at("per_seed")) {
    SeedStats st;
    st.seed = p.at("seed").get<std::uint64_t>();
    st.max = p.at("max").get<double>();
    st.min = p.at("min").get<double>();
    st.average = p.at("average").get<double>();
    st.variance = p.at("variance").get<double>();
    s.per_seed.push_back(st);
  }
  return s;
}

EvalSummary EvalSummary::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summary: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError("summary parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

Comparison compare(std::span<const EvalSummary> summaries) {
  if (summaries.size() < 2) {
    throw MismatchedScenario("compare: needs at least two summaries");
  }
  for (const EvalSummary& s : summaries) {
    if (s.scenario_hash != summaries[0].scenario_hash ||
        s.horizon != summaries[0].horizon) {
      throw MismatchedScenario(
          "compare: summaries come from different scenarios (hash or horizon "
          "mismatch)");
    }
  }

  Comparison cmp;
  for (const EvalSummary& s : summaries) {
    cmp.rows.push_back(
        {s.policy, s.pooled.max, s.pooled.min, s.pooled.average, s.pooled.variance});
  }
  std::stable_sort(cmp.rows.begin(), cmp.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     return display_rank(a.policy) < display_rank(b.policy);
                   });

  for (const ComparisonRow& a : cmp.rows) {
    for (const ComparisonRow& b : cmp.rows) {
      if (&a == &b) continue;
      double ratio = b.average != 0.0
                         ? a.average / b.average
                         : std::numeric_limits<double>::infinity();
      cmp.average_ratios.emplace_back(a.policy, b.policy, ratio);
    }
  }

  std::ostringstream text;
  text << "policy      max        min        average    variance\n";
  for (const ComparisonRow& r : cmp.rows) {
    text << r.policy << std::string(std::max<std::size_t>(1, 12 - r.policy.size()), ' ');
    for (double v : {r.max, r.min, r.average, r.variance}) {
      std::string f = format_double(v);
      if (f.size() > 10) f = f.substr(0, 10);
      text << f << std::string(11 - std::min<std::size_t>(f.size(), 10), ' ');
    }
    text << '\n';
  }
  text << "\naverage-utility ratios:\n";
  for (const auto& [a, b, ratio] : cmp.average_ratios) {
    text << "  " << a << "/" << b << " = " << format_double(ratio) << '\n';
  }
  cmp.table_text = text.str();
  return cmp;
}

void write_comparison(const Comparison& comparison, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::string csv = "policy,max,min,average,variance\n";
  for (const ComparisonRow& r : comparison.rows) {
    csv += r.policy + ',' + format_double(r.max) + ',' + format_double(r.min) + ',' +
           format_double(r.average) + ',' + format_double(r.variance) + '\n';
  }
  write_file_atomic(out_dir / "compare.csv", csv);

  std::string ratios = "numerator,denominator,average_ratio\n";
  for (const auto& [a, b, ratio] : comparison.average_ratios) {
    ratios += a + ',' + b + ',' + format_double(ratio) + '\n';
  }
  write_file_atomic(out_dir / "ratios.csv", ratios);
  write_file_atomic(out_dir / "compare.txt", comparison.table_text);
}

}  // namespace slicesim
