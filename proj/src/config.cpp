#include "slicesim/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "slicesim/errors.hpp"

namespace slicesim {

namespace {

using nlohmann::json;

void read_if(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}
void read_if(const json& j, const char* key, int& out) {
  if (j.contains(key)) out = j.at(key).get<int>();
}
void read_if(const json& j, const char* key, std::size_t& out) {
  if (j.contains(key)) out = j.at(key).get<std::size_t>();
}
void read_if(const json& j, const char* key, std::string& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

Topology topology_from_json(const json& j) {
  Topology topo = default_topology();
  if (j.contains("mec_capacity")) {
    topo.mec_capacity = j.at("mec_capacity").get<std::vector<double>>();
  }
  if (j.contains("link_capacity")) {
    topo.link_capacity = j.at("link_capacity").get<std::vector<double>>();
  }
  read_if(j, "urllc_compute_cap", topo.urllc_compute_cap);
  read_if(j, "urllc_bandwidth_cap", topo.urllc_bandwidth_cap);
  read_if(j, "snr", topo.snr);
  if (j.contains("slice_paths")) {
    topo.slice_paths.clear();
    for (const auto& p : j.at("slice_paths")) {
      SlicePath path{};
      auto mecs = p.at("mecs").get<std::vector<int>>();
      auto links = p.at("links").get<std::vector<int>>();
      if (mecs.size() != kMecsPerSlice || links.size() != kLinksPerSlice) {
        throw ConfigError("topology: each path needs exactly 3 MECs and 2 links");
      }
      std::copy(mecs.begin(), mecs.end(), path.mecs.begin());
      std::copy(links.begin(), links.end(), path.links.begin());
      topo.slice_paths.push_back(path);
    }
  }
  return topo;
}

json topology_to_json(const Topology& topo) {
  json j;
  j["mec_capacity"] = topo.mec_capacity;
  j["urllc_compute_cap"] = topo.urllc_compute_cap;
  j["link_capacity"] = topo.link_capacity;
  j["urllc_bandwidth_cap"] = topo.urllc_bandwidth_cap;
  j["snr"] = topo.snr;
  json paths = json::array();
  for (const SlicePath& p : topo.slice_paths) {
    paths.push_back({{"mecs", p.mecs}, {"links", p.links}});
  }
  j["slice_paths"] = paths;
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig cfg;
  cfg.env.topology = default_topology();
  cfg.seeds = {1, 2, 3};
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg = defaults();
  read_if(j, "num_slices", cfg.env.num_slices);
  read_if(j, "max_slices", cfg.env.max_slices);
  if (j.contains("policy")) cfg.policy = policy_from_name(j.at("policy").get<std::string>());
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  read_if(j, "eval_horizon", cfg.eval_horizon);
  read_if(j, "out", cfg.out_dir);
  if (j.contains("static_shares")) {
    cfg.static_shares = j.at("static_shares").get<std::vector<double>>();
  }

  if (j.contains("env")) {
    const json& e = j.at("env");
    if (e.contains("topology")) cfg.env.topology = topology_from_json(e.at("topology"));
    if (e.contains("compute_demand_range")) {
      auto r = e.at("compute_demand_range").get<std::vector<double>>();
      if (r.size() != 2) throw ConfigError("env: compute_demand_range needs [lo, hi]");
      cfg.env.compute_demand = {r[0], r[1]};
    }
    if (e.contains("data_size_range")) {
      auto r = e.at("data_size_range").get<std::vector<double>>();
      if (r.size() != 2) throw ConfigError("env: data_size_range needs [lo, hi]");
      cfg.env.data_size = {r[0], r[1]};
    }
    read_if(e, "arrival_prob", cfg.env.arrival_prob);
    read_if(e, "window_size", cfg.env.window_size);
    read_if(e, "epsilon_min", cfg.env.epsilon_min);
    if (e.contains("occupancy")) {
      const json& o = e.at("occupancy");
      if (o.contains("mode")) {
        std::string mode = o.at("mode").get<std::string>();
        if (mode == "latency_scaled") {
          cfg.env.occupancy.mode = OccupancyPolicy::Mode::latency_scaled;
        } else if (mode == "single_slot") {
          cfg.env.occupancy.mode = OccupancyPolicy::Mode::single_slot;
        } else {
          throw ConfigError("env: unknown occupancy mode " + mode);
        }
      }
      read_if(o, "max_slots", cfg.env.occupancy.max_slots);
      read_if(o, "slot_length", cfg.env.occupancy.slot_length);
    }
    if (e.contains("power")) {
      read_if(e.at("power"), "static", cfg.env.power.static_coeff);
      read_if(e.at("power"), "dynamic", cfg.env.power.dynamic_coeff);
    }
  }

  if (j.contains("schedule")) {
    const json& s = j.at("schedule");
    read_if(s, "k1", cfg.schedule.k1);
    read_if(s, "k2", cfg.schedule.k2);
    read_if(s, "k3", cfg.schedule.k3);
    read_if(s, "batch", cfg.schedule.batch_size);
    read_if(s, "gamma", cfg.schedule.gamma);
    read_if(s, "tau", cfg.schedule.tau);
    read_if(s, "learning_rate", cfg.schedule.learning_rate);
    read_if(s, "replay_capacity", cfg.schedule.replay_capacity);
  }

  if (j.contains("ou")) {
    const json& o = j.at("ou");
    read_if(o, "epsilon", cfg.ou.epsilon);
    read_if(o, "mu", cfg.ou.mu);
    read_if(o, "sigma", cfg.ou.sigma);
    read_if(o, "beta", cfg.ou.beta);
  }

  if (j.contains("incremental")) {
    const json& inc = j.at("incremental");
    read_if(inc, "fraction", cfg.incremental_fraction);
    read_if(inc, "batch", cfg.incremental_batch);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["num_slices"] = env.num_slices;
  j["max_slices"] = env.max_slices;
  j["policy"] = policy_name(policy);
  j["seeds"] = seeds;
  j["eval_horizon"] = eval_horizon;
  if (!static_shares.empty()) j["static_shares"] = static_shares;

  json e;
  e["topology"] = topology_to_json(env.topology);
  e["compute_demand_range"] = {env.compute_demand.lo, env.compute_demand.hi};
  e["data_size_range"] = {env.data_size.lo, env.data_size.hi};
  e["arrival_prob"] = env.arrival_prob;
  e["window_size"] = env.window_size;
  e["epsilon_min"] = env.epsilon_min;
  e["occupancy"] = {
      {"mode", env.occupancy.mode == OccupancyPolicy::Mode::latency_scaled
                   ? "latency_scaled"
                   : "single_slot"},
      {"max_slots", env.occupancy.max_slots},
      {"slot_length", env.occupancy.slot_length}};
  e["power"] = {{"static", env.power.static_coeff}, {"dynamic", env.power.dynamic_coeff}};
  j["env"] = e;

  j["schedule"] = {{"k1", schedule.k1},
                   {"k2", schedule.k2},
                   {"k3", schedule.k3},
                   {"batch", schedule.batch_size},
                   {"gamma", schedule.gamma},
                   {"tau", schedule.tau},
                   {"learning_rate", schedule.learning_rate},
                   {"replay_capacity", schedule.replay_capacity}};
  j["ou"] = {{"epsilon", ou.epsilon}, {"mu", ou.mu}, {"sigma", ou.sigma}, {"beta", ou.beta}};
  j["incremental"] = {{"fraction", incremental_fraction}, {"batch", incremental_batch}};
  return j;
}

void ExperimentConfig::validate() const {
  env.validate();
  schedule.validate();
  if (seeds.empty()) throw ConfigError("config: at least one seed required");
  if (eval_horizon < 1) throw ConfigError("config: eval_horizon must be >= 1");
  if (!(incremental_fraction > 0.0 && incremental_fraction <= 1.0)) {
    throw ConfigError("config: incremental fraction outside (0, 1]");
  }
  if (incremental_batch < 1) throw ConfigError("config: incremental batch must be >= 1");
  if (!(ou.epsilon >= 0.0 && ou.epsilon <= 1.0)) {
    throw ConfigError("config: OU epsilon outside [0, 1]");
  }
  if (!(ou.sigma >= 0.0)) throw ConfigError("config: OU sigma must be >= 0");
  if (!static_shares.empty()) {
    if (static_cast<int>(static_shares.size()) != env.num_slices) {
      throw ConfigError("config: static_shares size must equal num_slices");
    }
    for (double s : static_shares) {
      if (!(s >= 0.0)) throw ConfigError("config: static shares must be >= 0");
    }
  }
}

std::string hash_json(const nlohmann::json& j) {
  std::uint64_t h = fnv1a64(j.dump());
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << h;
  return out.str();
}

std::string ExperimentConfig::config_hash() const { return hash_json(to_json()); }

std::string ExperimentConfig::scenario_hash() const {
  json j = to_json();
  j.erase("policy");
  return hash_json(j);
}

}  // namespace slicesim
