#include <doctest.h>

#include <cmath>

#include "slicesim/errors.hpp"
#include "slicesim/maddpg.hpp"
#include "test_support.hpp"

using namespace slicesim;
using slicesim::testing::finite_difference;
using slicesim::testing::max_mixed_error;

namespace {

constexpr int kGlobalDim = 43;  // 6 + 7 + 5 * 6

Agent test_agent(std::uint64_t seed, int global_dim = kGlobalDim) {
  Rng rng(seed);
  return make_agent(0, global_dim, 1e-3, rng);
}

std::vector<double> random_vec(int n, std::uint64_t seed, double lo = 0.0,
                               double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

Transition make_transition(int num_agents, std::uint64_t seed,
                           int global_dim = kGlobalDim) {
  Rng rng(seed);
  Transition t;
  t.global_state = random_vec(global_dim, rng.next_u64());
  t.next_global_state = random_vec(global_dim, rng.next_u64());
  for (int i = 0; i < num_agents; ++i) {
    t.local_states.push_back(random_vec(10, rng.next_u64()));
    t.next_local_states.push_back(random_vec(10, rng.next_u64()));
    Action a;
    for (double& v : a) v = rng.uniform();
    t.actions.push_back(a);
    t.rewards.push_back(rng.uniform(-0.25, 0.25));
  }
  return t;
}

}  // namespace

TEST_CASE("agent construction: table shapes, targets equal mains") {
  Agent agent = test_agent(1);
  CHECK(agent.actor.layer_sizes == std::vector<int>{10, 32, 32, 5});
  CHECK(agent.critic.layer_sizes == std::vector<int>{48, 64, 64, 1});
  CHECK(agent.target_actor.params == agent.actor.params);
  CHECK(agent.target_critic.params == agent.critic.params);
  CHECK(agent.actor.num_params() == 10 * 32 + 32 + 32 * 32 + 32 + 32 * 5 + 5);
}

TEST_CASE("act: epsilon 0 gives the raw sigmoid output in (0,1)") {
  Agent agent = test_agent(2);
  OuNoise noise(kActionDim, OuParams{});
  Rng rng(3);
  auto state = random_vec(10, 4);
  Action a = act(agent, state, 0.0, noise, rng);
  for (double v : a) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  // No rng consumption at epsilon 0.
  Rng untouched(3);
  CHECK(rng.next_u64() == untouched.next_u64());
}

TEST_CASE("act: zero-weight actor outputs 0.5 everywhere") {
  Agent agent = test_agent(5);
  set_params(agent.actor, std::vector<double>(agent.actor.num_params(), 0.0));
  Action a = act_deterministic(agent, std::vector<double>(10, 0.3));
  for (double v : a) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("act: clipping bounds noisy actions to [0,1]") {
  Agent agent = test_agent(6);
  // Huge volatility guarantees excursions past both bounds.
  OuNoise noise(kActionDim, OuParams{1.0, 0.0, 50.0, 0.9});
  Rng rng(7);
  auto state = random_vec(10, 8);
  bool hit_low = false;
  bool hit_high = false;
  for (int trial = 0; trial < 200; ++trial) {
    Action a = act(agent, state, 1.0, noise, rng);
    for (double v : a) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (v == 0.0) hit_low = true;
      if (v == 1.0) hit_high = true;
    }
  }
  CHECK(hit_low);
  CHECK(hit_high);
}

TEST_CASE("critic_input: concatenation layout") {
  auto global = random_vec(kGlobalDim, 9);
  Action a{0.1, 0.2, 0.3, 0.4, 0.5};
  auto in = critic_input(global, a);
  REQUIRE(in.size() == kGlobalDim + 5);
  for (int k = 0; k < kGlobalDim; ++k) CHECK(in[k] == global[k]);
  for (int k = 0; k < 5; ++k) CHECK(in[kGlobalDim + k] == a[k]);

  // max_slices = 8 scenario: 6 + 7 + 40 + 5 = 54.
  auto wide = random_vec(6 + 7 + 40, 10);
  CHECK(critic_input(wide, a).size() == 54);

  Action zero{};
  auto zin = critic_input(global, zero);
  for (int k = 0; k < 5; ++k) CHECK(zin[kGlobalDim + k] == 0.0);
}

TEST_CASE("critic_input: same state, different actions differ only in the tail") {
  auto global = random_vec(kGlobalDim, 11);
  Action a{0.1, 0.1, 0.1, 0.1, 0.1};
  Action b{0.9, 0.9, 0.9, 0.9, 0.9};
  auto ia = critic_input(global, a);
  auto ib = critic_input(global, b);
  for (int k = 0; k < kGlobalDim; ++k) CHECK(ia[k] == ib[k]);
  for (int k = kGlobalDim; k < kGlobalDim + 5; ++k) CHECK(ia[k] != ib[k]);
}

TEST_CASE("td_target: fixed target critic value") {
  Agent agent = test_agent(12);
  // Zero everything, then set the output bias to atanh(0.2): the target
  // critic outputs exactly 0.2 regardless of input.
  set_params(agent.target_critic,
             std::vector<double>(agent.critic.num_params(), 0.0));
  agent.target_critic.params.back() = std::atanh(0.2);
  double y = td_target(agent, 0.5, random_vec(kGlobalDim, 13), random_vec(10, 14), 0.99);
  CHECK(y == doctest::Approx(0.698).epsilon(1e-12));
}

TEST_CASE("td_target: gamma 0 reduces to the reward") {
  Agent agent = test_agent(15);
  double y = td_target(agent, 0.37, random_vec(kGlobalDim, 16), random_vec(10, 17), 0.0);
  CHECK(y == doctest::Approx(0.37).epsilon(1e-15));
}

TEST_CASE("td_target: zero-parameter target critic bootstraps tanh(0) = 0") {
  Agent agent = test_agent(18);
  set_params(agent.target_critic,
             std::vector<double>(agent.critic.num_params(), 0.0));
  double y = td_target(agent, -0.1, random_vec(kGlobalDim, 19), random_vec(10, 20), 0.99);
  CHECK(y == doctest::Approx(-0.1).epsilon(1e-15));
}

TEST_CASE("update_critic: exact critic keeps loss 0 and params fixed") {
  Agent agent = test_agent(21);
  // Make main and target critics identical constant-output nets and the
  // reward consistent with the fixed point r = (1 - gamma) * q.
  std::vector<double> zero(agent.critic.num_params(), 0.0);
  set_params(agent.critic, zero);
  set_params(agent.target_critic, zero);
  double q = 0.3;
  agent.critic.params.back() = std::atanh(q);
  agent.target_critic.params.back() = std::atanh(q);

  Transition t = make_transition(1, 22);
  t.rewards[0] = (1.0 - 0.99) * q;
  std::vector<const Transition*> batch{&t};
  auto params_before = agent.critic.params;
  double loss = update_critic(agent, batch, 0.99);
  CHECK(loss <= 1e-30);
  // Params move at most by optimizer-epsilon effects on the residual ulp.
  for (std::size_t k = 0; k < params_before.size(); ++k) {
    CHECK(std::fabs(agent.critic.params[k] - params_before[k]) <= 1e-10);
  }
}

TEST_CASE("update_critic: loss gradient matches finite differences") {
  Agent agent = test_agent(23, 12);  // small global dim keeps FD cheap
  Transition t = make_transition(1, 24, 12);
  std::vector<const Transition*> batch{&t};
  const double gamma = 0.99;

  // Frozen targets make the objective a pure function of the critic params.
  double y = td_target(agent, t.rewards[0], t.next_global_state,
                       t.next_local_states[0], gamma);
  auto objective = [&]() {
    auto in = critic_input(t.global_state, t.actions[0]);
    double q = forward(agent.critic, in)[0];
    return (q - y) * (q - y);
  };

  ForwardCache cache;
  auto in = critic_input(t.global_state, t.actions[0]);
  double q0 = forward(agent.critic, in, cache)[0];
  double output_grad = 2.0 * (q0 - y);
  auto analytic = backward(agent.critic, cache, std::span(&output_grad, 1));

  auto fd = finite_difference(agent.critic.params, objective);
  CHECK(max_mixed_error(analytic.params, fd) <= 1e-4);
}

TEST_CASE("update_critic: loss decreases over repeated updates on a fixed batch") {
  Agent agent = test_agent(25);
  std::vector<Transition> storage;
  for (int k = 0; k < 8; ++k) storage.push_back(make_transition(1, 26 + k));
  std::vector<const Transition*> batch;
  for (const auto& t : storage) batch.push_back(&t);

  double first = update_critic(agent, batch, 0.99);
  double last = first;
  for (int it = 0; it < 99; ++it) last = update_critic(agent, batch, 0.99);
  CHECK(last < first);
}

TEST_CASE("update_actor: critic blind to actions leaves the actor unchanged") {
  Agent agent = test_agent(30);
  // Zero the first-layer weight columns that read the action slice.
  const int in_dim = agent.critic.input_dim();
  for (int j = 0; j < 64; ++j) {
    for (int i = in_dim - kActionDim; i < in_dim; ++i) {
      agent.critic.params[static_cast<std::size_t>(j) * in_dim + i] = 0.0;
    }
  }
  Transition t = make_transition(1, 31);
  std::vector<const Transition*> batch{&t};
  auto before = agent.actor.params;
  update_actor(agent, batch);
  CHECK(agent.actor.params == before);
}

TEST_CASE("update_actor: repeated ascent drives the actor toward the bowl optimum") {
  // Hand-built critic Q(s, a) = -sum_k |a_k - 0.7| via two relu units per
  // action dim; gradient ascent on it has the closed-form optimum a = 0.7.
  const int global_dim = 4;
  const int in_dim = global_dim + kActionDim;
  Mlp critic = Mlp::make({in_dim, 2 * kActionDim, 1},
                         {Activation::relu, Activation::identity});
  for (int k = 0; k < kActionDim; ++k) {
    int col = global_dim + k;
    // relu(a - 0.7) and relu(0.7 - a)
    critic.params[static_cast<std::size_t>(2 * k) * in_dim + col] = 1.0;
    critic.params[static_cast<std::size_t>(2 * k + 1) * in_dim + col] = -1.0;
  }
  double* bias = critic.params.data() + static_cast<std::size_t>(2 * kActionDim) * in_dim;
  for (int k = 0; k < kActionDim; ++k) {
    bias[2 * k] = -0.7;
    bias[2 * k + 1] = 0.7;
  }
  // Output layer: -1 on every hidden unit.
  std::size_t out_off = critic.layer_offset(1);
  for (int k = 0; k < 2 * kActionDim; ++k) critic.params[out_off + k] = -1.0;

  Agent agent;
  agent.slice_id = 0;
  Rng rng(32);
  agent.actor = Mlp::make(actor_layer_sizes(), actor_activations());
  init_params(agent.actor, rng);
  agent.critic = critic;
  agent.target_actor = agent.actor;
  agent.target_critic = critic;
  agent.actor_opt = AdamState(agent.actor.num_params(), 3e-3);
  agent.critic_opt = AdamState(agent.critic.num_params(), 1e-3);

  Transition t = make_transition(1, 33, global_dim);
  std::vector<const Transition*> batch{&t};
  for (int it = 0; it < 3000; ++it) update_actor(agent, batch);
  Action a = act_deterministic(agent, t.local_states[0]);
  for (double v : a) CHECK(v == doctest::Approx(0.7).epsilon(0.05));
}

TEST_CASE("update_actor: full chain gradient matches finite differences") {
  Agent agent = test_agent(34, 12);
  Transition t = make_transition(1, 35, 12);

  auto objective = [&]() {
    auto a = forward(agent.actor, t.local_states[0]);
    Action action;
    std::copy(a.begin(), a.end(), action.begin());
    auto in = critic_input(t.global_state, action);
    return forward(agent.critic, in)[0];
  };

  ForwardCache actor_cache, critic_cache;
  const auto& a = forward(agent.actor, t.local_states[0], actor_cache);
  Action action;
  std::copy(a.begin(), a.end(), action.begin());
  auto in = critic_input(t.global_state, action);
  forward(agent.critic, in, critic_cache);
  double one = 1.0;
  auto critic_grads = backward(agent.critic, critic_cache, std::span(&one, 1));
  std::span<const double> dq_da(critic_grads.input.data() + 12, kActionDim);
  auto analytic = backward(agent.actor, actor_cache, dq_da);

  auto fd = finite_difference(agent.actor.params, objective);
  CHECK(max_mixed_error(analytic.params, fd) <= 1e-4);
}

TEST_CASE("soft_update: tau blending, tau=1 copy, fixed point") {
  Mlp main = Mlp::make({1, 1}, {Activation::identity});
  Mlp target = Mlp::make({1, 1}, {Activation::identity});
  set_params(main, std::vector<double>{1.0, 1.0});
  set_params(target, std::vector<double>{0.0, 0.0});
  soft_update(main, target, 0.1);
  CHECK(target.params[0] == doctest::Approx(0.1).epsilon(1e-15));

  soft_update(main, target, 1.0);
  CHECK(target.params == main.params);

  auto before = target.params;
  soft_update(main, target, 0.37);  // main == target: unchanged
  CHECK(target.params == before);
}

TEST_CASE("soft_update: shape mismatch throws") {
  Mlp main = Mlp::make({2, 1}, {Activation::identity});
  Mlp target = Mlp::make({3, 1}, {Activation::identity});
  CHECK_THROWS_AS(soft_update(main, target, 0.1), DimensionMismatch);
}

TEST_CASE("soft_update: target lag contracts toward a frozen main") {
  Agent agent = test_agent(36);
  Rng rng(37);
  for (double& p : agent.target_actor.params) p += rng.uniform(-0.5, 0.5);
  double gap = 0.0;
  for (std::size_t k = 0; k < agent.actor.params.size(); ++k) {
    gap = std::max(gap, std::fabs(agent.target_actor.params[k] - agent.actor.params[k]));
  }
  for (int it = 0; it < 10; ++it) {
    soft_update(agent.actor, agent.target_actor, 0.1);
    double next_gap = 0.0;
    for (std::size_t k = 0; k < agent.actor.params.size(); ++k) {
      next_gap = std::max(next_gap,
                          std::fabs(agent.target_actor.params[k] - agent.actor.params[k]));
    }
    CHECK(next_gap <= 0.9 * gap + 1e-15);
    gap = next_gap;
  }
}

TEST_CASE("replay buffer: FIFO eviction and bounded size") {
  ReplayBuffer buffer(3);
  for (int k = 0; k < 5; ++k) {
    Transition t = make_transition(1, 40 + k);
    t.rewards[0] = k;
    buffer.push(std::move(t));
  }
  CHECK(buffer.size() == 3);
  CHECK(buffer.at(0).rewards[0] == 2.0);  // oldest surviving
  CHECK(buffer.at(2).rewards[0] == 4.0);
}

TEST_CASE("replay buffer: sampling gate and uniformity within 3 sigma") {
  ReplayBuffer buffer(64);
  Rng rng(50);
  CHECK_THROWS_AS(buffer.sample(1, rng), ConfigError);
  for (int k = 0; k < 64; ++k) {
    Transition t = make_transition(1, 100 + k);
    t.rewards[0] = k;
    buffer.push(std::move(t));
  }
  const int draws = 64000;
  std::vector<int> counts(64, 0);
  for (int k = 0; k < draws / 10; ++k) {
    for (const Transition* t : buffer.sample(10, rng)) {
      counts[static_cast<int>(t->rewards[0])] += 1;
    }
  }
  const double p = 1.0 / 64.0;
  const double expected = draws * p;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int idx = 0; idx < 64; ++idx) {
    CHECK(std::fabs(counts[idx] - expected) <= 3.0 * sigma);
  }
}

TEST_CASE("OU noise: mean reversion pulls the state toward mu") {
  OuParams params{1.0, 0.0, 0.1, 0.9};
  OuNoise noise(1, params);
  Rng rng(60);
  // Manual recomputation with an identical generator.
  Rng twin(60);
  double x = 0.0;
  for (int k = 0; k < 100; ++k) {
    double sampled = noise.sample(rng)[0];
    x += params.beta * (params.mu - x) + params.sigma * twin.normal();
    CHECK(sampled == doctest::Approx(x).epsilon(1e-15));
  }
}

TEST_CASE("OU noise: sample mean near mu over many steps") {
  OuParams params{1.0, 0.0, 0.1, 0.9};
  OuNoise noise(1, params);
  Rng rng(61);
  double sum = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) sum += noise.sample(rng)[0];
  // 3 standard errors for the AR(1) mean with phi = 1 - beta.
  const double phi = 1.0 - params.beta;
  const double var_x = params.sigma * params.sigma / (1.0 - phi * phi);
  const double se = std::sqrt(var_x / n * (1.0 + phi) / (1.0 - phi));
  CHECK(std::fabs(sum / n - params.mu) <= 3.0 * se);
}

TEST_CASE("exploration_epsilon: linear decay endpoints") {
  CHECK(exploration_epsilon(0, 2000) == 1.0);
  CHECK(exploration_epsilon(1000, 2000) == 0.5);
  CHECK(exploration_epsilon(2000, 2000) == 0.0);
  CHECK(exploration_epsilon(3000, 2000) == 0.0);  // clamped
  CHECK(exploration_epsilon(5, 0) == 0.0);
}

TEST_CASE("train: schedule validation rejects batch > k1") {
  TrainSchedule schedule;
  schedule.k1 = 10;
  schedule.k2 = 5;
  schedule.k3 = 0;
  schedule.batch_size = 50;
  CHECK_THROWS_AS(schedule.validate(), ConfigError);
  schedule.batch_size = 10;
  CHECK_NOTHROW(schedule.validate());
  schedule.gamma = 1.0;
  CHECK_THROWS_AS(schedule.validate(), ConfigError);
}

TEST_CASE("train: first update fires right after the observation stage") {
  EnvConfig cfg;
  cfg.topology = default_topology();
  cfg.num_slices = 2;
  cfg.max_slices = 6;
  Environment env(cfg, 70);

  std::vector<Agent> agents;
  for (int i = 0; i < 2; ++i) {
    Rng rng(71 + i);
    Agent a = make_agent(i, 43, 1e-3, rng);
    agents.push_back(std::move(a));
  }

  TrainSchedule schedule;
  schedule.k1 = 20;
  schedule.k2 = 4;
  schedule.k3 = 3;
  schedule.batch_size = 20;
  TrainStreams streams = TrainStreams::from_root(72);
  TrainResult result = train(env, agents, schedule, OuParams{}, streams);

  REQUIRE(result.trace.size() == 27);
  CHECK(result.trace[19].stage == 1);
  CHECK(std::isnan(result.trace[19].critic_loss[0]));  // no update yet
  CHECK(result.trace[20].stage == 2);
  CHECK(std::isfinite(result.trace[20].critic_loss[0]));
  CHECK(std::isfinite(result.trace[20].mean_q[1]));

  // Epsilon decays linearly through stage 2 and is zero in stage 3.
  CHECK(result.trace[20].epsilon == doctest::Approx(1.0));
  CHECK(result.trace[21].epsilon == doctest::Approx(0.75));
  CHECK(result.trace[22].epsilon == doctest::Approx(0.5));
  CHECK(result.trace[23].epsilon == doctest::Approx(0.25));
  CHECK(result.trace[24].stage == 3);
  CHECK(result.trace[24].epsilon == 0.0);
  CHECK(result.trace[26].epsilon == 0.0);
}

TEST_CASE("train: stored actions stay in [0,1] throughout") {
  EnvConfig cfg;
  cfg.topology = default_topology();
  cfg.num_slices = 3;
  cfg.max_slices = 6;
  Environment env(cfg, 80);
  std::vector<Agent> agents;
  for (int i = 0; i < 3; ++i) {
    Rng rng(81 + i);
    agents.push_back(make_agent(i, 43, 1e-3, rng));
  }
  TrainSchedule schedule;
  schedule.k1 = 10;
  schedule.k2 = 10;
  schedule.k3 = 5;
  schedule.batch_size = 10;
  TrainStreams streams = TrainStreams::from_root(82);

  // Inspect executed actions through the environment: scaled grants never
  // exceed the 2/5 caps when raw actions are in [0,1].
  TrainResult result = train(env, agents, schedule, OuParams{}, streams);
  CHECK(result.trace.size() == 25);
  for (const AllocationGrant& g : env.ledger().active()) {
    for (double e : g.compute_alloc) CHECK(e <= 40.0 + 1e-12);
    for (double b : g.bandwidth_alloc) CHECK(b <= 4.0 + 1e-12);
  }
}

TEST_CASE("train: agent count must match the environment") {
  EnvConfig cfg;
  cfg.topology = default_topology();
  cfg.num_slices = 3;
  Environment env(cfg, 90);
  std::vector<Agent> agents;
  Rng rng(91);
  agents.push_back(make_agent(0, 43, 1e-3, rng));
  TrainSchedule schedule;
  schedule.k1 = 2;
  schedule.k2 = 0;
  schedule.k3 = 0;
  schedule.batch_size = 1;
  TrainStreams streams = TrainStreams::from_root(92);
  CHECK_THROWS_AS(train(env, agents, schedule, OuParams{}, streams), ConfigError);
}
