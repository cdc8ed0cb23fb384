#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/gradcheck.hpp"
#include "slicesim/drl/agent.hpp"
#include "slicesim/drl/losses.hpp"
#include "slicesim/drl/replay.hpp"
#include "slicesim/nn/adam.hpp"
#include "slicesim/nn/gaussian.hpp"
#include "slicesim/nn/mlp.hpp"

using namespace slicesim;
using namespace slicesim::drl;

namespace {

// One-state bandit with reward -(a - 0.3)^2; every step is terminal.
Transition bandit_step(const Eigen::VectorXf& raw, const Eigen::VectorXf& action,
                       float log_prob) {
  Transition t;
  t.observation = Eigen::VectorXf::Ones(1);
  t.next_observation = Eigen::VectorXf::Ones(1);
  t.action = raw;
  t.reward = -(action[0] - 0.3f) * (action[0] - 0.3f);
  t.done = true;
  t.log_prob = log_prob;
  return t;
}

float train_bandit(Agent& agent, int steps) {
  const Eigen::VectorXf obs = Eigen::VectorXf::Ones(1);
  for (int i = 0; i < steps; ++i) {
    const auto s = agent.select_action(obs, true);
    agent.observe(bandit_step(s.raw, s.action, s.log_prob));
  }
  return agent.select_action(obs, false).action[0];
}

OffPolicyConfig bandit_off_policy() {
  OffPolicyConfig c;
  c.hidden = {32, 32};
  c.batch_size = 64;
  c.buffer_capacity = 10000;
  c.warmup_steps = 200;
  c.actor_lr = 1e-3;
  c.critic_lr = 1e-3;
  c.tau = 0.05;
  c.target_update_every = 1;
  c.noise_sigma = 0.2;
  return c;
}

}  // namespace

TEST_CASE("finite differences agree with every analytic gradient") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rep = testing::check_all(seed);
    CHECK(rep.checked > 0);
    CHECK_MESSAGE(rep.worst < 1e-4, "seed " << seed << " worst " << rep.worst);
  }
}

TEST_CASE("trivial networks") {
  nn::Mlp<double> zero({3, 4, 2}, nn::OutputActivation::kTanh);
  CHECK(zero.forward_one(Eigen::Vector3d(1, -2, 3)).norm() == 0.0);

  nn::Mlp<double> id({3, 3}, nn::OutputActivation::kLinear);
  id.weight(0).setIdentity();
  const Eigen::Vector3d x(0.5, -1.5, 2.0);
  CHECK(id.forward_one(x) == x);
  CHECK_THROWS_AS(id.forward_one(Eigen::Vector2d(1, 2)), std::invalid_argument);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters alone") {
    nn::Adam<double> opt(0.1);
    Eigen::VectorXd p = Eigen::Vector2d(1, 2);
    opt.step(p, Eigen::Vector2d(1, 1));
    const Eigen::VectorXd after_one = p;
    const Eigen::VectorXd m = opt.state().m;
    opt.step(p, Eigen::Vector2d::Zero());
    CHECK(opt.state().m.isApprox(0.9 * m));
    // The decayed first moment still moves the parameters a little.
    CHECK((p - after_one).norm() > 0);
    nn::Adam<double> fresh(0.1);
    Eigen::VectorXd q = Eigen::Vector2d(1, 2);
    fresh.step(q, Eigen::Vector2d::Zero());
    CHECK(q == Eigen::VectorXd(Eigen::Vector2d(1, 2)));
  }
  SUBCASE("quadratic converges") {
    nn::Adam<double> opt(0.05);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 5.0);
    for (int i = 0; i < 500; ++i) {
      const Eigen::VectorXd g = 2.0 * (p.array() - 1.7).matrix();
      opt.step(p, g);
    }
    CHECK(std::abs(p[0] - 1.7) < 1e-3);
  }
  SUBCASE("deterministic") {
    nn::Adam<float> a(1e-3), b(1e-3);
    Eigen::VectorXf pa = Eigen::VectorXf::LinSpaced(5, -1, 1), pb = pa;
    const Eigen::VectorXf g = Eigen::VectorXf::LinSpaced(5, 0.3f, -0.2f);
    for (int i = 0; i < 10; ++i) {
      a.step(pa, g);
      b.step(pb, g);
    }
    CHECK(pa == pb);
  }
}

TEST_CASE("soft update with tau = 1 copies the source") {
  Eigen::VectorXf target = Eigen::VectorXf::Zero(4);
  const Eigen::VectorXf source = Eigen::VectorXf::LinSpaced(4, 1, 4);
  nn::soft_update(target, source, 1.0);
  CHECK(target == source);
  nn::soft_update(target, Eigen::VectorXf::Zero(4).eval(), 0.25);
  CHECK(target.isApprox(0.75f * source));
}

TEST_CASE("targets") {
  const Eigen::RowVectorXf r = Eigen::RowVector3f(1, 2, 3);
  const Eigen::RowVectorXf done = Eigen::RowVector3f(1, 0, 0);
  const Eigen::RowVectorXf q1 = Eigen::RowVector3f(10, 5, -1);
  const Eigen::RowVectorXf q2 = Eigen::RowVector3f(4, 6, -2);
  const auto y = bootstrap_targets<float>(r, done, q1, 0.5f);
  CHECK(y[0] == 1.0f);
  CHECK(y[1] == doctest::Approx(4.5));
  const auto twin = twin_targets<float>(r, done, q1, q2, 0.5f);
  const auto y2 = bootstrap_targets<float>(r, done, q2, 0.5f);
  for (int j = 0; j < 3; ++j) {
    CHECK(twin[j] <= y[j]);
    CHECK(twin[j] <= y2[j]);
  }
  CHECK(twin[0] == 1.0f);
}

TEST_CASE("ppo surrogate edge cases") {
  const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(4);
  const Eigen::RowVectorXd adv = Eigen::RowVector4d(1, -2, 0.5, 3);
  const auto s = ppo_surrogate<double>(ones, adv, 0.2);
  CHECK(s.clipped == s.unclipped);
  const Eigen::RowVectorXd zero_adv = Eigen::RowVectorXd::Zero(4);
  const Eigen::RowVectorXd ratio = Eigen::RowVector4d(0.5, 1.1, 1.5, 0.9);
  CHECK(ppo_surrogate_logp_grad<double>(ratio, zero_adv, 0.2).norm() == 0.0);
  // Clipped branches contribute nothing.
  const auto g = ppo_surrogate_logp_grad<double>(Eigen::RowVector2d(1.5, 0.5),
                                                 Eigen::RowVector2d(1, -1), 0.2);
  CHECK(g.norm() == 0.0);
}

TEST_CASE("gae on a short trajectory") {
  const Eigen::RowVectorXd r = Eigen::RowVector3d(1, 1, 1);
  const Eigen::RowVectorXd v = Eigen::RowVector3d::Zero();
  const Eigen::RowVectorXd done = Eigen::RowVector3d(0, 0, 1);
  Eigen::RowVectorXd adv, ret;
  gae<double>(r, v, v, done, 0.5, 1.0, adv, ret);
  CHECK(adv[2] == 1.0);
  CHECK(adv[1] == doctest::Approx(1.5));
  CHECK(adv[0] == doctest::Approx(1.75));
  CHECK(ret == adv);
}

TEST_CASE("replay sampling is uniform") {
  ReplayBuffer buf(1, 1, 10);
  for (int i = 0; i < 25; ++i) {
    Transition t;
    t.observation = Eigen::VectorXf::Constant(1, float(i));
    t.next_observation = t.observation;
    t.action = Eigen::VectorXf::Zero(1);
    buf.push(t);
  }
  CHECK(buf.size() == 10);
  Rng rng(3);
  std::vector<long> counts(10);
  for (int k = 0; k < 10000; ++k) {
    for (auto i : buf.sample_indices(100, rng)) ++counts[std::size_t(i)];
  }
  const double expected = 1e6 / 10;
  double chi = 0;
  for (long c : counts) chi += (c - expected) * (c - expected) / expected;
  CHECK(chi < 21.666);  // chi-square, 9 dof, 1%
  // Only the 10 most recent observations survive.
  const auto b = buf.gather(buf.sample_indices(50, rng));
  CHECK(b.observations.minCoeff() >= 15);
}

TEST_CASE("ornstein-uhlenbeck noise has zero long-run mean") {
  NoiseProcess ou(NoiseKind::kOrnsteinUhlenbeck, 1, 0.2, 0.15);
  Rng rng(8);
  double sum = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += ou.sample(rng)[0];
  CHECK(std::abs(sum / n) < 0.01);
}

TEST_CASE("gaussian exploration spread matches the log std") {
  PpoConfig c;
  c.hidden = {8};
  c.init_log_std = -0.7;
  PpoAgent agent(2, 1, c, 5);
  const Eigen::VectorXf obs = Eigen::Vector2f(0.3f, -0.1f);
  const float mean = agent.policy().mean_net.forward_one(obs)[0];
  double s1 = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto a = agent.select_action(obs, true);
    const double d = a.raw[0] - mean;
    s1 += d;
    s2 += d * d;
    REQUIRE(std::abs(a.action[0]) <= 1.0f);
  }
  const double sd = std::sqrt(s2 / n - (s1 / n) * (s1 / n));
  CHECK(std::abs(sd / std::exp(-0.7) - 1.0) < 0.05);
}

TEST_CASE("deterministic actions without exploration") {
  Td3Agent td3(3, 2, bandit_off_policy(), 1);
  const Eigen::VectorXf obs = Eigen::Vector3f(0.1f, 0.2f, 0.3f);
  CHECK(td3.select_action(obs, false).action == td3.select_action(obs, false).action);
  PpoAgent ppo(3, 2, PpoConfig{}, 1);
  CHECK(ppo.select_action(obs, false).action == ppo.select_action(obs, false).action);
  for (int i = 0; i < 1000; ++i) {
    const auto a = td3.select_action(obs, true).action;
    REQUIRE(a.cwiseAbs().maxCoeff() <= 1.0f);
  }
}

TEST_CASE("td3 solves the bandit") {
  Td3Agent agent(1, 1, bandit_off_policy(), 11);
  const float a = train_bandit(agent, 2200);
  CHECK(agent.gradient_steps() <= 2001);
  CHECK(std::abs(a - 0.3f) < 0.05f);
}

TEST_CASE("ddpg solves the bandit") {
  DdpgAgent agent(1, 1, bandit_off_policy(), 12);
  const float a = train_bandit(agent, 2200);
  CHECK(std::abs(a - 0.3f) < 0.05f);
}

TEST_CASE("ppo solves the bandit") {
  PpoConfig c;
  c.hidden = {32, 32};
  c.actor_lr = 3e-3;
  c.critic_lr = 3e-3;
  c.init_log_std = -0.5;
  PpoAgent agent(1, 1, c, 13);
  const float a = train_bandit(agent, 5000);
  CHECK(std::abs(a - 0.3f) < 0.1f);
}

TEST_CASE("td3 delays actor updates") {
  auto c = bandit_off_policy();
  c.policy_delay = 2;
  Td3Agent agent(1, 1, c, 2);
  Batch b{Eigen::MatrixXf::Ones(1, 8), Eigen::MatrixXf::Zero(1, 8), Eigen::RowVectorXf::Ones(8),
          Eigen::MatrixXf::Ones(1, 8), Eigen::RowVectorXf::Ones(8)};
  const Eigen::VectorXf a0 = agent.actor().params();
  agent.update(b);  // updates_ = 1: critic only
  CHECK(agent.actor().params() == a0);
  agent.update(b);  // updates_ = 2: actor too
  CHECK(agent.actor().params() != a0);
}

TEST_CASE("no parameter turns non-finite under long fuzzed training") {
  auto c = bandit_off_policy();
  c.warmup_steps = 64;
  Td3Agent agent(4, 3, c, 21);
  Rng rng(4);
  std::normal_distribution<float> n(0, 3);
  for (int i = 0; i < 10000; ++i) {
    Transition t;
    t.observation = Eigen::VectorXf(4);
    for (auto& x : t.observation) x = n(rng);
    t.next_observation = t.observation * 0.9f;
    t.action = agent.select_action(t.observation, true).raw;
    t.reward = std::clamp(n(rng), -1.0f, 1.0f);
    t.done = i % 50 == 49;
    agent.observe(t);
  }
  CHECK(agent.gradient_steps() > 9000);
  CHECK(agent.actor().params().allFinite());
  CHECK(agent.critic(0).params().allFinite());
  CHECK(agent.critic(1).params().allFinite());
}

TEST_CASE("table defaults") {
  const auto g = default_off_policy_config(AgentRole::kGlobal, "", false);
  CHECK(g.hidden == std::vector<int>{300, 200});
  CHECK(g.buffer_capacity == 100000);
  CHECK(g.noise_sigma == 0.2);
  CHECK(g.batch_size == 128);
  CHECK(g.actor_lr == 1e-4);
  CHECK(g.critic_lr == 1e-3);
  CHECK(g.tau == 0.001);
  CHECK(g.target_update_every == 10);
  CHECK(g.gamma == 0.99);
  const auto s = default_off_policy_config(AgentRole::kSlice, "URLLC", false);
  CHECK(s.hidden == std::vector<int>{500, 400});
  CHECK(s.buffer_capacity == 1000000);
  CHECK(s.noise_sigma == 0.1);
  const auto ou = default_off_policy_config(AgentRole::kSlice, "eMBB", true);
  CHECK(ou.noise == NoiseKind::kOrnsteinUhlenbeck);
  CHECK(ou.noise_sigma == 0.5);
  const auto p = default_ppo_config(AgentRole::kSlice);
  CHECK(p.rollout == 500);
  CHECK(p.epochs == 10);
  CHECK(p.clip == 0.2);
}
