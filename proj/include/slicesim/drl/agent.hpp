#ifndef SLICESIM_DRL_AGENT_HPP_
#define SLICESIM_DRL_AGENT_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slicesim/checkpoint.hpp"
#include "slicesim/drl/replay.hpp"
#include "slicesim/nn/adam.hpp"
#include "slicesim/nn/gaussian.hpp"
#include "slicesim/nn/mlp.hpp"
#include "slicesim/random.hpp"

namespace slicesim::drl {

/// What select_action returns. `action` is always in [-1, 1]; `raw` is what
/// goes into the transition (equal to `action` for deterministic actors).
struct ActionSample {
  Eigen::VectorXf action;
  Eigen::VectorXf raw;
  float log_prob = 0.0f;
};

class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string algorithm() const = 0;
  virtual int obs_dim() const = 0;
  virtual int action_dim() const = 0;

  virtual ActionSample select_action(const Eigen::Ref<const Eigen::VectorXf>& obs,
                                     bool explore) = 0;
  /// Stores a transition and runs whatever updates are due.
  virtual void observe(const Transition& t) = 0;
  virtual void end_episode() {}

  virtual std::int64_t transitions_seen() const = 0;
  virtual std::int64_t gradient_steps() const = 0;

  /// Parameters, targets and optimiser moments under `prefix`.
  virtual void save(Checkpoint& ckpt, const std::string& prefix) const = 0;
  virtual void load(const Checkpoint& ckpt, const std::string& prefix) = 0;
};

struct OffPolicyConfig {
  std::vector<int> hidden{300, 200};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double tau = 0.001;
  int target_update_every = 10;
  int batch_size = 128;
  std::int64_t buffer_capacity = 100000;
  int warmup_steps = 1000;
  int updates_per_step = 1;
  NoiseKind noise = NoiseKind::kGaussian;
  double noise_sigma = 0.1;
  double ou_theta = 0.15;
  double final_layer_scale = 1e-3;
  // TD3 only.
  int policy_delay = 2;
  double target_noise = 0.2;
  double target_noise_clip = 0.5;
};

struct PpoConfig {
  std::vector<int> hidden{300, 200};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int epochs = 10;
  int rollout = 500;
  int minibatch = 125;
  double value_coef = 0.5;
  double init_log_std = -1.0;
  double final_layer_scale = 1e-3;
  bool normalize_advantages = true;
};

/// Shared machinery of DDPG and TD3: actor, `num_critics` critics, their
/// targets, replay and exploration noise.
class OffPolicyAgent : public Agent {
 public:
  int obs_dim() const override { return obs_dim_; }
  int action_dim() const override { return action_dim_; }

  ActionSample select_action(const Eigen::Ref<const Eigen::VectorXf>& obs,
                             bool explore) override;
  void observe(const Transition& t) override;
  void end_episode() override { noise_.reset(); }

  std::int64_t transitions_seen() const override { return seen_; }
  std::int64_t gradient_steps() const override { return updates_; }

  void save(Checkpoint& ckpt, const std::string& prefix) const override;
  void load(const Checkpoint& ckpt, const std::string& prefix) override;

  const OffPolicyConfig& config() const { return cfg_; }
  const nn::Mlp<float>& actor() const { return actor_; }
  const nn::Mlp<float>& critic(int i) const { return critics_[std::size_t(i)]; }
  const ReplayBuffer& buffer() const { return buffer_; }

  /// One gradient step on a batch, bypassing the replay buffer.
  void update(const Batch& batch);

 protected:
  OffPolicyAgent(int obs_dim, int action_dim, OffPolicyConfig cfg, std::uint64_t seed,
                 int num_critics);

  virtual Eigen::RowVectorXf targets(const Batch& batch) = 0;
  virtual bool actor_due() const = 0;

  void update_targets();

  int obs_dim_;
  int action_dim_;
  OffPolicyConfig cfg_;
  nn::Mlp<float> actor_, actor_target_;
  std::vector<nn::Mlp<float>> critics_, critic_targets_;
  nn::Adam<float> actor_opt_;
  std::vector<nn::Adam<float>> critic_opts_;
  ReplayBuffer buffer_;
  NoiseProcess noise_;
  Rng noise_rng_;
  Rng replay_rng_;
  std::int64_t seen_ = 0;
  std::int64_t updates_ = 0;
};

class DdpgAgent final : public OffPolicyAgent {
 public:
  DdpgAgent(int obs_dim, int action_dim, OffPolicyConfig cfg, std::uint64_t seed);
  std::string algorithm() const override { return "ddpg"; }

 protected:
  Eigen::RowVectorXf targets(const Batch& batch) override;
  bool actor_due() const override { return true; }
};

class Td3Agent final : public OffPolicyAgent {
 public:
  Td3Agent(int obs_dim, int action_dim, OffPolicyConfig cfg, std::uint64_t seed);
  std::string algorithm() const override { return "td3"; }

 protected:
  Eigen::RowVectorXf targets(const Batch& batch) override;
  bool actor_due() const override { return updates_ % cfg_.policy_delay == 0; }
};

/// Clipped-surrogate PPO with a tanh-squashed diagonal Gaussian policy.
/// Transitions carry the pre-squash sample and its log-probability.
class PpoAgent final : public Agent {
 public:
  PpoAgent(int obs_dim, int action_dim, PpoConfig cfg, std::uint64_t seed);

  std::string algorithm() const override { return "ppo"; }
  int obs_dim() const override { return obs_dim_; }
  int action_dim() const override { return action_dim_; }

  ActionSample select_action(const Eigen::Ref<const Eigen::VectorXf>& obs,
                             bool explore) override;
  void observe(const Transition& t) override;

  std::int64_t transitions_seen() const override { return seen_; }
  std::int64_t gradient_steps() const override { return updates_; }

  void save(Checkpoint& ckpt, const std::string& prefix) const override;
  void load(const Checkpoint& ckpt, const std::string& prefix) override;

  const PpoConfig& config() const { return cfg_; }
  const nn::GaussianPolicy<float>& policy() const { return policy_; }
  const nn::Mlp<float>& value() const { return value_; }
  std::size_t pending() const { return rollout_.size(); }

 private:
  void train_on_rollout();

  int obs_dim_;
  int action_dim_;
  PpoConfig cfg_;
  nn::GaussianPolicy<float> policy_;
  nn::Mlp<float> value_;
  nn::Adam<float> policy_opt_;
  nn::Adam<float> log_std_opt_;
  nn::Adam<float> value_opt_;
  std::vector<Transition> rollout_;
  Rng sample_rng_;
  Rng shuffle_rng_;
  std::int64_t seen_ = 0;
  std::int64_t updates_ = 0;
};

enum class AgentRole { kGlobal, kSlice };

/// Table defaults for the given role; `slice_name` picks the DDPG noise.
OffPolicyConfig default_off_policy_config(AgentRole role, const std::string& slice_name,
                                          bool ornstein_uhlenbeck);
PpoConfig default_ppo_config(AgentRole role);

}  // namespace slicesim::drl

#endif  // SLICESIM_DRL_AGENT_HPP_
