#include "slicesim/drl/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "slicesim/drl/losses.hpp"

namespace slicesim::drl {
namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void save_adam(Checkpoint& c, const std::string& name, const nn::Adam<float>& opt) {
  const auto& st = opt.state();
  c.put(name + ".adam_m", st.m);
  c.put(name + ".adam_v", st.v);
  c.put(name + ".adam_step", Eigen::VectorXd::Constant(1, double(st.step)));
}

void load_adam(const Checkpoint& c, const std::string& name, nn::Adam<float>& opt,
               Eigen::Index n) {
  auto& st = opt.state();
  if (!c.has(name + ".adam_m")) {
    st = {};
    return;
  }
  st.m = c.get_f32(name + ".adam_m");
  st.v = c.get_f32(name + ".adam_v");
  if (st.m.size() != 0 && (st.m.size() != n || st.v.size() != n)) {
    throw CheckpointError(name + ": optimiser state size mismatch");
  }
  st.step = long(c.get_f64(name + ".adam_step", 1)[0]);
}

void load_params(const Checkpoint& c, const std::string& name, nn::Mlp<float>& net) {
  net.params() = c.get_f32(name, net.num_params());
}

void save_counters(Checkpoint& c, const std::string& prefix, std::int64_t seen,
                   std::int64_t updates) {
  Eigen::VectorXd v(2);
  v << double(seen), double(updates);
  c.put(prefix + "counters", v);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return char(std::tolower(ch)); });
  return s;
}

}  // namespace

OffPolicyAgent::OffPolicyAgent(int obs_dim, int action_dim, OffPolicyConfig cfg,
                               std::uint64_t seed, int num_critics)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      cfg_(std::move(cfg)),
      actor_(layer_sizes(obs_dim, cfg_.hidden, action_dim), nn::OutputActivation::kTanh),
      actor_opt_(cfg_.actor_lr),
      buffer_(obs_dim, action_dim, cfg_.buffer_capacity),
      noise_(cfg_.noise, action_dim, cfg_.noise_sigma, cfg_.ou_theta),
      noise_rng_(make_rng(seed, Stream::kAgentNoise)),
      replay_rng_(make_rng(seed, Stream::kReplay)) {
  if (cfg_.batch_size < 1) throw std::invalid_argument("batch_size < 1");
  if (cfg_.policy_delay < 1) throw std::invalid_argument("policy_delay < 1");
  if (cfg_.target_update_every < 1) throw std::invalid_argument("target_update_every < 1");
  Rng init = make_rng(seed, Stream::kAgentInit);
  actor_.init_uniform(init, float(cfg_.final_layer_scale));
  actor_target_ = actor_;
  for (int i = 0; i < num_critics; ++i) {
    nn::Mlp<float> q(layer_sizes(obs_dim + action_dim, cfg_.hidden, 1),
                     nn::OutputActivation::kLinear);
    q.init_uniform(init);
    critics_.push_back(q);
    critic_targets_.push_back(q);
    critic_opts_.emplace_back(cfg_.critic_lr);
  }
}

ActionSample OffPolicyAgent::select_action(const Eigen::Ref<const Eigen::VectorXf>& obs,
                                           bool explore) {
  if (obs.size() != obs_dim_) throw std::invalid_argument("select_action: bad observation");
  Eigen::VectorXf a;
  if (explore && seen_ < cfg_.warmup_steps) {
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    a.resize(action_dim_);
    for (auto& x : a) x = u(noise_rng_);
  } else {
    a = actor_.forward_one(obs);
    if (explore) a += noise_.sample(noise_rng_);
    a = a.cwiseMax(-1.0f).cwiseMin(1.0f);
  }
  return {a, a, 0.0f};
}

void OffPolicyAgent::observe(const Transition& t) {
  buffer_.push(t);
  ++seen_;
  if (seen_ < cfg_.warmup_steps || buffer_.size() < cfg_.batch_size) return;
  for (int k = 0; k < cfg_.updates_per_step; ++k) {
    update(buffer_.sample(cfg_.batch_size, replay_rng_));
  }
}

void OffPolicyAgent::update(const Batch& batch) {
  const Eigen::RowVectorXf y = targets(batch);
  const Eigen::MatrixXf input = critic_input<float>(batch.observations, batch.actions);
  for (std::size_t i = 0; i < critics_.size(); ++i) {
    Eigen::VectorXf grad = Eigen::VectorXf::Zero(critics_[i].num_params());
    critic_regression<float>(critics_[i], input, y, grad);
    critic_opts_[i].step(critics_[i].params(), grad);
  }
  ++updates_;
  if (actor_due()) {
    Eigen::VectorXf grad = Eigen::VectorXf::Zero(actor_.num_params());
    deterministic_policy_loss<float>(actor_, critics_[0], batch.observations, grad);
    actor_opt_.step(actor_.params(), grad);
  }
  if (updates_ % cfg_.target_update_every == 0) update_targets();
}

void OffPolicyAgent::update_targets() {
  nn::soft_update(actor_target_.params(), actor_.params(), cfg_.tau);
  for (std::size_t i = 0; i < critics_.size(); ++i) {
    nn::soft_update(critic_targets_[i].params(), critics_[i].params(), cfg_.tau);
  }
}

void OffPolicyAgent::save(Checkpoint& c, const std::string& prefix) const {
  c.put(prefix + "actor", actor_.params());
  c.put(prefix + "actor_target", actor_target_.params());
  save_adam(c, prefix + "actor", actor_opt_);
  for (std::size_t i = 0; i < critics_.size(); ++i) {
    const std::string name = prefix + "critic" + std::to_string(i);
    c.put(name, critics_[i].params());
    c.put(name + "_target", critic_targets_[i].params());
    save_adam(c, name, critic_opts_[i]);
  }
  save_counters(c, prefix, seen_, updates_);
}

void OffPolicyAgent::load(const Checkpoint& c, const std::string& prefix) {
  load_params(c, prefix + "actor", actor_);
  load_params(c, prefix + "actor_target", actor_target_);
  load_adam(c, prefix + "actor", actor_opt_, actor_.num_params());
  for (std::size_t i = 0; i < critics_.size(); ++i) {
    const std::string name = prefix + "critic" + std::to_string(i);
    load_params(c, name, critics_[i]);
    load_params(c, name + "_target", critic_targets_[i]);
    load_adam(c, name, critic_opts_[i], critics_[i].num_params());
  }
  const Eigen::VectorXd counters = c.get_f64(prefix + "counters", 2);
  seen_ = std::int64_t(counters[0]);
  updates_ = std::int64_t(counters[1]);
  noise_.reset();
}

DdpgAgent::DdpgAgent(int obs_dim, int action_dim, OffPolicyConfig cfg, std::uint64_t seed)
    : OffPolicyAgent(obs_dim, action_dim, std::move(cfg), seed, 1) {}

Eigen::RowVectorXf DdpgAgent::targets(const Batch& b) {
  const Eigen::MatrixXf next_a = actor_target_.forward(b.next_observations);
  const Eigen::RowVectorXf q_next =
      critic_targets_[0].forward(critic_input<float>(b.next_observations, next_a));
  return bootstrap_targets<float>(b.rewards, b.dones, q_next, float(cfg_.gamma));
}

Td3Agent::Td3Agent(int obs_dim, int action_dim, OffPolicyConfig cfg, std::uint64_t seed)
    : OffPolicyAgent(obs_dim, action_dim, std::move(cfg), seed, 2) {}

Eigen::RowVectorXf Td3Agent::targets(const Batch& b) {
  Eigen::MatrixXf next_a = actor_target_.forward(b.next_observations);
  std::normal_distribution<float> n(0.0f, float(cfg_.target_noise));
  const float c = float(cfg_.target_noise_clip);
  for (Eigen::Index i = 0; i < next_a.size(); ++i) {
    next_a.data()[i] =
        std::clamp(next_a.data()[i] + std::clamp(n(replay_rng_), -c, c), -1.0f, 1.0f);
  }
  const Eigen::MatrixXf in = critic_input<float>(b.next_observations, next_a);
  const Eigen::RowVectorXf q1 = critic_targets_[0].forward(in);
  const Eigen::RowVectorXf q2 = critic_targets_[1].forward(in);
  return twin_targets<float>(b.rewards, b.dones, q1, q2, float(cfg_.gamma));
}

PpoAgent::PpoAgent(int obs_dim, int action_dim, PpoConfig cfg, std::uint64_t seed)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      cfg_(std::move(cfg)),
      policy_(layer_sizes(obs_dim, cfg_.hidden, action_dim), float(cfg_.init_log_std)),
      value_(layer_sizes(obs_dim, cfg_.hidden, 1), nn::OutputActivation::kLinear),
      policy_opt_(cfg_.actor_lr),
      log_std_opt_(cfg_.actor_lr),
      value_opt_(cfg_.critic_lr),
      sample_rng_(make_rng(seed, Stream::kAgentNoise)),
      shuffle_rng_(make_rng(seed, Stream::kReplay)) {
  if (cfg_.rollout < 1 || cfg_.minibatch < 1 || cfg_.epochs < 1) {
    throw std::invalid_argument("PpoConfig: rollout, minibatch and epochs must be >= 1");
  }
  Rng init = make_rng(seed, Stream::kAgentInit);
  policy_.mean_net.init_uniform(init, float(cfg_.final_layer_scale));
  value_.init_uniform(init);
}

ActionSample PpoAgent::select_action(const Eigen::Ref<const Eigen::VectorXf>& obs,
                                     bool explore) {
  if (obs.size() != obs_dim_) throw std::invalid_argument("select_action: bad observation");
  const Eigen::VectorXf mean = policy_.mean_net.forward_one(obs);
  Eigen::VectorXf u = mean;
  if (explore) {
    std::normal_distribution<float> n(0.0f, 1.0f);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u[i] += std::exp(policy_.log_std[i]) * n(sample_rng_);
    }
  }
  const float lp = nn::gaussian_log_prob<float>(u, mean, policy_.log_std)[0];
  return {u.array().tanh().matrix(), u, lp};
}

void PpoAgent::observe(const Transition& t) {
  if (t.observation.size() != obs_dim_ || t.action.size() != action_dim_) {
    throw std::invalid_argument("PpoAgent: transition dimension mismatch");
  }
  rollout_.push_back(t);
  ++seen_;
  if (std::int64_t(rollout_.size()) >= cfg_.rollout) {
    train_on_rollout();
    rollout_.clear();
  }
}

void PpoAgent::train_on_rollout() {
  const Eigen::Index n = Eigen::Index(rollout_.size());
  Eigen::MatrixXf obs(obs_dim_, n), next_obs(obs_dim_, n), samples(action_dim_, n);
  Eigen::RowVectorXf rewards(n), dones(n), old_lp(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Transition& t = rollout_[std::size_t(j)];
    obs.col(j) = t.observation;
    next_obs.col(j) = t.next_observation;
    samples.col(j) = t.action;
    rewards[j] = t.reward;
    dones[j] = t.done ? 1.0f : 0.0f;
    old_lp[j] = t.log_prob;
  }
  const Eigen::RowVectorXf values = value_.forward(obs);
  const Eigen::RowVectorXf next_values = value_.forward(next_obs);
  Eigen::RowVectorXf adv, returns;
  gae<float>(rewards, values, next_values, dones, float(cfg_.gamma), float(cfg_.gae_lambda),
             adv, returns);
  if (cfg_.normalize_advantages && n > 1) {
    const float mu = adv.mean();
    const float sd = std::sqrt((adv.array() - mu).square().sum() / float(n - 1));
    adv = ((adv.array() - mu) / std::max(sd, 1e-8f)).matrix();
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  const Eigen::Index mb = std::min<Eigen::Index>(cfg_.minibatch, n);
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng_);
    for (Eigen::Index start = 0; start + mb <= n; start += mb) {
      Eigen::MatrixXf o(obs_dim_, mb), s(action_dim_, mb);
      Eigen::RowVectorXf lp(mb), a(mb), ret(mb);
      for (Eigen::Index k = 0; k < mb; ++k) {
        const Eigen::Index j = order[std::size_t(start + k)];
        o.col(k) = obs.col(j);
        s.col(k) = samples.col(j);
        lp[k] = old_lp[j];
        a[k] = adv[j];
        ret[k] = returns[j];
      }
      Eigen::VectorXf mean_grad = Eigen::VectorXf::Zero(policy_.mean_net.num_params());
      Eigen::VectorXf log_std_grad = Eigen::VectorXf::Zero(action_dim_);
      ppo_policy_loss<float>(policy_, o, s, lp, a, float(cfg_.clip), mean_grad, log_std_grad);
      policy_opt_.step(policy_.mean_net.params(), mean_grad);
      log_std_opt_.step(policy_.log_std, log_std_grad);

      Eigen::VectorXf value_grad = Eigen::VectorXf::Zero(value_.num_params());
      critic_regression<float>(value_, o, ret, value_grad);
      value_grad *= float(cfg_.value_coef);
      value_opt_.step(value_.params(), value_grad);
      ++updates_;
    }
  }
}

void PpoAgent::save(Checkpoint& c, const std::string& prefix) const {
  c.put(prefix + "policy_mean", policy_.mean_net.params());
  c.put(prefix + "policy_log_std", policy_.log_std);
  c.put(prefix + "value", value_.params());
  save_adam(c, prefix + "policy_mean", policy_opt_);
  save_adam(c, prefix + "policy_log_std", log_std_opt_);
  save_adam(c, prefix + "value", value_opt_);
  save_counters(c, prefix, seen_, updates_);
}

void PpoAgent::load(const Checkpoint& c, const std::string& prefix) {
  load_params(c, prefix + "policy_mean", policy_.mean_net);
  policy_.log_std = c.get_f32(prefix + "policy_log_std", action_dim_);
  load_params(c, prefix + "value", value_);
  load_adam(c, prefix + "policy_mean", policy_opt_, policy_.mean_net.num_params());
  load_adam(c, prefix + "policy_log_std", log_std_opt_, action_dim_);
  load_adam(c, prefix + "value", value_opt_, value_.num_params());
  const Eigen::VectorXd counters = c.get_f64(prefix + "counters", 2);
  seen_ = std::int64_t(counters[0]);
  updates_ = std::int64_t(counters[1]);
  rollout_.clear();
}

OffPolicyConfig default_off_policy_config(AgentRole role, const std::string& slice_name,
                                          bool ornstein_uhlenbeck) {
  OffPolicyConfig c;
  if (role == AgentRole::kGlobal) {
    c.hidden = {300, 200};
    c.buffer_capacity = 100000;
    c.noise_sigma = 0.2;
  } else {
    c.hidden = {500, 400};
    c.buffer_capacity = 1000000;
    c.noise_sigma = 0.1;
    if (ornstein_uhlenbeck && lower(slice_name) == "embb") c.noise_sigma = 0.5;
  }
  c.noise = ornstein_uhlenbeck ? NoiseKind::kOrnsteinUhlenbeck : NoiseKind::kGaussian;
  return c;
}

PpoConfig default_ppo_config(AgentRole role) {
  PpoConfig c;
  c.hidden = role == AgentRole::kGlobal ? std::vector<int>{300, 200}
                                         : std::vector<int>{500, 400};
  return c;
}

}  // namespace slicesim::drl
