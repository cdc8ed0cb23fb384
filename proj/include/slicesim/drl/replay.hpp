#ifndef SLICESIM_DRL_REPLAY_HPP_
#define SLICESIM_DRL_REPLAY_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "slicesim/random.hpp"

namespace slicesim::drl {

/// One agent interaction. `action` is in the agent's own space: the squashed
/// action in [-1, 1] for deterministic actors, the pre-squash Gaussian sample
/// for the stochastic actor.
struct Transition {
  Eigen::VectorXf observation;
  Eigen::VectorXf action;
  float reward = 0.0f;
  Eigen::VectorXf next_observation;
  bool valid = true;
  bool done = false;
  float log_prob = 0.0f;
};

struct Batch {
  Eigen::MatrixXf observations;
  Eigen::MatrixXf actions;
  Eigen::RowVectorXf rewards;
  Eigen::MatrixXf next_observations;
  Eigen::RowVectorXf dones;
};

/// Fixed-capacity ring buffer with uniform sampling. Storage grows on demand
/// up to `capacity`, so a large capacity costs nothing until it is used.
class ReplayBuffer {
 public:
  ReplayBuffer(int obs_dim, int action_dim, std::int64_t capacity)
      : obs_dim_(obs_dim), action_dim_(action_dim), capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity < 1");
  }

  std::int64_t size() const { return size_; }
  std::int64_t capacity() const { return capacity_; }

  void push(const Transition& t) {
    if (t.observation.size() != obs_dim_ || t.next_observation.size() != obs_dim_ ||
        t.action.size() != action_dim_) {
      throw std::invalid_argument("ReplayBuffer: transition dimension mismatch");
    }
    const std::int64_t slot = next_;
    if (size_ < capacity_) {
      grow_to(slot + 1);
      ++size_;
    }
    copy_into(obs_, slot, obs_dim_, t.observation);
    copy_into(next_obs_, slot, obs_dim_, t.next_observation);
    copy_into(actions_, slot, action_dim_, t.action);
    rewards_[std::size_t(slot)] = t.reward;
    dones_[std::size_t(slot)] = t.done ? 1.0f : 0.0f;
    next_ = (next_ + 1) % capacity_;
  }

  std::vector<std::int64_t> sample_indices(int batch, Rng& rng) const {
    if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from empty buffer");
    std::uniform_int_distribution<std::int64_t> pick(0, size_ - 1);
    std::vector<std::int64_t> idx(static_cast<std::size_t>(batch));
    for (auto& i : idx) i = pick(rng);
    return idx;
  }

  Batch gather(const std::vector<std::int64_t>& idx) const {
    const Eigen::Index n = Eigen::Index(idx.size());
    Batch b{Eigen::MatrixXf(obs_dim_, n), Eigen::MatrixXf(action_dim_, n),
            Eigen::RowVectorXf(n), Eigen::MatrixXf(obs_dim_, n),
            Eigen::RowVectorXf(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto i = std::size_t(idx[std::size_t(j)]);
      b.observations.col(j) =
          Eigen::Map<const Eigen::VectorXf>(obs_.data() + i * std::size_t(obs_dim_), obs_dim_);
      b.next_observations.col(j) = Eigen::Map<const Eigen::VectorXf>(
          next_obs_.data() + i * std::size_t(obs_dim_), obs_dim_);
      b.actions.col(j) = Eigen::Map<const Eigen::VectorXf>(
          actions_.data() + i * std::size_t(action_dim_), action_dim_);
      b.rewards[j] = rewards_[i];
      b.dones[j] = dones_[i];
    }
    return b;
  }

  Batch sample(int batch, Rng& rng) const { return gather(sample_indices(batch, rng)); }

 private:
  void grow_to(std::int64_t n) {
    const auto un = std::size_t(n);
    if (rewards_.size() >= un) return;
    obs_.resize(un * std::size_t(obs_dim_));
    next_obs_.resize(un * std::size_t(obs_dim_));
    actions_.resize(un * std::size_t(action_dim_));
    rewards_.resize(un);
    dones_.resize(un);
  }

  static void copy_into(std::vector<float>& dst, std::int64_t slot, int dim,
                        const Eigen::VectorXf& v) {
    std::copy(v.data(), v.data() + dim, dst.begin() + std::ptrdiff_t(slot) * dim);
  }

  int obs_dim_;
  int action_dim_;
  std::int64_t capacity_;
  std::int64_t size_ = 0;
  std::int64_t next_ = 0;
  std::vector<float> obs_, next_obs_, actions_, rewards_, dones_;
};

enum class NoiseKind { kNone, kGaussian, kOrnsteinUhlenbeck };

/// Exploration noise in agent action units. OU follows
/// x <- x + theta (mu - x) dt + sigma sqrt(dt) N(0, 1) with mu = 0.
class NoiseProcess {
 public:
  NoiseProcess() = default;
  NoiseProcess(NoiseKind kind, int dim, double sigma, double theta = 0.15,
               double dt = 1.0)
      : kind_(kind), sigma_(sigma), theta_(theta), dt_(dt),
        state_(Eigen::VectorXf::Zero(dim)) {}

  NoiseKind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXf& state() const { return state_; }

  Eigen::VectorXf sample(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    switch (kind_) {
      case NoiseKind::kNone:
        return Eigen::VectorXf::Zero(state_.size());
      case NoiseKind::kGaussian: {
        Eigen::VectorXf out(state_.size());
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = float(sigma_ * n(rng));
        return out;
      }
      case NoiseKind::kOrnsteinUhlenbeck:
        for (Eigen::Index i = 0; i < state_.size(); ++i) {
          const double x = state_[i];
          state_[i] = float(x - theta_ * x * dt_ + sigma_ * std::sqrt(dt_) * n(rng));
        }
        return state_;
    }
    return Eigen::VectorXf::Zero(state_.size());
  }

  void reset() { state_.setZero(); }

 private:
  NoiseKind kind_ = NoiseKind::kNone;
  double sigma_ = 0.0;
  double theta_ = 0.15;
  double dt_ = 1.0;
  Eigen::VectorXf state_;
};

}  // namespace slicesim::drl

#endif  // SLICESIM_DRL_REPLAY_HPP_
