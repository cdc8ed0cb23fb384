#ifndef SLICESIM_DRL_LOSSES_HPP_
#define SLICESIM_DRL_LOSSES_HPP_

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "slicesim/nn/gaussian.hpp"
#include "slicesim/nn/mlp.hpp"

// Loss terms of the three learners, each returning the loss and accumulating
// its parameter gradient. Written against nn::Mlp<Scalar> so the same code
// trains in float and is checked against finite differences in double.

namespace slicesim::drl {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// [observations; actions] stacked row-wise as critic input.
template <typename Scalar>
MatrixT<Scalar> critic_input(const Eigen::Ref<const MatrixT<Scalar>>& obs,
                             const Eigen::Ref<const MatrixT<Scalar>>& actions) {
  MatrixT<Scalar> in(obs.rows() + actions.rows(), obs.cols());
  in.topRows(obs.rows()) = obs;
  in.bottomRows(actions.rows()) = actions;
  return in;
}

/// y = r + gamma (1 - done) q_next.
template <typename Scalar>
RowVectorT<Scalar> bootstrap_targets(const Eigen::Ref<const RowVectorT<Scalar>>& rewards,
                                     const Eigen::Ref<const RowVectorT<Scalar>>& dones,
                                     const Eigen::Ref<const RowVectorT<Scalar>>& q_next,
                                     Scalar gamma) {
  return (rewards.array() +
          gamma * (Scalar(1) - dones.array()) * q_next.array())
      .matrix();
}

/// Clipped double-Q target: bootstrap on min(q1_next, q2_next).
template <typename Scalar>
RowVectorT<Scalar> twin_targets(const Eigen::Ref<const RowVectorT<Scalar>>& rewards,
                                const Eigen::Ref<const RowVectorT<Scalar>>& dones,
                                const Eigen::Ref<const RowVectorT<Scalar>>& q1_next,
                                const Eigen::Ref<const RowVectorT<Scalar>>& q2_next,
                                Scalar gamma) {
  RowVectorT<Scalar> q_min = q1_next.cwiseMin(q2_next);
  return bootstrap_targets<Scalar>(rewards, dones, q_min, gamma);
}

/// Mean squared TD error of a critic on `input`.
template <typename Scalar>
Scalar critic_regression(const nn::Mlp<Scalar>& critic,
                         const Eigen::Ref<const MatrixT<Scalar>>& input,
                         const Eigen::Ref<const RowVectorT<Scalar>>& targets,
                         VectorT<Scalar>& grad) {
  typename nn::Mlp<Scalar>::Cache cache;
  const MatrixT<Scalar> q = critic.forward(input, cache);
  const Scalar n = Scalar(input.cols());
  const MatrixT<Scalar> err = q - targets;
  critic.backward(cache, (Scalar(2) / n) * err, grad);
  return err.squaredNorm() / n;
}

/// Deterministic policy gradient loss -mean Q(s, pi(s)); the gradient is
/// taken with respect to the actor only, through the critic's input.
template <typename Scalar>
Scalar deterministic_policy_loss(const nn::Mlp<Scalar>& actor,
                                 const nn::Mlp<Scalar>& critic,
                                 const Eigen::Ref<const MatrixT<Scalar>>& obs,
                                 VectorT<Scalar>& actor_grad) {
  typename nn::Mlp<Scalar>::Cache actor_cache, critic_cache;
  const MatrixT<Scalar> actions = actor.forward(obs, actor_cache);
  const MatrixT<Scalar> q = critic.forward(critic_input<Scalar>(obs, actions), critic_cache);
  const Scalar n = Scalar(obs.cols());
  VectorT<Scalar> unused = VectorT<Scalar>::Zero(critic.num_params());
  MatrixT<Scalar> d_input;
  critic.backward(critic_cache, MatrixT<Scalar>::Constant(1, obs.cols(), Scalar(-1) / n),
                  unused, &d_input);
  actor.backward(actor_cache, d_input.bottomRows(actions.rows()), actor_grad);
  return -q.sum() / n;
}

/// Per-sample clipped and unclipped surrogate terms, summed.
template <typename Scalar>
struct Surrogate {
  Scalar clipped = 0;
  Scalar unclipped = 0;
};

template <typename Scalar>
Surrogate<Scalar> ppo_surrogate(const Eigen::Ref<const RowVectorT<Scalar>>& ratio,
                                const Eigen::Ref<const RowVectorT<Scalar>>& adv,
                                Scalar clip) {
  Surrogate<Scalar> out;
  for (Eigen::Index j = 0; j < ratio.size(); ++j) {
    const Scalar plain = ratio[j] * adv[j];
    const Scalar bounded =
        std::clamp(ratio[j], Scalar(1) - clip, Scalar(1) + clip) * adv[j];
    out.unclipped += plain;
    out.clipped += std::min(plain, bounded);
  }
  return out;
}

/// d(min(r A, clip(r) A)) / d(log pi) per sample: r A where the unclipped
/// branch is active, 0 where clipping holds the term constant.
template <typename Scalar>
RowVectorT<Scalar> ppo_surrogate_logp_grad(const Eigen::Ref<const RowVectorT<Scalar>>& ratio,
                                           const Eigen::Ref<const RowVectorT<Scalar>>& adv,
                                           Scalar clip) {
  RowVectorT<Scalar> g(ratio.size());
  for (Eigen::Index j = 0; j < ratio.size(); ++j) {
    const bool held = (adv[j] > 0 && ratio[j] > Scalar(1) + clip) ||
                      (adv[j] < 0 && ratio[j] < Scalar(1) - clip);
    g[j] = held ? Scalar(0) : ratio[j] * adv[j];
  }
  return g;
}

/// Negative mean clipped surrogate of a Gaussian policy. Gradients are
/// accumulated into the mean network's flat gradient and the log-std one.
template <typename Scalar>
Scalar ppo_policy_loss(const nn::GaussianPolicy<Scalar>& policy,
                       const Eigen::Ref<const MatrixT<Scalar>>& obs,
                       const Eigen::Ref<const MatrixT<Scalar>>& samples,
                       const Eigen::Ref<const RowVectorT<Scalar>>& old_log_prob,
                       const Eigen::Ref<const RowVectorT<Scalar>>& adv, Scalar clip,
                       VectorT<Scalar>& mean_grad, VectorT<Scalar>& log_std_grad) {
  typename nn::Mlp<Scalar>::Cache cache;
  const MatrixT<Scalar> mean = policy.mean_net.forward(obs, cache);
  const RowVectorT<Scalar> lp =
      nn::gaussian_log_prob<Scalar>(samples, mean, policy.log_std);
  const RowVectorT<Scalar> ratio = (lp - old_log_prob).array().exp().matrix();
  const Scalar n = Scalar(obs.cols());
  const RowVectorT<Scalar> w = -ppo_surrogate_logp_grad<Scalar>(ratio, adv, clip) / n;
  MatrixT<Scalar> d_mean;
  VectorT<Scalar> d_log_std;
  nn::gaussian_log_prob_grad<Scalar>(samples, mean, policy.log_std, w, d_mean, d_log_std);
  policy.mean_net.backward(cache, d_mean, mean_grad);
  if (log_std_grad.size() != d_log_std.size()) {
    log_std_grad = VectorT<Scalar>::Zero(d_log_std.size());
  }
  log_std_grad += d_log_std;
  return -ppo_surrogate<Scalar>(ratio, adv, clip).clipped / n;
}

/// Generalised advantage estimation over a stored trajectory. The chain is
/// cut at `done` and after the last entry.
template <typename Scalar>
void gae(const Eigen::Ref<const RowVectorT<Scalar>>& rewards,
         const Eigen::Ref<const RowVectorT<Scalar>>& values,
         const Eigen::Ref<const RowVectorT<Scalar>>& next_values,
         const Eigen::Ref<const RowVectorT<Scalar>>& dones, Scalar gamma, Scalar lambda,
         RowVectorT<Scalar>& advantages, RowVectorT<Scalar>& returns) {
  const Eigen::Index n = rewards.size();
  advantages.resize(n);
  Scalar running = 0;
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    const Scalar live = Scalar(1) - dones[j];
    const Scalar delta = rewards[j] + gamma * live * next_values[j] - values[j];
    running = delta + gamma * lambda * live * running;
    advantages[j] = running;
  }
  returns = advantages + values;
}

}  // namespace slicesim::drl

#endif  // SLICESIM_DRL_LOSSES_HPP_
