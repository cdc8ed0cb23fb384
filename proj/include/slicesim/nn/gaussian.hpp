#ifndef SLICESIM_NN_GAUSSIAN_HPP_
#define SLICESIM_NN_GAUSSIAN_HPP_

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "slicesim/nn/mlp.hpp"

namespace slicesim::nn {

/// Diagonal Gaussian policy: a linear-output mean network plus a
/// state-independent, learnable log standard deviation per action.
template <typename Scalar>
struct GaussianPolicy {
  using Matrix = typename Mlp<Scalar>::Matrix;
  using Vector = typename Mlp<Scalar>::Vector;

  Mlp<Scalar> mean_net;
  Vector log_std;

  GaussianPolicy() = default;
  GaussianPolicy(std::vector<int> sizes, Scalar initial_log_std)
      : mean_net(std::move(sizes), OutputActivation::kLinear) {
    log_std = Vector::Constant(mean_net.output_dim(), initial_log_std);
  }

  int action_dim() const { return mean_net.output_dim(); }
};

/// Column-wise log N(u; mean, diag(exp(log_std))^2).
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> gaussian_log_prob(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& u,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& mean,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& log_std) {
  const Scalar half_log_2pi = Scalar(0.5 * std::log(2.0 * std::numbers::pi));
  auto inv_std = (-log_std.array()).exp();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z =
      ((u - mean).array().colwise() * inv_std).matrix();
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> lp =
      Scalar(-0.5) * z.array().square().colwise().sum();
  lp.array() -= log_std.sum() + Scalar(u.rows()) * half_log_2pi;
  return lp;
}

/// Gradients of sum_j w_j * log_prob_j with respect to the mean batch and
/// to log_std.
template <typename Scalar>
void gaussian_log_prob_grad(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& u,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& mean,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& log_std,
    const Eigen::Ref<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>& weights,
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& d_mean,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d_log_std) {
  auto inv_var = (Scalar(-2) * log_std.array()).exp();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> diff = u - mean;
  d_mean = (diff.array().colwise() * inv_var).matrix();
  d_mean.array().rowwise() *= weights.array();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> z2 =
      (diff.array().square().colwise() * inv_var).matrix();
  z2.array() -= Scalar(1);
  d_log_std = z2 * weights.transpose();
}

}  // namespace slicesim::nn

#endif  // SLICESIM_NN_GAUSSIAN_HPP_
