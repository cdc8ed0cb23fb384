#ifndef SLICESIM_NN_ADAM_HPP_
#define SLICESIM_NN_ADAM_HPP_

#include <cmath>

#include <Eigen/Core>

namespace slicesim::nn {

template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector m;
  Vector v;
  long step = 0;
};

/// Adam with bias-corrected moment estimates.
template <typename Scalar>
class Adam {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  const AdamState<Scalar>& state() const { return state_; }
  AdamState<Scalar>& state() { return state_; }

  void step(Eigen::Ref<Vector> params, const Eigen::Ref<const Vector>& grad) {
    if (state_.m.size() != params.size()) {
      state_.m = Vector::Zero(params.size());
      state_.v = Vector::Zero(params.size());
      state_.step = 0;
    }
    ++state_.step;
    const Scalar b1 = Scalar(beta1_), b2 = Scalar(beta2_);
    state_.m = b1 * state_.m + (Scalar(1) - b1) * grad;
    state_.v = b2 * state_.v + (Scalar(1) - b2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, double(state_.step));
    const double c2 = 1.0 - std::pow(beta2_, double(state_.step));
    const Scalar step_size = Scalar(lr_ / c1);
    const Scalar c2_sqrt = Scalar(std::sqrt(c2));
    params.array() -= step_size * state_.m.array() /
                      (state_.v.array().sqrt() / c2_sqrt + Scalar(eps_));
  }

 private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  AdamState<Scalar> state_;
};

/// target <- tau * source + (1 - tau) * target.
template <typename Scalar>
void soft_update(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& target,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& source, double tau) {
  target = Scalar(tau) * source + Scalar(1.0 - tau) * target;
}

}  // namespace slicesim::nn

#endif  // SLICESIM_NN_ADAM_HPP_
