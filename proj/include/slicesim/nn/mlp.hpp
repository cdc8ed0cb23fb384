#ifndef SLICESIM_NN_MLP_HPP_
#define SLICESIM_NN_MLP_HPP_

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace slicesim::nn {

enum class OutputActivation { kLinear, kTanh };

/// Fully connected network with ReLU hidden layers. All weights and biases
/// live in one flat parameter vector; per-layer matrices are column-major
/// maps into it. Inputs and outputs are column batches (features x batch).
template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  /// Activations retained by a forward pass for the backward pass.
  struct Cache {
    std::vector<Matrix> activations;  // input, hidden..., output
  };

  Mlp() = default;

  Mlp(std::vector<int> sizes, OutputActivation out)
      : sizes_(std::move(sizes)), output_(out) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need >= 2 layer sizes");
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
        throw std::invalid_argument("Mlp: layer sizes must be positive");
      }
      weight_offsets_.push_back(total);
      total += Eigen::Index(sizes_[l]) * sizes_[l + 1];
      bias_offsets_.push_back(total);
      total += sizes_[l + 1];
    }
    params_ = Vector::Zero(total);
  }

  /// Uniform fan-in initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in));
  /// the last layer is scaled by `final_scale`.
  template <typename Rng>
  void init_uniform(Rng& rng, Scalar final_scale = Scalar(1)) {
    for (int l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(double(sizes_[std::size_t(l)]));
      const double scale = l + 1 == num_layers() ? double(final_scale) : 1.0;
      std::uniform_real_distribution<double> u(-bound * scale, bound * scale);
      auto w = weight(l);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = Scalar(u(rng));
      auto b = bias(l);
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = Scalar(u(rng));
    }
  }

  int num_layers() const { return int(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }
  Eigen::Index num_params() const { return params_.size(); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  MatrixMap weight(int l) { return weight_in(params_, l); }
  ConstMatrixMap weight(int l) const {
    return ConstMatrixMap(params_.data() + weight_offsets_[std::size_t(l)],
                          sizes_[std::size_t(l) + 1], sizes_[std::size_t(l)]);
  }
  VectorMap bias(int l) { return bias_in(params_, l); }
  ConstVectorMap bias(int l) const {
    return ConstVectorMap(params_.data() + bias_offsets_[std::size_t(l)],
                          sizes_[std::size_t(l) + 1]);
  }

  /// Layer views into any vector laid out like params() (e.g. gradients).
  MatrixMap weight_in(Vector& flat, int l) const {
    return MatrixMap(flat.data() + weight_offsets_[std::size_t(l)],
                     sizes_[std::size_t(l) + 1], sizes_[std::size_t(l)]);
  }
  VectorMap bias_in(Vector& flat, int l) const {
    return VectorMap(flat.data() + bias_offsets_[std::size_t(l)],
                     sizes_[std::size_t(l) + 1]);
  }

  Matrix forward(const Eigen::Ref<const Matrix>& x) const {
    check_input(x);
    Matrix h = x;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix z = weight(l) * h;
      z.colwise() += bias(l);
      h = activate(std::move(z), l);
    }
    return h;
  }

  Matrix forward(const Eigen::Ref<const Matrix>& x, Cache& cache) const {
    check_input(x);
    cache.activations.resize(std::size_t(num_layers()) + 1);
    cache.activations[0] = x;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix z = weight(l) * cache.activations[std::size_t(l)];
      z.colwise() += bias(l);
      cache.activations[std::size_t(l) + 1] = activate(std::move(z), l);
    }
    return cache.activations.back();
  }

  Vector forward_one(const Eigen::Ref<const Vector>& x) const {
    return forward(Matrix(x));
  }

  /// Accumulates dLoss/dParams into `grad` (sized like params()) given
  /// dLoss/dOutput, and optionally returns dLoss/dInput.
  void backward(const Cache& cache, const Eigen::Ref<const Matrix>& d_out,
                Vector& grad, Matrix* d_input = nullptr) const {
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());
    Matrix delta = d_out;
    const Matrix& y = cache.activations.back();
    if (output_ == OutputActivation::kTanh) {
      delta.array() *= (Scalar(1) - y.array().square());
    }
    for (int l = num_layers() - 1; l >= 0; --l) {
      const Matrix& h_in = cache.activations[std::size_t(l)];
      weight_in(grad, l).noalias() += delta * h_in.transpose();
      bias_in(grad, l) += delta.rowwise().sum();
      if (l == 0 && d_input == nullptr) break;
      Matrix d_h = weight(l).transpose() * delta;
      if (l == 0) {
        *d_input = std::move(d_h);
        break;
      }
      d_h.array() *= (h_in.array() > Scalar(0)).template cast<Scalar>();
      delta = std::move(d_h);
    }
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out(sizes_, output_);
    out.params() = params_.template cast<Other>();
    return out;
  }

 private:
  void check_input(const Eigen::Ref<const Matrix>& x) const {
    if (x.rows() != input_dim()) throw std::invalid_argument("Mlp: input dimension mismatch");
  }

  Matrix activate(Matrix z, int l) const {
    if (l + 1 < num_layers()) return z.cwiseMax(Scalar(0));
    if (output_ == OutputActivation::kTanh) return z.array().tanh().matrix();
    return z;
  }

  std::vector<int> sizes_;
  OutputActivation output_ = OutputActivation::kLinear;
  std::vector<Eigen::Index> weight_offsets_;
  std::vector<Eigen::Index> bias_offsets_;
  Vector params_;
};

}  // namespace slicesim::nn

#endif  // SLICESIM_NN_MLP_HPP_
