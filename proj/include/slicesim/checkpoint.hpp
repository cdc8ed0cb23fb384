#ifndef SLICESIM_CHECKPOINT_HPP_
#define SLICESIM_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace slicesim {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DType { kF32, kF64 };

struct Tensor {
  DType dtype = DType::kF32;
  std::vector<std::int64_t> shape;
  std::vector<float> f32;
  std::vector<double> f64;

  std::int64_t count() const;
};

/// Named tensors plus free-form metadata.
///
/// File layout: the 8 magic bytes "SLSMCKPT", a little-endian u32 format
/// version, a little-endian u64 manifest length, the UTF-8 JSON manifest,
/// then the tensor payload. Every payload value is little-endian IEEE 754;
/// the manifest gives each tensor's dtype, shape and byte offset into the
/// payload. Tensors are stored in name order, so writing the same content
/// twice yields identical bytes.
class Checkpoint {
 public:
  static constexpr std::uint32_t kVersion = 1;

  nlohmann::json meta = nlohmann::json::object();

  void put(const std::string& name, const Eigen::Ref<const Eigen::VectorXf>& v,
           std::vector<std::int64_t> shape = {});
  void put(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& v,
           std::vector<std::int64_t> shape = {});

  bool has(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& at(const std::string& name) const;
  /// Throws CheckpointError on a missing name, wrong dtype or wrong size
  /// (`expected` < 0 skips the size check).
  Eigen::VectorXf get_f32(const std::string& name, Eigen::Index expected = -1) const;
  Eigen::VectorXd get_f64(const std::string& name, Eigen::Index expected = -1) const;

  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  nlohmann::json manifest() const;
  std::vector<std::uint8_t> serialize() const;
  static Checkpoint deserialize(const std::vector<std::uint8_t>& bytes);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
  /// Only the manifest, without reading tensor payloads into memory.
  static nlohmann::json read_manifest(const std::string& path);

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace slicesim

#endif  // SLICESIM_CHECKPOINT_HPP_
