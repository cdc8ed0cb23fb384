#include "slicesim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace slicesim {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'S', 'M', 'C', 'K', 'P', 'T'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= U(p[i]) << (8 * i);
  return v;
}

const char* dtype_name(DType d) { return d == DType::kF32 ? "f32" : "f64"; }

std::size_t dtype_bytes(DType d) { return d == DType::kF32 ? 4 : 8; }

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Header {
  std::uint32_t version;
  nlohmann::json manifest;
  std::size_t payload_begin;
};

Header parse_header(const std::uint8_t* data, std::size_t size) {
  if (size < 20 || std::memcmp(data, kMagic, 8) != 0) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  Header h;
  h.version = get_le<std::uint32_t>(data + 8);
  if (h.version != Checkpoint::kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(h.version));
  }
  const auto len = get_le<std::uint64_t>(data + 12);
  if (len > size - 20) throw CheckpointError("truncated checkpoint manifest");
  try {
    h.manifest = nlohmann::json::parse(data + 20, data + 20 + len);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt checkpoint manifest: ") + e.what());
  }
  h.payload_begin = 20 + std::size_t(len);
  return h;
}

}  // namespace

std::int64_t Tensor::count() const {
  return dtype == DType::kF32 ? std::int64_t(f32.size()) : std::int64_t(f64.size());
}

void Checkpoint::put(const std::string& name, const Eigen::Ref<const Eigen::VectorXf>& v,
                     std::vector<std::int64_t> shape) {
  Tensor t;
  t.dtype = DType::kF32;
  t.shape = shape.empty() ? std::vector<std::int64_t>{v.size()} : std::move(shape);
  t.f32.assign(v.data(), v.data() + v.size());
  tensors_[name] = std::move(t);
}

void Checkpoint::put(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& v,
                     std::vector<std::int64_t> shape) {
  Tensor t;
  t.dtype = DType::kF64;
  t.shape = shape.empty() ? std::vector<std::int64_t>{v.size()} : std::move(shape);
  t.f64.assign(v.data(), v.data() + v.size());
  tensors_[name] = std::move(t);
}

const Tensor& Checkpoint::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw CheckpointError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

Eigen::VectorXf Checkpoint::get_f32(const std::string& name, Eigen::Index expected) const {
  const Tensor& t = at(name);
  if (t.dtype != DType::kF32) throw CheckpointError(name + ": expected f32");
  if (expected >= 0 && t.count() != expected) {
    throw CheckpointError(name + ": expected " + std::to_string(expected) + " values, found " +
                          std::to_string(t.count()));
  }
  return Eigen::Map<const Eigen::VectorXf>(t.f32.data(), Eigen::Index(t.f32.size()));
}

Eigen::VectorXd Checkpoint::get_f64(const std::string& name, Eigen::Index expected) const {
  const Tensor& t = at(name);
  if (t.dtype != DType::kF64) throw CheckpointError(name + ": expected f64");
  if (expected >= 0 && t.count() != expected) {
    throw CheckpointError(name + ": expected " + std::to_string(expected) + " values, found " +
                          std::to_string(t.count()));
  }
  return Eigen::Map<const Eigen::VectorXd>(t.f64.data(), Eigen::Index(t.f64.size()));
}

nlohmann::json Checkpoint::manifest() const {
  nlohmann::json m;
  m["format"] = "slicesim-checkpoint";
  m["version"] = kVersion;
  m["byte_order"] = "little";
  m["meta"] = meta;
  auto& list = m["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors_) {
    list.push_back({{"name", name},
                    {"dtype", dtype_name(t.dtype)},
                    {"shape", t.shape},
                    {"offset", offset},
                    {"count", t.count()}});
    offset += std::uint64_t(t.count()) * dtype_bytes(t.dtype);
  }
  m["payload_bytes"] = offset;
  return m;
}

std::vector<std::uint8_t> Checkpoint::serialize() const {
  const std::string text = manifest().dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, t] : tensors_) {
    if (t.dtype == DType::kF32) {
      for (float v : t.f32) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    } else {
      for (double v : t.f64) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<std::uint8_t>& bytes) {
  const Header h = parse_header(bytes.data(), bytes.size());
  Checkpoint c;
  c.meta = h.manifest.value("meta", nlohmann::json::object());
  const std::size_t payload = bytes.size() - h.payload_begin;
  try {
    for (const auto& e : h.manifest.at("tensors")) {
      Tensor t;
      const std::string dt = e.at("dtype");
      if (dt != "f32" && dt != "f64") throw CheckpointError("unknown dtype " + dt);
      t.dtype = dt == "f32" ? DType::kF32 : DType::kF64;
      t.shape = e.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      const auto count = e.at("count").get<std::uint64_t>();
      const std::size_t width = dtype_bytes(t.dtype);
      if (offset > payload || count > (payload - offset) / width) {
        throw CheckpointError("tensor '" + e.at("name").get<std::string>() +
                              "' runs past the payload");
      }
      const std::uint8_t* p = bytes.data() + h.payload_begin + offset;
      if (t.dtype == DType::kF32) {
        t.f32.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          t.f32[i] = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
        }
      } else {
        t.f64.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
          t.f64[i] = std::bit_cast<double>(get_le<std::uint64_t>(p + 8 * i));
        }
      }
      c.tensors_[e.at("name").get<std::string>()] = std::move(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint manifest: ") + e.what());
  }
  return c;
}

void Checkpoint::save(const std::string& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw CheckpointError("short write to " + path);
}

Checkpoint Checkpoint::load(const std::string& path) { return deserialize(read_file(path)); }

nlohmann::json Checkpoint::read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::uint8_t head[20];
  in.read(reinterpret_cast<char*>(head), 20);
  if (in.gcount() != 20) throw CheckpointError("not a checkpoint (too short)");
  const auto len = get_le<std::uint64_t>(head + 12);
  std::vector<std::uint8_t> buf(head, head + 20);
  buf.resize(20 + std::size_t(len));
  in.read(reinterpret_cast<char*>(buf.data() + 20), std::streamsize(len));
  if (std::uint64_t(in.gcount()) != len) throw CheckpointError("truncated checkpoint manifest");
  return parse_header(buf.data(), buf.size()).manifest;
}

}  // namespace slicesim
