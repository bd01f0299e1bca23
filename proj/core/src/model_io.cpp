#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "brepnet/model.hpp"

namespace brepnet {
namespace {

constexpr std::array<char, 4> kMagic = {'B', 'R', 'N', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

class Writer {
 public:
  void u8(std::uint8_t v) { put(&v, 1); }
  void u32(std::uint32_t v) { put(&v, 4); }
  void u64(std::uint64_t v) { put(&v, 8); }
  void i32(std::int32_t v) { put(&v, 4); }
  void f64(double v) { put(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    put(s.data(), s.size());
  }
  const std::vector<std::uint8_t>& bytes() const { return buffer_; }

 private:
  void put(const void* src, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    buffer_.insert(buffer_.end(), p, p + n);
  }
  std::vector<std::uint8_t> buffer_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() { return take<std::uint8_t>(); }
  std::uint32_t u32() { return take<std::uint32_t>(); }
  std::uint64_t u64() { return take<std::uint64_t>(); }
  std::int32_t i32() { return take<std::int32_t>(); }
  double f64() { return take<double>(); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  template <typename T>
  T take() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw ModelIoError(ModelIoError::Kind::kCorrupt, "model file truncated or corrupt");
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

void write_standardizer(Writer& w, const Standardizer& s) {
  w.u32(static_cast<std::uint32_t>(s.mean.size()));
  for (double v : s.mean) w.f64(v);
  for (double v : s.sigma) w.f64(v);
  for (std::uint8_t v : s.scaled) w.u8(v);
}

Standardizer read_standardizer(Reader& r) {
  Standardizer s;
  const std::uint32_t n = r.u32();
  if (n > (1u << 20)) throw ModelIoError(ModelIoError::Kind::kCorrupt, "implausible standardizer width");
  s.mean.resize(n);
  s.sigma.resize(n);
  s.scaled.resize(n);
  for (auto& v : s.mean) v = r.f64();
  for (auto& v : s.sigma) v = r.f64();
  for (auto& v : s.scaled) v = r.u8();
  return s;
}

// The parameter payload is stored column-major.
void write_tensor(Writer& w, const Tensor2& t) {
  w.i32(t.rows());
  w.i32(t.cols());
  for (Index c = 0; c < t.cols(); ++c) {
    for (Index r = 0; r < t.rows(); ++r) w.f64(t(r, c));
  }
}

Tensor2 read_tensor(Reader& r) {
  const Index rows = r.i32();
  const Index cols = r.i32();
  if (rows < 0 || cols < 0 || static_cast<long long>(rows) * cols > (1ll << 28)) {
    throw ModelIoError(ModelIoError::Kind::kCorrupt, "implausible tensor shape");
  }
  Tensor2 t(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index row = 0; row < rows; ++row) t(row, c) = r.f64();
  }
  return t;
}

}  // namespace

void save_model(const std::filesystem::path& path, const BRepNetModel& model) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kFormatVersion);

  const ArchitectureConfig& cfg = model.config;
  w.str(cfg.kernel);
  w.i32(cfg.hidden_width);
  w.i32(cfg.num_hidden_units);
  w.i32(cfg.num_classes);
  w.i32(cfg.mlp_depth);
  w.u8(cfg.final_layer_bias ? 1 : 0);
  w.u8(cfg.standardize_flag_columns ? 1 : 0);
  w.i32(cfg.face_feature_width);
  w.i32(cfg.edge_feature_width);
  w.i32(cfg.coedge_feature_width);
  w.u64(model.init_seed);

  write_standardizer(w, model.standardizer.faces);
  write_standardizer(w, model.standardizer.edges);
  write_standardizer(w, model.standardizer.coedges);

  w.u32(static_cast<std::uint32_t>(model.units.size()));
  for (const auto& unit : model.units) {
    w.u32(static_cast<std::uint32_t>(unit.num_layers()));
    for (std::size_t l = 0; l < unit.num_layers(); ++l) {
      write_tensor(w, unit.weights[l]);
      w.u8(unit.biases[l].size() != 0 ? 1 : 0);
      if (unit.biases[l].size() != 0) write_tensor(w, unit.biases[l]);
    }
  }

  std::vector<std::uint8_t> payload = w.bytes();
  const std::uint32_t checksum = crc32(payload.data(), payload.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

BRepNetModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagic.size() + sizeof(std::uint32_t) * 2) {
    throw ModelIoError(ModelIoError::Kind::kCorrupt, "model file truncated or corrupt");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), reinterpret_cast<const char*>(bytes.data()))) {
    throw ModelIoError(ModelIoError::Kind::kCorrupt, "not a brepnet model file");
  }

  const std::size_t payload_size = bytes.size() - sizeof(std::uint32_t);
  Reader r(bytes.data(), payload_size);
  for (std::size_t i = 0; i < kMagic.size(); ++i) r.u8();
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw ModelIoError(ModelIoError::Kind::kVersion,
                       "unsupported model format version " + std::to_string(version));
  }

  BRepNetModel model;
  ArchitectureConfig& cfg = model.config;
  cfg.kernel = r.str();
  cfg.hidden_width = r.i32();
  cfg.num_hidden_units = r.i32();
  cfg.num_classes = r.i32();
  cfg.mlp_depth = r.i32();
  cfg.final_layer_bias = r.u8() != 0;
  cfg.standardize_flag_columns = r.u8() != 0;
  cfg.face_feature_width = r.i32();
  cfg.edge_feature_width = r.i32();
  cfg.coedge_feature_width = r.i32();
  model.init_seed = r.u64();

  model.standardizer.faces = read_standardizer(r);
  model.standardizer.edges = read_standardizer(r);
  model.standardizer.coedges = read_standardizer(r);

  const std::uint32_t num_units = r.u32();
  if (num_units > (1u << 10)) throw ModelIoError(ModelIoError::Kind::kCorrupt, "implausible unit count");
  for (std::uint32_t u = 0; u < num_units; ++u) {
    MlpParams unit;
    const std::uint32_t num_layers = r.u32();
    if (num_layers > (1u << 10)) throw ModelIoError(ModelIoError::Kind::kCorrupt, "implausible layer count");
    for (std::uint32_t l = 0; l < num_layers; ++l) {
      unit.weights.push_back(read_tensor(r));
      if (r.u8() != 0) {
        unit.biases.push_back(read_tensor(r));
      } else {
        unit.biases.emplace_back(0, 0);
      }
    }
    model.units.push_back(std::move(unit));
  }

  if (r.position() != payload_size) {
    throw ModelIoError(ModelIoError::Kind::kCorrupt, "trailing bytes in model file");
  }

  std::uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + payload_size, sizeof(stored));
  if (crc32(bytes.data(), payload_size) != stored) {
    throw ModelIoError(ModelIoError::Kind::kChecksum, "model file checksum mismatch");
  }

  validate_config(cfg);
  return model;
}

}  // namespace brepnet
