#include "fairsample/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include "fairsample/errors.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'M', 'F'};

void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | data_[pos_ + b];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | data_[pos_ + b];
    pos_ += 8;
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  unsigned char byte() {
    need(1);
    return data_[pos_++];
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t remaining() const { return size_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) {
      throw CheckpointError(CheckpointError::Kind::truncated, "checkpoint file is truncated");
    }
  }

  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

void ModelConfig::validate() const {
  if (bias_only && !use_biases) {
    throw ConfigError("bias_only requires use_biases");
  }
  if (!bias_only && d < 1) {
    throw ConfigError("latent dimension must be >= 1");
  }
  if (init_scale < 0) {
    throw ConfigError("init_scale must be non-negative");
  }
}

MFParams init_params(Idx n_users, Idx n_items, const ModelConfig& cfg) {
  cfg.validate();
  if (n_users < 1 || n_items < 1) {
    throw ConfigError("model needs at least one user and one item");
  }
  const int d = cfg.bias_only ? 0 : cfg.d;
  MFParams p;
  p.user_factors.setZero(n_users, d);
  p.item_factors.setZero(n_items, d);
  p.use_biases = cfg.use_biases;
  if (cfg.use_biases) {
    p.user_bias.setZero(n_users);
    p.item_bias.setZero(n_items);
  }
  if (d > 0 && cfg.init_scale > 0) {
    Rng rng = make_rng(derive_seed(cfg.seed, "init"));
    std::normal_distribution<double> gauss(0.0, cfg.init_scale);
    for (Idx u = 0; u < n_users; ++u) {
      for (int f = 0; f < d; ++f) p.user_factors(u, f) = gauss(rng);
    }
    for (Idx i = 0; i < n_items; ++i) {
      for (int f = 0; f < d; ++f) p.item_factors(i, f) = gauss(rng);
    }
  }
  return p;
}

void save_checkpoint(const MFParams& params, const std::filesystem::path& path) {
  std::string buf;
  const std::uint64_t nu = static_cast<std::uint64_t>(params.n_users());
  const std::uint64_t ni = static_cast<std::uint64_t>(params.n_items());
  const std::uint64_t d = static_cast<std::uint64_t>(params.d());
  buf.reserve(kCheckpointHeaderBytes + 8 * (nu + ni) * d);
  buf.append(kMagic, 4);
  put_u32(buf, kCheckpointVersion);
  put_u64(buf, nu);
  put_u64(buf, ni);
  put_u64(buf, d);
  buf.push_back(params.use_biases ? 1 : 0);
  buf.append(7, '\0');  // reserved

  for (std::uint64_t u = 0; u < nu; ++u) {
    for (std::uint64_t f = 0; f < d; ++f) put_f64(buf, params.user_factors(u, f));
  }
  for (std::uint64_t i = 0; i < ni; ++i) {
    for (std::uint64_t f = 0; f < d; ++f) put_f64(buf, params.item_factors(i, f));
  }
  if (params.use_biases) {
    for (std::uint64_t u = 0; u < nu; ++u) put_f64(buf, params.user_bias[u]);
    for (std::uint64_t i = 0; i < ni; ++i) put_f64(buf, params.item_bias[i]);
    put_f64(buf, params.global_bias);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw CheckpointError(CheckpointError::Kind::io,
                          "cannot open checkpoint for writing: " + path.string());
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw CheckpointError(CheckpointError::Kind::io, "short write: " + path.string());
  }
}

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Kind::io, "cannot open checkpoint: " + path.string());
  }
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return data;
}

CheckpointInfo parse_header(Reader& r) {
  char magic[4];
  for (auto& c : magic) c = static_cast<char>(r.byte());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError(CheckpointError::Kind::bad_magic, "not a checkpoint file");
  }
  CheckpointInfo info;
  info.version = r.u32();
  if (info.version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::bad_version,
                          "unsupported checkpoint version " + std::to_string(info.version));
  }
  info.n_users = r.u64();
  info.n_items = r.u64();
  info.d = r.u64();
  info.use_biases = r.byte() != 0;
  r.skip(7);
  return info;
}

}  // namespace

MFParams load_checkpoint(const std::filesystem::path& path) {
  const auto data = read_all(path);
  Reader r(data.data(), data.size());
  const CheckpointInfo info = parse_header(r);

  constexpr std::uint64_t kMaxDim = 1ull << 31;
  if (info.n_users < 1 || info.n_items < 1 || info.n_users > kMaxDim || info.n_items > kMaxDim ||
      info.d > kMaxDim) {
    throw CheckpointError(CheckpointError::Kind::dimension_mismatch,
                          "implausible checkpoint dimensions");
  }
  std::uint64_t expected = (info.n_users + info.n_items) * info.d;
  if (info.use_biases) {
    expected += info.n_users + info.n_items + 1;
  }
  if (r.remaining() != expected * 8) {
    const auto kind = r.remaining() < expected * 8 ? CheckpointError::Kind::truncated
                                                   : CheckpointError::Kind::dimension_mismatch;
    throw CheckpointError(kind, "checkpoint payload size does not match header dimensions");
  }

  MFParams p;
  p.user_factors.resize(static_cast<Idx>(info.n_users), static_cast<int>(info.d));
  p.item_factors.resize(static_cast<Idx>(info.n_items), static_cast<int>(info.d));
  p.use_biases = info.use_biases;
  for (Idx u = 0; u < p.n_users(); ++u) {
    for (int f = 0; f < p.d(); ++f) p.user_factors(u, f) = r.f64();
  }
  for (Idx i = 0; i < p.n_items(); ++i) {
    for (int f = 0; f < p.d(); ++f) p.item_factors(i, f) = r.f64();
  }
  if (p.use_biases) {
    p.user_bias.resize(p.n_users());
    p.item_bias.resize(p.n_items());
    for (Idx u = 0; u < p.n_users(); ++u) p.user_bias[u] = r.f64();
    for (Idx i = 0; i < p.n_items(); ++i) p.item_bias[i] = r.f64();
    p.global_bias = r.f64();
  }
  return p;
}

CheckpointInfo read_checkpoint_header(const std::filesystem::path& path) {
  const auto data = read_all(path);
  Reader r(data.data(), data.size());
  CheckpointInfo info = parse_header(r);
  info.payload_bytes = r.remaining();
  return info;
}

}  // namespace fairsample
