#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>

#include <Eigen/Core>

#include "fairsample/dataset.hpp"

namespace fairsample {

/// Matrix-factorization parameters. The score of a pair is the dot product
/// of the two factor rows plus the optional additive bias terms; the bias
/// terms double as propensity probes in the cancellation diagnostics.
template <typename Scalar>
struct MFParamsT {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  Matrix user_factors;  // n_users x d
  Matrix item_factors;  // n_items x d
  Vector user_bias;     // empty unless use_biases
  Vector item_bias;
  Scalar global_bias = Scalar(0);
  bool use_biases = false;

  Idx n_users() const { return static_cast<Idx>(user_factors.rows()); }
  Idx n_items() const { return static_cast<Idx>(item_factors.rows()); }
  int d() const { return static_cast<int>(user_factors.cols()); }
};

using MFParams = MFParamsT<double>;

/// Raw score (logit) of a user-item pair. Point-wise losses pass it through
/// the logistic link; pair-wise losses consume logit differences directly.
template <typename Scalar>
Scalar score(const MFParamsT<Scalar>& p, Idx u, Idx i) {
  if (u < 0 || u >= p.n_users() || i < 0 || i >= p.n_items()) {
    throw std::out_of_range("score: index out of range");
  }
  Scalar s = p.user_factors.row(u).dot(p.item_factors.row(i));
  if (p.use_biases) {
    s += p.user_bias[u] + p.item_bias[i] + p.global_bias;
  }
  return s;
}

struct ModelConfig {
  int d = 16;
  double init_scale = 0.1;
  bool use_biases = false;
  bool bias_only = false;  // diagnostics: factors collapse to d = 0
  std::uint64_t seed = 0;

  void validate() const;
};

/// Factors drawn from N(0, init_scale^2); biases start at exactly zero.
/// Deterministic given cfg.seed.
MFParams init_params(Idx n_users, Idx n_items, const ModelConfig& cfg);

struct CheckpointInfo {
  std::uint32_t version = 0;
  std::uint64_t n_users = 0;
  std::uint64_t n_items = 0;
  std::uint64_t d = 0;
  bool use_biases = false;
  std::uint64_t payload_bytes = 0;
};

// Checkpoint layout: 40-byte header (magic "FSMF", u32 version, u64 dims,
// mode flag), then little-endian f64 arrays in row-major order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderBytes = 40;

void save_checkpoint(const MFParams& params, const std::filesystem::path& path);
MFParams load_checkpoint(const std::filesystem::path& path);
CheckpointInfo read_checkpoint_header(const std::filesystem::path& path);

}  // namespace fairsample
