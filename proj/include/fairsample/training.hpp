#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fairsample/dataset.hpp"
#include "fairsample/math.hpp"
#include "fairsample/model.hpp"
#include "fairsample/sampling.hpp"
#include "fairsample/synthworld.hpp"

namespace fairsample {

enum class Objective { point_classic, point_fs, pair_classic, pair_fs };

const char* objective_name(Objective o);
Objective objective_from_name(const std::string& name);

struct TrainConfig {
  Objective objective = Objective::pair_classic;
  double learning_rate = 0.05;
  double l2 = 1e-5;
  int epochs = 10;
  std::int64_t batch_positives = 128;
  int neg_per_pos = 1;       // point-wise only; mirrored into sampler
  double fs_mix_ratio = 1.0; // fraction of bases that receive completions
  int threads = 1;           // >1 switches to the non-deterministic hogwild path
  SamplerConfig sampler;
  ModelConfig model;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> loss_curve;  // per-epoch mean loss per sample
  std::int64_t groups_attempted = 0;
  std::int64_t groups_completed = 0;
  double skip_rate = 0.0;  // 1 - completed / attempted
  double wall_time_sec = 0.0;
  std::string final_params_ref;  // checkpoint path, filled by the CLI
};

/// Cross-entropy contribution of one pair: -log s for a positive,
/// -log(1 - s) for a negative, with s = logistic(logit). Stable for
/// |logit| well past 500.
double point_loss(double logit, int label);

/// BPR contribution -ln sigma(logit_pos - logit_neg), stable.
double pair_loss(double logit_pos, double logit_neg);

/// Gradient contributions of a batch, keyed by the touched rows. Values
/// accumulate in sample order, so group members cancel exactly when their
/// per-sample contributions do.
struct SparseGradient {
  std::unordered_map<Idx, Eigen::RowVectorXd> user_factors;
  std::unordered_map<Idx, Eigen::RowVectorXd> item_factors;
  std::unordered_map<Idx, double> user_bias;
  std::unordered_map<Idx, double> item_bias;
  double global_bias = 0.0;

  Eigen::RowVectorXd& user_row(Idx u, int d);
  Eigen::RowVectorXd& item_row(Idx i, int d);
};

/// Adds the gradient of point_loss plus the L2 term of the touched
/// parameters (l2/2 * ||.||^2 per sample; the global bias is not
/// regularized). Returns the (unregularized) loss value.
double accumulate_point_batch(const MFParams& params, std::span<const PointSample> batch,
                              double l2, SparseGradient& grad);
double accumulate_pair_batch(const MFParams& params, std::span<const PairTriple> batch, double l2,
                             SparseGradient& grad);

/// Single-sample gradients for diagnostics and gradient checks.
SparseGradient point_grad(const MFParams& params, const PointSample& sample, double l2 = 0.0);
SparseGradient pair_grad(const MFParams& params, const PairTriple& triple, double l2 = 0.0);

/// params -= step_scale * grad, coordinate-wise.
void apply_gradient(MFParams& params, const SparseGradient& grad, double step_scale);

/// One SGD step on the batch mean; returns the mean loss per sample.
double point_batch_step(MFParams& params, std::span<const PointSample> batch, double lr,
                        double l2);
double pair_batch_step(MFParams& params, std::span<const PairTriple> batch, double lr, double l2);

/// Mini-batch SGD over sampled batches. FS objectives complete each base
/// (with probability fs_mix_ratio) and keep the whole group in one batch.
/// Deterministic given seed when threads == 1.
std::pair<MFParams, TrainReport> train(const InteractionMatrix& matrix, const TrainConfig& cfg);

enum class IdealLossMode { point, pair };

/// Monte-Carlo estimate of the ideal loss over R instead of Y: point mode
/// averages over uniform cells labeled by realized relevance; pair mode over
/// uniform (u,i,j) triples with R[u,i]=1, R[u,j]=0.
double ideal_loss_eval(const SyntheticWorld& world, const MFParams& params, IdealLossMode mode,
                       std::int64_t sample_budget, std::uint64_t seed);

}  // namespace fairsample
