#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairsample/dataset.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

struct PointSample {
  Idx u = 0;
  Idx i = 0;
  std::uint8_t label = 0;  // Y[u,i]
};

/// A base point-wise sample plus the supplementary samples that make every
/// involved user and item appear once as positive and once as negative:
/// labels satisfy Y[partner] = Y[base], Y[cross_a] = Y[cross_b] = 1 - Y[base].
struct PointGroup {
  PointSample base;     // (u, i)
  PointSample partner;  // (u~, i~), same label as base
  PointSample cross_a;  // (u~, i), flipped label
  PointSample cross_b;  // (u, i~), flipped label
};

struct PairTriple {
  Idx u = 0;
  Idx i = 0;  // positive: Y[u,i] = 1
  Idx j = 0;  // negative: Y[u,j] = 0
};

/// A base triple plus its mirror (u~, j, i) with Y[u~,j] = 1, Y[u~,i] = 0,
/// so i and j each appear once in the positive and once in the negative slot.
struct PairGroup {
  PairTriple base;
  PairTriple mirror;
};

enum class OnFailure { skip, resample_base };

struct SamplerConfig {
  int retry_cap = 64;
  int neg_per_pos = 1;  // point-wise only
  OnFailure on_failure = OnFailure::skip;
  std::uint64_t seed = 0;
};

/// Classic point-wise batch: batch_positives positives drawn uniformly from
/// the interaction list, each followed by neg_per_pos negatives drawn
/// uniformly over user x item and rejected while Y = 1.
std::vector<PointSample> sample_point_batch_classic(const InteractionMatrix& matrix,
                                                    std::int64_t batch_positives,
                                                    const SamplerConfig& cfg, Rng& rng);

/// Completes a base sample into a fair group, or not-found when no valid
/// candidate turns up within retry_cap draws. Candidates for a positive base
/// come from the interaction list; for a negative base they come from the
/// adjacency lists of u and i, where the cross conditions can actually hold.
std::optional<PointGroup> complete_point_group(const InteractionMatrix& matrix,
                                               const PointSample& base, const SamplerConfig& cfg,
                                               Rng& rng);

/// Classic BPR batch: (u,i) uniform over interactions, j uniform over items
/// rejected while Y[u,j] = 1.
std::vector<PairTriple> sample_pair_batch_classic(const InteractionMatrix& matrix,
                                                  std::int64_t batch, const SamplerConfig& cfg,
                                                  Rng& rng);

/// Finds the mirrored triple (u~, j, i): u~ drawn from item_users[j],
/// accepted when u~ != u and Y[u~,i] = 0.
std::optional<PairGroup> complete_pair_mirror(const InteractionMatrix& matrix,
                                              const PairTriple& base, const SamplerConfig& cfg,
                                              Rng& rng);

/// Re-checks every condition of the group against the matrix. Used as the
/// soundness oracle for everything the completion samplers emit.
bool verify_group(const InteractionMatrix& matrix, const PointGroup& group);
bool verify_group(const InteractionMatrix& matrix, const PairGroup& group);

/// Fair-sampled batches keep the flat sample list (group members adjacent,
/// bases of incomplete groups alone) together with completion statistics, so
/// skip rates are reported rather than silently dropped.
struct FsPointBatch {
  std::vector<PointSample> samples;
  std::int64_t groups_attempted = 0;
  std::int64_t groups_completed = 0;
};

struct FsPairBatch {
  std::vector<PairTriple> triples;
  std::int64_t groups_attempted = 0;
  std::int64_t groups_completed = 0;
};

FsPointBatch sample_point_batch_fs(const InteractionMatrix& matrix, std::int64_t batch_positives,
                                   double fs_mix_ratio, const SamplerConfig& cfg, Rng& rng);

FsPairBatch sample_pair_batch_fs(const InteractionMatrix& matrix, std::int64_t batch,
                                 double fs_mix_ratio, const SamplerConfig& cfg, Rng& rng);

}  // namespace fairsample
