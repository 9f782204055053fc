#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fairsample/dataset.hpp"

namespace fairsample {

/// Two-step generative model: relevance R ~ Bernoulli(P(R=1)) with
/// P(R=1) = logistic of a low-rank latent field, exposure
/// P(O=1 | R=1) = theta_u * theta_i * P(R=1)^alpha with power-law propensity
/// vectors, and the observable Y = O . R.
struct SyntheticConfig {
  Idx n_users = 0;
  Idx n_items = 0;
  int latent_dim = 8;
  double alpha = 1.0;                  // relevance exponent in the exposure law
  double user_propensity_skew = 0.0;   // power-law exponent for theta_u over a random rank
  double item_propensity_skew = 1.0;   // same for theta_i
  double propensity_ceiling = 1.0;     // cap on max P(Y=1), in (0,1]
  double latent_logit_scale = 2.0;     // std of the relevance logits
  std::int64_t max_realized_cells = 1'000'000;  // keep realized R below this budget
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticWorld {
  Eigen::MatrixXd relevance_prob;  // n_users x n_items, values in (0,1)
  Eigen::VectorXd theta_user;
  Eigen::VectorXd theta_item;
  double alpha = 0.0;
  double rescale_factor = 1.0;  // joint down-scale applied to the theta product
  InteractionMatrix y;          // realized observable interactions
  std::optional<Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>> r_realized;

  Idx n_users() const { return static_cast<Idx>(relevance_prob.rows()); }
  Idx n_items() const { return static_cast<Idx>(relevance_prob.cols()); }
};

/// Generates a world: latent factors -> relevance probabilities, power-law
/// propensities rescaled jointly so max P(Y=1) stays within the ceiling,
/// then realizes R and Y (Y = 1 implies R = 1). Deterministic given seed.
SyntheticWorld generate_world(const SyntheticConfig& config);

/// P(O=1 | R=1) = theta_u * theta_i * relevance^alpha.
double exposure_prob(const SyntheticWorld& world, Idx u, Idx i);

/// Per-user uniform item sample from the catalog minus that user's training
/// interactions, labeled with realized relevance. The R-based ideal test set.
std::vector<std::vector<std::pair<Idx, std::uint8_t>>> relevance_holdout(
    const SyntheticWorld& world, Idx per_user, std::uint64_t seed);

}  // namespace fairsample
