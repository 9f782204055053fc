#include "fairsample/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fairsample/errors.hpp"
#include "fairsample/math.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

void SyntheticConfig::validate() const {
  if (n_users < 1 || n_items < 1 || latent_dim < 1) {
    throw ConfigError("world dimensions must be >= 1");
  }
  if (alpha < 0) {
    throw ConfigError("alpha must be non-negative");
  }
  if (user_propensity_skew < 0 || item_propensity_skew < 0) {
    throw ConfigError("propensity skews must be non-negative");
  }
  if (propensity_ceiling <= 0 || propensity_ceiling > 1) {
    throw ConfigError("propensity_ceiling must be in (0, 1]");
  }
  if (latent_logit_scale <= 0) {
    throw ConfigError("latent_logit_scale must be positive");
  }
}

namespace {

// theta[perm[r]] = (r+1)^-skew: a power law over a random rank assignment,
// normalized to max 1 so the exposure probability stays a probability.
Eigen::VectorXd power_law_propensity(Idx n, double skew, Rng& rng) {
  std::vector<Idx> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::VectorXd theta(n);
  for (Idx r = 0; r < n; ++r) {
    theta[perm[r]] = std::pow(static_cast<double>(r + 1), -skew);
  }
  return theta;
}

}  // namespace

SyntheticWorld generate_world(const SyntheticConfig& config) {
  config.validate();
  const Idx nu = config.n_users;
  const Idx ni = config.n_items;
  const int k = config.latent_dim;

  SyntheticWorld world;
  world.alpha = config.alpha;

  // Low-rank relevance field: logits with std ~ latent_logit_scale.
  {
    Rng rng = make_rng(derive_seed(config.seed, "latents"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd xu(nu, k), yi(ni, k);
    for (Idx u = 0; u < nu; ++u) {
      for (int f = 0; f < k; ++f) xu(u, f) = gauss(rng);
    }
    for (Idx i = 0; i < ni; ++i) {
      for (int f = 0; f < k; ++f) yi(i, f) = gauss(rng);
    }
    const double scale = config.latent_logit_scale / std::sqrt(static_cast<double>(k));
    world.relevance_prob = (scale * (xu * yi.transpose())).unaryExpr([](double z) {
      return logistic(z);
    });
  }

  {
    Rng rng = make_rng(derive_seed(config.seed, "theta_user"));
    world.theta_user = power_law_propensity(nu, config.user_propensity_skew, rng);
  }
  {
    Rng rng = make_rng(derive_seed(config.seed, "theta_item"));
    world.theta_item = power_law_propensity(ni, config.item_propensity_skew, rng);
  }

  // Joint rescale (downward only) so max P(Y=1) <= ceiling. Upscaling would
  // push theta above 1 and break P(O=1|R=1) <= 1.
  const double max_py = ((world.theta_user * world.theta_item.transpose()).array() *
                         world.relevance_prob.array().pow(config.alpha + 1.0))
                            .maxCoeff();
  world.rescale_factor = max_py > config.propensity_ceiling ? config.propensity_ceiling / max_py : 1.0;
  const double theta_scale = std::sqrt(world.rescale_factor);
  world.theta_user *= theta_scale;
  world.theta_item *= theta_scale;

  const bool keep_r = static_cast<std::int64_t>(nu) * ni <= config.max_realized_cells;
  if (keep_r) {
    world.r_realized.emplace(nu, ni);
  }

  // Realize R then O|R cell by cell; Y = O * R, so Y = 1 implies R = 1.
  InteractionMatrix& y = world.y;
  y.n_items = ni;
  y.user_items.assign(nu, {});
  y.user_keys.reserve(nu);
  y.item_keys.reserve(ni);
  for (Idx u = 0; u < nu; ++u) {
    y.user_keys.push_back(std::to_string(u));
    y.user_index.emplace(y.user_keys.back(), u);
  }
  for (Idx i = 0; i < ni; ++i) {
    y.item_keys.push_back(std::to_string(i));
    y.item_index.emplace(y.item_keys.back(), i);
  }
  {
    Rng rng = make_rng(derive_seed(config.seed, "realize"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Idx u = 0; u < nu; ++u) {
      for (Idx i = 0; i < ni; ++i) {
        const double p = world.relevance_prob(u, i);
        const bool r = unif(rng) < p;
        if (keep_r) {
          (*world.r_realized)(u, i) = r ? 1 : 0;
        }
        if (r) {
          const double expo = world.theta_user[u] * world.theta_item[i] * std::pow(p, config.alpha);
          if (unif(rng) < expo) {
            y.user_items[u].push_back(i);
          }
        }
      }
    }
  }
  y.rebuild_derived();
  return world;
}

double exposure_prob(const SyntheticWorld& world, Idx u, Idx i) {
  if (u < 0 || u >= world.n_users() || i < 0 || i >= world.n_items()) {
    throw std::out_of_range("exposure_prob: index out of range");
  }
  return world.theta_user[u] * world.theta_item[i] * std::pow(world.relevance_prob(u, i), world.alpha);
}

std::vector<std::vector<std::pair<Idx, std::uint8_t>>> relevance_holdout(
    const SyntheticWorld& world, Idx per_user, std::uint64_t seed) {
  const Idx nu = world.n_users();
  const Idx ni = world.n_items();
  if (per_user < 1 || per_user > ni) {
    throw ConfigError("relevance_holdout: per_user must be in [1, n_items]");
  }
  Rng rng = make_rng(derive_seed(seed, "holdout"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<std::vector<std::pair<Idx, std::uint8_t>>> out(nu);
  std::vector<char> in_train(ni);
  std::vector<Idx> eligible;
  for (Idx u = 0; u < nu; ++u) {
    std::fill(in_train.begin(), in_train.end(), 0);
    for (Idx i : world.y.user_items[u]) in_train[i] = 1;
    eligible.clear();
    for (Idx i = 0; i < ni; ++i) {
      if (!in_train[i]) eligible.push_back(i);
    }
    if (per_user > static_cast<Idx>(eligible.size())) {
      throw DataError("relevance_holdout: user " + std::to_string(u) +
                      " has fewer eligible items than per_user");
    }
    // Partial Fisher-Yates: uniform without replacement over the eligibles.
    for (Idx d = 0; d < per_user; ++d) {
      const std::size_t pick = static_cast<std::size_t>(
          d + uniform_index(rng, static_cast<std::int64_t>(eligible.size()) - d));
      std::swap(eligible[d], eligible[pick]);
      const Idx item = eligible[d];
      std::uint8_t label;
      if (world.r_realized) {
        label = (*world.r_realized)(u, item);
      } else {
        // R was not retained at this scale; label by a fresh draw from the
        // relevance law (documented variance source).
        label = unif(rng) < world.relevance_prob(u, item) ? 1 : 0;
      }
      out[u].emplace_back(item, label);
    }
    std::sort(out[u].begin(), out[u].end());
  }
  return out;
}

}  // namespace fairsample
