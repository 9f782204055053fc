#include "fairsample/sampling.hpp"

#include <random>

#include "fairsample/errors.hpp"

namespace fairsample {

namespace {

PointSample draw_positive(const InteractionMatrix& m, Rng& rng) {
  const auto [u, i] = m.pair_at(uniform_index(rng, m.n_interactions));
  return {u, i, 1};
}

PointSample draw_negative(const InteractionMatrix& m, const SamplerConfig& cfg, Rng& rng) {
  for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
    const Idx u = static_cast<Idx>(uniform_index(rng, m.n_users));
    const Idx i = static_cast<Idx>(uniform_index(rng, m.n_items));
    if (!m.has(u, i)) {
      return {u, i, 0};
    }
  }
  throw SamplerExhaustedError("negative sampling exceeded retry_cap; matrix too dense");
}

}  // namespace

std::vector<PointSample> sample_point_batch_classic(const InteractionMatrix& matrix,
                                                    std::int64_t batch_positives,
                                                    const SamplerConfig& cfg, Rng& rng) {
  if (matrix.n_interactions == 0) {
    throw ContractError("sample_point_batch_classic: matrix has no interactions");
  }
  std::vector<PointSample> out;
  out.reserve(static_cast<std::size_t>(batch_positives * (1 + cfg.neg_per_pos)));
  for (std::int64_t b = 0; b < batch_positives; ++b) {
    out.push_back(draw_positive(matrix, rng));
    for (int n = 0; n < cfg.neg_per_pos; ++n) {
      out.push_back(draw_negative(matrix, cfg, rng));
    }
  }
  return out;
}

std::optional<PointGroup> complete_point_group(const InteractionMatrix& matrix,
                                               const PointSample& base, const SamplerConfig& cfg,
                                               Rng& rng) {
  if (matrix.has(base.u, base.i) != (base.label == 1)) {
    throw ContractError("complete_point_group: base label disagrees with matrix");
  }
  if (base.label == 1) {
    for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
      const auto [pu, pi] = matrix.pair_at(uniform_index(rng, matrix.n_interactions));
      if (pu == base.u || pi == base.i) continue;
      if (matrix.has(pu, base.i) || matrix.has(base.u, pi)) continue;
      PointGroup g;
      g.base = base;
      g.partner = {pu, pi, 1};
      g.cross_a = {pu, base.i, 0};
      g.cross_b = {base.u, pi, 0};
      return g;
    }
    return std::nullopt;
  }
  // Negative base: the crosses must satisfy Y[u~,i] = 1 and Y[u,i~] = 1, so
  // candidates come from the adjacency lists instead of uniform pairs.
  const auto& users_of_i = matrix.item_users[base.i];
  const auto& items_of_u = matrix.user_items[base.u];
  if (users_of_i.empty() || items_of_u.empty()) {
    return std::nullopt;
  }
  for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
    const Idx pu = users_of_i[uniform_index(rng, static_cast<std::int64_t>(users_of_i.size()))];
    const Idx pi = items_of_u[uniform_index(rng, static_cast<std::int64_t>(items_of_u.size()))];
    if (matrix.has(pu, pi)) continue;
    PointGroup g;
    g.base = base;
    g.partner = {pu, pi, 0};
    g.cross_a = {pu, base.i, 1};
    g.cross_b = {base.u, pi, 1};
    return g;
  }
  return std::nullopt;
}

std::vector<PairTriple> sample_pair_batch_classic(const InteractionMatrix& matrix,
                                                  std::int64_t batch, const SamplerConfig& cfg,
                                                  Rng& rng) {
  if (matrix.n_interactions == 0) {
    throw ContractError("sample_pair_batch_classic: matrix has no interactions");
  }
  if (matrix.n_interactions ==
      static_cast<std::int64_t>(matrix.n_users) * static_cast<std::int64_t>(matrix.n_items)) {
    throw SamplerExhaustedError("matrix is complete; no negative items exist");
  }
  std::vector<PairTriple> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (std::int64_t b = 0; b < batch; ++b) {
    // A user with a full row exhausts the j-rejection; redraw (u,i) then.
    for (int outer = 0;; ++outer) {
      if (outer >= cfg.retry_cap) {
        throw SamplerExhaustedError("pair sampling exceeded retry_cap redrawing (u,i)");
      }
      const auto [u, i] = matrix.pair_at(uniform_index(rng, matrix.n_interactions));
      bool found = false;
      Idx j = 0;
      for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
        j = static_cast<Idx>(uniform_index(rng, matrix.n_items));
        if (!matrix.has(u, j)) {
          found = true;
          break;
        }
      }
      if (found) {
        out.push_back({u, i, j});
        break;
      }
    }
  }
  return out;
}

std::optional<PairGroup> complete_pair_mirror(const InteractionMatrix& matrix,
                                              const PairTriple& base, const SamplerConfig& cfg,
                                              Rng& rng) {
  if (!matrix.has(base.u, base.i) || matrix.has(base.u, base.j) || base.i == base.j) {
    throw ContractError("complete_pair_mirror: base triple disagrees with matrix");
  }
  const auto& users_of_j = matrix.item_users[base.j];
  if (users_of_j.empty()) {
    return std::nullopt;
  }
  for (int attempt = 0; attempt < cfg.retry_cap; ++attempt) {
    const Idx mu = users_of_j[uniform_index(rng, static_cast<std::int64_t>(users_of_j.size()))];
    if (mu == base.u || matrix.has(mu, base.i)) continue;
    PairGroup g;
    g.base = base;
    g.mirror = {mu, base.j, base.i};
    return g;
  }
  return std::nullopt;
}

bool verify_group(const InteractionMatrix& matrix, const PointGroup& g) {
  const auto in_range = [&](const PointSample& s) {
    return s.u >= 0 && s.u < matrix.n_users && s.i >= 0 && s.i < matrix.n_items;
  };
  if (!in_range(g.base) || !in_range(g.partner) || !in_range(g.cross_a) || !in_range(g.cross_b)) {
    return false;
  }
  if (g.partner.u == g.base.u || g.partner.i == g.base.i) return false;
  // Structural wiring: crosses pair the base with the partner.
  if (g.cross_a.u != g.partner.u || g.cross_a.i != g.base.i) return false;
  if (g.cross_b.u != g.base.u || g.cross_b.i != g.partner.i) return false;
  const std::uint8_t y = g.base.label;
  if (g.partner.label != y) return false;
  if (g.cross_a.label != 1 - y || g.cross_b.label != 1 - y) return false;
  const auto holds = [&](const PointSample& s) {
    return matrix.has(s.u, s.i) == (s.label == 1);
  };
  return holds(g.base) && holds(g.partner) && holds(g.cross_a) && holds(g.cross_b);
}

bool verify_group(const InteractionMatrix& matrix, const PairGroup& g) {
  const auto in_range = [&](const PairTriple& t) {
    return t.u >= 0 && t.u < matrix.n_users && t.i >= 0 && t.i < matrix.n_items && t.j >= 0 &&
           t.j < matrix.n_items;
  };
  if (!in_range(g.base) || !in_range(g.mirror)) return false;
  if (g.base.i == g.base.j) return false;
  if (g.mirror.u == g.base.u) return false;
  if (g.mirror.i != g.base.j || g.mirror.j != g.base.i) return false;
  return matrix.has(g.base.u, g.base.i) && !matrix.has(g.base.u, g.base.j) &&
         matrix.has(g.mirror.u, g.mirror.i) && !matrix.has(g.mirror.u, g.mirror.j);
}

FsPointBatch sample_point_batch_fs(const InteractionMatrix& matrix, std::int64_t batch_positives,
                                   double fs_mix_ratio, const SamplerConfig& cfg, Rng& rng) {
  FsPointBatch out;
  out.samples.reserve(static_cast<std::size_t>(4 * batch_positives * (1 + cfg.neg_per_pos)));
  std::bernoulli_distribution mix(fs_mix_ratio);

  const auto emit = [&](PointSample base, bool is_positive) {
    const bool attempt = fs_mix_ratio >= 1.0 || mix(rng);
    if (!attempt) {
      out.samples.push_back(base);
      return;
    }
    ++out.groups_attempted;
    auto group = complete_point_group(matrix, base, cfg, rng);
    if (!group && cfg.on_failure == OnFailure::resample_base) {
      for (int redraw = 0; redraw < cfg.retry_cap && !group; ++redraw) {
        base = is_positive ? draw_positive(matrix, rng) : draw_negative(matrix, cfg, rng);
        group = complete_point_group(matrix, base, cfg, rng);
      }
    }
    if (group) {
      ++out.groups_completed;
      out.samples.push_back(group->base);
      out.samples.push_back(group->partner);
      out.samples.push_back(group->cross_a);
      out.samples.push_back(group->cross_b);
    } else {
      // Incomplete: the base still trains, the skip is counted.
      out.samples.push_back(base);
    }
  };

  if (matrix.n_interactions == 0) {
    throw ContractError("sample_point_batch_fs: matrix has no interactions");
  }
  for (std::int64_t b = 0; b < batch_positives; ++b) {
    emit(draw_positive(matrix, rng), true);
    for (int n = 0; n < cfg.neg_per_pos; ++n) {
      emit(draw_negative(matrix, cfg, rng), false);
    }
  }
  return out;
}

FsPairBatch sample_pair_batch_fs(const InteractionMatrix& matrix, std::int64_t batch,
                                 double fs_mix_ratio, const SamplerConfig& cfg, Rng& rng) {
  FsPairBatch out;
  out.triples.reserve(static_cast<std::size_t>(2 * batch));
  std::bernoulli_distribution mix(fs_mix_ratio);
  const auto bases = sample_pair_batch_classic(matrix, batch, cfg, rng);
  for (PairTriple base : bases) {
    const bool attempt = fs_mix_ratio >= 1.0 || mix(rng);
    if (!attempt) {
      out.triples.push_back(base);
      continue;
    }
    ++out.groups_attempted;
    auto group = complete_pair_mirror(matrix, base, cfg, rng);
    if (!group && cfg.on_failure == OnFailure::resample_base) {
      for (int redraw = 0; redraw < cfg.retry_cap && !group; ++redraw) {
        base = sample_pair_batch_classic(matrix, 1, cfg, rng)[0];
        group = complete_pair_mirror(matrix, base, cfg, rng);
      }
    }
    if (group) {
      ++out.groups_completed;
      out.triples.push_back(group->base);
      out.triples.push_back(group->mirror);
    } else {
      out.triples.push_back(base);
    }
  }
  return out;
}

}  // namespace fairsample
