#include "fairsample/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fairsample/errors.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

const char* objective_name(Objective o) {
  switch (o) {
    case Objective::point_classic: return "point_classic";
    case Objective::point_fs: return "point_fs";
    case Objective::pair_classic: return "pair_classic";
    case Objective::pair_fs: return "pair_fs";
  }
  return "unknown";
}

Objective objective_from_name(const std::string& name) {
  if (name == "point_classic") return Objective::point_classic;
  if (name == "point_fs") return Objective::point_fs;
  if (name == "pair_classic") return Objective::pair_classic;
  if (name == "pair_fs") return Objective::pair_fs;
  throw ConfigError("unknown objective '" + name + "'");
}

void TrainConfig::validate() const {
  if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (l2 < 0) throw ConfigError("l2 must be non-negative");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_positives < 1) throw ConfigError("batch_positives must be >= 1");
  if (neg_per_pos < 0) throw ConfigError("neg_per_pos must be >= 0");
  if (fs_mix_ratio < 0 || fs_mix_ratio > 1) throw ConfigError("fs_mix_ratio must be in [0,1]");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (sampler.retry_cap < 1) throw ConfigError("retry_cap must be >= 1");
  model.validate();
}

double point_loss(double logit, int label) {
  return label ? log1pexp(-logit) : log1pexp(logit);
}

double pair_loss(double logit_pos, double logit_neg) {
  return log1pexp(logit_neg - logit_pos);
}

Eigen::RowVectorXd& SparseGradient::user_row(Idx u, int d) {
  auto [it, inserted] = user_factors.try_emplace(u);
  if (inserted) it->second = Eigen::RowVectorXd::Zero(d);
  return it->second;
}

Eigen::RowVectorXd& SparseGradient::item_row(Idx i, int d) {
  auto [it, inserted] = item_factors.try_emplace(i);
  if (inserted) it->second = Eigen::RowVectorXd::Zero(d);
  return it->second;
}

double accumulate_point_batch(const MFParams& params, std::span<const PointSample> batch,
                              double l2, SparseGradient& grad) {
  const int d = params.d();
  double loss_sum = 0.0;
  for (const auto& s : batch) {
    const double z = score(params, s.u, s.i);
    loss_sum += point_loss(z, s.label);
    const double dz = logistic(z) - static_cast<double>(s.label);
    if (d > 0) {
      grad.user_row(s.u, d) += dz * params.item_factors.row(s.i) + l2 * params.user_factors.row(s.u);
      grad.item_row(s.i, d) += dz * params.user_factors.row(s.u) + l2 * params.item_factors.row(s.i);
    }
    if (params.use_biases) {
      grad.user_bias[s.u] += dz + l2 * params.user_bias[s.u];
      grad.item_bias[s.i] += dz + l2 * params.item_bias[s.i];
      grad.global_bias += dz;
    }
  }
  return loss_sum;
}

double accumulate_pair_batch(const MFParams& params, std::span<const PairTriple> batch, double l2,
                             SparseGradient& grad) {
  const int d = params.d();
  double loss_sum = 0.0;
  for (const auto& t : batch) {
    const double zi = score(params, t.u, t.i);
    const double zj = score(params, t.u, t.j);
    loss_sum += pair_loss(zi, zj);
    const double dd = logistic(zi - zj) - 1.0;  // d(loss)/d(zi - zj)
    if (d > 0) {
      grad.user_row(t.u, d) +=
          dd * (params.item_factors.row(t.i) - params.item_factors.row(t.j)) +
          l2 * params.user_factors.row(t.u);
      grad.item_row(t.i, d) += dd * params.user_factors.row(t.u) + l2 * params.item_factors.row(t.i);
      grad.item_row(t.j, d) += -dd * params.user_factors.row(t.u) + l2 * params.item_factors.row(t.j);
    }
    if (params.use_biases) {
      // The user bias cancels inside the logit difference.
      grad.item_bias[t.i] += dd + l2 * params.item_bias[t.i];
      grad.item_bias[t.j] += -dd + l2 * params.item_bias[t.j];
    }
  }
  return loss_sum;
}

SparseGradient point_grad(const MFParams& params, const PointSample& sample, double l2) {
  SparseGradient g;
  accumulate_point_batch(params, std::span(&sample, 1), l2, g);
  return g;
}

SparseGradient pair_grad(const MFParams& params, const PairTriple& triple, double l2) {
  if (triple.i == triple.j) {
    throw ContractError("pair_grad: i and j must differ");
  }
  SparseGradient g;
  accumulate_pair_batch(params, std::span(&triple, 1), l2, g);
  return g;
}

void apply_gradient(MFParams& params, const SparseGradient& grad, double step_scale) {
  for (const auto& [u, g] : grad.user_factors) params.user_factors.row(u) -= step_scale * g;
  for (const auto& [i, g] : grad.item_factors) params.item_factors.row(i) -= step_scale * g;
  if (params.use_biases) {
    for (const auto& [u, g] : grad.user_bias) params.user_bias[u] -= step_scale * g;
    for (const auto& [i, g] : grad.item_bias) params.item_bias[i] -= step_scale * g;
    params.global_bias -= step_scale * grad.global_bias;
  }
}

double point_batch_step(MFParams& params, std::span<const PointSample> batch, double lr,
                        double l2) {
  if (batch.empty()) return 0.0;
  SparseGradient grad;
  const double loss_sum = accumulate_point_batch(params, batch, l2, grad);
  apply_gradient(params, grad, lr / static_cast<double>(batch.size()));
  return loss_sum / static_cast<double>(batch.size());
}

double pair_batch_step(MFParams& params, std::span<const PairTriple> batch, double lr, double l2) {
  if (batch.empty()) return 0.0;
  SparseGradient grad;
  const double loss_sum = accumulate_pair_batch(params, batch, l2, grad);
  apply_gradient(params, grad, lr / static_cast<double>(batch.size()));
  return loss_sum / static_cast<double>(batch.size());
}

namespace {

struct EpochStats {
  double loss_sum = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t attempted = 0;
  std::int64_t completed = 0;
};

// One sampled batch + SGD step. Returns the stats contribution.
EpochStats run_step(MFParams& params, const InteractionMatrix& matrix, const TrainConfig& cfg,
                    Rng& rng) {
  EpochStats st;
  switch (cfg.objective) {
    case Objective::point_classic: {
      const auto batch = sample_point_batch_classic(matrix, cfg.batch_positives, cfg.sampler, rng);
      st.loss_sum = point_batch_step(params, batch, cfg.learning_rate, cfg.l2) *
                    static_cast<double>(batch.size());
      st.n_samples = static_cast<std::int64_t>(batch.size());
      break;
    }
    case Objective::point_fs: {
      const auto batch =
          sample_point_batch_fs(matrix, cfg.batch_positives, cfg.fs_mix_ratio, cfg.sampler, rng);
      st.loss_sum = point_batch_step(params, batch.samples, cfg.learning_rate, cfg.l2) *
                    static_cast<double>(batch.samples.size());
      st.n_samples = static_cast<std::int64_t>(batch.samples.size());
      st.attempted = batch.groups_attempted;
      st.completed = batch.groups_completed;
      break;
    }
    case Objective::pair_classic: {
      const auto batch = sample_pair_batch_classic(matrix, cfg.batch_positives, cfg.sampler, rng);
      st.loss_sum = pair_batch_step(params, batch, cfg.learning_rate, cfg.l2) *
                    static_cast<double>(batch.size());
      st.n_samples = static_cast<std::int64_t>(batch.size());
      break;
    }
    case Objective::pair_fs: {
      const auto batch =
          sample_pair_batch_fs(matrix, cfg.batch_positives, cfg.fs_mix_ratio, cfg.sampler, rng);
      st.loss_sum = pair_batch_step(params, batch.triples, cfg.learning_rate, cfg.l2) *
                    static_cast<double>(batch.triples.size());
      st.n_samples = static_cast<std::int64_t>(batch.triples.size());
      st.attempted = batch.groups_attempted;
      st.completed = batch.groups_completed;
      break;
    }
  }
  return st;
}

}  // namespace

std::pair<MFParams, TrainReport> train(const InteractionMatrix& matrix, const TrainConfig& cfg) {
  cfg.validate();
  if (matrix.n_interactions == 0) {
    throw DataError("training matrix has no interactions");
  }
  const auto t0 = std::chrono::steady_clock::now();

  ModelConfig mc = cfg.model;
  mc.seed = derive_seed(cfg.seed, "model_init");
  MFParams params = init_params(matrix.n_users, matrix.n_items, mc);

  TrainConfig effective = cfg;
  effective.sampler.neg_per_pos = cfg.neg_per_pos;

  TrainReport report;
  const std::int64_t steps =
      (matrix.n_interactions + cfg.batch_positives - 1) / cfg.batch_positives;

  if (cfg.threads == 1) {
    Rng rng = make_rng(derive_seed(cfg.seed, "sampler"));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      EpochStats epoch_stats;
      for (std::int64_t s = 0; s < steps; ++s) {
        const EpochStats st = run_step(params, matrix, effective, rng);
        epoch_stats.loss_sum += st.loss_sum;
        epoch_stats.n_samples += st.n_samples;
        epoch_stats.attempted += st.attempted;
        epoch_stats.completed += st.completed;
        if (!std::isfinite(st.loss_sum)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                ", step " + std::to_string(s + 1) +
                                "; lower the learning rate");
        }
      }
      report.loss_curve.push_back(epoch_stats.loss_sum /
                                  static_cast<double>(std::max<std::int64_t>(1, epoch_stats.n_samples)));
      report.groups_attempted += epoch_stats.attempted;
      report.groups_completed += epoch_stats.completed;
    }
  } else {
    // Opt-in hogwild path: lock-free concurrent updates over coordinates that
    // are disjoint in expectation. Not bitwise deterministic.
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::vector<EpochStats> per_thread(cfg.threads);
      std::vector<std::thread> workers;
      workers.reserve(cfg.threads);
      for (int t = 0; t < cfg.threads; ++t) {
        workers.emplace_back([&, t]() {
          Rng rng = make_rng(derive_seed(cfg.seed, "sampler",
                                         static_cast<std::uint64_t>(epoch) * cfg.threads + t));
          const std::int64_t my_steps = steps / cfg.threads + (t < steps % cfg.threads ? 1 : 0);
          for (std::int64_t s = 0; s < my_steps; ++s) {
            const EpochStats st = run_step(params, matrix, effective, rng);
            per_thread[t].loss_sum += st.loss_sum;
            per_thread[t].n_samples += st.n_samples;
            per_thread[t].attempted += st.attempted;
            per_thread[t].completed += st.completed;
          }
        });
      }
      for (auto& w : workers) w.join();
      EpochStats epoch_stats;
      for (const auto& st : per_thread) {
        epoch_stats.loss_sum += st.loss_sum;
        epoch_stats.n_samples += st.n_samples;
        epoch_stats.attempted += st.attempted;
        epoch_stats.completed += st.completed;
      }
      if (!std::isfinite(epoch_stats.loss_sum)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      report.loss_curve.push_back(epoch_stats.loss_sum /
                                  static_cast<double>(std::max<std::int64_t>(1, epoch_stats.n_samples)));
      report.groups_attempted += epoch_stats.attempted;
      report.groups_completed += epoch_stats.completed;
    }
  }

  report.skip_rate =
      report.groups_attempted > 0
          ? 1.0 - static_cast<double>(report.groups_completed) /
                      static_cast<double>(report.groups_attempted)
          : 0.0;
  report.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(params), std::move(report)};
}

double ideal_loss_eval(const SyntheticWorld& world, const MFParams& params, IdealLossMode mode,
                       std::int64_t sample_budget, std::uint64_t seed) {
  if (sample_budget < 1) {
    throw ConfigError("ideal_loss_eval: sample_budget must be positive");
  }
  const Idx nu = world.n_users();
  const Idx ni = world.n_items();
  if (params.n_users() != nu || params.n_items() != ni) {
    throw ContractError("ideal_loss_eval: params do not match world dimensions");
  }
  Rng rng = make_rng(derive_seed(seed, "ideal_loss"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto realized = [&](Idx u, Idx i) -> int {
    if (world.r_realized) return (*world.r_realized)(u, i);
    return unif(rng) < world.relevance_prob(u, i) ? 1 : 0;
  };

  if (mode == IdealLossMode::point) {
    double sum = 0.0;
    for (std::int64_t b = 0; b < sample_budget; ++b) {
      const Idx u = static_cast<Idx>(uniform_index(rng, nu));
      const Idx i = static_cast<Idx>(uniform_index(rng, ni));
      const double z = score(params, u, i);
      if (world.r_realized) {
        sum += point_loss(z, (*world.r_realized)(u, i));
      } else {
        const double p = world.relevance_prob(u, i);
        sum += p * point_loss(z, 1) + (1.0 - p) * point_loss(z, 0);
      }
    }
    return sum / static_cast<double>(sample_budget);
  }

  double sum = 0.0;
  std::int64_t accepted = 0;
  std::int64_t draws = 0;
  const std::int64_t cap = sample_budget * 1000 + 1000;
  while (accepted < sample_budget) {
    if (++draws > cap) {
      throw DataError("ideal_loss_eval: could not find (R=1, R=0) triples");
    }
    const Idx u = static_cast<Idx>(uniform_index(rng, nu));
    const Idx i = static_cast<Idx>(uniform_index(rng, ni));
    const Idx j = static_cast<Idx>(uniform_index(rng, ni));
    if (realized(u, i) != 1 || realized(u, j) != 0) continue;
    sum += pair_loss(score(params, u, i), score(params, u, j));
    ++accepted;
  }
  return sum / static_cast<double>(sample_budget);
}

}  // namespace fairsample
