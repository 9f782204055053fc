#include "fairsample/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <string_view>

#include "fairsample/errors.hpp"
#include "fairsample/rng.hpp"

namespace fairsample {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::int64_t line_no, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line_no, std::string("bad ") + what + " field '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view s, std::int64_t line_no, const char* what) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line_no, std::string("bad ") + what + " field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

bool InteractionMatrix::has(Idx u, Idx i) const {
  if (u < 0 || u >= n_users || i < 0 || i >= n_items) {
    return false;
  }
  const auto& row = user_items[u];
  return std::binary_search(row.begin(), row.end(), i);
}

std::pair<Idx, Idx> InteractionMatrix::pair_at(std::int64_t n) const {
  // user_offsets_[u] is the flat index of user u's first interaction.
  const auto it = std::upper_bound(user_offsets_.begin(), user_offsets_.end(), n);
  const Idx u = static_cast<Idx>(it - user_offsets_.begin() - 1);
  const Idx i = user_items[u][static_cast<std::size_t>(n - user_offsets_[u])];
  return {u, i};
}

void InteractionMatrix::rebuild_derived() {
  n_users = static_cast<Idx>(user_items.size());
  user_offsets_.assign(static_cast<std::size_t>(n_users) + 1, 0);
  n_interactions = 0;
  for (Idx u = 0; u < n_users; ++u) {
    auto& row = user_items[u];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    user_offsets_[u] = n_interactions;
    n_interactions += static_cast<std::int64_t>(row.size());
  }
  user_offsets_[n_users] = n_interactions;

  item_users.assign(static_cast<std::size_t>(n_items), {});
  for (Idx u = 0; u < n_users; ++u) {
    for (Idx i : user_items[u]) {
      item_users[i].push_back(u);
    }
  }
  // Rows are visited in ascending user order, so columns come out sorted.
}

std::vector<RawInteraction> parse_interactions(std::istream& in, LogFormat format,
                                               bool has_header) {
  const char delim = format == LogFormat::tsv ? '\t' : ',';
  std::vector<RawInteraction> out;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (has_header && line_no == 1) {
      continue;
    }
    const auto fields = split_fields(line, delim);
    if (fields.size() < 3) {
      throw ParseError(line_no, "expected at least user, item, rating fields");
    }
    RawInteraction rec;
    rec.user_key = std::string(fields[0]);
    rec.item_key = std::string(fields[1]);
    if (rec.user_key.empty() || rec.item_key.empty()) {
      throw ParseError(line_no, "empty user or item key");
    }
    rec.rating = parse_double(fields[2], line_no, "rating");
    if (fields.size() >= 4 && !fields[3].empty()) {
      rec.timestamp = parse_int(fields[3], line_no, "timestamp");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RawInteraction> filter_and_core(const std::vector<RawInteraction>& interactions,
                                            double min_rating, int k) {
  if (k < 1) {
    throw ConfigError("k-core requires k >= 1");
  }
  std::vector<const RawInteraction*> kept;
  kept.reserve(interactions.size());
  for (const auto& r : interactions) {
    if (r.rating >= min_rating) {
      kept.push_back(&r);
    }
  }

  // Temporary dense ids for the peeling pass.
  std::unordered_map<std::string, int> uid;
  std::unordered_map<std::string, int> iid;
  std::vector<int> rec_u(kept.size());
  std::vector<int> rec_i(kept.size());
  std::vector<std::vector<std::size_t>> user_recs;
  std::vector<std::vector<std::size_t>> item_recs;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    auto [uit, unew] = uid.try_emplace(kept[r]->user_key, static_cast<int>(uid.size()));
    if (unew) {
      user_recs.emplace_back();
    }
    auto [iit, inew] = iid.try_emplace(kept[r]->item_key, static_cast<int>(iid.size()));
    if (inew) {
      item_recs.emplace_back();
    }
    rec_u[r] = uit->second;
    rec_i[r] = iit->second;
    user_recs[uit->second].push_back(r);
    item_recs[iit->second].push_back(r);
  }

  std::vector<std::int64_t> deg_u(user_recs.size());
  std::vector<std::int64_t> deg_i(item_recs.size());
  for (std::size_t u = 0; u < user_recs.size(); ++u) deg_u[u] = user_recs[u].size();
  for (std::size_t i = 0; i < item_recs.size(); ++i) deg_i[i] = item_recs[i].size();

  std::vector<char> rec_alive(kept.size(), 1);
  std::vector<char> user_alive(user_recs.size(), 1);
  std::vector<char> item_alive(item_recs.size(), 1);
  std::deque<std::pair<char, int>> dead;  // ('u'|'i', node)
  for (std::size_t u = 0; u < user_recs.size(); ++u) {
    if (deg_u[u] < k) dead.emplace_back('u', static_cast<int>(u));
  }
  for (std::size_t i = 0; i < item_recs.size(); ++i) {
    if (deg_i[i] < k) dead.emplace_back('i', static_cast<int>(i));
  }
  while (!dead.empty()) {
    const auto [side, node] = dead.front();
    dead.pop_front();
    if (side == 'u') {
      if (!user_alive[node]) continue;
      user_alive[node] = 0;
      for (std::size_t r : user_recs[node]) {
        if (!rec_alive[r]) continue;
        rec_alive[r] = 0;
        const int i = rec_i[r];
        if (item_alive[i] && --deg_i[i] < k) dead.emplace_back('i', i);
      }
    } else {
      if (!item_alive[node]) continue;
      item_alive[node] = 0;
      for (std::size_t r : item_recs[node]) {
        if (!rec_alive[r]) continue;
        rec_alive[r] = 0;
        const int u = rec_u[r];
        if (user_alive[u] && --deg_u[u] < k) dead.emplace_back('u', u);
      }
    }
  }

  std::vector<RawInteraction> out;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    if (rec_alive[r]) {
      out.push_back(*kept[r]);
    }
  }
  return out;
}

InteractionMatrix build_matrix(const std::vector<RawInteraction>& interactions) {
  InteractionMatrix m;
  for (const auto& r : interactions) {
    auto [uit, unew] = m.user_index.try_emplace(r.user_key, static_cast<Idx>(m.user_keys.size()));
    if (unew) {
      m.user_keys.push_back(r.user_key);
      m.user_items.emplace_back();
    }
    auto [iit, inew] = m.item_index.try_emplace(r.item_key, static_cast<Idx>(m.item_keys.size()));
    if (inew) {
      m.item_keys.push_back(r.item_key);
    }
    m.user_items[uit->second].push_back(iit->second);
  }
  m.n_items = static_cast<Idx>(m.item_keys.size());
  m.rebuild_derived();
  return m;
}

SplitBundle unbiased_split(const InteractionMatrix& matrix, const SplitRatios& ratios,
                           std::uint64_t seed, const SplitOptions& options) {
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }

  const std::int64_t n = matrix.n_interactions;
  std::int64_t n_val = std::llround(ratios.validation * static_cast<double>(n));
  std::int64_t n_test = std::llround(ratios.test * static_cast<double>(n));
  if (n_val + n_test > n) {
    n_test = n - n_val;
  }

  // Undrawn interactions per item; exhausted items leave the sampling pool.
  std::vector<std::vector<Idx>> remaining = matrix.item_users;
  std::vector<Idx> pool;
  std::vector<Idx> pool_pos(matrix.n_items, -1);
  for (Idx i = 0; i < matrix.n_items; ++i) {
    if (!remaining[i].empty()) {
      pool_pos[i] = static_cast<Idx>(pool.size());
      pool.push_back(i);
    }
  }

  Rng rng = make_rng(derive_seed(seed, "split"));
  SplitBundle bundle;
  bundle.seed = seed;
  bundle.validation.assign(matrix.n_users, {});
  bundle.test.assign(matrix.n_users, {});

  const auto draw_into = [&](std::int64_t count, std::vector<std::vector<Idx>>& holdout) {
    for (std::int64_t d = 0; d < count; ++d) {
      const Idx item = pool[uniform_index(rng, static_cast<std::int64_t>(pool.size()))];
      auto& users = remaining[item];
      const std::size_t pick =
          static_cast<std::size_t>(uniform_index(rng, static_cast<std::int64_t>(users.size())));
      const Idx user = users[pick];
      users[pick] = users.back();
      users.pop_back();
      if (users.empty()) {
        const Idx pos = pool_pos[item];
        pool_pos[pool.back()] = pos;
        pool[pos] = pool.back();
        pool.pop_back();
        pool_pos[item] = -1;
      }
      holdout[user].push_back(item);
    }
  };
  draw_into(n_val, bundle.validation);
  draw_into(n_test, bundle.test);

  for (auto& row : bundle.validation) std::sort(row.begin(), row.end());
  for (auto& row : bundle.test) std::sort(row.begin(), row.end());

  // The undrawn remainder is the train set.
  InteractionMatrix& train = bundle.train;
  train.n_items = matrix.n_items;
  train.user_keys = matrix.user_keys;
  train.item_keys = matrix.item_keys;
  train.user_index = matrix.user_index;
  train.item_index = matrix.item_index;
  train.user_items.assign(matrix.n_users, {});
  for (Idx i = 0; i < matrix.n_items; ++i) {
    for (Idx u : remaining[i]) {
      train.user_items[u].push_back(i);
    }
  }
  train.rebuild_derived();

  if (options.drop_empty_train_users) {
    std::vector<Idx> remap(matrix.n_users, -1);
    InteractionMatrix compact;
    compact.n_items = matrix.n_items;
    compact.item_keys = matrix.item_keys;
    compact.item_index = matrix.item_index;
    std::vector<std::vector<Idx>> val2, test2;
    for (Idx u = 0; u < matrix.n_users; ++u) {
      if (train.user_items[u].empty()) continue;
      remap[u] = static_cast<Idx>(compact.user_keys.size());
      compact.user_keys.push_back(matrix.user_keys[u]);
      compact.user_index.emplace(matrix.user_keys[u], remap[u]);
      compact.user_items.push_back(std::move(train.user_items[u]));
      val2.push_back(std::move(bundle.validation[u]));
      test2.push_back(std::move(bundle.test[u]));
    }
    compact.rebuild_derived();
    bundle.train = std::move(compact);
    bundle.validation = std::move(val2);
    bundle.test = std::move(test2);
  }

  bundle.popularity = popularity(bundle.train);
  return bundle;
}

CountVector popularity(const InteractionMatrix& matrix) {
  CountVector pop(matrix.n_items);
  for (Idx i = 0; i < matrix.n_items; ++i) {
    pop[i] = static_cast<std::int64_t>(matrix.item_users[i].size());
  }
  return pop;
}

}  // namespace fairsample
