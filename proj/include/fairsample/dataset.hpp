#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fairsample {

using Idx = std::int32_t;
using CountVector = Eigen::Vector<std::int64_t, Eigen::Dynamic>;

/// One record of a raw rating log, before filtering.
struct RawInteraction {
  std::string user_key;
  std::string item_key;
  double rating = 0.0;
  std::optional<std::int64_t> timestamp;
};

enum class LogFormat { tsv, csv };

/// Binary interaction matrix Y, stored as sorted adjacency lists on both
/// axes plus bidirectional key<->index maps. Immutable after construction.
struct InteractionMatrix {
  Idx n_users = 0;
  Idx n_items = 0;
  std::vector<std::vector<Idx>> user_items;  // per-user sorted item lists
  std::vector<std::vector<Idx>> item_users;  // per-item sorted user lists
  std::vector<std::string> user_keys;        // dense index -> opaque key
  std::vector<std::string> item_keys;
  std::unordered_map<std::string, Idx> user_index;
  std::unordered_map<std::string, Idx> item_index;
  std::int64_t n_interactions = 0;

  /// Membership query Y[u,i] == 1, logarithmic in the row length.
  bool has(Idx u, Idx i) const;

  /// The n-th interaction pair in (user, item-rank) order, n in
  /// [0, n_interactions). Used for uniform draws over the interaction list.
  std::pair<Idx, Idx> pair_at(std::int64_t n) const;

  /// Sorts and deduplicates user_items, then rebuilds item_users, the
  /// flat-draw offsets and n_interactions from it. Call after filling
  /// user_items (and the key maps) by hand.
  void rebuild_derived();

 private:
  std::vector<std::int64_t> user_offsets_;  // row-length prefix sums, size n_users+1
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

struct SplitOptions {
  // Drop users whose train row ends up empty (re-indexing everything)
  // instead of keeping them with empty rows.
  bool drop_empty_train_users = false;
};

struct SplitBundle {
  InteractionMatrix train;
  std::vector<std::vector<Idx>> validation;  // per-user held-out items, sorted
  std::vector<std::vector<Idx>> test;
  CountVector popularity;  // per-item interaction count on train only
  std::uint64_t seed = 0;
};

/// Parses a TSV/CSV rating log with columns user, item, rating[, timestamp].
/// Blank lines are skipped; a malformed line raises ParseError with its
/// 1-based line number. Empty input yields an empty list.
std::vector<RawInteraction> parse_interactions(std::istream& in, LogFormat format,
                                               bool has_header = false);

/// Keeps interactions with rating >= min_rating (inclusive), then applies the
/// iterative k-core: users and items with fewer than k remaining interactions
/// are peeled until a fixed point. Input order is preserved.
std::vector<RawInteraction> filter_and_core(const std::vector<RawInteraction>& interactions,
                                            double min_rating = 4.0, int k = 20);

/// Builds the interaction matrix; dense indices follow first appearance,
/// duplicate pairs collapse to one.
InteractionMatrix build_matrix(const std::vector<RawInteraction>& interactions);

/// Splits into biased-train / unbiased-validation / unbiased-test. Holdout
/// pairs are drawn item-first: an item is picked uniformly among items that
/// still have undrawn interactions, then one of its undrawn interactions is
/// picked uniformly. Every item is thus equally likely to supply the next
/// holdout pair regardless of popularity. Deterministic given seed.
SplitBundle unbiased_split(const InteractionMatrix& matrix, const SplitRatios& ratios,
                           std::uint64_t seed, const SplitOptions& options = {});

/// popularity[i] = number of users who interacted with item i.
CountVector popularity(const InteractionMatrix& matrix);

}  // namespace fairsample
