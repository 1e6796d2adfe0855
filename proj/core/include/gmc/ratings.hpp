#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmc/errors.hpp"

namespace gmc {

struct Rating {
  int user;
  int item;
  double value;
};

/// Inclusive bounds of valid rating values.
struct RatingRange {
  double min = 0.0;
  double max = 0.0;
};

/// Observed entries of a users x items matrix in triplet form, with dense
/// 0-based indices and the maps back to the original ids.
struct SparseRatingMatrix {
  int n_users = 0;
  int n_items = 0;
  std::vector<Rating> ratings;  // sorted by (user, item), no duplicates
  RatingRange rating_range;
  std::vector<std::string> user_ids;  // dense index -> original id
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> user_index;  // original id -> dense index
  std::unordered_map<std::string, int> item_index;

  /// Validates and canonicalizes: sorts triplets, rejects duplicates and
  /// out-of-bounds indices, derives the range from the data unless given.
  /// Empty id lists default to "0".."n-1".
  static SparseRatingMatrix create(int n_users, int n_items, std::vector<Rating> entries,
                                   std::optional<RatingRange> range = {},
                                   std::vector<std::string> user_ids = {},
                                   std::vector<std::string> item_ids = {});

  /// Ratings bucketed per user, each bucket sorted by item.
  std::vector<std::vector<Rating>> by_user() const;
};

enum class RatingsFormat { movielens, csv };

/// Loads `UserID::MovieID::Rating::Timestamp` records (movielens) or
/// `user,item,rating[,timestamp]` CSV with an optional single header line.
/// Blank lines and lines starting with '#' are skipped. Duplicate
/// (user, item) pairs keep the last occurrence and print a warning.
SparseRatingMatrix load_ratings(const std::string& path, RatingsFormat format,
                                std::optional<RatingRange> range_override = {});

/// Writes `user,item,rating` CSV with original ids; reload reproduces the
/// identical triplet set.
void save_csv(const SparseRatingMatrix& m, const std::string& path,
              const std::string& header_comment = "");

/// Removes users with fewer than min_user_ratings ratings and items with
/// fewer than min_item_ratings, repeating until both thresholds hold
/// (removing items can demote users and vice versa), then re-indexes densely.
SparseRatingMatrix filter_matrix(const SparseRatingMatrix& m, int min_user_ratings = 20,
                                 int min_item_ratings = 2);

/// Keeps a uniform random subset of n_users users; items keep their indices.
SparseRatingMatrix sample_users(const SparseRatingMatrix& m, int n_users, std::uint64_t seed);

/// Swaps the user/item roles.
SparseRatingMatrix transpose(const SparseRatingMatrix& m);

/// One rating per user held out for testing; the rest form the training set
/// over the unchanged index space.
struct WeakSplit {
  SparseRatingMatrix train;
  std::vector<Rating> test;
};

/// Holds out one uniformly random rating from every user. Every user must
/// have at least two ratings. Deterministic for a fixed seed.
WeakSplit split_weak(const SparseRatingMatrix& m, std::uint64_t seed);

/// Disjoint user partition: training users keep all their ratings (users
/// re-indexed, item space preserved); each test user's ratings are split
/// into an observed and a held-out part, both nonempty.
struct StrongSplit {
  SparseRatingMatrix train_users;
  std::vector<std::string> test_user_ids;
  std::vector<std::vector<Rating>> test_observed;  // Rating.user = position in test_user_ids
  std::vector<std::vector<Rating>> test_heldout;
};

StrongSplit split_strong(const SparseRatingMatrix& m, int n_test_users, double observed_fraction,
                         std::uint64_t seed);

/// Split manifests as `user,item,rating,role` CSV with original ids,
/// role in {train, test_observed, test_heldout}.
void save_weak_manifest(const WeakSplit& split, const std::string& path);
void save_strong_manifest(const StrongSplit& split, const std::string& path);

}  // namespace gmc
