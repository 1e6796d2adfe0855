#include "gmc/ratings.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

namespace gmc {

namespace {

std::vector<std::string> default_ids(int n) {
  std::vector<std::string> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = std::to_string(i);
  return ids;
}

std::string format_value(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r')) --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<std::string> split_on(const std::string& line, const std::string& sep) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

struct RawEntry {
  std::string user;
  std::string item;
  double value;
};

}  // namespace

SparseRatingMatrix SparseRatingMatrix::create(int n_users, int n_items,
                                              std::vector<Rating> entries,
                                              std::optional<RatingRange> range,
                                              std::vector<std::string> user_ids,
                                              std::vector<std::string> item_ids) {
  if (n_users < 1 || n_items < 1) throw EmptyMatrix("rating matrix must have users and items");
  if (user_ids.empty()) user_ids = default_ids(n_users);
  if (item_ids.empty()) item_ids = default_ids(n_items);
  if (static_cast<int>(user_ids.size()) != n_users || static_cast<int>(item_ids.size()) != n_items)
    throw DimensionMismatch("id list sizes do not match the matrix shape");

  std::sort(entries.begin(), entries.end(), [](const Rating& a, const Rating& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Rating& r = entries[k];
    if (r.user < 0 || r.user >= n_users || r.item < 0 || r.item >= n_items)
      throw DimensionMismatch("rating index out of bounds");
    if (k > 0 && entries[k - 1].user == r.user && entries[k - 1].item == r.item)
      throw Error("duplicate (user, item) rating: " + user_ids[static_cast<std::size_t>(r.user)] +
                  "," + item_ids[static_cast<std::size_t>(r.item)]);
  }

  RatingRange resolved;
  if (range) {
    resolved = *range;
  } else {
    if (entries.empty()) throw EmptyMatrix("cannot derive a rating range from zero ratings");
    resolved.min = std::numeric_limits<double>::infinity();
    resolved.max = -std::numeric_limits<double>::infinity();
    for (const Rating& r : entries) {
      resolved.min = std::min(resolved.min, r.value);
      resolved.max = std::max(resolved.max, r.value);
    }
  }
  if (resolved.min > resolved.max) throw Error("rating range has min > max");
  for (const Rating& r : entries)
    if (r.value < resolved.min || r.value > resolved.max)
      throw Error("rating " + format_value(r.value) + " outside range [" +
                  format_value(resolved.min) + ", " + format_value(resolved.max) + "]");

  SparseRatingMatrix m;
  m.n_users = n_users;
  m.n_items = n_items;
  m.ratings = std::move(entries);
  m.rating_range = resolved;
  m.user_ids = std::move(user_ids);
  m.item_ids = std::move(item_ids);
  m.user_index.reserve(m.user_ids.size());
  m.item_index.reserve(m.item_ids.size());
  for (int i = 0; i < n_users; ++i) m.user_index[m.user_ids[static_cast<std::size_t>(i)]] = i;
  for (int j = 0; j < n_items; ++j) m.item_index[m.item_ids[static_cast<std::size_t>(j)]] = j;
  if (m.user_index.size() != m.user_ids.size() || m.item_index.size() != m.item_ids.size())
    throw Error("original ids are not unique");
  return m;
}

std::vector<std::vector<Rating>> SparseRatingMatrix::by_user() const {
  std::vector<std::vector<Rating>> buckets(static_cast<std::size_t>(n_users));
  for (const Rating& r : ratings) buckets[static_cast<std::size_t>(r.user)].push_back(r);
  return buckets;
}

SparseRatingMatrix load_ratings(const std::string& path, RatingsFormat format,
                                std::optional<RatingRange> range_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open ratings file: " + path);

  std::vector<RawEntry> raw;
  std::string line;
  std::size_t line_number = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_number;
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;

    if (format == RatingsFormat::movielens) {
      const auto fields = split_on(line, "::");
      if (fields.size() != 4)
        throw ParseError(path, line_number, "expected UserID::MovieID::Rating::Timestamp");
      double value;
      if (!parse_double(fields[2], value))
        throw ParseError(path, line_number, "rating '" + fields[2] + "' is not a number");
      raw.push_back({fields[0], fields[1], value});
    } else {
      const auto fields = split_on(line, ",");
      if (fields.size() != 3 && fields.size() != 4)
        throw ParseError(path, line_number, "expected user,item,rating[,timestamp]");
      double value;
      if (!parse_double(fields[2], value)) {
        // A single header line is tolerated at the top of the file.
        if (first_content_line) {
          first_content_line = false;
          continue;
        }
        throw ParseError(path, line_number, "rating '" + fields[2] + "' is not a number");
      }
      raw.push_back({fields[0], fields[1], value});
    }
    first_content_line = false;
  }
  if (raw.empty()) throw EmptyMatrix("no ratings in " + path);

  // Dense indices in order of first appearance; duplicates keep the last value.
  std::unordered_map<std::string, int> user_index, item_index;
  std::vector<std::string> user_ids, item_ids;
  std::unordered_map<std::int64_t, double> cell_value;
  std::vector<std::pair<int, int>> cell_order;
  std::size_t duplicates = 0;
  for (const RawEntry& e : raw) {
    auto [uit, u_new] = user_index.try_emplace(e.user, static_cast<int>(user_ids.size()));
    if (u_new) user_ids.push_back(e.user);
    auto [iit, i_new] = item_index.try_emplace(e.item, static_cast<int>(item_ids.size()));
    if (i_new) item_ids.push_back(e.item);
    const std::int64_t key =
        static_cast<std::int64_t>(uit->second) * (1LL << 32) + iit->second;
    auto [cit, fresh] = cell_value.try_emplace(key, e.value);
    if (fresh) {
      cell_order.emplace_back(uit->second, iit->second);
    } else {
      cit->second = e.value;
      ++duplicates;
    }
  }
  if (duplicates > 0)
    std::cerr << "warning: " << duplicates << " duplicate rating(s) in " << path
              << ", kept the last occurrence\n";

  std::vector<Rating> entries;
  entries.reserve(cell_order.size());
  for (const auto& [u, i] : cell_order) {
    const std::int64_t key = static_cast<std::int64_t>(u) * (1LL << 32) + i;
    entries.push_back({u, i, cell_value.at(key)});
  }
  return SparseRatingMatrix::create(static_cast<int>(user_ids.size()),
                                    static_cast<int>(item_ids.size()), std::move(entries),
                                    range_override, std::move(user_ids), std::move(item_ids));
}

void save_csv(const SparseRatingMatrix& m, const std::string& path,
              const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "user,item,rating\n";
  for (const Rating& r : m.ratings)
    out << m.user_ids[static_cast<std::size_t>(r.user)] << ","
        << m.item_ids[static_cast<std::size_t>(r.item)] << "," << format_value(r.value) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

namespace {

// Rebuilds a matrix from kept user/item flags, re-indexing densely and
// preserving the original ids and range.
SparseRatingMatrix rebuild(const SparseRatingMatrix& m, const std::vector<char>& keep_user,
                           const std::vector<char>& keep_item) {
  std::vector<int> user_map(static_cast<std::size_t>(m.n_users), -1);
  std::vector<int> item_map(static_cast<std::size_t>(m.n_items), -1);
  std::vector<std::string> user_ids, item_ids;
  for (int u = 0; u < m.n_users; ++u)
    if (keep_user[static_cast<std::size_t>(u)]) {
      user_map[static_cast<std::size_t>(u)] = static_cast<int>(user_ids.size());
      user_ids.push_back(m.user_ids[static_cast<std::size_t>(u)]);
    }
  for (int i = 0; i < m.n_items; ++i)
    if (keep_item[static_cast<std::size_t>(i)]) {
      item_map[static_cast<std::size_t>(i)] = static_cast<int>(item_ids.size());
      item_ids.push_back(m.item_ids[static_cast<std::size_t>(i)]);
    }
  if (user_ids.empty() || item_ids.empty())
    throw EmptyMatrix("filtering removed every user or item");

  std::vector<Rating> kept;
  for (const Rating& r : m.ratings) {
    const int u = user_map[static_cast<std::size_t>(r.user)];
    const int i = item_map[static_cast<std::size_t>(r.item)];
    if (u >= 0 && i >= 0) kept.push_back({u, i, r.value});
  }
  if (kept.empty()) throw EmptyMatrix("filtering removed every rating");
  return SparseRatingMatrix::create(static_cast<int>(user_ids.size()),
                                    static_cast<int>(item_ids.size()), std::move(kept),
                                    m.rating_range, std::move(user_ids), std::move(item_ids));
}

}  // namespace

SparseRatingMatrix filter_matrix(const SparseRatingMatrix& m, int min_user_ratings,
                                 int min_item_ratings) {
  if (min_user_ratings < 0 || min_item_ratings < 0)
    throw Error("filter thresholds must be >= 0");

  std::vector<char> keep_user(static_cast<std::size_t>(m.n_users), 1);
  std::vector<char> keep_item(static_cast<std::size_t>(m.n_items), 1);
  // Removing items can demote users below threshold and vice versa, so
  // iterate to a fixed point.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> user_counts(static_cast<std::size_t>(m.n_users), 0);
    std::vector<int> item_counts(static_cast<std::size_t>(m.n_items), 0);
    for (const Rating& r : m.ratings)
      if (keep_user[static_cast<std::size_t>(r.user)] &&
          keep_item[static_cast<std::size_t>(r.item)]) {
        ++user_counts[static_cast<std::size_t>(r.user)];
        ++item_counts[static_cast<std::size_t>(r.item)];
      }
    for (int u = 0; u < m.n_users; ++u)
      if (keep_user[static_cast<std::size_t>(u)] &&
          user_counts[static_cast<std::size_t>(u)] < min_user_ratings) {
        keep_user[static_cast<std::size_t>(u)] = 0;
        changed = true;
      }
    for (int i = 0; i < m.n_items; ++i)
      if (keep_item[static_cast<std::size_t>(i)] &&
          item_counts[static_cast<std::size_t>(i)] < min_item_ratings) {
        keep_item[static_cast<std::size_t>(i)] = 0;
        changed = true;
      }
  }
  return rebuild(m, keep_user, keep_item);
}

SparseRatingMatrix sample_users(const SparseRatingMatrix& m, int n_users, std::uint64_t seed) {
  if (n_users < 1 || n_users > m.n_users)
    throw TooFewUsers("cannot sample " + std::to_string(n_users) + " of " +
                      std::to_string(m.n_users) + " users");
  std::vector<int> perm(static_cast<std::size_t>(m.n_users));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<char> keep_user(static_cast<std::size_t>(m.n_users), 0);
  for (int k = 0; k < n_users; ++k) keep_user[static_cast<std::size_t>(perm[k])] = 1;
  std::vector<char> keep_item(static_cast<std::size_t>(m.n_items), 1);
  return rebuild(m, keep_user, keep_item);
}

SparseRatingMatrix transpose(const SparseRatingMatrix& m) {
  std::vector<Rating> flipped;
  flipped.reserve(m.ratings.size());
  for (const Rating& r : m.ratings) flipped.push_back({r.item, r.user, r.value});
  return SparseRatingMatrix::create(m.n_items, m.n_users, std::move(flipped), m.rating_range,
                                    m.item_ids, m.user_ids);
}

WeakSplit split_weak(const SparseRatingMatrix& m, std::uint64_t seed) {
  const auto buckets = m.by_user();
  for (int u = 0; u < m.n_users; ++u)
    if (buckets[static_cast<std::size_t>(u)].size() < 2)
      throw UserWithSingleRating("user " + m.user_ids[static_cast<std::size_t>(u)] +
                                 " has fewer than 2 ratings");

  std::mt19937_64 rng(seed);
  std::vector<Rating> train, test;
  train.reserve(m.ratings.size() - static_cast<std::size_t>(m.n_users));
  test.reserve(static_cast<std::size_t>(m.n_users));
  for (int u = 0; u < m.n_users; ++u) {
    const auto& bucket = buckets[static_cast<std::size_t>(u)];
    std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
    const std::size_t held = pick(rng);
    for (std::size_t k = 0; k < bucket.size(); ++k)
      (k == held ? test : train).push_back(bucket[k]);
  }

  WeakSplit split;
  split.train = SparseRatingMatrix::create(m.n_users, m.n_items, std::move(train),
                                           m.rating_range, m.user_ids, m.item_ids);
  split.test = std::move(test);
  return split;
}

StrongSplit split_strong(const SparseRatingMatrix& m, int n_test_users, double observed_fraction,
                         std::uint64_t seed) {
  if (!(observed_fraction > 0.0 && observed_fraction < 1.0))
    throw InvalidFraction("observed_fraction must lie strictly between 0 and 1");
  if (n_test_users < 1 || n_test_users >= m.n_users)
    throw TooFewUsers("need 1 <= n_test_users < n_users, got " + std::to_string(n_test_users) +
                      " of " + std::to_string(m.n_users));

  std::mt19937_64 rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(m.n_users));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> test_users(perm.begin(), perm.begin() + n_test_users);
  std::sort(test_users.begin(), test_users.end());
  std::vector<char> is_test(static_cast<std::size_t>(m.n_users), 0);
  for (int u : test_users) is_test[static_cast<std::size_t>(u)] = 1;

  const auto buckets = m.by_user();

  // Training users re-indexed by rank; the item space is preserved so the
  // fitted model matches the test users' signals.
  std::vector<Rating> train;
  std::vector<std::string> train_ids;
  for (int u = 0; u < m.n_users; ++u) {
    if (is_test[static_cast<std::size_t>(u)]) continue;
    const int local = static_cast<int>(train_ids.size());
    train_ids.push_back(m.user_ids[static_cast<std::size_t>(u)]);
    for (const Rating& r : buckets[static_cast<std::size_t>(u)])
      train.push_back({local, r.item, r.value});
  }

  StrongSplit split;
  split.train_users =
      SparseRatingMatrix::create(static_cast<int>(train_ids.size()), m.n_items, std::move(train),
                                 m.rating_range, std::move(train_ids), m.item_ids);

  for (std::size_t t = 0; t < test_users.size(); ++t) {
    const int u = test_users[t];
    const auto& bucket = buckets[static_cast<std::size_t>(u)];
    if (bucket.size() < 2)
      throw UserWithSingleRating("test user " + m.user_ids[static_cast<std::size_t>(u)] +
                                 " has fewer than 2 ratings");
    std::vector<std::size_t> order(bucket.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n = static_cast<long long>(bucket.size());
    long long n_obs = std::llround(observed_fraction * static_cast<double>(n));
    n_obs = std::max(1LL, std::min(n - 1, n_obs));

    std::vector<Rating> observed, heldout;
    for (std::size_t k = 0; k < order.size(); ++k) {
      Rating r = bucket[order[k]];
      r.user = static_cast<int>(t);
      (static_cast<long long>(k) < n_obs ? observed : heldout).push_back(r);
    }
    const auto by_item = [](const Rating& a, const Rating& b) { return a.item < b.item; };
    std::sort(observed.begin(), observed.end(), by_item);
    std::sort(heldout.begin(), heldout.end(), by_item);
    split.test_user_ids.push_back(m.user_ids[static_cast<std::size_t>(u)]);
    split.test_observed.push_back(std::move(observed));
    split.test_heldout.push_back(std::move(heldout));
  }
  return split;
}

namespace {

void write_manifest_rows(std::ofstream& out, const SparseRatingMatrix& m,
                         const std::vector<Rating>& rows, const std::string& role,
                         const std::vector<std::string>* user_ids_override = nullptr) {
  for (const Rating& r : rows) {
    const std::string& uid = user_ids_override
                                 ? (*user_ids_override)[static_cast<std::size_t>(r.user)]
                                 : m.user_ids[static_cast<std::size_t>(r.user)];
    out << uid << "," << m.item_ids[static_cast<std::size_t>(r.item)] << ","
        << format_value(r.value) << "," << role << "\n";
  }
}

}  // namespace

void save_weak_manifest(const WeakSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "user,item,rating,role\n";
  write_manifest_rows(out, split.train, split.train.ratings, "train");
  write_manifest_rows(out, split.train, split.test, "test_heldout");
  if (!out) throw IoError("failed while writing " + path);
}

void save_strong_manifest(const StrongSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "user,item,rating,role\n";
  write_manifest_rows(out, split.train_users, split.train_users.ratings, "train");
  for (std::size_t t = 0; t < split.test_user_ids.size(); ++t) {
    write_manifest_rows(out, split.train_users, split.test_observed[t], "test_observed",
                        &split.test_user_ids);
    write_manifest_rows(out, split.train_users, split.test_heldout[t], "test_heldout",
                        &split.test_user_ids);
  }
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace gmc
