#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lfa {

// One observed rating. Indices are dense 0-based internal ids.
struct RatingTriple {
  std::int32_t user = 0;
  std::int32_t item = 0;
  double rating = 0.0;
};

enum class Delimiter { Auto, Tab, Comma, Whitespace };

// Parsed ratings plus the external-to-internal id remapping. Internal ids
// are assigned densely in first-appearance order.
struct LoadResult {
  std::vector<RatingTriple> triples;    // input line order preserved
  std::vector<std::int64_t> user_ids;   // external id of internal user u
  std::vector<std::int64_t> item_ids;   // external id of internal item i

  std::int32_t num_users() const { return static_cast<std::int32_t>(user_ids.size()); }
  std::int32_t num_items() const { return static_cast<std::int32_t>(item_ids.size()); }
};

// Parses `user<delim>item<delim>rating` lines. Empty lines are skipped.
// Delimiter::Auto picks tab, comma, or whitespace from the first non-empty
// line. Throws DataError with line numbers for malformed lines, non-finite
// ratings, and duplicate (user, item) pairs.
LoadResult load_ratings(std::istream& source, Delimiter delimiter = Delimiter::Auto);

struct SplitResult {
  std::vector<RatingTriple> train;
  std::vector<RatingTriple> test;
};

// Disjoint shuffled partition with |train| = round(train_fraction * n).
// Shuffling is a Fisher-Yates pass driven by SeededRng(seed), so the split
// is reproducible across platforms.
SplitResult split(const std::vector<RatingTriple>& triples, double train_fraction,
                  std::uint64_t seed);

// Sparse store of the observed set with user-major and item-major adjacency.
// Entries are kept sorted by (user, item); per-user buckets are contiguous
// runs of entries() and per-item buckets index into entries() in ascending
// user order. Immutable once built, safe to share across threads.
class HdiMatrix {
 public:
  HdiMatrix() = default;

  std::int32_t num_users() const { return num_users_; }
  std::int32_t num_items() const { return num_items_; }
  std::int64_t num_entries() const { return static_cast<std::int64_t>(entries_.size()); }

  std::span<const RatingTriple> entries() const { return entries_; }
  const RatingTriple& entry(std::int64_t e) const { return entries_[static_cast<std::size_t>(e)]; }

  // R_{K_u}: the (item, rating) pairs of user u.
  std::span<const RatingTriple> user_entries(std::int32_t u) const {
    return {entries_.data() + user_offsets_[u], entries_.data() + user_offsets_[u + 1]};
  }
  // R_{K_i} as indices into entries(), sorted by user.
  std::span<const std::int64_t> item_entry_ids(std::int32_t i) const {
    return {item_ids_.data() + item_offsets_[i], item_ids_.data() + item_offsets_[i + 1]};
  }

  std::int64_t user_count(std::int32_t u) const {
    return user_offsets_[u + 1] - user_offsets_[u];
  }
  std::int64_t item_count(std::int32_t i) const {
    return item_offsets_[i + 1] - item_offsets_[i];
  }

 private:
  friend HdiMatrix build_matrix(std::vector<RatingTriple> triples, std::int32_t num_users,
                                std::int32_t num_items);

  std::int32_t num_users_ = 0;
  std::int32_t num_items_ = 0;
  std::vector<RatingTriple> entries_;       // sorted by (user, item)
  std::vector<std::int64_t> user_offsets_;  // size num_users + 1
  std::vector<std::int64_t> item_offsets_;  // size num_items + 1
  std::vector<std::int64_t> item_ids_;      // entry index per item bucket
};

// Indexes triples into an HdiMatrix. Throws DataError on out-of-range
// indices or duplicate (user, item) pairs.
HdiMatrix build_matrix(std::vector<RatingTriple> triples, std::int32_t num_users,
                       std::int32_t num_items);

// |entries| / (num_users * num_items). Throws on zero-dimension matrices.
double density(const HdiMatrix& matrix);

}  // namespace lfa
