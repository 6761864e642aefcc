#include "lfa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>

#include "lfa/errors.hpp"
#include "lfa/rng.hpp"

namespace lfa {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Delimiter detect_delimiter(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return Delimiter::Tab;
  if (line.find(',') != std::string_view::npos) return Delimiter::Comma;
  return Delimiter::Whitespace;
}

// Splits into at most 4 fields; a 4th signals "too many".
int split_fields(std::string_view line, Delimiter delim, std::string_view out[4]) {
  int count = 0;
  if (delim == Delimiter::Whitespace) {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      if (count < 4) out[count] = line.substr(pos, end - pos);
      ++count;
      pos = end;
    }
    return std::min(count, 4);
  }
  const char sep = delim == Delimiter::Tab ? '\t' : ',';
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    std::string_view field =
        trim(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (count < 4) out[count] = field;
    ++count;
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return std::min(count, 4);
}

std::int64_t parse_id(std::string_view field, std::int64_t line_no, const char* what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || value < 0) {
    throw DataError("line " + std::to_string(line_no) + ": malformed " + what + " id '" +
                    std::string(field) + "'");
  }
  return value;
}

double parse_rating(std::string_view field, std::int64_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw DataError("line " + std::to_string(line_no) + ": malformed rating '" +
                    std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line_no) + ": non-finite rating");
  }
  return value;
}

}  // namespace

LoadResult load_ratings(std::istream& source, Delimiter delimiter) {
  LoadResult result;
  std::unordered_map<std::int64_t, std::int32_t> user_map;
  std::unordered_map<std::int64_t, std::int32_t> item_map;
  // (packed internal pair, line number) for duplicate detection
  std::vector<std::pair<std::uint64_t, std::int64_t>> seen;

  std::string line;
  std::int64_t line_no = 0;
  Delimiter active = delimiter;
  while (std::getline(source, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (text.empty()) continue;
    if (active == Delimiter::Auto) active = detect_delimiter(text);

    std::string_view fields[4];
    const int n = split_fields(text, active, fields);
    if (n != 3) {
      throw DataError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                      std::to_string(n));
    }
    const std::int64_t ext_user = parse_id(fields[0], line_no, "user");
    const std::int64_t ext_item = parse_id(fields[1], line_no, "item");
    const double rating = parse_rating(fields[2], line_no);

    auto [uit, u_new] = user_map.try_emplace(ext_user, result.num_users());
    if (u_new) result.user_ids.push_back(ext_user);
    auto [iit, i_new] = item_map.try_emplace(ext_item, result.num_items());
    if (i_new) result.item_ids.push_back(ext_item);

    const std::int32_t u = uit->second;
    const std::int32_t i = iit->second;
    result.triples.push_back({u, i, rating});
    seen.emplace_back((static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(i),
                      line_no);
  }
  if (source.bad()) throw DataError("I/O error while reading ratings");

  std::sort(seen.begin(), seen.end());
  for (std::size_t k = 1; k < seen.size(); ++k) {
    if (seen[k].first == seen[k - 1].first) {
      const std::int64_t u_ext = result.user_ids[seen[k].first >> 32];
      const std::int64_t i_ext = result.item_ids[seen[k].first & 0xffffffffu];
      throw DataError("duplicate pair (user " + std::to_string(u_ext) + ", item " +
                      std::to_string(i_ext) + ") at lines " + std::to_string(seen[k - 1].second) +
                      " and " + std::to_string(seen[k].second));
    }
  }
  return result;
}

SplitResult split(const std::vector<RatingTriple>& triples, double train_fraction,
                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = triples.size();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  if (n_train == 0) throw std::invalid_argument("split leaves the training set empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.shuffle(order);

  SplitResult result;
  result.train.reserve(n_train);
  result.test.reserve(n - n_train);
  for (std::size_t k = 0; k < n; ++k) {
    (k < n_train ? result.train : result.test).push_back(triples[order[k]]);
  }
  return result;
}

HdiMatrix build_matrix(std::vector<RatingTriple> triples, std::int32_t num_users,
                       std::int32_t num_items) {
  for (const RatingTriple& t : triples) {
    if (t.user < 0 || t.user >= num_users || t.item < 0 || t.item >= num_items) {
      throw DataError("rating index (" + std::to_string(t.user) + ", " + std::to_string(t.item) +
                      ") out of range for " + std::to_string(num_users) + " x " +
                      std::to_string(num_items));
    }
  }
  std::sort(triples.begin(), triples.end(), [](const RatingTriple& a, const RatingTriple& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  for (std::size_t k = 1; k < triples.size(); ++k) {
    if (triples[k].user == triples[k - 1].user && triples[k].item == triples[k - 1].item) {
      throw DataError("duplicate pair (user " + std::to_string(triples[k].user) + ", item " +
                      std::to_string(triples[k].item) + ")");
    }
  }

  HdiMatrix m;
  m.num_users_ = num_users;
  m.num_items_ = num_items;
  m.entries_ = std::move(triples);

  m.user_offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  m.item_offsets_.assign(static_cast<std::size_t>(num_items) + 1, 0);
  for (const RatingTriple& t : m.entries_) {
    ++m.user_offsets_[static_cast<std::size_t>(t.user) + 1];
    ++m.item_offsets_[static_cast<std::size_t>(t.item) + 1];
  }
  for (std::size_t u = 1; u < m.user_offsets_.size(); ++u) {
    m.user_offsets_[u] += m.user_offsets_[u - 1];
  }
  for (std::size_t i = 1; i < m.item_offsets_.size(); ++i) {
    m.item_offsets_[i] += m.item_offsets_[i - 1];
  }

  // Entry ids land in each item bucket in ascending order, which is
  // ascending user order because entries_ is (user, item)-sorted.
  m.item_ids_.resize(m.entries_.size());
  std::vector<std::int64_t> cursor(m.item_offsets_.begin(), m.item_offsets_.end() - 1);
  for (std::int64_t e = 0; e < m.num_entries(); ++e) {
    const std::int32_t i = m.entries_[static_cast<std::size_t>(e)].item;
    m.item_ids_[static_cast<std::size_t>(cursor[i]++)] = e;
  }
  return m;
}

double density(const HdiMatrix& matrix) {
  const double cells =
      static_cast<double>(matrix.num_users()) * static_cast<double>(matrix.num_items());
  if (cells <= 0.0) throw std::invalid_argument("density of a zero-dimension matrix");
  return static_cast<double>(matrix.num_entries()) / cells;
}

}  // namespace lfa
