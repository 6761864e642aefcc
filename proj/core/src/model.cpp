#include "lfa/model.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "lfa/rng.hpp"

namespace lfa {

namespace {

void check_dims(const LatentState& state, const HdiMatrix& matrix) {
  if (state.num_users() != matrix.num_users() || state.num_items() != matrix.num_items()) {
    throw std::invalid_argument("state dimensions do not match matrix dimensions");
  }
}

double row_dot(const double* a, const double* b, std::int32_t f) {
  double s = 0.0;
  for (std::int32_t d = 0; d < f; ++d) s += a[d] * b[d];
  return s;
}

}  // namespace

FlatVector LatentState::to_flat() const {
  FlatVector flat(shape());
  const Eigen::Index user_len = user_factors.size();
  std::memcpy(flat.values.data(), user_factors.data(), sizeof(double) * user_len);
  std::memcpy(flat.values.data() + user_len, item_factors.data(),
              sizeof(double) * item_factors.size());
  return flat;
}

LatentState LatentState::from_flat(const FlatVector& flat, double reg_strength) {
  LatentState state;
  state.reg_strength = reg_strength;
  state.user_factors.resize(flat.shape.num_users, flat.shape.rank);
  state.item_factors.resize(flat.shape.num_items, flat.shape.rank);
  const Eigen::Index user_len = state.user_factors.size();
  std::memcpy(state.user_factors.data(), flat.values.data(), sizeof(double) * user_len);
  std::memcpy(state.item_factors.data(), flat.values.data() + user_len,
              sizeof(double) * state.item_factors.size());
  return state;
}

void LatentState::add_increment(const FlatVector& delta) {
  if (delta.shape != shape()) throw std::invalid_argument("increment shape mismatch");
  const Eigen::Index user_len = user_factors.size();
  Eigen::Map<Eigen::VectorXd>(user_factors.data(), user_len) += delta.values.head(user_len);
  Eigen::Map<Eigen::VectorXd>(item_factors.data(), item_factors.size()) +=
      delta.values.tail(item_factors.size());
}

bool LatentState::all_finite() const {
  return user_factors.allFinite() && item_factors.allFinite();
}

LatentState init_uniform(std::int32_t num_users, std::int32_t num_items, std::int32_t rank,
                         double hi, std::uint64_t seed) {
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  if (!(hi > 0.0)) throw std::invalid_argument("init_uniform needs hi > 0");
  if (num_users < 0 || num_items < 0) throw std::invalid_argument("negative dimension");

  LatentState state;
  state.user_factors.resize(num_users, rank);
  state.item_factors.resize(num_items, rank);
  SeededRng rng(seed);
  // Row-major fill: users then dimensions, then the item block.
  for (Eigen::Index k = 0; k < state.user_factors.size(); ++k) {
    state.user_factors.data()[k] = rng.next_uniform(hi);
  }
  for (Eigen::Index k = 0; k < state.item_factors.size(); ++k) {
    state.item_factors.data()[k] = rng.next_uniform(hi);
  }
  return state;
}

double predict(const LatentState& state, std::int32_t u, std::int32_t i) {
  if (u < 0 || u >= state.num_users() || i < 0 || i >= state.num_items()) {
    throw std::invalid_argument("predict index out of range");
  }
  return row_dot(state.user_row(u), state.item_row(i), state.rank());
}

double objective(const LatentState& state, const HdiMatrix& matrix) {
  check_dims(state, matrix);
  const std::int32_t f = state.rank();

  double loss = 0.0;
  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double* yu = state.user_row(u);
    for (const RatingTriple& t : matrix.user_entries(u)) {
      const double resid = t.rating - row_dot(yu, state.item_row(t.item), f);
      loss += resid * resid;
    }
  }

  double reg = 0.0;
  if (state.reg_strength != 0.0) {
    for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
      reg += static_cast<double>(matrix.user_count(u)) *
             row_dot(state.user_row(u), state.user_row(u), f);
    }
    for (std::int32_t i = 0; i < matrix.num_items(); ++i) {
      reg += static_cast<double>(matrix.item_count(i)) *
             row_dot(state.item_row(i), state.item_row(i), f);
    }
  }
  return 0.5 * (loss + state.reg_strength * reg);
}

FlatVector gradient(const LatentState& state, const HdiMatrix& matrix) {
  check_dims(state, matrix);
  const std::int32_t f = state.rank();
  const double lambda = state.reg_strength;
  FlatVector g(state.shape());

  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double* yu = state.user_row(u);
    double* gu = g.user(u);
    for (const RatingTriple& t : matrix.user_entries(u)) {
      const double* yi = state.item_row(t.item);
      double* gi = g.item(t.item);
      const double resid = t.rating - row_dot(yu, yi, f);
      for (std::int32_t d = 0; d < f; ++d) {
        gu[d] -= resid * yi[d];
        gi[d] -= resid * yu[d];
      }
    }
  }
  if (lambda != 0.0) {
    for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
      const double scale = lambda * static_cast<double>(matrix.user_count(u));
      const double* yu = state.user_row(u);
      double* gu = g.user(u);
      for (std::int32_t d = 0; d < f; ++d) gu[d] += scale * yu[d];
    }
    for (std::int32_t i = 0; i < matrix.num_items(); ++i) {
      const double scale = lambda * static_cast<double>(matrix.item_count(i));
      const double* yi = state.item_row(i);
      double* gi = g.item(i);
      for (std::int32_t d = 0; d < f; ++d) gi[d] += scale * yi[d];
    }
  }
  return g;
}

double rmse(const LatentState& state, std::span<const RatingTriple> eval_set) {
  if (eval_set.empty()) throw std::invalid_argument("rmse over an empty evaluation set");
  const std::int32_t f = state.rank();
  double sum = 0.0;
  for (const RatingTriple& t : eval_set) {
    if (t.user < 0 || t.user >= state.num_users() || t.item < 0 || t.item >= state.num_items()) {
      throw std::invalid_argument("evaluation index out of range");
    }
    const double resid = t.rating - row_dot(state.user_row(t.user), state.item_row(t.item), f);
    sum += resid * resid;
  }
  return std::sqrt(sum / static_cast<double>(eval_set.size()));
}

}  // namespace lfa
