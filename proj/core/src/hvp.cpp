#include "lfa/hvp.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace lfa {

namespace {

std::atomic<std::uint64_t> g_entry_touches{0};

void check_operands(const LatentState& state, const HdiMatrix& matrix) {
  if (state.num_users() != matrix.num_users() || state.num_items() != matrix.num_items()) {
    throw std::invalid_argument("state dimensions do not match matrix dimensions");
  }
}

void check_vector(const LatentState& state, const FlatVector& v) {
  if (v.shape != state.shape() || v.values.size() != v.shape.size()) {
    throw std::invalid_argument("flat vector length does not match state");
  }
}

void check_damping(const DampingSpec& damping) {
  if (damping.reg_strength < 0.0 || damping.eta() < 0.0) {
    throw std::invalid_argument("damping terms must be non-negative");
  }
}

}  // namespace

DampingSpec DampingSpec::cubic(double lambda, double m, double grad_norm) {
  if (lambda < 0.0 || m < 0.0 || grad_norm < 0.0) {
    throw std::invalid_argument("cubic damping needs lambda, M, ||g|| >= 0");
  }
  DampingSpec spec;
  spec.mode = Mode::Cubic;
  spec.reg_strength = lambda;
  spec.cubic_coefficient = m;
  spec.gradient_norm = grad_norm;
  return spec;
}

DampingSpec DampingSpec::fixed(double lambda, double gamma) {
  if (lambda < 0.0 || gamma < 0.0) {
    throw std::invalid_argument("fixed damping needs lambda, gamma >= 0");
  }
  DampingSpec spec;
  spec.mode = Mode::Fixed;
  spec.reg_strength = lambda;
  spec.fixed_damping = gamma;
  return spec;
}

EntryValues jacobian_vector(const LatentState& state, const HdiMatrix& matrix,
                            const FlatVector& v) {
  check_operands(state, matrix);
  check_vector(state, v);
  const std::int32_t f = state.rank();

  EntryValues out;
  out.values.resize(matrix.num_entries());
  std::int64_t e = 0;
  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double* yu = state.user_row(u);
    const double* vu = v.user(u);
    for (const RatingTriple& t : matrix.user_entries(u)) {
      const double* yi = state.item_row(t.item);
      const double* vi = v.item(t.item);
      double s = 0.0;
      for (std::int32_t d = 0; d < f; ++d) s += vu[d] * yi[d] + yu[d] * vi[d];
      out.values[e++] = s;
    }
  }
  g_entry_touches.fetch_add(static_cast<std::uint64_t>(matrix.num_entries()),
                            std::memory_order_relaxed);
  return out;
}

FlatVector jacobian_transpose_vector(const LatentState& state, const HdiMatrix& matrix,
                                     const EntryValues& w) {
  check_operands(state, matrix);
  if (w.values.size() != matrix.num_entries()) {
    throw std::invalid_argument("entry vector length does not match |R_K|");
  }
  const std::int32_t f = state.rank();

  FlatVector out(state.shape());
  std::int64_t e = 0;
  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double* yu = state.user_row(u);
    double* ou = out.user(u);
    for (const RatingTriple& t : matrix.user_entries(u)) {
      const double we = w.values[e++];
      const double* yi = state.item_row(t.item);
      double* oi = out.item(t.item);
      for (std::int32_t d = 0; d < f; ++d) {
        ou[d] += we * yi[d];
        oi[d] += we * yu[d];
      }
    }
  }
  g_entry_touches.fetch_add(static_cast<std::uint64_t>(matrix.num_entries()),
                            std::memory_order_relaxed);
  return out;
}

FlatVector gauss_newton_vector(const LatentState& state, const HdiMatrix& matrix,
                               const FlatVector& v) {
  return jacobian_transpose_vector(state, matrix, jacobian_vector(state, matrix, v));
}

FlatVector regularized_hvp(const LatentState& state, const HdiMatrix& matrix,
                           const FlatVector& v, const DampingSpec& damping) {
  check_damping(damping);
  FlatVector out = gauss_newton_vector(state, matrix, v);
  const std::int32_t f = state.rank();
  const double lambda = damping.reg_strength;
  const double eta = damping.eta();

  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double scale = lambda * static_cast<double>(matrix.user_count(u)) + eta;
    const double* vu = v.user(u);
    double* ou = out.user(u);
    for (std::int32_t d = 0; d < f; ++d) ou[d] += scale * vu[d];
  }
  for (std::int32_t i = 0; i < matrix.num_items(); ++i) {
    const double scale = lambda * static_cast<double>(matrix.item_count(i)) + eta;
    const double* vi = v.item(i);
    double* oi = out.item(i);
    for (std::int32_t d = 0; d < f; ++d) oi[d] += scale * vi[d];
  }
  return out;
}

Eigen::MatrixXd dense_curvature_oracle(const LatentState& state, const HdiMatrix& matrix,
                                       const DampingSpec& damping) {
  check_operands(state, matrix);
  check_damping(damping);
  const FactorShape shape = state.shape();
  const Eigen::Index n = shape.size();
  if (n > 512) {
    throw std::invalid_argument("dense oracle limited to side <= 512, got " + std::to_string(n));
  }
  const std::int32_t f = state.rank();

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(matrix.num_entries(), n);
  std::int64_t e = 0;
  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    for (const RatingTriple& t : matrix.user_entries(u)) {
      for (std::int32_t d = 0; d < f; ++d) {
        jac(e, shape.user_offset(u) + d) = state.item_row(t.item)[d];
        jac(e, shape.item_offset(t.item) + d) = state.user_row(u)[d];
      }
      ++e;
    }
  }

  Eigen::MatrixXd curvature = jac.transpose() * jac;
  const double eta = damping.eta();
  for (std::int32_t u = 0; u < matrix.num_users(); ++u) {
    const double scale = damping.reg_strength * static_cast<double>(matrix.user_count(u)) + eta;
    for (std::int32_t d = 0; d < f; ++d) {
      curvature(shape.user_offset(u) + d, shape.user_offset(u) + d) += scale;
    }
  }
  for (std::int32_t i = 0; i < matrix.num_items(); ++i) {
    const double scale = damping.reg_strength * static_cast<double>(matrix.item_count(i)) + eta;
    for (std::int32_t d = 0; d < f; ++d) {
      curvature(shape.item_offset(i) + d, shape.item_offset(i) + d) += scale;
    }
  }
  return curvature;
}

std::uint64_t hvp_entry_touches() { return g_entry_touches.load(std::memory_order_relaxed); }

void reset_hvp_entry_touches() { g_entry_touches.store(0, std::memory_order_relaxed); }

}  // namespace lfa
