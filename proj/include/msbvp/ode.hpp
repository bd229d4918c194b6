#pragma once

// Per-segment initial value problems: the fundamental matrix (identity initial
// value, homogeneous equation) and the particular solution (zero initial
// value, inhomogeneous equation), both by classical fixed-step RK4.
//
// Integration flops are deliberately kept out of the solver cost model; the
// caller supplies a separate tally for them.

#include <cstddef>
#include <functional>
#include <string>

#include "msbvp/linalg.hpp"

namespace msbvp {

// x'(t) = coeff(t) x(t) + inhom(t)
struct LinearOde {
  std::size_t dim = 0;
  std::function<Matrix(double)> coeff;  // dim x dim
  std::function<Vector(double)> inhom;  // length dim

  static LinearOde homogeneous(std::size_t dim,
                               std::function<Matrix(double)> coeff) {
    Vector zero(dim);
    return LinearOde{dim, std::move(coeff), [zero](double) { return zero; }};
  }
};

struct IntegratorConfig {
  enum class Method { classic_rk4 };
  std::size_t steps_per_segment = 64;
  Method method = Method::classic_rk4;
};

namespace detail {

inline Matrix eval_coeff(const LinearOde& ode, double t) {
  Matrix a = ode.coeff(t);
  if (a.rows() != ode.dim || a.cols() != ode.dim)
    throw DimensionError("coefficient evaluator returned wrong shape at t = " +
                         format_double(t));
  if (!is_finite(a))
    throw IntegrationError(
        "non-finite coefficient matrix at t = " + format_double(t), t);
  return a;
}

inline Vector eval_inhom(const LinearOde& ode, double t) {
  Vector r = ode.inhom(t);
  if (r.len() != ode.dim)
    throw DimensionError("inhomogeneity evaluator returned wrong length at t = " +
                         format_double(t));
  if (!is_finite(r))
    throw IntegrationError(
        "non-finite inhomogeneity at t = " + format_double(t), t);
  return r;
}

inline void check_config(const IntegratorConfig& cfg) {
  if (cfg.steps_per_segment < 1)
    throw InvalidArgument("IntegratorConfig: steps_per_segment must be >= 1");
}

// One RK4 sweep of x' = A(t) x + r(t) from state x0 at t0 to t1.
inline Vector rk4_affine(const LinearOde& ode, double t0, double t1,
                         const IntegratorConfig& cfg, Vector x,
                         FlopTally& tally) {
  const std::size_t steps = cfg.steps_per_segment;
  const double h = (t1 - t0) / static_cast<double>(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const Matrix a0 = eval_coeff(ode, t);
    const Matrix am = eval_coeff(ode, t + h / 2);
    const Matrix a1 = eval_coeff(ode, t + h);
    const Vector r0 = eval_inhom(ode, t);
    const Vector rm = eval_inhom(ode, t + h / 2);
    const Vector r1 = eval_inhom(ode, t + h);

    const Vector k1 = vec_add(mat_vec(a0, x, tally), r0, tally);
    const Vector k2 = vec_add(
        mat_vec(am, vec_add(x, vec_scale(h / 2, k1, tally), tally), tally), rm,
        tally);
    const Vector k3 = vec_add(
        mat_vec(am, vec_add(x, vec_scale(h / 2, k2, tally), tally), tally), rm,
        tally);
    const Vector k4 = vec_add(
        mat_vec(a1, vec_add(x, vec_scale(h, k3, tally), tally), tally), r1,
        tally);

    Vector incr = vec_add(k1, k4, tally);
    incr = vec_add(incr, vec_scale(2.0, k2, tally), tally);
    incr = vec_add(incr, vec_scale(2.0, k3, tally), tally);
    x = vec_add(x, vec_scale(h / 6, incr, tally), tally);
  }
  return x;
}

}  // namespace detail

// X(t1;t0): solution of X' = A(t) X, X(t0) = I. The matrix equation is the
// n columns stepped simultaneously, sharing each A(t) evaluation.
inline Matrix integrate_fundamental(const LinearOde& ode, double t0, double t1,
                                    const IntegratorConfig& cfg,
                                    FlopTally& tally) {
  if (!(t0 < t1))
    throw InvalidArgument("integrate_fundamental: need t0 < t1");
  detail::check_config(cfg);
  const std::size_t steps = cfg.steps_per_segment;
  const double h = (t1 - t0) / static_cast<double>(steps);
  Matrix y = Matrix::identity(ode.dim);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const Matrix a0 = detail::eval_coeff(ode, t);
    const Matrix am = detail::eval_coeff(ode, t + h / 2);
    const Matrix a1 = detail::eval_coeff(ode, t + h);

    const Matrix k1 = mat_mul(a0, y, tally);
    const Matrix k2 =
        mat_mul(am, mat_add(y, mat_scale(h / 2, k1, tally), tally), tally);
    const Matrix k3 =
        mat_mul(am, mat_add(y, mat_scale(h / 2, k2, tally), tally), tally);
    const Matrix k4 =
        mat_mul(a1, mat_add(y, mat_scale(h, k3, tally), tally), tally);

    Matrix incr = mat_add(k1, k4, tally);
    incr = mat_add(incr, mat_scale(2.0, k2, tally), tally);
    incr = mat_add(incr, mat_scale(2.0, k3, tally), tally);
    y = mat_add(y, mat_scale(h / 6, incr, tally), tally);
  }
  return y;
}

// v(t1;t0): solution of v' = A(t) v + r(t), v(t0) = 0.
inline Vector integrate_particular(const LinearOde& ode, double t0, double t1,
                                   const IntegratorConfig& cfg,
                                   FlopTally& tally) {
  if (!(t0 < t1))
    throw InvalidArgument("integrate_particular: need t0 < t1");
  detail::check_config(cfg);
  return detail::rk4_affine(ode, t0, t1, cfg, Vector(ode.dim), tally);
}

// x(t) on a segment, integrated from the initial value c at t0. Equivalent to
// X(t;t0) c + v(t;t0) by superposition.
inline Vector evaluate_on_segment(const LinearOde& ode, double t0,
                                  const Vector& c, double t,
                                  const IntegratorConfig& cfg) {
  if (t < t0) throw InvalidArgument("evaluate_on_segment: need t0 <= t");
  if (c.len() != ode.dim)
    throw DimensionError("evaluate_on_segment: initial value has wrong length");
  detail::check_config(cfg);
  if (t == t0) return c;
  FlopTally scratch;
  return detail::rk4_affine(ode, t0, t, cfg, c, scratch);
}

}  // namespace msbvp
