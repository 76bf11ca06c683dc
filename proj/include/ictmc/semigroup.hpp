#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ictmc/core.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/operators.hpp"

namespace ictmc {

/// Euler approximation of exp(tQ) f together with its certificate:
/// ||value - exp(tQ) f|| <= error_bound (floating-point rounding excluded).
struct ApproxResult {
  Func value;
  double error_bound = 0.0;
  std::size_t steps = 0;
  double delta = 0.0;
};

/// Step counts above this are rejected as unattainable tolerances.
inline constexpr double kMaxEulerSteps = 1e15;

/// Smallest n with t^2 ||Q||^2 / n <= eps and (t/n) ||Q|| <= 2; 0 when t = 0.
inline std::size_t steps_for_tolerance(double t, double norm, double eps) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw InputError("time must be a finite nonnegative number");
  if (!(eps > 0.0))
    throw InputError("tolerance must be positive");
  if (!(norm >= 0.0) || !std::isfinite(norm))
    throw InputError("norm must be a finite nonnegative number");
  if (t == 0.0)
    return 0;
  const double tn = t * norm;
  const double n_tol = std::ceil(tn * tn / eps);
  const double n_step = std::ceil(tn / 2.0);
  const double n = std::max({n_tol, n_step, 1.0});
  if (!(n <= kMaxEulerSteps))
    throw InputError("tolerance requires more than 1e15 Euler steps");
  auto steps = static_cast<std::size_t>(n);
  while ((t / static_cast<double>(steps)) * norm > 2.0)
    ++steps;
  return steps;
}

namespace detail {

template <class Payload>
void euler_loop(const Payload& q, double delta, std::size_t steps, std::span<double> g) {
  std::vector<double> qg(g.size());
  for (std::size_t k = 0; k < steps; ++k) {
    q.apply_to(g, qg);
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += delta * qg[i];
  }
}

/// (I + delta Q)^steps f for a matrix, by binary powering once the step count
/// dwarfs the cost of a dense product. Powers are kept as I + D and only D is
/// stored, so small steps do not lose precision against the identity.
inline void euler_power(const RateMatrix& q, double delta, std::size_t steps, std::span<double> g) {
  const std::size_t n = q.size();
  if (steps <= 64 * n) {
    euler_loop(q, delta, steps, g);
    return;
  }
  using Dense = std::vector<double>;
  // (I + A)(I + B) = I + (A + B + AB)
  auto compose = [n](const Dense& a, const Dense& b) {
    Dense c(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double aik = a[i * n + k];
        for (std::size_t j = 0; j < n; ++j)
          c[i * n + j] += aik * b[k * n + j];
      }
    for (std::size_t i = 0; i < n * n; ++i)
      c[i] += a[i] + b[i];
    return c;
  };
  Dense base(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      base[i * n + j] = delta * q(i, j);
  Dense acc(n * n, 0.0);
  for (std::size_t e = steps; e > 0; e >>= 1) {
    if (e & 1u)
      acc = compose(acc, base);
    if (e > 1)
      base = compose(base, base);
  }
  std::vector<double> out(g.begin(), g.end());
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      d += acc[i * n + j] * g[j];
    out[i] += d;
  }
  std::copy(out.begin(), out.end(), g.begin());
}

} // namespace detail

/// (I + delta Q)^steps f, without allocation inside the loop.
inline Func euler_iterate(const RateOperator& op, double delta, std::size_t steps, Func f) {
  if (!same_space(f.space_ptr(), op.space_ptr()))
    throw InputError("function and rate operator live on different state spaces");
  if (const RateMatrix* m = op.matrix())
    detail::euler_power(*m, delta, steps, f.mutable_values());
  else
    detail::euler_loop(*op.box(), delta, steps, f.mutable_values());
  return f;
}

/// Same iteration for an operator given only as a callback.
inline Func euler_iterate(const OperatorFn& apply, double delta, std::size_t steps, Func f) {
  for (std::size_t k = 0; k < steps; ++k) {
    Func qf = apply(f);
    qf *= delta;
    f += qf;
  }
  return f;
}

namespace detail {

template <class Op>
ApproxResult exp_apply_impl(const Op& op, double norm, double t, const Func& f, double eps) {
  const std::size_t n = steps_for_tolerance(t, norm, eps);
  if (n == 0)
    return ApproxResult{f, 0.0, 0, 0.0};
  const double delta = t / static_cast<double>(n);
  const double tn = t * norm;
  const double bound = tn * tn / static_cast<double>(n) * sup_norm(f);
  return ApproxResult{euler_iterate(op, delta, n, f), bound, n, delta};
}

} // namespace detail

/// Upper expectation exp(tQ) f via the Euler scheme (I + (t/n) Q)^n f with
/// n = steps_for_tolerance(t, ||Q||, eps).
inline ApproxResult exp_apply(const RateOperator& op, double t, const Func& f, double eps) {
  if (!same_space(f.space_ptr(), op.space_ptr()))
    throw InputError("function and rate operator live on different state spaces");
  return detail::exp_apply_impl(op, op.norm(), t, f, eps);
}

/// Callback form; `norm` must be the exact norm of the rate operator (or an
/// upper bound on it) for the certificate to hold.
inline ApproxResult exp_apply(const OperatorFn& apply, double norm, double t, const Func& f,
                              double eps) {
  return detail::exp_apply_impl(apply, norm, t, f, eps);
}

/// Lower expectation -exp(tQ)(-f). The certificate carries over unchanged.
inline ApproxResult lower_exp_apply(const RateOperator& op, double t, const Func& f, double eps) {
  ApproxResult r = exp_apply(op, t, -f, eps);
  r.value *= -1.0;
  return r;
}

/// ||exp((s+t)Q) f - exp(sQ) exp(tQ) f|| computed from three Euler runs;
/// bounded by 3 eps max(1, ||f||).
inline double exp_compose_check(const RateOperator& op, double s, double t, const Func& f,
                                double eps) {
  const Func joint = exp_apply(op, s + t, f, eps).value;
  const Func inner = exp_apply(op, t, f, eps).value;
  const Func chained = exp_apply(op, s, inner, eps).value;
  return sup_norm(joint - chained);
}

/// Forward-difference residual of d/dt exp(tQ) f = Q exp(tQ) f at time t.
inline double cauchy_residual(const RateOperator& op, double t, const Func& f, double h,
                              double eps) {
  if (!(h > 0.0))
    throw InputError("difference step must be positive");
  const Func at_t = exp_apply(op, t, f, eps).value;
  const Func at_th = exp_apply(op, t + h, f, eps).value;
  Func quotient = at_th - at_t;
  quotient *= 1.0 / h;
  return sup_norm(quotient - op.apply(at_t));
}

/// ||exp(sQ) f - exp(tQ) f||; bounded by |s-t| ||Q|| ||f|| + 2 eps max(1, ||f||).
inline double lipschitz_in_time_check(const RateOperator& op, double s, double t, const Func& f,
                                      double eps) {
  return sup_norm(exp_apply(op, s, f, eps).value - exp_apply(op, t, f, eps).value);
}

} // namespace ictmc
