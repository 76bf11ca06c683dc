#pragma once

// Shared fixtures and independent reference oracles for the test suites.
// Nothing in here calls the Euler scheme: matrix exponentials come from an
// eigendecomposition and envelope values from vertex enumeration.

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ictmc/ictmc.hpp"

namespace ictmc::test {

/// q = [[-1, 1], [2, -2]]: norm 4, eigenvalues 0 and -3.
inline RateOperator linear2(SpacePtr space = make_space(2)) {
  return RateOperator(RateMatrix::from_rows(std::move(space), {{-1.0, 1.0}, {2.0, -2.0}}));
}

/// q01 in [1, 3], q10 in [0, 2], no budget: norm 6.
inline RateOperator box2(SpacePtr space = make_space(2)) {
  return RateOperator(BoxRateSpec(std::move(space), {BoxRow{{{0, 0}, {1.0, 3.0}}, std::nullopt},
                                                     BoxRow{{{0.0, 2.0}, {0, 0}}, std::nullopt}}));
}

/// q01 in [1, 3], q10 in [1, 3], no budget.
inline RateOperator box2_symmetric(SpacePtr space = make_space(2)) {
  return RateOperator(BoxRateSpec(std::move(space), {BoxRow{{{0, 0}, {1.0, 3.0}}, std::nullopt},
                                                     BoxRow{{{1.0, 3.0}, {0, 0}}, std::nullopt}}));
}

inline Func make_func(const SpacePtr& space, std::vector<double> values) {
  return Func(space, std::move(values));
}

inline RateMatrix random_rate_matrix(const SpacePtr& space, std::mt19937_64& rng,
                                     double max_rate = 1.0) {
  std::uniform_real_distribution<double> dist(0.0, max_rate);
  const std::size_t n = space->size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x)
        continue;
      rows[x][y] = dist(rng);
      s += rows[x][y];
    }
    rows[x][x] = -s;
  }
  return RateMatrix::from_rows(space, rows);
}

/// Random box specification; some intervals are degenerate and, when
/// `with_budget`, every row gets a feasible exit budget.
inline BoxRateSpec random_box_spec(const SpacePtr& space, std::mt19937_64& rng,
                                   bool with_budget, double max_rate = 2.0) {
  std::uniform_real_distribution<double> dist(0.0, max_rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = space->size();
  std::vector<BoxRow> rows(n);
  for (std::size_t x = 0; x < n; ++x) {
    rows[x].rates.assign(n, Interval{});
    double sl = 0.0, su = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x)
        continue;
      double a = dist(rng), b = dist(rng);
      if (unit(rng) < 0.15)
        b = a;
      rows[x].rates[y] = Interval{std::min(a, b), std::max(a, b)};
      sl += std::min(a, b);
      su += std::max(a, b);
    }
    if (with_budget) {
      // L and U drawn inside [0, su + 0.5] so that every regime (slack,
      // binding upper, binding lower) shows up.
      std::uniform_real_distribution<double> bd(0.0, su + 0.5);
      double lo = bd(rng), hi = bd(rng);
      if (lo > hi)
        std::swap(lo, hi);
      lo = std::min(lo, su);
      hi = std::max(hi, sl);
      rows[x].exit_budget = Interval{lo, hi};
    }
  }
  return BoxRateSpec(space, std::move(rows));
}

inline Eigen::MatrixXd to_eigen(const RateMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  return out;
}

/// exp(tQ) via the (complex) eigendecomposition Q = V diag(l) V^-1.
inline Eigen::MatrixXd expm_eigen(const Eigen::MatrixXd& q, double t) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(q);
  const Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::VectorXcd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    d(i) = std::exp(t * d(i));
  const Eigen::MatrixXcd e = v * d.asDiagonal() * v.inverse();
  return e.real();
}

inline Func apply_matrix(const Eigen::MatrixXd& m, const Func& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = f[i];
  const Eigen::VectorXd r = m * v;
  return Func(f.space_ptr(), std::vector<double>(r.data(), r.data() + r.size()));
}

inline Func exact_exp(const RateMatrix& m, double t, const Func& f) {
  return apply_matrix(expm_eigen(to_eigen(m), t), f);
}

/// Closed form for q = [[-a, a], [b, -b]].
inline Func two_state_exp(double a, double b, double t, const Func& f) {
  const double s = a + b;
  const double e = std::exp(-s * t);
  const double p00 = (b + a * e) / s, p01 = (a - a * e) / s;
  const double p10 = (b - b * e) / s, p11 = (a + b * e) / s;
  return Func(f.space_ptr(), {p00 * f[0] + p01 * f[1], p10 * f[0] + p11 * f[1]});
}

/// Semigroup oracle exp(tQ) computed from the eigendecomposition.
inline SemigroupOracle exact_linear_oracle(const RateOperator& op) {
  const RateMatrix m = *op.matrix();
  return SemigroupOracle(
      op.space_ptr(),
      [m](double t, const Func& f) { return t == 0.0 ? f : exact_exp(m, t, f); }, op.norm());
}

/// Rows of every vertex matrix of a box specification (independent of the
/// greedy maximization).
inline std::vector<RateMatrix> vertex_matrices(const BoxRateSpec& spec) {
  std::vector<RateMatrix> out;
  for_each_vertex_matrix(spec, enumerate_vertices(spec),
                         [&](const RateMatrix& m) { out.push_back(m); });
  return out;
}

/// ||A|| over a dense grid of unit functions on two states (brute force).
inline double dense_unit_sup(const OperatorFn& apply, const SpacePtr& space2, int resolution) {
  double best = 0.0;
  for (int i = 0; i <= resolution; ++i) {
    const double a = -1.0 + 2.0 * i / resolution;
    for (const auto& vals : {std::vector<double>{1.0, a}, std::vector<double>{-1.0, a},
                             std::vector<double>{a, 1.0}, std::vector<double>{a, -1.0}})
      best = std::max(best, sup_norm(apply(Func(space2, vals))));
  }
  return best;
}

/// A random linear or box rate operator on 2..4 states.
inline RateOperator random_operator(std::mt19937_64& rng) {
  auto space = make_space(2 + rng() % 3);
  switch (rng() % 3) {
  case 0:
    return RateOperator(random_rate_matrix(space, rng, 2.0));
  case 1:
    return RateOperator(random_box_spec(space, rng, false));
  default:
    return RateOperator(random_box_spec(space, rng, true));
  }
}

struct BoundTrial {
  double measured = 0.0;
  double bound = 0.0;
};

/// ||(I + (delta/l) Q)^l f - (I + delta Q) f|| against delta^2 ||Q||^2 ||f||.
inline BoundTrial one_vs_several_steps_trial(std::mt19937_64& rng) {
  const RateOperator op = random_operator(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double norm = op.norm();
  const double delta = norm > 0.0 ? 2.0 * unit(rng) / norm : unit(rng);
  const std::size_t l = 1 + rng() % 16;
  const Func f = random_function(op.space_ptr(), rng, -1.0, 1.0);
  const Func several = euler_iterate(op, delta / static_cast<double>(l), l, f);
  const Func one = euler_iterate(op, delta, 1, f);
  return {sup_norm(several - one), delta * delta * norm * norm * sup_norm(f)};
}

/// Chains T_1...T_n and S_1...S_n of Euler steps of two operators on a common
/// space; the bound is the sum over k of ||T_k g_k - S_k g_k|| with
/// g_k = S_{k+1}...S_n f.
inline BoundTrial telescoping_trial(std::mt19937_64& rng) {
  auto space = make_space(2 + rng() % 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = 1 + rng() % 8;
  auto random_step = [&] {
    const RateOperator op = rng() % 2 ? RateOperator(random_rate_matrix(space, rng, 2.0))
                                      : RateOperator(random_box_spec(space, rng, rng() % 2));
    const double limit = op.norm() > 0.0 ? 2.0 / op.norm() : 1.0;
    return make_transition(op, unit(rng) * limit);
  };
  std::vector<TransitionStep> t, s;
  for (std::size_t k = 0; k < n; ++k) {
    t.push_back(random_step());
    s.push_back(random_step());
  }
  const Func f = random_function(space, rng, -1.0, 1.0);
  Func tf = f, g = f;
  double bound = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    bound += sup_norm(t[k].apply(g) - s[k].apply(g));
    g = s[k].apply(g);
  }
  for (std::size_t k = n; k-- > 0;)
    tf = t[k].apply(tf);
  return {sup_norm(tf - g), bound};
}

} // namespace ictmc::test
