#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ictmc/core.hpp"
#include "ictmc/operators.hpp"

namespace ictmc {

inline constexpr double kAxiomTolerance = 1e-9;
inline constexpr std::size_t kDefaultAxiomSamples = 256;

struct AxiomCheck {
  std::string id;
  std::string name;
  bool passed = true;
  double worst_violation = 0.0;
};

struct AxiomReport {
  std::vector<AxiomCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.passed; });
  }

  const AxiomCheck* find(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id)
        return &c;
    return nullptr;
  }

  bool failed(const std::string& id) const {
    const AxiomCheck* c = find(id);
    return c && !c->passed;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
      if (!c.passed)
        out.push_back(c.id);
    return out;
  }
};

namespace detail {

class ViolationTracker {
public:
  ViolationTracker(std::string id, std::string name) : check_{std::move(id), std::move(name)} {}

  // `excess` is the amount by which the inequality or equality is broken.
  void record(double excess) {
    if (std::isnan(excess))
      excess = std::numeric_limits<double>::infinity();
    check_.worst_violation = std::max(check_.worst_violation, excess);
  }

  // a <= b pointwise
  void le(const Func& a, const Func& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      record(a[i] - b[i]);
  }

  // a == b pointwise
  void eq(const Func& a, const Func& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      record(std::abs(a[i] - b[i]));
  }

  AxiomCheck finish(double tol) {
    check_.passed = check_.worst_violation <= tol;
    return check_;
  }

private:
  AxiomCheck check_;
};

} // namespace detail

/// Samples every sublinear-rate-operator axiom (Q1-Q4) and the derived
/// properties Q5-Q8 on `apply`. Failures are report entries, never exceptions.
inline AxiomReport check_rate_axioms(const OperatorFn& apply, const SpacePtr& space,
                                     std::size_t samples = kDefaultAxiomSamples,
                                     std::uint64_t seed = 0, double tol = kAxiomTolerance) {
  if (samples == 0)
    throw InputError("axiom checks need at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lambda_dist(0.0, 2.0);
  std::uniform_real_distribution<double> const_dist(-1.0, 1.0);
  const std::size_t n = space->size();
  const double norm = rate_norm(apply, space);

  detail::ViolationTracker q1("Q1", "positive homogeneity");
  detail::ViolationTracker q2("Q2", "subadditivity");
  detail::ViolationTracker q3("Q3", "constants map to zero");
  detail::ViolationTracker q4("Q4", "positive maximum principle");
  detail::ViolationTracker q5("Q5", "adding a constant changes nothing");
  detail::ViolationTracker q6("Q6", "-Q(-f) <= Qf");
  detail::ViolationTracker q7("Q7", "[Q 1_x](x) <= 0");
  detail::ViolationTracker q8("Q8", "Lipschitz with constant ||Q||");

  auto check_max_principle = [&](const Func& f, const Func& qf) {
    const double top = f.max();
    if (top < 0.0)
      return;
    for (std::size_t x = 0; x < n; ++x)
      if (f[x] == top)
        q4.record(qf[x]);
  };

  for (std::size_t x = 0; x < n; ++x) {
    const Func ind = indicator(space, x);
    const Func q_ind = apply(ind);
    q7.record(q_ind[x]);
    check_max_principle(ind, q_ind);
  }

  for (std::size_t k = 0; k < samples; ++k) {
    const Func f = random_function(space, rng);
    const Func g = random_function(space, rng);
    const double lambda = lambda_dist(rng);
    const double mu = const_dist(rng);
    const Func qf = apply(f);
    const Func qg = apply(g);

    q1.eq(apply(lambda * f), lambda * qf);
    q2.le(apply(f + g), qf + qg);
    q3.eq(apply(Func::constant(space, mu)), Func::zeros(space));
    q5.eq(apply(f + mu), qf);
    q6.le(-apply(-f), qf);

    check_max_principle(f, qf);
    check_max_principle(f - f.max(), apply(f - f.max()));

    q8.record(sup_norm(qf - qg) - norm * sup_norm(f - g));
  }

  return AxiomReport{{q1.finish(tol), q2.finish(tol), q3.finish(tol), q4.finish(tol),
                      q5.finish(tol), q6.finish(tol), q7.finish(tol), q8.finish(tol)}};
}

/// As above, plus structural entries for matrix operators (nonnegative
/// off-diagonal rates, zero row sums).
inline AxiomReport check_rate_axioms(const RateOperator& op,
                                     std::size_t samples = kDefaultAxiomSamples,
                                     std::uint64_t seed = 0, double tol = kAxiomTolerance) {
  AxiomReport report = check_rate_axioms(op.as_function(), op.space_ptr(), samples, seed, tol);
  if (const RateMatrix* m = op.matrix()) {
    const double neg = m->worst_negative_rate();
    report.checks.push_back({"R1", "nonnegative off-diagonal rates", neg <= tol, neg});
    const double rs = m->worst_row_sum();
    report.checks.push_back({"R2", "rows sum to zero", rs <= tol, rs});
  }
  return report;
}

/// Samples the sublinear-transition-operator axioms T1-T3 and the derived
/// properties T4-T9 on `apply`.
inline AxiomReport check_transition_axioms(const OperatorFn& apply, const SpacePtr& space,
                                           std::size_t samples = kDefaultAxiomSamples,
                                           std::uint64_t seed = 0,
                                           double tol = kAxiomTolerance) {
  if (samples == 0)
    throw InputError("axiom checks need at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lambda_dist(0.0, 2.0);
  std::uniform_real_distribution<double> const_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> nonneg_dist(0.0, 1.0);

  detail::ViolationTracker t1("T1", "positive homogeneity");
  detail::ViolationTracker t2("T2", "subadditivity");
  detail::ViolationTracker t3("T3", "Tf <= sup f");
  detail::ViolationTracker t4("T4", "monotonicity");
  detail::ViolationTracker t5("T5", "constant additivity");
  detail::ViolationTracker t6("T6", "constant preservation");
  detail::ViolationTracker t7("T7", "-T(-f) <= Tf");
  detail::ViolationTracker t8("T8", "||Tf|| <= ||f||");
  detail::ViolationTracker t9("T9", "Lipschitz constant at most one");

  for (std::size_t k = 0; k < samples; ++k) {
    const Func f = random_function(space, rng);
    const Func g = random_function(space, rng);
    const Func h = random_function(space, rng, 0.0, 1.0);
    const double lambda = lambda_dist(rng);
    const double mu = const_dist(rng);
    const double c = nonneg_dist(rng);
    const Func tf = apply(f);
    const Func tg = apply(g);

    t1.eq(apply(lambda * f), lambda * tf);
    t2.le(apply(f + g), tf + tg);
    t3.le(tf, Func::constant(space, f.max()));
    t4.le(tf, apply(f + h));
    t5.eq(apply(f + mu), tf + mu);
    t6.eq(apply(Func::constant(space, c)), Func::constant(space, c));
    t7.le(-apply(-f), tf);
    t8.record(sup_norm(tf) - sup_norm(f));
    t9.record(sup_norm(tf - tg) - sup_norm(f - g));
  }
  t9.record(seminorm_sample_bound(apply, space, 1, seed) - 1.0);

  return AxiomReport{{t1.finish(tol), t2.finish(tol), t3.finish(tol), t4.finish(tol),
                      t5.finish(tol), t6.finish(tol), t7.finish(tol), t8.finish(tol),
                      t9.finish(tol)}};
}

} // namespace ictmc
