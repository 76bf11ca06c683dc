#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace ictmc;
using Catch::Matchers::WithinAbs;

namespace {

double quotient_norm(double t) { return 4.0 * (1.0 - std::exp(-3.0 * t)) / (3.0 * t); }

// Largest ||est f - t Q f|| over a fixed sample of unit functions.
double max_deviation(const OperatorFn& est, const RateOperator& q, double t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t x = 0; x < q.size(); ++x) {
    const Func c = canonical_function(q.space_ptr(), x);
    for (const Func& f : {c, -c})
      worst = std::max(worst, sup_norm(est(f) - t * q.apply(f)));
  }
  for (int k = 0; k < 20; ++k) {
    const Func f = random_unit_function(q.space_ptr(), rng);
    worst = std::max(worst, sup_norm(est(f) - t * q.apply(f)));
  }
  return worst;
}

} // namespace

TEST_CASE("semigroup oracle construction", "[logarithm]") {
  auto s = make_space(2);
  CHECK_THROWS_AS(SemigroupOracle(s, [](double, const Func& f) { return f + 1.0; }), InputError);
  const SemigroupOracle euler = euler_family_oracle(test::box2(s));
  CHECK(euler.max_time() == Catch::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(euler.eval(0.5, Func::zeros(s)), StepTooLarge);
  CHECK_THROWS_AS(log_estimate(euler, 1.0, 2), StepTooLarge);
  CHECK_THROWS_AS(log_estimate(euler, 0.0, 2), InputError);
  CHECK_THROWS_AS(log_estimate(euler, 0.3, 0), InputError);
}

TEST_CASE("log_estimate worked examples", "[logarithm]") {
  auto s = make_space(2);
  std::mt19937_64 rng(6);

  SECTION("identity semigroup gives the zero operator") {
    const OperatorFn est = log_estimate(identity_oracle(s), 2.0, 7);
    for (int k = 0; k < 20; ++k)
      CHECK(sup_norm(est(random_function(s, rng))) == 0.0);
  }
  SECTION("exp-backed linear oracle, t = 1, n = 1000") {
    const SemigroupOracle oracle = exp_oracle(test::linear2(s), 1e-12);
    const double norm = rate_norm(log_estimate(oracle, 1.0, 1000), s);
    CHECK(std::abs(norm - 4.0) <= log_error_bound(4.0, 1.0, 1000) + log_oracle_slack(oracle, 1000));
  }
  SECTION("Euler family returns t Q f") {
    const RateOperator q = test::box2(s);
    const SemigroupOracle oracle = euler_family_oracle(q);
    for (std::size_t n : {1u, 5u, 40u}) {
      const OperatorFn est = log_estimate(oracle, 0.3, n);
      for (int k = 0; k < 10; ++k) {
        const Func f = random_function(s, rng);
        CHECK(sup_norm(est(f) - 0.3 * q.apply(f)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("log_error_bound", "[logarithm]") {
  CHECK(log_error_bound(0.0, 3.0, 5) == 0.0);
  CHECK_THAT(log_error_bound(4.0, 1.0, 1000), WithinAbs(0.008, 1e-15));
  CHECK(log_error_bound(1.0, 2.0, 8) == 0.25);
  CHECK_THROWS_AS(log_error_bound(1.0, 1.0, 0), InputError);
}

TEST_CASE("recover_generator worked examples", "[logarithm]") {
  auto s = make_space(2);
  std::mt19937_64 rng(21);

  SECTION("identity semigroup") {
    const RecoveredGenerator r = recover_generator(identity_oracle(s), 1e-6);
    CHECK(r.bound == 1e-6);
    CHECK(r.oracle_slack == 0.0);
    for (int k = 0; k < 10; ++k)
      CHECK(sup_norm(r.apply(random_function(s, rng))) == 0.0);
  }
  SECTION("exp-backed linear oracle, eps = 1e-3") {
    const RateOperator q = test::linear2(s);
    const RecoveredGenerator r = recover_generator(exp_oracle(q, 1e-12), 1e-3);
    CHECK(r.subdivisions == 8000);
    CHECK(r.beta == 4.0);
    CHECK_FALSE(r.modulo_oracle_error);
    for (int k = 0; k < 20; ++k) {
      const Func f = random_unit_function(s, rng);
      CHECK(sup_norm(r.apply(f) - q.apply(f)) <= r.bound + r.oracle_slack);
    }
  }
  SECTION("exp-backed box oracle, eps = 1e-3") {
    const RecoveredGenerator r = recover_generator(exp_oracle(test::box2(s), 1e-12), 1e-3);
    CHECK(std::abs(rate_norm(r.apply, s) - 6.0) <= r.bound + r.oracle_slack);
  }
  SECTION("missing beta") {
    const SemigroupOracle oracle(s, [](double, const Func& f) { return f; });
    CHECK_THROWS_AS(recover_generator(oracle, 1e-3), DiagnosticRequired);
    CHECK_NOTHROW(recover_generator(oracle.with_beta_hint(estimate_beta(oracle)), 1e-3));
    CHECK_THROWS_AS(recover_generator(identity_oracle(s), 0.0), InputError);
  }
}

TEST_CASE("uniform_continuity_diagnostic worked examples", "[logarithm]") {
  auto s = make_space(2);
  CHECK(uniform_continuity_diagnostic(identity_oracle(s), {0.1, 0.01}) == 0.0);

  const SemigroupOracle lin = exp_oracle(test::linear2(s), 1e-10);
  const double d = uniform_continuity_diagnostic(lin, {1e-3, 1e-2, 1e-1});
  CHECK(d >= 3.2);
  CHECK(d <= 4.0);
  CHECK_THAT(d, WithinAbs(quotient_norm(1e-3), 1e-6));

  const SemigroupOracle euler = euler_family_oracle(test::box2(s));
  CHECK_THAT(uniform_continuity_diagnostic(euler, {0.01, 0.1, 1.0 / 3.0}), WithinAbs(6.0, 1e-12));

  CHECK_THROWS_AS(uniform_continuity_diagnostic(lin, {}), InputError);
  CHECK_THROWS_AS(uniform_continuity_diagnostic(lin, {0.1, 0.0}), InputError);
}

TEST_CASE("diagnostic profile follows the exact quotient norms", "[logarithm]") {
  auto s = make_space(2);
  const SemigroupOracle exact = test::exact_linear_oracle(test::linear2(s));
  const auto grid = default_diagnostic_grid(exact);
  REQUIRE(grid.size() == 10);
  const auto profile = uniform_continuity_profile(exact, grid);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    CHECK_THAT(profile[i].second, WithinAbs(quotient_norm(profile[i].first), 1e-9));
    if (i > 0)
      CHECK(profile[i].second >= profile[i - 1].second - 1e-9);
  }
  CHECK_THAT(estimate_beta(exact), WithinAbs(1.05 * quotient_norm(std::ldexp(1.0, -10)), 1e-8));
  // the default grid respects a bounded time domain
  const auto clipped = default_diagnostic_grid(euler_family_oracle(test::box2(s)));
  for (double t : clipped)
    CHECK(t <= 1.0 / 3.0);
}

TEST_CASE("logarithm inverts the exponential", "[logarithm][property]") {
  std::mt19937_64 rng(303);
  SECTION("random linear generators, exact oracle") {
    for (int k = 0; k < 10; ++k) {
      const RateOperator q(test::random_rate_matrix(make_space(2 + k % 4), rng, 1.0));
      const SemigroupOracle oracle = test::exact_linear_oracle(q);
      for (double t : {0.5, 1.0}) {
        const double d50 = max_deviation(log_estimate(oracle, t, 50), q, t, k);
        const double d100 = max_deviation(log_estimate(oracle, t, 100), q, t, k);
        CHECK(d50 <= log_error_bound(q.norm(), t, 50) + 1e-10);
        CHECK(d100 <= log_error_bound(q.norm(), t, 100) + 1e-10);
        if (d100 > 1e-8) {
          CHECK(d50 / d100 >= 1.7);
          CHECK(d50 / d100 <= 2.3);
        }
      }
    }
  }
  SECTION("box generators, exp-backed oracle") {
    for (int k = 0; k < 6; ++k) {
      const RateOperator q(test::random_box_spec(make_space(2 + k % 2), rng, k % 2 == 0, 1.0));
      const SemigroupOracle oracle = exp_oracle(q, 1e-8);
      const double t = 0.5;
      const double d20 = max_deviation(log_estimate(oracle, t, 20), q, t, k);
      const double d40 = max_deviation(log_estimate(oracle, t, 40), q, t, k);
      CHECK(d20 <= log_error_bound(q.norm(), t, 20) + log_oracle_slack(oracle, 20));
      CHECK(d40 <= log_error_bound(q.norm(), t, 40) + log_oracle_slack(oracle, 40));
      if (d40 > 1e-6) {
        CHECK(d20 / d40 >= 1.7);
        CHECK(d20 / d40 <= 2.3);
      }
    }
  }
}

TEST_CASE("recovered generators regenerate the semigroup", "[logarithm][property]") {
  auto s = make_space(2);
  std::mt19937_64 rng(88);
  const double eps = 1e-2;
  const double oracle_eps = 1e-9;
  for (const RateOperator& q : {test::linear2(s), test::box2(s)}) {
    const SemigroupOracle oracle = exp_oracle(q, oracle_eps);
    const RecoveredGenerator r = recover_generator(oracle, eps);
    const double norm = rate_norm(r.apply, s);
    for (double t : {0.25, 0.5, 1.0}) {
      for (int k = 0; k < 2; ++k) {
        const Func f = random_unit_function(s, rng);
        const ApproxResult regenerated = exp_apply(r.apply, norm, t, f, 1e-2);
        const ApproxResult reference = exp_apply(q, t, f, 1e-6);
        const double tolerance = regenerated.error_bound + t * (r.bound + r.oracle_slack) +
                                 reference.error_bound;
        CHECK(sup_norm(regenerated.value - reference.value) <= tolerance);
      }
    }
  }
}

TEST_CASE("powers of a transition operator", "[logarithm][property]") {
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 60; ++k) {
    const RateOperator q = test::random_operator(rng);
    const auto space = q.space_ptr();
    OperatorFn t;
    if (k % 2 == 0) {
      const double limit = q.norm() > 0.0 ? 2.0 / q.norm() : 1.0;
      t = make_transition(q, unit(rng) * limit).as_function();
    } else {
      const double time = unit(rng);
      t = [q, time](const Func& f) { return exp_apply(q, time, f, 1e-3).value; };
    }
    const double dist = rate_norm(rate_from_transition(t, 1.0), space);
    const std::size_t n = 1 + k % 8;
    for (int j = 0; j < 5; ++j) {
      const Func f = random_function(space, rng);
      Func tn = f;
      for (std::size_t i = 0; i < n; ++i)
        tn = t(tn);
      const Func lhs = (tn - f) - static_cast<double>(n) * (t(f) - f);
      const double bound = 0.5 * static_cast<double>(n * (n - 1)) * dist * dist * sup_norm(f);
      CHECK(sup_norm(lhs) <= bound + 1e-9);
    }
  }
}

TEST_CASE("log estimates are sublinear rate operators", "[logarithm][property]") {
  auto s = make_space(2);
  const RateOperator lin = test::linear2(s);
  const RateOperator box = test::box2(s);
  CHECK(check_rate_axioms(log_estimate(exp_oracle(lin, 1e-4), 1.0, 100), s, 64, 1).passed());
  CHECK(check_rate_axioms(log_estimate(exp_oracle(box, 1e-4), 1.0, 100), s, 64, 2).passed());
  CHECK(check_rate_axioms(log_estimate(euler_family_oracle(box), 0.3, 3), s, 64, 3).passed());
  CHECK(check_rate_axioms(log_estimate(test::exact_linear_oracle(lin), 0.5, 10), s, 64, 4)
            .passed());
}
