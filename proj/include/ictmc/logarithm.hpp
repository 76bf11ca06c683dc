#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "ictmc/core.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/operators.hpp"
#include "ictmc/semigroup.hpp"

namespace ictmc {

/// Black-box access to a sublinear transition semigroup t -> T_t.
///
/// `eval_error` is the advertised sup-norm error of a single evaluation per
/// unit ||f||; 0 means "exact, or unknown" and certificates derived from the
/// oracle are then only valid modulo the oracle's own error.
class SemigroupOracle {
public:
  using Eval = std::function<Func(double, const Func&)>;

  SemigroupOracle(SpacePtr space, Eval eval, std::optional<double> beta_hint = std::nullopt,
                  double eval_error = 0.0,
                  double max_time = std::numeric_limits<double>::infinity())
      : space_(std::move(space)), eval_(std::move(eval)), beta_hint_(beta_hint),
        eval_error_(eval_error), max_time_(max_time) {
    if (!space_ || !eval_)
      throw InputError("semigroup oracle needs a state space and an evaluator");
    if (beta_hint_ && !(*beta_hint_ >= 0.0))
      throw InputError("beta hint must be nonnegative");
    if (!(eval_error_ >= 0.0))
      throw InputError("oracle error must be nonnegative");
    if (!(max_time_ > 0.0))
      throw InputError("oracle time domain must contain positive times");
    // T_0 = I on the indicators and the canonical functions.
    for (std::size_t x = 0; x < space_->size(); ++x) {
      for (const Func& f : {indicator(space_, x), canonical_function(space_, x)}) {
        if (sup_norm(eval_(0.0, f) - f) > 1e-12)
          throw InputError("semigroup oracle does not satisfy T_0 = I");
      }
    }
  }

  Func eval(double t, const Func& f) const {
    if (!(t >= 0.0))
      throw InputError("semigroup time must be nonnegative");
    if (t > max_time_)
      throw StepTooLarge(t, max_time_);
    return eval_(t, f);
  }

  const SpacePtr& space_ptr() const noexcept { return space_; }
  const std::optional<double>& beta_hint() const noexcept { return beta_hint_; }
  double eval_error() const noexcept { return eval_error_; }
  double max_time() const noexcept { return max_time_; }
  bool exact() const noexcept { return eval_error_ == 0.0; }

  SemigroupOracle with_beta_hint(double beta) const {
    SemigroupOracle copy = *this;
    if (!(beta >= 0.0))
      throw InputError("beta hint must be nonnegative");
    copy.beta_hint_ = beta;
    return copy;
  }

private:
  SpacePtr space_;
  Eval eval_;
  std::optional<double> beta_hint_;
  double eval_error_;
  double max_time_;
};

inline SemigroupOracle identity_oracle(SpacePtr space) {
  return SemigroupOracle(std::move(space), [](double, const Func& f) { return f; }, 0.0);
}

/// T_t = exp(tQ) evaluated by the Euler scheme at tolerance `eps`.
inline SemigroupOracle exp_oracle(const RateOperator& op, double eps) {
  if (!(eps > 0.0))
    throw InputError("oracle tolerance must be positive");
  return SemigroupOracle(
      op.space_ptr(), [op, eps](double t, const Func& f) { return exp_apply(op, t, f, eps).value; },
      op.norm(), eps);
}

/// T_t = I + tQ, defined for t ||Q|| <= 2. Not a semigroup; (T_t - I)/t = Q
/// exactly, which makes it useful for testing the plumbing.
inline SemigroupOracle euler_family_oracle(const RateOperator& op) {
  const double max_time =
      op.norm() > 0.0 ? 2.0 / op.norm() : std::numeric_limits<double>::infinity();
  return SemigroupOracle(
      op.space_ptr(),
      [op](double t, const Func& f) {
        Func out = op.apply(f);
        out *= t;
        out += f;
        return out;
      },
      op.norm(), 0.0, max_time);
}

/// f -> n (T_{t/n} f - f), which converges to (ln T_t) f as n grows.
inline OperatorFn log_estimate(const SemigroupOracle& oracle, double t, std::size_t n) {
  if (!(t > 0.0))
    throw InputError("logarithm horizon must be positive");
  if (n == 0)
    throw InputError("logarithm needs at least one subdivision");
  const double h = t / static_cast<double>(n);
  if (h > oracle.max_time())
    throw StepTooLarge(h, oracle.max_time());
  const double scale = static_cast<double>(n);
  return [oracle, h, scale](const Func& f) {
    Func out = oracle.eval(h, f);
    out -= f;
    out *= scale;
    return out;
  };
}

/// Bound t^2 beta^2 / (2n) on ||ln T_t - n (T_{t/n} - I)||, where beta bounds
/// ||(T_s - I)/s|| for all s > 0.
inline double log_error_bound(double beta, double t, std::size_t n) {
  if (n == 0)
    throw InputError("logarithm needs at least one subdivision");
  return t * t * beta * beta / (2.0 * static_cast<double>(n));
}

/// Extra error of log_estimate(oracle, t, n) per unit ||f|| caused by the
/// oracle's own evaluation error (amplified by the factor n).
inline double log_oracle_slack(const SemigroupOracle& oracle, std::size_t n) {
  return static_cast<double>(n) * oracle.eval_error();
}

struct RecoveredGenerator {
  OperatorFn apply;
  double bound = 0.0;        // ||apply - ln T_1|| <= bound + oracle_slack
  double oracle_slack = 0.0; // per unit ||f||
  std::size_t subdivisions = 0;
  double beta = 0.0;
  bool modulo_oracle_error = false;
};

/// Recovers ln T_1 = n (T_{1/n} - I) + O(1/n) with n = ceil(beta^2 / (2 eps)).
inline RecoveredGenerator recover_generator(const SemigroupOracle& oracle, double eps) {
  if (!(eps > 0.0))
    throw InputError("recovery tolerance must be positive");
  if (!oracle.beta_hint())
    throw DiagnosticRequired(
        "generator recovery needs a bound on ||(T_t - I)/t||; run the uniform-continuity "
        "diagnostic first");
  const double beta = *oracle.beta_hint();
  double n = std::max(1.0, std::ceil(beta * beta / (2.0 * eps)));
  if (std::isfinite(oracle.max_time()))
    n = std::max(n, std::ceil(1.0 / oracle.max_time()));
  if (!(n <= kMaxEulerSteps))
    throw InputError("recovery tolerance is too small for the given beta");
  const auto steps = static_cast<std::size_t>(n);
  return RecoveredGenerator{log_estimate(oracle, 1.0, steps), eps,
                            log_oracle_slack(oracle, steps), steps, beta, oracle.exact()};
}

/// ||(T_t - I)/t|| for every t in the grid, each computed exactly with the
/// rate-norm formula. Grid points are evaluated concurrently.
inline std::vector<std::pair<double, double>>
uniform_continuity_profile(const SemigroupOracle& oracle, const std::vector<double>& grid) {
  if (grid.empty())
    throw InputError("diagnostic grid must not be empty");
  for (double t : grid)
    if (!(t > 0.0))
      throw InputError("diagnostic grid entries must be positive");

  std::vector<std::future<double>> jobs;
  jobs.reserve(grid.size());
  for (double t : grid) {
    jobs.push_back(std::async(std::launch::async, [&oracle, t] {
      OperatorFn step = [&oracle, t](const Func& f) { return oracle.eval(t, f); };
      return rate_norm(rate_from_transition(step, 1.0 / t), oracle.space_ptr());
    }));
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.emplace_back(grid[i], jobs[i].get());
  return out;
}

/// Largest difference-quotient norm over the grid; finite values certify
/// bounded quotients there and estimate beta.
inline double uniform_continuity_diagnostic(const SemigroupOracle& oracle,
                                            const std::vector<double>& grid) {
  double best = 0.0;
  for (const auto& [t, value] : uniform_continuity_profile(oracle, grid))
    best = std::max(best, value);
  return best;
}

/// {2^-1, ..., 2^-10}, restricted to the oracle's time domain.
inline std::vector<double> default_diagnostic_grid(const SemigroupOracle& oracle) {
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) {
    const double t = std::ldexp(1.0, -k);
    if (t <= oracle.max_time())
      grid.push_back(t);
  }
  if (grid.empty())
    for (int k = 0; k < 10; ++k)
      grid.push_back(std::ldexp(oracle.max_time(), -k));
  return grid;
}

inline constexpr double kBetaSafetyFactor = 1.05;

/// Diagnostic maximum times the safety factor.
inline double estimate_beta(const SemigroupOracle& oracle, const std::vector<double>& grid) {
  return kBetaSafetyFactor * uniform_continuity_diagnostic(oracle, grid);
}

inline double estimate_beta(const SemigroupOracle& oracle) {
  return estimate_beta(oracle, default_diagnostic_grid(oracle));
}

} // namespace ictmc
