#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ictmc/core.hpp"
#include "ictmc/errors.hpp"

namespace ictmc {

/// Absolute tolerance on row sums accepted when building a RateMatrix.
inline constexpr double kRowSumTolerance = 1e-12;

/// Exact linear rate operator, stored densely and row-major.
///
/// Validated matrices have nonnegative off-diagonal entries and a diagonal
/// equal to minus the off-diagonal row sum. `unchecked` skips validation so
/// that corrupted models can still be handed to the axiom checkers.
class RateMatrix {
public:
  static RateMatrix from_rows(SpacePtr space, const std::vector<std::vector<double>>& rows) {
    RateMatrix m = unchecked(std::move(space), rows);
    const std::size_t n = m.size();
    for (std::size_t x = 0; x < n; ++x) {
      double off = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x)
          continue;
        if (m(x, y) < 0.0)
          throw InputError("negative off-diagonal rate q(" + m.space_->label(x) + "," +
                           m.space_->label(y) + ")");
        off += m(x, y);
      }
      if (std::abs(off + m(x, x)) > kRowSumTolerance)
        throw InputError("row '" + m.space_->label(x) + "' does not sum to zero");
      m.entries_[x * n + x] = -off;
    }
    return m;
  }

  static RateMatrix unchecked(SpacePtr space, const std::vector<std::vector<double>>& rows) {
    if (!space)
      throw InputError("rate matrix requires a state space");
    const std::size_t n = space->size();
    if (rows.size() != n)
      throw InputError("rate matrix needs " + std::to_string(n) + " rows");
    std::vector<double> entries;
    entries.reserve(n * n);
    for (const auto& row : rows) {
      if (row.size() != n)
        throw InputError("rate matrix rows must have " + std::to_string(n) + " entries");
      for (double v : row) {
        if (!std::isfinite(v))
          throw InputError("rate matrix entries must be finite");
        entries.push_back(v);
      }
    }
    return RateMatrix(std::move(space), std::move(entries));
  }

  static RateMatrix zero(SpacePtr space) {
    const std::size_t n = space->size();
    return RateMatrix(std::move(space), std::vector<double>(n * n, 0.0));
  }

  std::size_t size() const noexcept { return space_->size(); }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  double operator()(std::size_t x, std::size_t y) const { return entries_[x * size() + y]; }

  std::vector<std::vector<double>> rows() const {
    const std::size_t n = size();
    std::vector<std::vector<double>> out(n);
    for (std::size_t x = 0; x < n; ++x)
      out[x].assign(entries_.begin() + static_cast<std::ptrdiff_t>(x * n),
                    entries_.begin() + static_cast<std::ptrdiff_t>((x + 1) * n));
    return out;
  }

  void apply_to(std::span<const double> f, std::span<double> out) const {
    const std::size_t n = size();
    const double* q = entries_.data();
    for (std::size_t x = 0; x < n; ++x, q += n) {
      double acc = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        acc += q[y] * f[y];
      out[x] = acc;
    }
  }

  /// Most negative off-diagonal entry (0 if none is negative).
  double worst_negative_rate() const {
    double worst = 0.0;
    for (std::size_t x = 0; x < size(); ++x)
      for (std::size_t y = 0; y < size(); ++y)
        if (x != y)
          worst = std::min(worst, (*this)(x, y));
    return -worst;
  }

  /// Largest absolute row sum.
  double worst_row_sum() const {
    double worst = 0.0;
    for (std::size_t x = 0; x < size(); ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < size(); ++y)
        s += (*this)(x, y);
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }

private:
  RateMatrix(SpacePtr space, std::vector<double> entries)
      : space_(std::move(space)), entries_(std::move(entries)) {}

  SpacePtr space_;
  std::vector<double> entries_;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Per-state constraints of a box specification. `rates[y]` bounds q(x,y);
/// the diagonal entry is ignored.
struct BoxRow {
  std::vector<Interval> rates;
  std::optional<Interval> exit_budget;
};

/// Separately specified set of rate matrices: each row ranges over a box of
/// off-diagonal rates, optionally intersected with an exit-rate budget.
class BoxRateSpec {
public:
  BoxRateSpec(SpacePtr space, std::vector<BoxRow> rows) : space_(std::move(space)) {
    if (!space_)
      throw InputError("box specification requires a state space");
    const std::size_t n = space_->size();
    if (rows.size() != n)
      throw InputError("box specification needs " + std::to_string(n) + " rows");
    lower_.assign(n * n, 0.0);
    upper_.assign(n * n, 0.0);
    budget_.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      const BoxRow& row = rows[x];
      if (row.rates.size() != n)
        throw InputError("box row '" + space_->label(x) + "' must have " + std::to_string(n) +
                         " intervals");
      double sum_lower = 0.0, sum_upper = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x)
          continue;
        const Interval& iv = row.rates[y];
        if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper))
          throw InputError("box bounds must be finite");
        if (iv.lower < 0.0 || iv.lower > iv.upper)
          throw InputError("box interval for q(" + space_->label(x) + "," + space_->label(y) +
                           ") must satisfy 0 <= lower <= upper");
        lower_[x * n + y] = iv.lower;
        upper_[x * n + y] = iv.upper;
        sum_lower += iv.lower;
        sum_upper += iv.upper;
      }
      if (row.exit_budget) {
        const Interval& b = *row.exit_budget;
        if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower < 0.0 ||
            b.lower > b.upper)
          throw InputError("exit budget of '" + space_->label(x) +
                           "' must satisfy 0 <= L <= U");
        if (sum_lower > b.upper || sum_upper < b.lower)
          throw InputError("row '" + space_->label(x) + "' is infeasible under its exit budget");
        budget_[x] = b;
      }
    }
  }

  std::size_t size() const noexcept { return space_->size(); }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  double lower(std::size_t x, std::size_t y) const { return lower_[x * size() + y]; }
  double upper(std::size_t x, std::size_t y) const { return upper_[x * size() + y]; }
  const std::optional<Interval>& budget(std::size_t x) const { return budget_[x]; }

  /// Maximizes sum_{y != x} q(y) (f(y) - f(x)) over the feasible rows of x.
  ///
  /// Without a budget each coordinate goes to its upper bound when its weight
  /// is positive and to its lower bound otherwise. With a budget [L, U] the
  /// row starts at the lower bounds, positive weights are raised in decreasing
  /// order until U is hit, and if the total is still below L the remaining
  /// coordinates are raised in order of increasing cost |w|.
  ///
  /// If `row` is non-empty it receives the maximizing row (size N, diagonal
  /// set to minus the exit rate). `order` is scratch space.
  double maximize_row(std::size_t x, std::span<const double> f, std::span<double> row,
                      std::vector<std::size_t>& order) const {
    const std::size_t n = size();
    const double* lo = lower_.data() + x * n;
    const double* hi = upper_.data() + x * n;
    const double fx = f[x];
    const bool want_row = !row.empty();

    if (!budget_[x]) {
      double value = 0.0, exit = 0.0;
      for (std::size_t y = 0; y < n; ++y) {
        if (y == x)
          continue;
        const double w = f[y] - fx;
        const double q = w > 0.0 ? hi[y] : lo[y];
        value += q * w;
        exit += q;
        if (want_row)
          row[y] = q;
      }
      if (want_row)
        row[x] = -exit;
      return value;
    }

    const Interval b = *budget_[x];
    thread_local std::vector<double> chosen;
    chosen.assign(lo, lo + n);
    chosen[x] = 0.0;
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y)
      if (y != x)
        total += lo[y];

    order.clear();
    for (std::size_t y = 0; y < n; ++y)
      if (y != x)
        order.push_back(y);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
      return (f[a] - fx) > (f[c] - fx);
    });

    std::size_t k = 0;
    for (; k < order.size(); ++k) {
      const std::size_t y = order[k];
      if (f[y] - fx <= 0.0 || total >= b.upper)
        break;
      const double raise = std::min(hi[y] - lo[y], b.upper - total);
      chosen[y] += raise;
      total += raise;
    }
    if (total < b.lower) {
      // Every positive weight is saturated here; continue with the cheapest
      // nonpositive ones.
      for (std::size_t j = 0; j < order.size() && total < b.lower; ++j) {
        const std::size_t y = order[j];
        const double room = hi[y] - chosen[y];
        if (room <= 0.0)
          continue;
        const double raise = std::min(room, b.lower - total);
        chosen[y] += raise;
        total += raise;
      }
    }

    double value = 0.0, exit = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x)
        continue;
      value += chosen[y] * (f[y] - fx);
      exit += chosen[y];
      if (want_row)
        row[y] = chosen[y];
    }
    if (want_row)
      row[x] = -exit;
    return value;
  }

  void apply_to(std::span<const double> f, std::span<double> out) const {
    thread_local std::vector<std::size_t> order;
    for (std::size_t x = 0; x < size(); ++x)
      out[x] = maximize_row(x, f, {}, order);
  }

  /// Whether `row` (size N, diagonal ignored) lies in the feasible set of x.
  bool row_is_member(std::size_t x, std::span<const double> row, double tol = 1e-12) const {
    double total = 0.0;
    for (std::size_t y = 0; y < size(); ++y) {
      if (y == x)
        continue;
      if (row[y] < lower(x, y) - tol || row[y] > upper(x, y) + tol)
        return false;
      total += row[y];
    }
    if (budget_[x])
      return total >= budget_[x]->lower - tol && total <= budget_[x]->upper + tol;
    return true;
  }

private:
  SpacePtr space_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::optional<Interval>> budget_;
};

/// Rate-norm formula for any sublinear rate operator:
/// ||Q|| = max_x [Q(1 - 2*1_x)](x). `attained_at` is the maximizing state.
struct NormInfo {
  double value = 0.0;
  std::size_t attained_at = 0;
};

inline NormInfo rate_norm_info(const OperatorFn& apply, const SpacePtr& space) {
  NormInfo info{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t x = 0; x < space->size(); ++x) {
    const double v = apply(canonical_function(space, x))[x];
    if (v > info.value)
      info = {v, x};
  }
  // The formula is nonnegative for genuine rate operators; clamp roundoff.
  info.value = std::max(info.value, 0.0);
  return info;
}

inline double rate_norm(const OperatorFn& apply, const SpacePtr& space) {
  return rate_norm_info(apply, space).value;
}

/// Handle over the two concrete sublinear rate operators. Immutable; the
/// exact norm is computed once at construction.
class RateOperator {
public:
  enum class Kind { linear, box };

  explicit RateOperator(RateMatrix matrix)
      : payload_(std::make_shared<const Payload>(std::move(matrix))) {
    init_norm();
  }
  explicit RateOperator(BoxRateSpec box)
      : payload_(std::make_shared<const Payload>(std::move(box))) {
    init_norm();
  }

  static RateOperator zero(SpacePtr space) { return RateOperator(RateMatrix::zero(std::move(space))); }

  Kind kind() const noexcept {
    return std::holds_alternative<RateMatrix>(*payload_) ? Kind::linear : Kind::box;
  }
  const RateMatrix* matrix() const noexcept { return std::get_if<RateMatrix>(payload_.get()); }
  const BoxRateSpec* box() const noexcept { return std::get_if<BoxRateSpec>(payload_.get()); }

  const SpacePtr& space_ptr() const noexcept {
    return std::visit([](const auto& p) -> const SpacePtr& { return p.space_ptr(); }, *payload_);
  }
  std::size_t size() const noexcept { return space_ptr()->size(); }

  double norm() const noexcept { return norm_.value; }
  std::size_t norm_attained_at() const noexcept { return norm_.attained_at; }

  void apply_to(std::span<const double> f, std::span<double> out) const {
    std::visit([&](const auto& p) { p.apply_to(f, out); }, *payload_);
  }

  Func apply(const Func& f) const {
    if (!same_space(f.space_ptr(), space_ptr()))
      throw InputError("function and rate operator live on different state spaces");
    Func out = Func::zeros(f.space_ptr());
    apply_to(f.values(), out.mutable_values());
    return out;
  }

  OperatorFn as_function() const {
    return [self = *this](const Func& f) { return self.apply(f); };
  }

private:
  using Payload = std::variant<RateMatrix, BoxRateSpec>;

  void init_norm() { norm_ = rate_norm_info(as_function(), space_ptr()); }

  std::shared_ptr<const Payload> payload_;
  NormInfo norm_;
};

inline Func apply_rate(const RateOperator& op, const Func& f) { return op.apply(f); }

inline double rate_norm(const RateOperator& op) { return op.norm(); }

/// One Euler step f -> f + delta * Q f. Only constructible through
/// make_transition, which enforces delta * ||Q|| <= 2.
class TransitionStep {
public:
  const RateOperator& generator() const noexcept { return generator_; }
  double delta() const noexcept { return delta_; }

  Func apply(const Func& f) const {
    Func out = generator_.apply(f);
    out *= delta_;
    out += f;
    return out;
  }

  OperatorFn as_function() const {
    return [self = *this](const Func& f) { return self.apply(f); };
  }

private:
  friend TransitionStep make_transition(const RateOperator&, double);
  TransitionStep(RateOperator generator, double delta)
      : generator_(std::move(generator)), delta_(delta) {}

  RateOperator generator_;
  double delta_;
};

inline TransitionStep make_transition(const RateOperator& op, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw InputError("step size must be a finite nonnegative number");
  const double norm = op.norm();
  if (delta * norm > 2.0)
    throw StepTooLarge(delta, 2.0 / norm);
  return TransitionStep(op, delta);
}

/// f -> lambda (T f - f); a bounded sublinear rate operator whenever T is a
/// sublinear transition operator.
inline OperatorFn rate_from_transition(OperatorFn apply_T, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InputError("lambda must be a finite positive number");
  return [apply_T = std::move(apply_T), lambda](const Func& f) {
    Func out = apply_T(f);
    out -= f;
    out *= lambda;
    return out;
  };
}

} // namespace ictmc
