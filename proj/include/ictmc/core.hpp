#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ictmc/errors.hpp"

namespace ictmc {

/// Finite, ordered set of labelled states.
class StateSpace {
public:
  explicit StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
      throw InputError("state space must contain at least one state");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i).second)
        throw InputError("duplicate state label '" + labels_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      throw InputError("unknown state '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

inline SpacePtr make_space(std::vector<std::string> labels) {
  return std::make_shared<const StateSpace>(std::move(labels));
}

/// Space with labels s0, s1, ..., s{n-1}.
inline SpacePtr make_space(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    labels.push_back("s" + std::to_string(i));
  return make_space(std::move(labels));
}

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

/// A real-valued function on a finite state space. All entries are finite.
class Func {
public:
  Func(SpacePtr space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (!space_)
      throw InputError("function requires a state space");
    if (values_.size() != space_->size())
      throw InputError("function has " + std::to_string(values_.size()) +
                       " values but the state space has " +
                       std::to_string(space_->size()) + " states");
    for (double v : values_)
      if (!std::isfinite(v))
        throw InputError("function values must be finite");
  }

  static Func constant(SpacePtr space, double mu) {
    const std::size_t n = space ? space->size() : 0;
    return Func(std::move(space), std::vector<double>(n, mu));
  }

  static Func zeros(SpacePtr space) { return constant(std::move(space), 0.0); }

  const SpacePtr& space_ptr() const noexcept { return space_; }
  const StateSpace& space() const noexcept { return *space_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }

  Func& operator+=(const Func& other) {
    require_same_space(other);
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] += other.values_[i];
    return *this;
  }
  Func& operator-=(const Func& other) {
    require_same_space(other);
    for (std::size_t i = 0; i < values_.size(); ++i)
      values_[i] -= other.values_[i];
    return *this;
  }
  Func& operator+=(double mu) {
    for (double& v : values_)
      v += mu;
    return *this;
  }
  Func& operator-=(double mu) { return *this += -mu; }
  Func& operator*=(double lambda) {
    for (double& v : values_)
      v *= lambda;
    return *this;
  }

  friend Func operator+(Func a, const Func& b) { return a += b; }
  friend Func operator-(Func a, const Func& b) { return a -= b; }
  friend Func operator+(Func a, double mu) { return a += mu; }
  friend Func operator-(Func a, double mu) { return a -= mu; }
  friend Func operator*(double lambda, Func a) { return a *= lambda; }
  friend Func operator*(Func a, double lambda) { return a *= lambda; }
  friend Func operator-(Func a) { return a *= -1.0; }

  void require_same_space(const Func& other) const {
    if (!same_space(space_, other.space_))
      throw InputError("functions live on different state spaces");
  }

private:
  SpacePtr space_;
  std::vector<double> values_;
};

/// An operator on functions; rate and transition operators, their
/// compositions and differences are all passed around in this form.
using OperatorFn = std::function<Func(const Func&)>;

/// max_x |f(x)|
inline double sup_norm(const Func& f) {
  double m = 0.0;
  for (double v : f.values())
    m = std::max(m, std::abs(v));
  return m;
}

inline Func indicator(const SpacePtr& space, const std::set<std::string>& subset) {
  std::vector<double> values(space->size(), 0.0);
  for (const auto& name : subset)
    values[space->index_of(name)] = 1.0;
  return Func(space, std::move(values));
}

inline Func indicator(const SpacePtr& space, std::size_t x) {
  std::vector<double> values(space->size(), 0.0);
  values.at(x) = 1.0;
  return Func(space, std::move(values));
}

/// 1 - 2*1_x: the unit-norm function on which rate operators attain their norm.
inline Func canonical_function(const SpacePtr& space, std::size_t x) {
  std::vector<double> values(space->size(), 1.0);
  values.at(x) = -1.0;
  return Func(space, std::move(values));
}

/// Entries uniform in [lo, hi].
inline Func random_function(const SpacePtr& space, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> values(space->size());
  for (double& v : values)
    v = dist(rng);
  return Func(space, std::move(values));
}

/// Random function rescaled to sup-norm one.
inline Func random_unit_function(const SpacePtr& space, std::mt19937_64& rng) {
  Func f = random_function(space, rng);
  double norm = sup_norm(f);
  while (norm == 0.0) {
    f = random_function(space, rng);
    norm = sup_norm(f);
  }
  return (1.0 / norm) * std::move(f);
}

/// Lower bound on sup_{||f||=1} ||A f|| from the 2N functions +-(1-2*1_x)
/// plus `samples` random unit functions. Deterministic for a given seed.
inline double seminorm_sample_bound(const OperatorFn& apply, const SpacePtr& space,
                                    std::size_t samples, std::uint64_t seed) {
  if (samples == 0)
    throw InputError("seminorm_sample_bound needs at least one sample");
  double best = 0.0;
  for (std::size_t x = 0; x < space->size(); ++x) {
    Func c = canonical_function(space, x);
    best = std::max(best, sup_norm(apply(c)));
    best = std::max(best, sup_norm(apply(-c)));
  }
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < samples; ++k)
    best = std::max(best, sup_norm(apply(random_unit_function(space, rng))));
  return best;
}

} // namespace ictmc
