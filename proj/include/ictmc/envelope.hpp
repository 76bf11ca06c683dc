#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ictmc/core.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/operators.hpp"

// Brute-force counterpart of the box envelope: explicit vertex enumeration
// of each row polytope, used as the reference for the greedy maximization.

namespace ictmc {

/// Rows with more free coordinates (lower < upper) than this are refused.
inline constexpr std::size_t kMaxFreeCoordinates = 12;

/// Cartesian products of vertex rows larger than this are refused.
inline constexpr std::size_t kMaxVertexMatrices = 1u << 20;

using RateRow = std::vector<double>; // size N, diagonal = -(exit rate)

struct VertexSet {
  std::vector<std::vector<RateRow>> rows; // rows[x] = vertices of row x

  std::size_t count(std::size_t x) const { return rows[x].size(); }
};

/// All vertices of {l <= q <= u, L <= sum q <= U} for row x. Without a budget
/// these are the corners of the box; with one, the corners inside the budget
/// slab plus the points where a single coordinate is fractional and the sum
/// sits on L or U.
inline std::vector<RateRow> enumerate_vertices(const BoxRateSpec& spec, std::size_t x) {
  const std::size_t n = spec.size();
  if (x >= n)
    throw InputError("state index out of range");
  std::vector<std::size_t> free;
  RateRow base(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    if (y == x)
      continue;
    base[y] = spec.lower(x, y);
    if (spec.lower(x, y) < spec.upper(x, y))
      free.push_back(y);
  }
  if (free.size() > kMaxFreeCoordinates)
    throw TooManyVertices(free.size(), kMaxFreeCoordinates);

  const auto& budget = spec.budget(x);
  auto finish = [&](RateRow row) {
    double exit = 0.0;
    for (std::size_t y = 0; y < n; ++y)
      if (y != x)
        exit += row[y];
    row[x] = -exit;
    return row;
  };
  auto exit_of = [&](const RateRow& row) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y)
      if (y != x)
        s += row[y];
    return s;
  };
  auto corner = [&](std::size_t mask, std::size_t skip) {
    RateRow row = base;
    std::size_t bit = 0;
    for (std::size_t j = 0; j < free.size(); ++j) {
      if (j == skip)
        continue;
      const std::size_t y = free[j];
      row[y] = (mask >> bit) & 1u ? spec.upper(x, y) : spec.lower(x, y);
      ++bit;
    }
    return row;
  };

  std::vector<RateRow> out;
  const std::size_t k = free.size();
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    RateRow row = corner(mask, none);
    const double s = exit_of(row);
    if (!budget || (s >= budget->lower && s <= budget->upper))
      out.push_back(finish(std::move(row)));
  }
  if (!budget)
    return out;

  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t y = free[j];
    for (std::size_t mask = 0; mask < (std::size_t{1} << (k - 1)); ++mask) {
      RateRow row = corner(mask, j);
      row[y] = 0.0;
      const double others = exit_of(row);
      for (double level : {budget->lower, budget->upper}) {
        const double v = level - others;
        if (!(v > spec.lower(x, y) && v < spec.upper(x, y)))
          continue;
        RateRow candidate = row;
        candidate[y] = v;
        const bool duplicate = std::any_of(out.begin(), out.end(), [&](const RateRow& r) {
          for (std::size_t i = 0; i < n; ++i)
            if (i != x && std::abs(r[i] - candidate[i]) > 1e-15)
              return false;
          return true;
        });
        if (!duplicate)
          out.push_back(finish(std::move(candidate)));
      }
    }
  }
  return out;
}

inline VertexSet enumerate_vertices(const BoxRateSpec& spec) {
  VertexSet set;
  set.rows.reserve(spec.size());
  for (std::size_t x = 0; x < spec.size(); ++x)
    set.rows.push_back(enumerate_vertices(spec, x));
  return set;
}

/// [Q f](x) = max over the vertices of row x of sum_y q(y) (f(y) - f(x)).
inline Func envelope_apply_bruteforce(const BoxRateSpec& spec, const Func& f) {
  if (!same_space(f.space_ptr(), spec.space_ptr()))
    throw InputError("function and specification live on different state spaces");
  const std::size_t n = spec.size();
  std::vector<double> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const RateRow& row : enumerate_vertices(spec, x)) {
      double v = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (y != x)
          v += row[y] * (f[y] - f[x]);
      best = std::max(best, v);
    }
    out[x] = best;
  }
  return Func(f.space_ptr(), std::move(out));
}

/// Member of the set whose row x is the greedy maximizer for f at x. It is
/// dominated by the envelope and agrees with it on f.
inline RateMatrix extract_dominated(const BoxRateSpec& spec, const Func& f) {
  if (!same_space(f.space_ptr(), spec.space_ptr()))
    throw InputError("function and specification live on different state spaces");
  const std::size_t n = spec.size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  std::vector<std::size_t> order;
  for (std::size_t x = 0; x < n; ++x)
    spec.maximize_row(x, f.values(), rows[x], order);
  return RateMatrix::from_rows(spec.space_ptr(), rows);
}

/// Whether every row of `m` is a feasible row of the specification.
inline bool is_member(const BoxRateSpec& spec, const RateMatrix& m, double tol = 1e-12) {
  if (!same_space(spec.space_ptr(), m.space_ptr()))
    return false;
  const auto rows = m.rows();
  for (std::size_t x = 0; x < spec.size(); ++x) {
    if (!spec.row_is_member(x, rows[x], tol))
      return false;
    double s = 0.0;
    for (double v : rows[x])
      s += v;
    if (std::abs(s) > tol)
      return false;
  }
  return true;
}

/// Calls `visit(matrix)` for every combination of vertex rows.
template <class Visitor>
void for_each_vertex_matrix(const BoxRateSpec& spec, const VertexSet& vertices, Visitor&& visit) {
  const std::size_t n = spec.size();
  double total = 1.0;
  for (const auto& r : vertices.rows)
    total *= static_cast<double>(r.size());
  if (total > static_cast<double>(kMaxVertexMatrices))
    throw TooManyVertices(static_cast<std::size_t>(std::log2(total)), 20);

  std::vector<std::size_t> pick(n, 0);
  std::vector<std::vector<double>> rows(n);
  while (true) {
    for (std::size_t x = 0; x < n; ++x)
      rows[x] = vertices.rows[x][pick[x]];
    visit(RateMatrix::from_rows(spec.space_ptr(), rows));
    std::size_t x = 0;
    while (x < n && ++pick[x] == vertices.rows[x].size())
      pick[x++] = 0;
    if (x == n)
      break;
  }
}

struct EnvelopeNormReport {
  double envelope_norm = 0.0;
  double vertex_max_norm = 0.0;
  std::size_t vertex_matrices = 0;
  bool passed = false;
};

/// Compares the norm of the envelope with the largest norm among the vertex
/// matrices of the set; they coincide for uniformly bounded sets.
inline EnvelopeNormReport envelope_norm_identity_check(const BoxRateSpec& spec,
                                                       double tol = 1e-9) {
  EnvelopeNormReport report;
  report.envelope_norm = RateOperator(spec).norm();
  const VertexSet vertices = enumerate_vertices(spec);
  for_each_vertex_matrix(spec, vertices, [&](const RateMatrix& m) {
    report.vertex_max_norm = std::max(report.vertex_max_norm, RateOperator(m).norm());
    ++report.vertex_matrices;
  });
  report.passed = std::abs(report.envelope_norm - report.vertex_max_norm) <= tol;
  return report;
}

} // namespace ictmc
