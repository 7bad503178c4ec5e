#pragma once

// Convex polytope utilities over exact rationals.
//
//  - hull_membership: is a point a convex combination of given generators?
//    Yes comes with the combination, no comes with a separating hyperplane.
//  - hull_hrep: facet description of a V-polytope (affine-hull equalities
//    plus facet inequalities), found by brute force over generator subsets.
//    Independent of the LP solver, so the two can cross-check each other.
//  - enumerate_vertices: all vertices of a bounded H-polytope by depth-first
//    enumeration of independent active sets. Exponential worst case, which is
//    acceptable at the dimensions this library works in.

#include "probmod/linalg.hpp"
#include "probmod/lp.hpp"
#include "probmod/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace probmod {

struct HullCombination {
  Vec coefficients;                  // one per generator, nonnegative, sums to 1
  std::vector<std::size_t> support;  // indices with strictly positive coefficient
};

// normal·g <= offset for every generator while normal·p > offset.
struct SeparatingHyperplane {
  Vec normal;
  Rational offset;
};

struct HullResult {
  bool member = false;
  HullCombination combination;
  SeparatingHyperplane separator;
};

inline HullResult hull_membership(const Vec& point, const std::vector<Vec>& generators) {
  const std::size_t n = point.size();
  for (const Vec& g : generators)
    if (g.size() != n) throw std::invalid_argument("generator dimension mismatch");

  HullResult res;
  if (generators.empty()) {
    res.member = false;
    res.separator = {zero_vec(n), Rational(-1)};
    return res;
  }

  const std::size_t m = generators.size();
  LinearSystem sys;
  sys.dimension = m;
  for (std::size_t j = 0; j < n; ++j) {
    Vec row(m);
    for (std::size_t i = 0; i < m; ++i) row[i] = generators[i][j];
    sys.add_eq(std::move(row), point[j]);
  }
  sys.add_eq(Vec(m, Rational(1)), Rational(1));
  for (std::size_t i = 0; i < m; ++i) {
    Vec row = zero_vec(m);
    row[i] = -1;
    sys.add_le(std::move(row), Rational(0));
  }

  FeasibilityResult fr = solve_feasibility(sys);
  if (fr.feasible) {
    res.member = true;
    res.combination.coefficients = fr.point;
    Vec recon = zero_vec(n);
    Rational total = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (fr.point[i] < 0) throw std::logic_error("hull combination has a negative coefficient");
      if (fr.point[i] > 0) res.combination.support.push_back(i);
      total += fr.point[i];
      for (std::size_t j = 0; j < n; ++j) recon[j] += fr.point[i] * generators[i][j];
    }
    if (total != 1 || recon != point) throw std::logic_error("hull combination does not reproduce the point");
    return res;
  }

  // Farkas multipliers: y_j on the n coordinate rows, y_s on normalization.
  // For each generator, sum_j y_j g[j] + y_s >= 0 while sum_j y_j p[j] + y_s < 0,
  // so (-y, y_s) separates p from the hull.
  res.member = false;
  res.separator.normal = zero_vec(n);
  for (std::size_t j = 0; j < n; ++j) res.separator.normal[j] = -fr.farkas.eq_multipliers[j];
  res.separator.offset = fr.farkas.eq_multipliers[n];
  for (const Vec& g : generators)
    if (dot(res.separator.normal, g) > res.separator.offset)
      throw std::logic_error("separating hyperplane fails on a generator");
  if (dot(res.separator.normal, point) <= res.separator.offset)
    throw std::logic_error("separating hyperplane fails on the queried point");
  return res;
}

// H-representation of conv(generators): affine-hull equalities plus facet
// inequalities. Candidate hyperplanes are spanned by k-subsets of generators
// inside the k-dimensional affine hull; a candidate is kept when every
// generator lies weakly on one side and the touching set has affine
// dimension k-1 (a genuine facet).
inline LinearSystem hull_hrep(std::vector<Vec> generators) {
  if (generators.empty()) throw std::invalid_argument("hull of no generators");
  std::sort(generators.begin(), generators.end());
  generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
  const std::size_t n = generators[0].size();
  const Vec& g0 = generators[0];

  Mat diffs;
  for (std::size_t i = 1; i < generators.size(); ++i) {
    Vec d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = generators[i][j] - g0[j];
    diffs.push_back(std::move(d));
  }

  LinearSystem out;
  out.dimension = n;
  Mat normals = nullspace_basis(diffs, n);
  for (Vec& nv : normals) {
    Rational rhs = dot(nv, g0);
    out.add_eq(std::move(nv), std::move(rhs));
  }

  Mat reduced = diffs;
  std::size_t k = rref(reduced).size();  // affine dimension
  if (k == 0) return out;                // single point: equalities pin it down
  Mat span(reduced.begin(), reduced.begin() + k);

  const std::size_t m = generators.size();
  std::set<std::pair<Vec, Rational>> seen;

  auto consider_subset = [&](const std::vector<std::size_t>& pick) {
    const Vec& s0 = generators[pick[0]];
    // Solve for a = sum_t lambda_t span[t] with a·(s_i - s0) = 0.
    Mat cond;
    for (std::size_t i = 1; i < k; ++i) {
      Vec row(k);
      for (std::size_t t = 0; t < k; ++t) {
        Rational s = 0;
        for (std::size_t j = 0; j < n; ++j) s += span[t][j] * (generators[pick[i]][j] - s0[j]);
        row[t] = s;
      }
      cond.push_back(std::move(row));
    }
    Mat lam = nullspace_basis(cond, k);
    if (lam.size() != 1) return;  // affinely degenerate subset
    Vec a = zero_vec(n);
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t j = 0; j < n; ++j) a[j] += lam[0][t] * span[t][j];
    Rational c = dot(a, s0);

    bool any_below = false, any_above = false;
    std::vector<std::size_t> touching;
    for (std::size_t i = 0; i < m; ++i) {
      Rational v = dot(a, generators[i]);
      if (v < c)
        any_below = true;
      else if (v > c)
        any_above = true;
      else
        touching.push_back(i);
    }
    if (any_below && any_above) return;  // cuts through the hull
    if (!any_below && !any_above) throw std::logic_error("hyperplane contains the whole hull");
    if (any_above) {
      for (Rational& x : a) x = -x;
      c = -c;
    }
    // Facet test: touching generators span affine dimension k-1.
    Mat tdiff;
    for (std::size_t i = 1; i < touching.size(); ++i) {
      Vec d(n);
      for (std::size_t j = 0; j < n; ++j)
        d[j] = generators[touching[i]][j] - generators[touching[0]][j];
      tdiff.push_back(std::move(d));
    }
    if (rank(tdiff) + 1 != k) return;

    // Canonical scale: first nonzero coefficient gets absolute value 1.
    Rational scale = 0;
    for (const Rational& x : a)
      if (x != 0) {
        scale = abs(x);
        break;
      }
    for (Rational& x : a) x /= scale;
    c /= scale;
    if (seen.insert({a, c}).second) out.add_le(std::move(a), std::move(c));
  };

  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    consider_subset(pick);
    std::size_t i = k;
    bool advanced = false;
    while (i-- > 0) {
      if (pick[i] != i + m - k) {
        ++pick[i];
        for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return out;
}

// All vertices of the bounded polytope described by sys, sorted
// lexicographically. Throws when the feasible region is unbounded.
inline std::vector<Vec> enumerate_vertices(const LinearSystem& sys) {
  validate_system(sys);
  const std::size_t n = sys.dimension;
  if (!solve_feasibility(sys).feasible) return {};

  // Nonempty region: unbounded iff the recession cone has a nonzero ray.
  for (std::size_t j = 0; j < n; ++j) {
    for (int sign : {1, -1}) {
      LinearSystem cone;
      cone.dimension = n;
      for (const auto& c : sys.equalities) cone.add_eq(c.row, Rational(0));
      for (const auto& c : sys.inequalities) cone.add_le(c.row, Rational(0));
      Vec pin = zero_vec(n);
      pin[j] = 1;
      cone.add_eq(std::move(pin), Rational(sign));
      if (solve_feasibility(cone).feasible)
        throw std::invalid_argument("vertex enumeration requires a bounded polytope");
    }
  }

  // Augmented rref state: rows of [A | b] with pivot bookkeeping.
  Mat state;
  std::vector<std::size_t> pivot_cols;
  auto add_row = [&](Vec row, const Rational& rhs) -> int {
    row.push_back(rhs);
    for (std::size_t r = 0; r < state.size(); ++r) {
      const Rational f = row[pivot_cols[r]];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= n; ++j) row[j] -= f * state[r][j];
    }
    std::size_t pc = 0;
    while (pc < n && row[pc] == 0) ++pc;
    if (pc == n) return row[n] == 0 ? 0 : -1;  // redundant or inconsistent
    const Rational inv = Rational(1) / row[pc];
    for (std::size_t j = 0; j <= n; ++j) row[j] *= inv;
    for (std::size_t r = 0; r < state.size(); ++r) {
      const Rational f = state[r][pc];
      if (f == 0) continue;
      for (std::size_t j = 0; j <= n; ++j) state[r][j] -= f * row[j];
    }
    state.push_back(std::move(row));
    pivot_cols.push_back(pc);
    return 1;
  };

  std::set<Vec> found;
  auto emit_candidate = [&]() {
    Vec x = zero_vec(n);
    for (std::size_t r = 0; r < state.size(); ++r) x[pivot_cols[r]] = state[r][n];
    if (satisfies(sys, x)) found.insert(std::move(x));
  };

  for (const auto& c : sys.equalities)
    if (add_row(c.row, c.rhs) < 0) return {};  // inconsistent equalities: empty

  // Every vertex satisfies the whole system, so a branch whose tight set is
  // infeasible against the remaining constraints contains no vertex and can
  // be cut wholesale. The probe costs an LP per node, so it only pays off
  // once the subset search would otherwise explode; small systems skip it.
  const bool probe_branches = sys.inequalities.size() > 24;
  std::vector<std::size_t> tight;
  auto branch_feasible = [&]() {
    if (!probe_branches) return true;
    LinearSystem probe = sys;
    for (std::size_t i : tight)
      probe.add_eq(sys.inequalities[i].row, sys.inequalities[i].rhs);
    return solve_feasibility(probe).feasible;
  };

  auto dfs = [&](auto&& self, std::size_t start) -> void {
    if (state.size() == n) {
      emit_candidate();
      return;
    }
    for (std::size_t i = start; i < sys.inequalities.size(); ++i) {
      Mat saved_state = state;
      std::vector<std::size_t> saved_pivots = pivot_cols;
      int r = add_row(sys.inequalities[i].row, sys.inequalities[i].rhs);
      if (r == 1) {
        tight.push_back(i);
        if (branch_feasible()) self(self, i + 1);
        tight.pop_back();
      }
      state = std::move(saved_state);
      pivot_cols = std::move(saved_pivots);
      // Dependent rows add nothing; inconsistent rows prune this branch only.
    }
  };
  if (state.size() == n)
    emit_candidate();
  else
    dfs(dfs, 0);

  return std::vector<Vec>(found.begin(), found.end());
}

}  // namespace probmod
