#pragma once

// Exact rational linear feasibility. Systems mix equalities (row·x = rhs) and
// inequalities (row·x <= rhs) over free variables. Decisions come with
// checkable evidence: a feasible point, or a Farkas certificate combining the
// constraints into 0 = negative. Both are re-verified before being returned,
// so a wrong answer cannot escape this module silently.
//
// The solver is a dense phase-I simplex with Bland's rule: deterministic,
// cycle-free, adequate for the desk-scale polytopes this library targets.

#include "probmod/linalg.hpp"
#include "probmod/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace probmod {

struct LinearConstraint {
  Vec row;
  Rational rhs;
};

struct LinearSystem {
  std::size_t dimension = 0;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;

  void add_eq(Vec row, Rational rhs) { equalities.push_back({std::move(row), std::move(rhs)}); }
  void add_le(Vec row, Rational rhs) { inequalities.push_back({std::move(row), std::move(rhs)}); }
};

// Multipliers proving infeasibility: free on equalities, nonnegative on
// inequalities, with sum(mult * row) = 0 and sum(mult * rhs) < 0.
struct FarkasCertificate {
  Vec eq_multipliers;
  Vec ineq_multipliers;
};

struct FeasibilityResult {
  bool feasible = false;
  Vec point;
  FarkasCertificate farkas;
};

inline void validate_system(const LinearSystem& sys) {
  for (const auto& c : sys.equalities)
    if (c.row.size() != sys.dimension) throw std::invalid_argument("equality row has wrong dimension");
  for (const auto& c : sys.inequalities)
    if (c.row.size() != sys.dimension) throw std::invalid_argument("inequality row has wrong dimension");
}

inline bool satisfies(const LinearSystem& sys, const Vec& x) {
  if (x.size() != sys.dimension) return false;
  for (const auto& c : sys.equalities)
    if (dot(c.row, x) != c.rhs) return false;
  for (const auto& c : sys.inequalities)
    if (dot(c.row, x) > c.rhs) return false;
  return true;
}

inline bool verify_farkas(const LinearSystem& sys, const FarkasCertificate& f) {
  if (f.eq_multipliers.size() != sys.equalities.size()) return false;
  if (f.ineq_multipliers.size() != sys.inequalities.size()) return false;
  for (const Rational& m : f.ineq_multipliers)
    if (m < 0) return false;
  Vec combo = zero_vec(sys.dimension);
  Rational rhs = 0;
  for (std::size_t i = 0; i < sys.equalities.size(); ++i) {
    for (std::size_t j = 0; j < sys.dimension; ++j) combo[j] += f.eq_multipliers[i] * sys.equalities[i].row[j];
    rhs += f.eq_multipliers[i] * sys.equalities[i].rhs;
  }
  for (std::size_t i = 0; i < sys.inequalities.size(); ++i) {
    for (std::size_t j = 0; j < sys.dimension; ++j) combo[j] += f.ineq_multipliers[i] * sys.inequalities[i].row[j];
    rhs += f.ineq_multipliers[i] * sys.inequalities[i].rhs;
  }
  for (const Rational& c : combo)
    if (c != 0) return false;
  return rhs < 0;
}

namespace detail {

// Phase-I simplex on: find z >= 0 with M z = r, r >= 0. Returns true and the
// basic solution when feasible; otherwise false and the dual vector y with
// y^T M <= 0 componentwise and y^T r > 0.
inline bool phase_one(const Mat& m, const Vec& r, Vec& z_out, Vec& y_out) {
  const std::size_t rows = m.size();
  const std::size_t n = rows == 0 ? 0 : m[0].size();
  const std::size_t total = n + rows;  // artificials appended
  if (rows == 0) {
    z_out = zero_vec(n);
    return true;
  }

  Mat t(rows, zero_vec(total + 1));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = m[i][j];
    t[i][n + i] = 1;
    t[i][total] = r[i];
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t i = 0; i < rows; ++i) basis[i] = n + i;

  // Reduced costs for the objective sum(artificials).
  Vec d = zero_vec(total + 1);
  for (std::size_t j = 0; j <= total; ++j) {
    Rational s = 0;
    for (std::size_t i = 0; i < rows; ++i) s += t[i][j];
    d[j] = (j < n ? Rational(0) : (j < total ? Rational(1) : Rational(0))) - s;
  }
  // d[total] currently holds -objective.

  while (true) {
    std::size_t enter = total;
    for (std::size_t j = 0; j < total; ++j) {
      if (d[j] < 0) {
        enter = j;
        break;  // Bland: smallest improving index
      }
    }
    if (enter == total) break;

    std::size_t leave = rows;
    Rational best;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][total] / t[i][enter];
      if (leave == rows || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == rows) throw std::logic_error("phase-I objective unbounded below");

    const Rational piv = t[leave][enter];
    for (std::size_t j = 0; j <= total; ++j) t[leave][j] /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational f = t[i][enter];
      for (std::size_t j = 0; j <= total; ++j) t[i][j] -= f * t[leave][j];
    }
    const Rational fd = d[enter];
    if (fd != 0)
      for (std::size_t j = 0; j <= total; ++j) d[j] -= fd * t[leave][j];
    basis[leave] = enter;
  }

  Rational objective = 0;
  for (std::size_t i = 0; i < rows; ++i)
    if (basis[i] >= n) objective += t[i][total];

  if (objective == 0) {
    z_out = zero_vec(n);
    for (std::size_t i = 0; i < rows; ++i)
      if (basis[i] < n) z_out[basis[i]] = t[i][total];
    return true;
  }

  // y_i = (phase-I costs of basis) applied to column of artificial i.
  y_out = zero_vec(rows);
  for (std::size_t k = 0; k < rows; ++k) {
    Rational s = 0;
    for (std::size_t i = 0; i < rows; ++i)
      if (basis[i] >= n) s += t[i][n + k];
    y_out[k] = s;
  }
  return false;
}

}  // namespace detail

inline FeasibilityResult solve_feasibility(const LinearSystem& sys) {
  validate_system(sys);
  const std::size_t n = sys.dimension;
  const std::size_t ne = sys.equalities.size();
  const std::size_t ni = sys.inequalities.size();
  const std::size_t rows = ne + ni;

  // Standard form: x = u - v with u, v >= 0, slack per inequality, rhs >= 0.
  Mat m(rows, zero_vec(2 * n + ni));
  Vec r = zero_vec(rows);
  std::vector<int> flip(rows, 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const LinearConstraint& c = i < ne ? sys.equalities[i] : sys.inequalities[i - ne];
    int f = c.rhs < 0 ? -1 : 1;
    flip[i] = f;
    for (std::size_t j = 0; j < n; ++j) {
      m[i][j] = f * c.row[j];
      m[i][n + j] = -f * c.row[j];
    }
    if (i >= ne) m[i][2 * n + (i - ne)] = f;
    r[i] = f * c.rhs;
  }

  Vec z, y;
  FeasibilityResult res;
  if (detail::phase_one(m, r, z, y)) {
    res.feasible = true;
    res.point = zero_vec(n);
    for (std::size_t j = 0; j < n; ++j) res.point[j] = z[j] - z[n + j];
    if (!satisfies(sys, res.point)) throw std::logic_error("simplex returned a non-feasible point");
    return res;
  }

  res.feasible = false;
  res.farkas.eq_multipliers = zero_vec(ne);
  res.farkas.ineq_multipliers = zero_vec(ni);
  for (std::size_t i = 0; i < rows; ++i) {
    Rational mult = -y[i] * flip[i];
    if (i < ne)
      res.farkas.eq_multipliers[i] = mult;
    else
      res.farkas.ineq_multipliers[i - ne] = mult;
  }
  if (!verify_farkas(sys, res.farkas)) throw std::logic_error("simplex produced an invalid Farkas certificate");
  return res;
}

}  // namespace probmod
