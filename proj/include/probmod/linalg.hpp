#pragma once

// Dense exact linear algebra over the rationals: Gaussian elimination, rank,
// nullspaces and unique solves. Deterministic pivot choice (first usable row,
// left-to-right columns) so downstream enumerations are reproducible.

#include "probmod/rational.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace probmod {

using Mat = std::vector<Vec>;

inline Vec zero_vec(std::size_t n) { return Vec(n, Rational(0)); }

inline Rational dot(const Vec& a, const Vec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Reduces m to reduced row echelon form in place; returns the pivot columns.
inline std::vector<std::size_t> rref(Mat& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  const std::size_t rows = m.size(), cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = r;
    while (sel < rows && m[sel][c] == 0) ++sel;
    if (sel == rows) continue;
    std::swap(m[sel], m[r]);
    const Rational inv = Rational(1) / m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(Mat m) { return rref(m).size(); }

// Basis of {x : m x = 0}, one vector per free column, deterministic order.
inline Mat nullspace_basis(const Mat& m, std::size_t cols) {
  Mat red = m;
  if (red.empty()) {
    Mat basis;
    for (std::size_t c = 0; c < cols; ++c) {
      Vec e = zero_vec(cols);
      e[c] = 1;
      basis.push_back(std::move(e));
    }
    return basis;
  }
  std::vector<std::size_t> pivots = rref(red);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  Mat basis;
  for (std::size_t fc = 0; fc < cols; ++fc) {
    if (is_pivot[fc]) continue;
    Vec v = zero_vec(cols);
    v[fc] = 1;
    for (std::size_t pr = 0; pr < pivots.size(); ++pr) v[pivots[pr]] = -red[pr][fc];
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solves a x = b when the solution exists and is unique; nullopt otherwise.
inline std::optional<Vec> solve_unique(const Mat& a, const Vec& b) {
  if (a.empty()) return std::nullopt;
  const std::size_t cols = a[0].size();
  Mat aug = a;
  for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
  std::vector<std::size_t> pivots = rref(aug);
  // Inconsistent if some pivot lands in the augmented column.
  if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
  if (pivots.size() != cols) return std::nullopt;  // underdetermined
  Vec x = zero_vec(cols);
  for (std::size_t r = 0; r < cols; ++r) x[pivots[r]] = aug[r][cols];
  return x;
}

}  // namespace probmod
