#pragma once

// Probability weights on a test space (values in [0,1] summing to 1 on every
// test) and probabilistic models: a test space together with a convex state
// set. State sets are generated as convex hulls of finitely many weights;
// a model may alternatively carry an H-description (used for constraint-
// defined state sets such as non-signalling polytopes), which then decides
// membership directly.

#include "probmod/polytope.hpp"
#include "probmod/rational.hpp"
#include "probmod/test_space.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace probmod {

using Weight = Vec;

struct WeightViolation {
  enum class Kind { WrongLength, ValueOutOfRange, TestSumNotOne } kind;
  std::size_t index = 0;  // outcome index or test index, depending on kind
  Rational value;
};

inline std::optional<WeightViolation> check_weight(const TestSpace& s, const Weight& w) {
  if (w.size() != s.outcome_ids.size())
    return WeightViolation{WeightViolation::Kind::WrongLength, w.size(), Rational(0)};
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] < 0 || w[i] > 1) return WeightViolation{WeightViolation::Kind::ValueOutOfRange, i, w[i]};
  for (std::size_t t = 0; t < s.tests.size(); ++t) {
    Rational sum = 0;
    for (std::size_t x : s.tests[t]) sum += w[x];
    if (sum != 1) return WeightViolation{WeightViolation::Kind::TestSumNotOne, t, sum};
  }
  return std::nullopt;
}

inline bool is_weight(const TestSpace& s, const Weight& w) { return !check_weight(s, w).has_value(); }

inline Rational event_weight(const Weight& w, const Event& e) {
  Rational sum = 0;
  for (std::size_t x : e) sum += w[x];
  return sum;
}

inline bool is_dispersion_free(const Weight& w) {
  for (const Rational& v : w)
    if (v != 0 && v != 1) return false;
  return true;
}

// All dispersion-free weights, in lexicographic order of their value vectors.
// Backtracking over outcomes with per-test partial-sum pruning.
inline std::vector<Weight> enumerate_dispersion_free(const TestSpace& s) {
  const std::size_t n = s.outcome_ids.size();
  const std::size_t m = s.tests.size();
  std::vector<std::vector<std::size_t>> tests_of(n);
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t x : s.tests[t]) tests_of[x].push_back(t);
  std::vector<std::size_t> remaining(m), ones(m);
  for (std::size_t t = 0; t < m; ++t) remaining[t] = s.tests[t].size();

  std::vector<Weight> out;
  std::vector<int> val(n, 0);
  auto rec = [&](auto&& self, std::size_t j) -> void {
    if (j == n) {
      Weight w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = val[i];
      out.push_back(std::move(w));
      return;
    }
    for (int v : {0, 1}) {
      bool ok = true;
      for (std::size_t t : tests_of[j]) {
        const std::size_t o = ones[t] + std::size_t(v);
        if (o > 1 || (remaining[t] == 1 && o == 0)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      val[j] = v;
      for (std::size_t t : tests_of[j]) {
        ones[t] += std::size_t(v);
        --remaining[t];
      }
      self(self, j + 1);
      for (std::size_t t : tests_of[j]) {
        ones[t] -= std::size_t(v);
        ++remaining[t];
      }
    }
  };
  rec(rec, 0);
  return out;
}

// H-description of the full weight polytope: per-test normalization plus
// nonnegativity. Upper bounds are implied by the test sums.
inline LinearSystem weight_polytope_system(const TestSpace& s) {
  const std::size_t n = s.outcome_ids.size();
  LinearSystem sys;
  sys.dimension = n;
  for (const Event& t : s.tests) {
    Vec row = zero_vec(n);
    for (std::size_t x : t) row[x] = 1;
    sys.add_eq(std::move(row), Rational(1));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Vec row = zero_vec(n);
    row[j] = -1;
    sys.add_le(std::move(row), Rational(0));
  }
  return sys;
}

inline std::vector<Weight> full_weight_polytope_vertices(const TestSpace& s) {
  return enumerate_vertices(weight_polytope_system(s));
}

struct ProbModel {
  TestSpace space;
  std::vector<Weight> generators;
  // When present, the H-description is the authoritative state set and
  // `generators` may be empty; its vertices are enumerated only on demand.
  std::optional<LinearSystem> state_hrep;

  bool operator==(const ProbModel& o) const {
    return space == o.space && generators == o.generators &&
           state_hrep.has_value() == o.state_hrep.has_value();
  }
};

inline ProbModel make_prob_model(TestSpace space, std::vector<Weight> generators) {
  for (const Weight& g : generators)
    if (auto v = check_weight(space, g))
      throw std::invalid_argument("state generator is not a probability weight");
  return ProbModel{std::move(space), std::move(generators), std::nullopt};
}

// Model whose state set is the whole weight polytope, generated by vertices.
inline ProbModel make_full_model(TestSpace space) {
  std::vector<Weight> verts = full_weight_polytope_vertices(space);
  return ProbModel{std::move(space), std::move(verts), std::nullopt};
}

inline bool state_member(const ProbModel& m, const Weight& w) {
  if (m.state_hrep) return satisfies(*m.state_hrep, w);
  return hull_membership(w, m.generators).member;
}

// Generator list of the state set; enumerated from the H-description when no
// explicit generators are stored.
inline std::vector<Weight> state_generators(const ProbModel& m) {
  if (!m.generators.empty() || !m.state_hrep) return m.generators;
  return enumerate_vertices(*m.state_hrep);
}

// Decides whether w = scale * alpha for some state alpha and scale in [0,1].
// Well-formed only when all test sums of w agree.
struct SubnormalizedCheck {
  bool ok = false;
  Rational scale;                     // common test sum when consistent
  std::optional<std::size_t> uneven;  // witness test index when sums differ
};

inline SubnormalizedCheck subnormalized_state_check(const ProbModel& m, const Weight& w) {
  SubnormalizedCheck res;
  if (w.size() != m.space.outcome_ids.size()) return res;
  for (const Rational& v : w)
    if (v < 0) return res;
  if (m.space.tests.empty()) {
    res.ok = true;
    res.scale = 1;
    return res;
  }
  Rational scale = event_weight(w, m.space.tests[0]);
  for (std::size_t t = 1; t < m.space.tests.size(); ++t) {
    if (event_weight(w, m.space.tests[t]) != scale) {
      res.uneven = t;
      return res;
    }
  }
  res.scale = scale;
  if (scale == 0) {
    for (const Rational& v : w)
      if (v != 0) return res;
    res.ok = true;
    return res;
  }
  if (scale > 1) return res;
  Weight alpha(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) alpha[i] = w[i] / scale;
  res.ok = state_member(m, alpha);
  return res;
}

}  // namespace probmod
