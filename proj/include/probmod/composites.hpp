#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "morphisms.hpp"

namespace probmod {

// Two-part product constructions. Product outcomes are ordered pairs with
// the A outcome first; tests are the products E x F. Pair ids join the part
// ids with '|', percent-escaping '%' and '|' inside the components so the
// joined id determines the pair no matter what the part alphabets contain.

namespace detail {

inline std::string escape_pair_component(const std::string& s) {
  std::string r;
  for (char c : s) {
    if (c == '%') r += "%25";
    else if (c == '|') r += "%7C";
    else r += c;
  }
  return r;
}

}  // namespace detail

inline std::string pair_outcome_id(const std::string& a, const std::string& b) {
  return detail::escape_pair_component(a) + "|" + detail::escape_pair_component(b);
}

struct ProductSpace {
  TestSpace part_a;
  TestSpace part_b;
  TestSpace space;
  std::vector<std::size_t> a_of;  // product outcome -> part A outcome
  std::vector<std::size_t> b_of;  // product outcome -> part B outcome
  std::vector<std::vector<std::size_t>> pair_index;  // [ia][ib] -> product outcome
};

inline ProductSpace product_space(const TestSpace& a, const TestSpace& b) {
  std::vector<std::vector<std::string>> tests;
  for (const Event& e : a.tests)
    for (const Event& f : b.tests) {
      std::vector<std::string> t;
      for (std::size_t x : e)
        for (std::size_t y : f)
          t.push_back(pair_outcome_id(a.outcome_ids[x], b.outcome_ids[y]));
      tests.push_back(std::move(t));
    }
  ProductSpace ps{a, b, make_test_space(tests), {}, {}, {}};
  const std::size_t na = a.outcome_ids.size();
  const std::size_t nb = b.outcome_ids.size();
  ps.a_of.resize(ps.space.outcome_ids.size());
  ps.b_of.resize(ps.space.outcome_ids.size());
  ps.pair_index.assign(na, std::vector<std::size_t>(nb));
  for (std::size_t ia = 0; ia < na; ++ia)
    for (std::size_t ib = 0; ib < nb; ++ib) {
      std::size_t i =
          outcome_index(ps.space, pair_outcome_id(a.outcome_ids[ia], b.outcome_ids[ib]));
      ps.a_of[i] = ia;
      ps.b_of[i] = ib;
      ps.pair_index[ia][ib] = i;
    }
  return ps;
}

// Joint weights live on the product space as flat vectors; the table view
// indexes the same data by part outcomes.
inline Mat unflatten_joint(const ProductSpace& ps, const Weight& w) {
  if (w.size() != ps.space.outcome_ids.size())
    throw std::invalid_argument("joint weight has wrong dimension");
  Mat t(ps.part_a.outcome_ids.size(), zero_vec(ps.part_b.outcome_ids.size()));
  for (std::size_t i = 0; i < w.size(); ++i) t[ps.a_of[i]][ps.b_of[i]] = w[i];
  return t;
}

inline Weight flatten_joint(const ProductSpace& ps, const Mat& table) {
  Weight w = zero_vec(ps.space.outcome_ids.size());
  for (std::size_t ia = 0; ia < table.size(); ++ia)
    for (std::size_t ib = 0; ib < table[ia].size(); ++ib)
      w[ps.pair_index[ia][ib]] = table[ia][ib];
  return w;
}

inline Weight product_weight(const ProductSpace& ps, const Weight& alpha, const Weight& beta) {
  if (alpha.size() != ps.part_a.outcome_ids.size() ||
      beta.size() != ps.part_b.outcome_ids.size())
    throw std::invalid_argument("product weight factors have wrong dimensions");
  Weight w = zero_vec(ps.space.outcome_ids.size());
  for (std::size_t ia = 0; ia < alpha.size(); ++ia)
    for (std::size_t ib = 0; ib < beta.size(); ++ib)
      w[ps.pair_index[ia][ib]] = alpha[ia] * beta[ib];
  return w;
}

// A part marginal computed through two different tests of the other part
// disagreed at `outcome`: the joint weight signals across the split.
struct SignallingWitness {
  bool marginal_on_b = false;   // false: A's marginal moved, true: B's
  std::size_t outcome = 0;      // outcome of the moved marginal's part
  std::size_t test_first = 0;   // two tests of the other part
  std::size_t test_second = 0;
  Rational value_first;
  Rational value_second;
};

struct MarginalReport {
  std::optional<SignallingWitness> signalling;
  // The rest is populated only when non-signalling (it is ill-defined
  // otherwise). Conditional rows with zero conditioning probability are zero.
  Weight marginal_a;
  Weight marginal_b;
  Mat cond_b_given_a;  // row x: weight on B given A outcome x
  Mat cond_a_given_b;  // row y: weight on A given B outcome y
};

inline MarginalReport marginals_and_conditionals(const ProductSpace& ps, const Weight& w) {
  Mat t = unflatten_joint(ps, w);
  const std::size_t na = ps.part_a.outcome_ids.size();
  const std::size_t nb = ps.part_b.outcome_ids.size();
  const auto& ta = ps.part_a.tests;
  const auto& tb = ps.part_b.tests;

  auto row_sum = [&](std::size_t x, const Event& f) {
    Rational s = 0;
    for (std::size_t y : f) s += t[x][y];
    return s;
  };
  auto col_sum = [&](std::size_t y, const Event& e) {
    Rational s = 0;
    for (std::size_t x : e) s += t[x][y];
    return s;
  };

  MarginalReport rep;
  for (std::size_t x = 0; x < na; ++x) {
    Rational ref = row_sum(x, tb[0]);
    for (std::size_t g = 1; g < tb.size(); ++g) {
      Rational v = row_sum(x, tb[g]);
      if (v != ref) {
        rep.signalling = SignallingWitness{false, x, 0, g, ref, v};
        return rep;
      }
    }
  }
  for (std::size_t y = 0; y < nb; ++y) {
    Rational ref = col_sum(y, ta[0]);
    for (std::size_t g = 1; g < ta.size(); ++g) {
      Rational v = col_sum(y, ta[g]);
      if (v != ref) {
        rep.signalling = SignallingWitness{true, y, 0, g, ref, v};
        return rep;
      }
    }
  }

  rep.marginal_a.resize(na);
  for (std::size_t x = 0; x < na; ++x) rep.marginal_a[x] = row_sum(x, tb[0]);
  rep.marginal_b.resize(nb);
  for (std::size_t y = 0; y < nb; ++y) rep.marginal_b[y] = col_sum(y, ta[0]);

  rep.cond_b_given_a.assign(na, zero_vec(nb));
  for (std::size_t x = 0; x < na; ++x)
    if (rep.marginal_a[x] != 0)
      for (std::size_t y = 0; y < nb; ++y) rep.cond_b_given_a[x][y] = t[x][y] / rep.marginal_a[x];
  rep.cond_a_given_b.assign(nb, zero_vec(na));
  for (std::size_t y = 0; y < nb; ++y)
    if (rep.marginal_b[y] != 0)
      for (std::size_t x = 0; x < na; ++x) rep.cond_a_given_b[y][x] = t[x][y] / rep.marginal_b[y];
  return rep;
}

inline bool is_non_signalling(const ProductSpace& ps, const Weight& w) {
  return !marginals_and_conditionals(ps, w).signalling.has_value();
}

// H-description of the non-signalling joint states over (A, Omega(A)) and
// (B, Omega(B)): normalized on every product test, each part's marginal
// independent of the far test, and every conditional slice inside the far
// part's state polytope. Conditioning is kept linear by scaling: an H-row
// r.beta <= c of Omega(B) becomes r.slice_x <= c * marginal_a(x), where both
// sides are linear in the joint weight.
inline LinearSystem ns_polytope_system(const ProductSpace& ps, const ProbModel& a,
                                       const ProbModel& b) {
  if (!(a.space == ps.part_a) || !(b.space == ps.part_b))
    throw std::invalid_argument("part models do not match the product space");
  const std::size_t n = ps.space.outcome_ids.size();
  const std::size_t na = ps.part_a.outcome_ids.size();
  const std::size_t nb = ps.part_b.outcome_ids.size();
  const auto& ta = ps.part_a.tests;
  const auto& tb = ps.part_b.tests;

  LinearSystem sys;
  sys.dimension = n;
  for (const Event& tset : ps.space.tests) {
    Vec row = zero_vec(n);
    for (std::size_t i : tset) row[i] = 1;
    sys.add_eq(std::move(row), Rational(1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec row = zero_vec(n);
    row[i] = -1;
    sys.add_le(std::move(row), Rational(0));
  }
  for (std::size_t x = 0; x < na; ++x)
    for (std::size_t g = 1; g < tb.size(); ++g) {
      Vec row = zero_vec(n);
      for (std::size_t y : tb[g]) row[ps.pair_index[x][y]] += 1;
      for (std::size_t y : tb[0]) row[ps.pair_index[x][y]] -= 1;
      sys.add_eq(std::move(row), Rational(0));
    }
  for (std::size_t y = 0; y < nb; ++y)
    for (std::size_t g = 1; g < ta.size(); ++g) {
      Vec row = zero_vec(n);
      for (std::size_t x : ta[g]) row[ps.pair_index[x][y]] += 1;
      for (std::size_t x : ta[0]) row[ps.pair_index[x][y]] -= 1;
      sys.add_eq(std::move(row), Rational(0));
    }

  std::vector<Weight> gens_a = state_generators(a);
  std::vector<Weight> gens_b = state_generators(b);
  if (gens_a.empty() || gens_b.empty()) {
    // An empty part state set leaves no admissible conditionals at all.
    sys.add_eq(zero_vec(n), Rational(1));
    return sys;
  }

  // Conditional of A given B outcome y, scaled by marginal_b(y) = the
  // column sum over the reference A test.
  LinearSystem ha = hull_hrep({gens_a.begin(), gens_a.end()});
  for (std::size_t y = 0; y < nb; ++y) {
    auto scale_row = [&](const Vec& r, const Rational& c) {
      Vec row = zero_vec(n);
      for (std::size_t x = 0; x < na; ++x) row[ps.pair_index[x][y]] += r[x];
      for (std::size_t x : ta[0]) row[ps.pair_index[x][y]] -= c;
      return row;
    };
    for (const LinearConstraint& lc : ha.equalities) sys.add_eq(scale_row(lc.row, lc.rhs), Rational(0));
    for (const LinearConstraint& lc : ha.inequalities) sys.add_le(scale_row(lc.row, lc.rhs), Rational(0));
  }
  LinearSystem hb = hull_hrep({gens_b.begin(), gens_b.end()});
  for (std::size_t x = 0; x < na; ++x) {
    auto scale_row = [&](const Vec& r, const Rational& c) {
      Vec row = zero_vec(n);
      for (std::size_t y = 0; y < nb; ++y) row[ps.pair_index[x][y]] += r[y];
      for (std::size_t y : tb[0]) row[ps.pair_index[x][y]] -= c;
      return row;
    };
    for (const LinearConstraint& lc : hb.equalities) sys.add_eq(scale_row(lc.row, lc.rhs), Rational(0));
    for (const LinearConstraint& lc : hb.inequalities) sys.add_le(scale_row(lc.row, lc.rhs), Rational(0));
  }
  return sys;
}

// A composite couples a total model ("AB") to the product of its parts: pi
// maps product outcomes to AB events, and pulling AB states back along pi
// must land inside the non-signalling polytope.
struct Composite {
  ProbModel part_a;
  ProbModel part_b;
  ProductSpace product;
  ProbModel ns;     // product-space model whose states are the NS polytope
  ProbModel total;  // the composite's own model
  Morphism pi;      // product space -> total
};

inline Composite minimal_ns_composite(const ProbModel& a, const ProbModel& b) {
  ProductSpace ps = product_space(a.space, b.space);
  ProbModel ns{ps.space, {}, ns_polytope_system(ps, a, b)};
  ProbModel total = ns;
  std::vector<Event> map(ps.space.outcome_ids.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = {i};
  Morphism pi{ns, total, std::move(map)};
  return Composite{a, b, std::move(ps), std::move(ns), std::move(total), std::move(pi)};
}

// Same product and NS polytope, but a hand-picked total state set on the
// product space; pi stays the identity outcome map.
inline Composite composite_over(const ProbModel& a, const ProbModel& b,
                                std::vector<Weight> total_generators) {
  Composite c = minimal_ns_composite(a, b);
  c.total = make_prob_model(c.product.space, std::move(total_generators));
  c.pi.target = c.total;
  return c;
}

inline Weight restrict_state(const Composite& c, const Weight& omega) {
  if (omega.size() != c.total.space.outcome_ids.size())
    throw std::invalid_argument("state has wrong dimension");
  return pullback_weight(c.pi, omega);
}

namespace detail {

inline bool identity_outcome_map(const Morphism& f) {
  if (!(f.source.space == f.target.space)) return false;
  for (std::size_t i = 0; i < f.map.size(); ++i)
    if (f.map[i] != Event{i}) return false;
  return true;
}

inline bool same_linear_system(const LinearSystem& a, const LinearSystem& b) {
  auto same_rows = [](const std::vector<LinearConstraint>& u,
                      const std::vector<LinearConstraint>& v) {
    if (u.size() != v.size()) return false;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i].row != v[i].row || u[i].rhs != v[i].rhs) return false;
    return true;
  };
  return a.dimension == b.dimension && same_rows(a.equalities, b.equalities) &&
         same_rows(a.inequalities, b.inequalities);
}

// Literal identity of the state descriptions, strong enough to skip
// membership checks that would otherwise force vertex enumeration.
inline bool same_state_description(const ProbModel& a, const ProbModel& b) {
  if (!(a.space == b.space) || a.generators != b.generators) return false;
  if (a.state_hrep.has_value() != b.state_hrep.has_value()) return false;
  return !a.state_hrep || same_linear_system(*a.state_hrep, *b.state_hrep);
}

}  // namespace detail

// Is the joint weight a restriction pi*(omega) of some state of the
// composite? Decided without enumerating H-described state sets.
inline bool preparable_joint(const Composite& c, const Weight& t) {
  if (detail::identity_outcome_map(c.pi)) {
    // Exact generator hits skip the hull LP.
    for (const Weight& g : c.total.generators)
      if (g == t) return true;
    return state_member(c.total, t);
  }
  if (!c.total.generators.empty() || !c.total.state_hrep) {
    std::vector<Vec> restricted;
    for (const Weight& g : c.total.generators) restricted.push_back(pullback_weight(c.pi, g));
    for (const Vec& r : restricted)
      if (r == t) return true;
    return hull_membership(t, restricted).member;
  }
  LinearSystem sys = *c.total.state_hrep;
  for (std::size_t x = 0; x < t.size(); ++x) {
    Vec row = zero_vec(sys.dimension);
    for (std::size_t o : c.pi.map[x]) row[o] += 1;
    sys.add_eq(std::move(row), t[x]);
  }
  return solve_feasibility(sys).feasible;
}

struct CompositeReport {
  bool valid = false;
  std::string detail;  // first failed requirement when invalid
  bool locally_tomographic = false;
  bool strong = false;
  // Part generator indices of the first product found non-preparable.
  std::optional<std::pair<std::size_t, std::size_t>> strong_failure;
};

inline CompositeReport check_composite(const Composite& c) {
  CompositeReport rep;
  auto fail = [&](const char* why) {
    rep.detail = why;
    return rep;
  };
  if (!(product_space(c.part_a.space, c.part_b.space).space == c.product.space))
    return fail("product space does not match the parts");
  if (!(c.ns.space == c.product.space)) return fail("ns model lives off the product space");
  if (!(c.pi.source.space == c.product.space) || !(c.pi.target.space == c.total.space))
    return fail("pi does not run from the product space into the composite model");
  if (check_outcome_map(c.pi.source.space, c.pi.target.space, c.pi.map, false))
    return fail("pi is not a test-space morphism");

  // Outcome-map flags computed directly: classify() would pull state
  // generators on both ends, defeating the H-description of Omega_NS.
  for (const Event& e : c.product.space.tests)
    if (!is_test(c.total.space, apply_morphism(c.pi, e)))
      return fail("pi is not test-preserving");
  for (const Event& img : c.pi.map)
    if (img.empty()) return fail("pi drops an outcome");
  std::set<Event> images(c.pi.map.begin(), c.pi.map.end());
  if (images.size() != c.pi.map.size()) return fail("pi is not injective on outcomes");

  const bool identity_pi = detail::identity_outcome_map(c.pi);
  const bool shared_states = identity_pi && detail::same_state_description(c.total, c.ns);

  if (!shared_states) {
    for (const Weight& g : state_generators(c.total)) {
      Weight w = pullback_weight(c.pi, g);
      if (!is_weight(c.product.space, w))
        return fail("a state restriction is not a probability weight");
      if (!state_member(c.ns, w))
        return fail("a state restriction leaves the non-signalling polytope");
    }
  }
  rep.valid = true;

  if (identity_pi) {
    rep.locally_tomographic = true;  // restriction along the identity is injective outright
  } else {
    std::vector<Weight> gens = state_generators(c.total);
    Mat diffs, restricted;
    for (std::size_t i = 1; i < gens.size(); ++i) {
      Vec d = zero_vec(gens[0].size());
      for (std::size_t j = 0; j < d.size(); ++j) d[j] = gens[i][j] - gens[0][j];
      restricted.push_back(pullback_weight(c.pi, d));
      diffs.push_back(std::move(d));
    }
    rep.locally_tomographic = rank(diffs) == rank(restricted);
  }

  rep.strong = true;
  const std::vector<Weight> ga = state_generators(c.part_a);
  const std::vector<Weight> gb = state_generators(c.part_b);
  for (std::size_t i = 0; i < ga.size() && rep.strong; ++i)
    for (std::size_t j = 0; j < gb.size(); ++j)
      if (!preparable_joint(c, product_weight(c.product, ga[i], gb[j]))) {
        rep.strong = false;
        rep.strong_failure = {i, j};
        break;
      }
  return rep;
}

// Separability against the parts' full probability-weight polytopes. By
// bilinearity a product of mixtures is a mixture of vertex products, so the
// hull of vertex products already contains every product weight.
inline std::vector<Weight> vertex_product_weights(const ProductSpace& ps) {
  std::vector<Weight> out;
  for (const Weight& va : full_weight_polytope_vertices(ps.part_a))
    for (const Weight& vb : full_weight_polytope_vertices(ps.part_b))
      out.push_back(product_weight(ps, va, vb));
  return out;
}

inline HullResult is_separable_weight(const ProductSpace& ps, const Weight& w) {
  if (w.size() != ps.space.outcome_ids.size())
    throw std::invalid_argument("joint weight has wrong dimension");
  return hull_membership(w, vertex_product_weights(ps));
}

// Separability of a composite state: its restriction is tested against the
// hull of the preparable vertex products.
inline HullResult is_separable_state(const Composite& c, const Weight& omega) {
  if (!state_member(c.total, omega))
    throw std::invalid_argument("state lies outside the composite's state set");
  Weight t = restrict_state(c, omega);
  std::vector<Weight> prep;
  for (const Weight& p : vertex_product_weights(c.product))
    if (preparable_joint(c, p)) prep.push_back(p);
  return hull_membership(t, prep);
}

}  // namespace probmod
