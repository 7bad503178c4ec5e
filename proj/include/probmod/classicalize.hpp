#pragma once

// Semiclassical covers and the canonical classical explanation. The cover
// splits every test into its own disjoint copy, outcomes tagged "<id>@<k>"
// with k the index of the originating test; projecting the tag away is a
// quotient of models. Over the cover, dispersion-free weights form a finite
// sample space S, each cover outcome names the set of points valuing it 1,
// and every state is a barycenter of a probability vector over S. That data
// explains the original model inside a classical one whose tests are the
// partitions of S.
//
// The classical side is kept implicit: partitions of S are exponential, and
// every check needed here reduces to atoms (subsets of S) and measures.
// `materialize_*` builds the explicit partition model at desk scale so the
// generic classification machinery can be run against it.

#include "probmod/morphisms.hpp"
#include "probmod/polytope.hpp"
#include "probmod/rational.hpp"
#include "probmod/test_space.hpp"
#include "probmod/weights.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace probmod {

struct SemiclassicalCover {
  TestSpace space;
  std::vector<std::size_t> base_outcome;  // per cover outcome
  std::vector<std::size_t> base_test;     // per cover outcome
};

// One disjoint test per base test; tags decode uniquely because everything
// after the last '@' is the decimal test index.
inline SemiclassicalCover semiclassical_cover_space(const TestSpace& base) {
  std::vector<std::vector<std::string>> tests;
  for (std::size_t k = 0; k < base.tests.size(); ++k) {
    std::vector<std::string> ids;
    for (std::size_t x : base.tests[k])
      ids.push_back(base.outcome_ids[x] + "@" + std::to_string(k));
    tests.push_back(std::move(ids));
  }
  SemiclassicalCover c{make_test_space(tests), {}, {}};
  c.base_outcome.resize(c.space.outcome_ids.size());
  c.base_test.resize(c.space.outcome_ids.size());
  for (std::size_t i = 0; i < c.space.outcome_ids.size(); ++i) {
    const std::string& id = c.space.outcome_ids[i];
    std::size_t at = id.rfind('@');
    c.base_test[i] = std::stoul(id.substr(at + 1));
    c.base_outcome[i] = outcome_index(base, id.substr(0, at));
  }
  return c;
}

// States lift along the projection by forgetting the tag.
inline Weight lift_weight(const SemiclassicalCover& c, const Weight& alpha) {
  Weight w(c.base_outcome.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = alpha[c.base_outcome[i]];
  return w;
}

struct CoverModel {
  ProbModel model;              // cover space with the lifted generators
  SemiclassicalCover cover;
  Morphism projection;          // quotient onto the base model
};

inline CoverModel semiclassical_cover(const ProbModel& a) {
  SemiclassicalCover c = semiclassical_cover_space(a.space);
  std::vector<Weight> lifted;
  for (const Weight& alpha : state_generators(a)) lifted.push_back(lift_weight(c, alpha));
  ProbModel model = make_prob_model(c.space, std::move(lifted));
  std::vector<Event> map(c.base_outcome.size());
  for (std::size_t i = 0; i < map.size(); ++i) map[i] = {c.base_outcome[i]};
  Morphism projection{model, a, std::move(map)};
  return CoverModel{std::move(model), std::move(c), std::move(projection)};
}

inline std::vector<Weight> dispersion_free_cover_states(const ProbModel& a) {
  return enumerate_dispersion_free(semiclassical_cover_space(a.space).space);
}

// mu >= 0, sum 1, with barycenter sum_s mu(s)*s equal to the target weight.
// Over a semiclassical cover this is feasible for every valid weight.
inline std::optional<Vec> barycenter_measure(const std::vector<Weight>& points,
                                             const Weight& target) {
  HullResult r = hull_membership(target, points);
  if (!r.member) return std::nullopt;
  return r.combination.coefficients;
}

struct BorelViolation {
  std::size_t test_a, test_b;  // two distinct single-outcome base tests
};

struct Borelification {
  ProbModel base;
  CoverModel cover;
  std::vector<Weight> points;   // S: dispersion-free cover weights, ordered
  std::vector<Event> atoms;     // per cover outcome: point indices valuing it 1
  std::vector<Vec> measures;    // per generator: probability vector over S
};

struct BorelifyResult {
  std::optional<BorelViolation> rejected;
  std::optional<Borelification> value;
  bool ok() const { return value.has_value(); }
};

// Two single-outcome tests would give two cover outcomes valued 1 by every
// point, collapsing their atoms; the construction demands at most one.
inline BorelifyResult borelify(const ProbModel& a) {
  std::vector<std::size_t> singletons;
  for (std::size_t k = 0; k < a.space.tests.size(); ++k)
    if (a.space.tests[k].size() == 1) singletons.push_back(k);
  if (singletons.size() >= 2)
    return BorelifyResult{BorelViolation{singletons[0], singletons[1]}, std::nullopt};

  Borelification b{a, semiclassical_cover(a), {}, {}, {}};
  b.points = enumerate_dispersion_free(b.cover.model.space);
  const std::size_t n = b.cover.model.space.outcome_ids.size();
  b.atoms.resize(n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t j = 0; j < b.points.size(); ++j)
      if (b.points[j][x] == 1) b.atoms[x].push_back(j);

  // Internal consistency: atoms are non-empty and pairwise distinct, and the
  // atoms of each test partition S. Both follow from semiclassicality plus
  // the single-outcome-test hypothesis.
  std::set<Event> seen;
  for (const Event& atom : b.atoms) {
    if (atom.empty()) throw std::logic_error("empty atom on a semiclassical cover");
    if (!seen.insert(atom).second) throw std::logic_error("atom collision under the stated hypothesis");
  }
  for (const Event& t : b.cover.model.space.tests) {
    Event u;
    for (std::size_t x : t) {
      if (!events_disjoint(u, b.atoms[x])) throw std::logic_error("overlapping atoms within a test");
      u = event_union(u, b.atoms[x]);
    }
    if (u.size() != b.points.size()) throw std::logic_error("test atoms do not partition the points");
  }

  for (const Weight& lifted : b.cover.model.generators) {
    auto mu = barycenter_measure(b.points, lifted);
    if (!mu) throw std::logic_error("cover state without barycentric decomposition");
    b.measures.push_back(std::move(*mu));
  }
  return BorelifyResult{std::nullopt, std::move(b)};
}

inline Rational measure_of(const Vec& mu, const Event& block) {
  Rational r = 0;
  for (std::size_t j : block) r += mu[j];
  return r;
}

// Membership in the classical state set: a probability vector over S whose
// barycenter lies in the span of the lifted generators.
inline bool borel_state_member(const Borelification& b, const Vec& mu) {
  if (mu.size() != b.points.size()) return false;
  Rational total = 0;
  for (const Rational& m : mu) {
    if (m < 0) return false;
    total += m;
  }
  if (total != 1) return false;
  Weight bary = zero_vec(b.cover.model.space.outcome_ids.size());
  for (std::size_t j = 0; j < mu.size(); ++j)
    for (std::size_t x = 0; x < bary.size(); ++x) bary[x] += mu[j] * b.points[j][x];
  return state_member(b.cover.model, bary);
}

// The embedding leg checked against the implicit partition model. Events of
// that model are disjoint families of non-empty blocks, tests its partitions,
// and perspectivity is sameness of unions, so each condition reduces to a
// finite statement about atoms; state surjectivity is the solvability of the
// barycenter problem, certified by the stored measures.
struct BorelEmbeddingReport {
  bool positive = false;            // no empty atom
  bool injective = false;
  bool events_to_events = false;    // atoms within a test are pairwise disjoint
  bool test_preserving = false;     // test atoms partition S
  bool perspectivity = false;       // perspective cover events share atom unions
  bool state_surjective = false;    // every generator is a barycenter
  bool embedding() const {
    return positive && injective && events_to_events && test_preserving && perspectivity &&
           state_surjective;
  }
};

inline BorelEmbeddingReport check_borel_embedding(const Borelification& b) {
  BorelEmbeddingReport r;
  r.positive = std::none_of(b.atoms.begin(), b.atoms.end(),
                            [](const Event& a) { return a.empty(); });
  std::set<Event> distinct(b.atoms.begin(), b.atoms.end());
  r.injective = distinct.size() == b.atoms.size();

  r.events_to_events = true;
  r.test_preserving = true;
  for (const Event& t : b.cover.model.space.tests) {
    Event u;
    for (std::size_t x : t) {
      if (!events_disjoint(u, b.atoms[x])) r.events_to_events = false;
      u = event_union(u, b.atoms[x]);
    }
    if (u.size() != b.points.size()) r.test_preserving = false;
  }

  r.perspectivity = true;
  const auto events = enumerate_events(b.cover.model.space);
  auto atom_union = [&](const Event& a) {
    Event u;
    for (std::size_t x : a) u = event_union(u, b.atoms[x]);
    return u;
  };
  for (const Event& a : events)
    for (const Event& c : events)
      if (are_perspective(b.cover.model.space, a, c))
        if (atom_union(a) != atom_union(c)) r.perspectivity = false;

  r.state_surjective = b.measures.size() == b.cover.model.generators.size();
  for (std::size_t g = 0; g < b.measures.size() && r.state_surjective; ++g) {
    const Vec& mu = b.measures[g];
    Rational total = 0;
    for (const Rational& m : mu) {
      if (m < 0) r.state_surjective = false;
      total += m;
    }
    if (total != 1) r.state_surjective = false;
    for (std::size_t x = 0; x < b.atoms.size(); ++x)
      if (measure_of(mu, b.atoms[x]) != b.cover.model.generators[g][x]) r.state_surjective = false;
  }
  return r;
}

namespace detail {

// All set partitions of {0..n-1} as sorted blocks.
inline void partitions_rec(std::size_t next, std::size_t n, std::vector<Event>& blocks,
                           std::vector<std::vector<Event>>& out) {
  if (next == n) {
    out.push_back(blocks);
    return;
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].push_back(next);
    partitions_rec(next + 1, n, blocks, out);
    blocks[i].pop_back();
  }
  blocks.push_back({next});
  partitions_rec(next + 1, n, blocks, out);
  blocks.pop_back();
}

inline std::vector<std::vector<Event>> set_partitions(std::size_t n) {
  std::vector<std::vector<Event>> out;
  std::vector<Event> blocks;
  partitions_rec(0, n, blocks, out);
  return out;
}

inline std::string block_id(const Event& block) {
  std::string id = "b";
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (i) id += "+";
    id += std::to_string(block[i]);
  }
  return id;
}

}  // namespace detail

// Explicit partition model over S, for running the generic classifiers at
// desk scale. Outcomes are the non-empty subsets of S, tests the partitions,
// states the images of the measure polytope.
struct MaterializedBorel {
  ProbModel model;
  std::vector<Event> outcome_points;        // per outcome: its block
  std::map<Event, std::size_t> block_index; // block -> outcome index
  Morphism embedding;                       // cover model -> partition model
  Explanation explanation;                  // apex = cover, legs = (projection, embedding)
};

inline MaterializedBorel materialize_borelification(const Borelification& b) {
  const std::size_t n = b.points.size();
  if (n == 0 || n > 8) throw std::invalid_argument("partition model materialization is desk-scale only");

  std::vector<std::vector<Event>> parts = detail::set_partitions(n);
  std::vector<std::vector<std::string>> tests;
  for (const auto& p : parts) {
    std::vector<std::string> ids;
    for (const Event& blk : p) ids.push_back(detail::block_id(blk));
    tests.push_back(std::move(ids));
  }
  TestSpace space = make_test_space(tests);

  MaterializedBorel m{ProbModel{}, {}, {}, Morphism{}, Explanation{}};
  m.outcome_points.resize(space.outcome_ids.size());
  for (std::size_t o = 0; o < space.outcome_ids.size(); ++o) {
    Event blk;
    const std::string& id = space.outcome_ids[o];
    std::size_t pos = 1;
    while (pos < id.size()) {
      std::size_t next = id.find('+', pos);
      if (next == std::string::npos) next = id.size();
      blk.push_back(std::stoul(id.substr(pos, next - pos)));
      pos = next + 1;
    }
    m.outcome_points[o] = blk;
    m.block_index[blk] = o;
  }

  // Vertices of the measure polytope, pushed forward to weights on blocks.
  LinearSystem mu_sys;
  mu_sys.dimension = n;
  for (std::size_t j = 0; j < n; ++j) {
    Vec row = zero_vec(n);
    row[j] = -1;
    mu_sys.add_le(row, 0);
  }
  mu_sys.add_eq(Vec(n, Rational(1)), 1);
  // Barycenter constrained to the lifted-generator span.
  const std::size_t d = b.cover.model.space.outcome_ids.size();
  LinearSystem hull = hull_hrep(b.cover.model.generators);
  auto to_mu_row = [&](const Vec& row) {
    Vec out = zero_vec(n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t x = 0; x < d; ++x) out[j] += row[x] * b.points[j][x];
    return out;
  };
  for (const auto& eq : hull.equalities) mu_sys.add_eq(to_mu_row(eq.row), eq.rhs);
  for (const auto& le : hull.inequalities) mu_sys.add_le(to_mu_row(le.row), le.rhs);

  std::set<Weight> gens;
  for (const Vec& mu : enumerate_vertices(mu_sys)) {
    Weight w(space.outcome_ids.size());
    for (std::size_t o = 0; o < w.size(); ++o) w[o] = measure_of(mu, m.outcome_points[o]);
    gens.insert(std::move(w));
  }
  m.model = make_prob_model(std::move(space), {gens.begin(), gens.end()});

  std::vector<Event> phi(b.atoms.size());
  for (std::size_t x = 0; x < b.atoms.size(); ++x) phi[x] = {m.block_index.at(b.atoms[x])};
  m.embedding = Morphism{b.cover.model, m.model, std::move(phi)};
  m.explanation = Explanation{b.cover.model, b.cover.projection, m.embedding};
  return m;
}

// Functor action on test-preserving morphisms, represented by its point map
// f: S_B -> S_A, the pullback of dispersion-free states along the cover lift
// (x,E) -> { (y, phi(E)) | y in phi(x) }. A classical outcome b, a block of
// S_A, is sent to the block preimage f^-1(b) of S_B.
struct BorMorphism {
  std::vector<std::size_t> point_map;  // index into S_A per point of S_B
};

inline BorMorphism bor_on_morphism(const Borelification& bor_a, const Borelification& bor_b,
                                   const Morphism& phi) {
  if (!(phi.source == bor_a.base) || !(phi.target == bor_b.base))
    throw std::invalid_argument("morphism endpoints do not match the classicalized models");
  MorphismClass c = classify(phi);
  if (!c.valid || !c.test_preserving)
    throw std::invalid_argument("functor action requires a test-preserving morphism");

  const TestSpace& ca = bor_a.cover.model.space;
  const TestSpace& cb = bor_b.cover.model.space;

  // Cover lift of phi, tabulated per cover-A outcome.
  std::vector<Event> lift(ca.outcome_ids.size());
  for (std::size_t xt = 0; xt < ca.outcome_ids.size(); ++xt) {
    std::size_t x = bor_a.cover.cover.base_outcome[xt];
    std::size_t e = bor_a.cover.cover.base_test[xt];
    Event image_test = apply_morphism(phi, phi.source.space.tests[e]);
    auto it = std::lower_bound(phi.target.space.tests.begin(), phi.target.space.tests.end(), image_test);
    std::size_t f = std::size_t(it - phi.target.space.tests.begin());
    Event img;
    for (std::size_t y : phi.map[x]) {
      std::string id = phi.target.space.outcome_ids[y] + "@" + std::to_string(f);
      img.push_back(outcome_index(cb, id));
    }
    std::sort(img.begin(), img.end());
    lift[xt] = std::move(img);
  }

  BorMorphism out;
  for (const Weight& s : bor_b.points) {
    Weight pulled(ca.outcome_ids.size());
    for (std::size_t xt = 0; xt < pulled.size(); ++xt) {
      Rational v = 0;
      for (std::size_t yt : lift[xt]) v += s[yt];
      pulled[xt] = v;
    }
    auto it = std::find(bor_a.points.begin(), bor_a.points.end(), pulled);
    if (it == bor_a.points.end())
      throw std::logic_error("pullback of a dispersion-free point is not a point");
    out.point_map.push_back(std::size_t(it - bor_a.points.begin()));
  }
  return out;
}

inline Morphism materialize_bor_morphism(const MaterializedBorel& ma, const MaterializedBorel& mb,
                                         const BorMorphism& f) {
  std::vector<Event> map(ma.model.space.outcome_ids.size());
  for (std::size_t o = 0; o < map.size(); ++o) {
    const Event& block = ma.outcome_points[o];
    Event pre;
    for (std::size_t j = 0; j < f.point_map.size(); ++j)
      if (std::binary_search(block.begin(), block.end(), f.point_map[j])) pre.push_back(j);
    if (pre.empty())
      map[o] = {};
    else
      map[o] = {mb.block_index.at(pre)};
  }
  return Morphism{ma.model, mb.model, std::move(map)};
}

}  // namespace probmod
