#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "classicalize.hpp"
#include "composites.hpp"

namespace probmod {

// Bell locality of a composite, certified through a classical embedding of
// the semiclassical cover of its total model. Point masses pull back to
// dispersion-free cover weights; the composite is Bell-local when each of
// them drops to the base space and restricts to a product joint weight.

struct BellWitness {
  enum class Kind { ContextDependent, NotProduct };
  Kind kind = Kind::NotProduct;
  std::size_t point = 0;  // index into the embedding's point set

  // NotProduct: the dropped and restricted joint weight together with a
  // non-vanishing 2x2 minor (part outcome indices), hand-checkable.
  Weight joint;
  std::size_t a_first = 0, a_second = 0;
  std::size_t b_first = 0, b_second = 0;
  std::optional<SignallingWitness> signalling;

  // ContextDependent: two cover outcomes over the same base outcome on which
  // the pulled-back weight disagrees, so it is no lift at all.
  std::size_t cover_first = 0, cover_second = 0;
};

struct BellVerdict {
  bool local = false;
  std::vector<BellWitness> witnesses;  // one per failing point
  // Populated only when local, indexed like the point set.
  std::vector<Weight> joints;
  std::vector<std::pair<Weight, Weight>> factorization;  // (alpha_s, beta_s)
};

namespace detail {

// Core loop shared by the canonical and explicit-embedding routes: the
// pulled-back point weights arrive as cover weights, everything after that
// depends only on test spaces and pi.
inline BellVerdict bell_core(const Composite& c, const SemiclassicalCover& cover,
                             const std::vector<Weight>& gamma_tilde) {
  const std::size_t nbase = c.total.space.outcome_ids.size();
  const std::size_t na = c.product.part_a.outcome_ids.size();
  const std::size_t nb = c.product.part_b.outcome_ids.size();

  BellVerdict v;
  v.local = true;
  std::vector<Weight> joints(gamma_tilde.size());
  std::vector<std::pair<Weight, Weight>> factorization(gamma_tilde.size());

  for (std::size_t s = 0; s < gamma_tilde.size(); ++s) {
    const Weight& gt = gamma_tilde[s];

    Weight gamma = zero_vec(nbase);
    std::vector<std::size_t> first_at(nbase, gt.size());
    bool dropped = true;
    for (std::size_t i = 0; i < gt.size() && dropped; ++i) {
      std::size_t x = cover.base_outcome[i];
      if (first_at[x] == gt.size()) {
        first_at[x] = i;
        gamma[x] = gt[i];
      } else if (gamma[x] != gt[i]) {
        BellWitness w;
        w.kind = BellWitness::Kind::ContextDependent;
        w.point = s;
        w.cover_first = first_at[x];
        w.cover_second = i;
        v.witnesses.push_back(std::move(w));
        v.local = false;
        dropped = false;
      }
    }
    if (!dropped) continue;

    Weight joint = pullback_weight(c.pi, gamma);
    Mat t = unflatten_joint(c.product, joint);
    joints[s] = joint;

    bool product = true;
    for (std::size_t a1 = 0; a1 < na && product; ++a1)
      for (std::size_t a2 = a1 + 1; a2 < na && product; ++a2)
        for (std::size_t b1 = 0; b1 < nb && product; ++b1)
          for (std::size_t b2 = b1 + 1; b2 < nb; ++b2) {
            if (t[a1][b1] * t[a2][b2] - t[a1][b2] * t[a2][b1] == 0) continue;
            BellWitness w;
            w.kind = BellWitness::Kind::NotProduct;
            w.point = s;
            w.joint = joint;
            w.a_first = a1;
            w.a_second = a2;
            w.b_first = b1;
            w.b_second = b2;
            w.signalling = marginals_and_conditionals(c.product, joint).signalling;
            v.witnesses.push_back(std::move(w));
            v.local = false;
            product = false;
            break;
          }
    if (!product) continue;

    // A rank-one joint weight cannot signal and always factors through its
    // marginals; both are re-verified rather than trusted.
    MarginalReport rep = marginals_and_conditionals(c.product, joint);
    if (rep.signalling) throw std::logic_error("rank-one joint weight signals");
    if (product_weight(c.product, rep.marginal_a, rep.marginal_b) != joint)
      throw std::logic_error("marginals do not reproduce a rank-one joint weight");
    factorization[s] = {rep.marginal_a, rep.marginal_b};
  }

  if (v.local) {
    v.joints = std::move(joints);
    v.factorization = std::move(factorization);
  }
  return v;
}

// A usable embedding target looks like a finite Borel structure over its own
// dispersion-free weights: outcomes act as distinct subsets of the point set
// and every test partitions it. Points are 0/1 vectors, so distinctness of
// the points themselves (guaranteed by enumeration) already separates them.
inline bool borel_target_shape(const TestSpace& t, const std::vector<Weight>& points) {
  if (points.empty()) return false;
  std::vector<Event> atoms(t.outcome_ids.size());
  for (std::size_t o = 0; o < atoms.size(); ++o)
    for (std::size_t j = 0; j < points.size(); ++j)
      if (points[j][o] == 1) atoms[o].push_back(j);
  std::set<Event> distinct(atoms.begin(), atoms.end());
  if (distinct.size() != atoms.size()) return false;
  for (const Event& test : t.tests) {
    Event seen;
    for (std::size_t o : test) {
      if (!events_disjoint(seen, atoms[o])) return false;
      seen = event_union(seen, atoms[o]);
    }
    if (seen.size() != points.size()) return false;
  }
  return true;
}

}  // namespace detail

// Canonical route: the cover's dispersion-free weights are exactly the
// pullbacks of the point masses through the canonical classical embedding,
// so no Borel model needs to be built. The embedding exists only under the
// usual single-outcome-test hypothesis on the cover's base.
inline BellVerdict check_bell_local(const Composite& c) {
  if (count_single_outcome_tests(c.total.space) >= 2)
    throw std::invalid_argument(
        "no canonical classical embedding: two single-outcome tests");
  SemiclassicalCover cover = semiclassical_cover_space(c.total.space);
  return detail::bell_core(c, cover, enumerate_dispersion_free(cover.space));
}

// Explicit route: any embedding of the cover model into a semiclassical
// model will do; its dispersion-free weights play the role of point masses.
inline BellVerdict check_bell_local_via(const Composite& c, const Morphism& emb) {
  SemiclassicalCover cover = semiclassical_cover_space(c.total.space);
  if (!(emb.source.space == cover.space))
    throw std::invalid_argument("embedding does not start at the cover of the composite");
  std::vector<Weight> points = enumerate_dispersion_free(emb.target.space);
  if (!detail::borel_target_shape(emb.target.space, points))
    throw std::invalid_argument("embedding target is not a finite Borel structure");
  if (!classify(emb).embedding)
    throw std::invalid_argument("morphism is not an embedding");

  std::vector<Weight> gamma_tilde;
  for (const Weight& delta : points) gamma_tilde.push_back(pullback_weight(emb, delta));
  return detail::bell_core(c, cover, gamma_tilde);
}

// For a Bell-local composite, every state restriction is an explicit finite
// mixture of the per-point product weights: lifting the state to the cover
// and taking a barycenter over the dispersion-free cover weights gives the
// mixing measure outright.
struct SeparableDecomposition {
  Weight state;    // a generator of the composite's state set
  Weight joint;    // its restriction through pi
  Vec measure;     // mu over the point set
  bool hull_member = false;  // verdict of the separability LP on the joint
};

struct LocalSeparableReport {
  BellVerdict verdict;
  std::vector<SeparableDecomposition> decompositions;
};

inline LocalSeparableReport local_implies_separable_check(const Composite& c) {
  LocalSeparableReport rep;
  rep.verdict = check_bell_local(c);
  if (!rep.verdict.local)
    throw std::domain_error("composite is not Bell-local through the canonical embedding");

  SemiclassicalCover cover = semiclassical_cover_space(c.total.space);
  std::vector<Weight> points = enumerate_dispersion_free(cover.space);

  for (const Weight& omega : state_generators(c.total)) {
    auto mu = barycenter_measure(points, lift_weight(cover, omega));
    if (!mu) throw std::logic_error("cover weight has no dispersion-free barycenter");
    Weight joint = restrict_state(c, omega);

    Weight mix = zero_vec(joint.size());
    for (std::size_t s = 0; s < points.size(); ++s) {
      if ((*mu)[s] == 0) continue;
      Weight p = product_weight(c.product, rep.verdict.factorization[s].first,
                                rep.verdict.factorization[s].second);
      for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += (*mu)[s] * p[i];
    }
    if (mix != joint)
      throw std::logic_error("point-product mixture does not reproduce the restriction");

    rep.decompositions.push_back(SeparableDecomposition{
        omega, joint, std::move(*mu), is_separable_weight(c.product, joint).member});
  }
  return rep;
}

// The square-parts fixture: two dispersion-free joint weights, each
// signalling, whose average is the entangled PR box.
struct PrBoxFixture {
  Composite composite;  // minimal composite over full square parts
  Weight box;
  Weight component_one;
  Weight component_two;
};

inline PrBoxFixture build_pr_box() {
  ProbModel part = make_full_model(make_test_space({{"x", "y"}, {"u", "v"}}));
  Composite c = minimal_ns_composite(part, part);

  auto joint = [&](const std::vector<std::pair<const char*, const char*>>& ones) {
    Weight w = zero_vec(c.product.space.outcome_ids.size());
    for (const auto& [a, b] : ones)
      w[c.product.pair_index[outcome_index(part.space, a)][outcome_index(part.space, b)]] = 1;
    return w;
  };
  Weight one = joint({{"x", "x"}, {"x", "u"}, {"u", "x"}, {"u", "v"}});
  Weight two = joint({{"y", "y"}, {"y", "v"}, {"v", "y"}, {"v", "u"}});
  Weight box = zero_vec(one.size());
  for (std::size_t i = 0; i < box.size(); ++i) box[i] = (one[i] + two[i]) / 2;
  return PrBoxFixture{std::move(c), std::move(box), std::move(one), std::move(two)};
}

}  // namespace probmod
