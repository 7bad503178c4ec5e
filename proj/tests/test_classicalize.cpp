#include <catch2/catch_amalgamated.hpp>

#include "probmod/classicalize.hpp"

#include <algorithm>
#include <set>
#include <vector>

using namespace probmod;

namespace {

TestSpace square_space() { return make_test_space({{"a", "b"}, {"c", "d"}}); }
TestSpace triangle_space() { return make_test_space({{"a", "b"}, {"b", "c"}, {"c", "a"}}); }

}  // namespace

TEST_CASE("cover of the two-by-two space relabels it") {
  CoverModel cm = semiclassical_cover(make_full_model(square_space()));
  CHECK(cm.model.space.outcome_ids.size() == 4);
  CHECK(cm.model.space.tests.size() == 2);
  CHECK(is_semiclassical(cm.model.space));
  // Already semiclassical: the projection is a bijection, so it classifies
  // as quotient and embedding at once.
  MorphismClass c = classify(cm.projection, /*strict=*/true);
  CHECK(c.valid);
  CHECK(c.quotient);
  CHECK(c.embedding);
}

TEST_CASE("cover of the triangle splits the overlapping tests") {
  ProbModel tri = make_full_model(triangle_space());
  CoverModel cm = semiclassical_cover(tri);
  CHECK(cm.model.space.outcome_ids.size() == 6);
  CHECK(cm.model.space.tests.size() == 3);
  CHECK(is_semiclassical(cm.model.space));

  MorphismClass c = classify(cm.projection);
  CHECK(c.valid);
  CHECK(c.quotient);
  CHECK(!c.embedding);  // two copies of each outcome

  // Lifting is the pullback along the projection.
  for (const Weight& alpha : state_generators(tri))
    CHECK(pullback_weight(cm.projection, alpha) == lift_weight(cm.cover, alpha));

  // The lift of the unique triangle state is constant 1/2.
  REQUIRE(cm.model.generators.size() == 1);
  CHECK(cm.model.generators[0] == Weight(6, Rational(1, 2)));
}

TEST_CASE("dispersion-free cover state counts multiply over tests") {
  CHECK(dispersion_free_cover_states(make_full_model(square_space())).size() == 4);
  CHECK(dispersion_free_cover_states(make_full_model(triangle_space())).size() == 8);
  CHECK(dispersion_free_cover_states(make_full_model(make_test_space({{"x", "y", "z"}}))).size() == 3);
}

TEST_CASE("borelification of the full two-by-two model") {
  BorelifyResult r = borelify(make_full_model(square_space()));
  REQUIRE(r.ok());
  const Borelification& b = *r.value;

  REQUIRE(b.points.size() == 4);
  // Each atom is the pair of points valuing that cover outcome 1.
  for (const Event& atom : b.atoms) CHECK(atom.size() == 2);
  std::set<Event> distinct(b.atoms.begin(), b.atoms.end());
  CHECK(distinct.size() == 4);

  BorelEmbeddingReport rep = check_borel_embedding(b);
  CHECK(rep.embedding());
  MorphismClass qc = classify(b.cover.projection, /*strict=*/true);
  CHECK(qc.quotient);

  // Vertex states decompose as point masses: vertices are extreme.
  for (std::size_t g = 0; g < b.measures.size(); ++g) {
    const Vec& mu = b.measures[g];
    CHECK(std::count(mu.begin(), mu.end(), Rational(1)) == 1);
    CHECK(std::count(mu.begin(), mu.end(), Rational(0)) == 3);
  }
}

TEST_CASE("barycentric measures reproduce the state exactly") {
  ProbModel m = make_full_model(square_space());
  BorelifyResult r = borelify(m);
  REQUIRE(r.ok());
  const Borelification& b = *r.value;

  Weight alpha{Rational(1, 3), Rational(2, 3), Rational(1, 4), Rational(3, 4)};
  REQUIRE(is_weight(m.space, alpha));
  Weight lifted = lift_weight(b.cover.cover, alpha);
  auto mu = barycenter_measure(b.points, lifted);
  REQUIRE(mu.has_value());

  // mu(atom(x)) = alpha(x) for every cover outcome.
  for (std::size_t x = 0; x < b.atoms.size(); ++x)
    CHECK(measure_of(*mu, b.atoms[x]) == lifted[x]);

  // The independent product measure is one explicit solution.
  Vec prod(4);
  const TestSpace& cs = b.cover.model.space;
  for (std::size_t j = 0; j < 4; ++j) {
    Rational p = 1;
    for (const Event& t : cs.tests)
      for (std::size_t x : t)
        if (b.points[j][x] == 1) p *= lifted[x];
    prod[j] = p;
  }
  Weight bary = zero_vec(lifted.size());
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t x = 0; x < lifted.size(); ++x) bary[x] += prod[j] * b.points[j][x];
  CHECK(bary == lifted);
  CHECK(borel_state_member(b, prod));

  // A distinguishable non-member: mass 1 on one point has a dispersion-free
  // barycenter, still inside the full model's state set.
  Vec mass = zero_vec(4);
  mass[0] = 1;
  CHECK(borel_state_member(b, mass));
  // But not when the state set is cut down to the single state alpha.
  BorelifyResult r2 = borelify(make_prob_model(m.space, {alpha}));
  REQUIRE(r2.ok());
  CHECK(!borel_state_member(*r2.value, mass));
  CHECK(borel_state_member(*r2.value, prod));
}

TEST_CASE("borelification of the full triangle model") {
  BorelifyResult r = borelify(make_full_model(triangle_space()));
  REQUIRE(r.ok());
  const Borelification& b = *r.value;
  REQUIRE(b.points.size() == 8);
  CHECK(check_borel_embedding(b).embedding());

  REQUIRE(b.measures.size() == 1);
  const Vec& mu = b.measures[0];
  for (std::size_t x = 0; x < b.atoms.size(); ++x)
    CHECK(measure_of(mu, b.atoms[x]) == Rational(1, 2));

  // The uniform measure is feasible by direct arithmetic.
  Weight bary = zero_vec(6);
  for (const Weight& s : b.points)
    for (std::size_t x = 0; x < 6; ++x) bary[x] += Rational(1, 8) * s[x];
  CHECK(bary == Weight(6, Rational(1, 2)));
  CHECK(borel_state_member(b, Vec(8, Rational(1, 8))));
}

TEST_CASE("two single-outcome tests are rejected with a witness") {
  BorelifyResult r = borelify(make_full_model(make_test_space({{"x"}, {"y"}})));
  CHECK(!r.ok());
  REQUIRE(r.rejected.has_value());
  CHECK(r.rejected->test_a == 0);
  CHECK(r.rejected->test_b == 1);

  // A single such test is fine.
  CHECK(borelify(make_full_model(make_test_space({{"x"}}))).ok());
  CHECK(borelify(make_full_model(make_test_space({{"x"}, {"x", "y"}}))).ok());
}

TEST_CASE("dispersion-free weights pull back to dispersion-free weights") {
  ProbModel src = make_full_model(make_test_space({{"u", "v"}}));
  ProbModel tgt = make_full_model(square_space());
  for (const Morphism& f : enumerate_morphisms(src, tgt))
    for (const Weight& s : enumerate_dispersion_free(tgt.space)) {
      Weight w = pullback_weight(f, s);
      for (const Rational& v : w) CHECK((v == 0 || v == 1));
    }
}

TEST_CASE("materialized partition model at four points") {
  BorelifyResult r = borelify(make_full_model(square_space()));
  REQUIRE(r.ok());
  MaterializedBorel m = materialize_borelification(*r.value);

  CHECK(m.model.space.tests.size() == 15);        // partitions of a 4-set
  CHECK(m.model.space.outcome_ids.size() == 15);  // non-empty subsets
  // Full model: every probability vector over S is a state, so the measure
  // polytope has the four point masses as vertices.
  CHECK(m.model.generators.size() == 4);

  CHECK(!validate_explanation(m.explanation, /*strict=*/true).has_value());
  MorphismClass ec = classify(m.embedding, /*strict=*/true);
  CHECK(ec.valid);
  CHECK(ec.embedding);
  CHECK(!ec.quotient);
}

TEST_CASE("functor action on a relabeling and a collapse") {
  ProbModel sq = make_full_model(square_space());
  ProbModel pair = make_full_model(make_test_space({{"p", "q"}}));

  BorelifyResult ra = borelify(sq);
  BorelifyResult rc = borelify(pair);
  REQUIRE(ra.ok());
  REQUIRE(rc.ok());
  const Borelification& bor_sq = *ra.value;
  const Borelification& bor_pair = *rc.value;

  // Identity acts as the identity point map.
  BorMorphism bid = bor_on_morphism(bor_sq, bor_sq, identity_morphism(sq));
  CHECK(bid.point_map == std::vector<std::size_t>{0, 1, 2, 3});

  // A test-swapping isomorphism induces a bijection on points.
  Morphism f = make_morphism(sq, sq, {{"a", {"c"}}, {"b", {"d"}}, {"c", {"b"}}, {"d", {"a"}}});
  REQUIRE(classify(f).test_preserving);
  BorMorphism bf = bor_on_morphism(bor_sq, bor_sq, f);
  std::vector<std::size_t> sorted = bf.point_map;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});

  // Collapse onto a single test and the composite law on point maps:
  // the point map of g.f is the composite of the point maps in reverse.
  Morphism g = make_morphism(sq, pair, {{"a", {"p"}}, {"b", {"q"}}, {"c", {"p"}}, {"d", {"q"}}});
  BorMorphism bg = bor_on_morphism(bor_sq, bor_pair, g);
  BorMorphism bgf = bor_on_morphism(bor_sq, bor_pair, compose(g, f));
  for (std::size_t j = 0; j < bg.point_map.size(); ++j)
    CHECK(bgf.point_map[j] == bf.point_map[bg.point_map[j]]);

  // Materialized, the same law holds for the induced morphisms.
  MaterializedBorel ma = materialize_borelification(bor_sq);
  MaterializedBorel mc = materialize_borelification(bor_pair);
  Morphism mf = materialize_bor_morphism(ma, ma, bf);
  Morphism mg = materialize_bor_morphism(ma, mc, bg);
  Morphism mgf = materialize_bor_morphism(ma, mc, bgf);
  CHECK(is_valid_morphism(mf));
  CHECK(is_valid_morphism(mg));
  CHECK(compose(mg, mf).map == mgf.map);
  CHECK(materialize_bor_morphism(ma, ma, bid).map == identity_morphism(ma.model).map);

  // Non-test-preserving maps are rejected for the functor action.
  ProbModel sub = make_full_model(make_test_space({{"a", "b"}}));
  ProbModel wide = make_full_model(make_test_space({{"a", "b", "c"}}));
  Morphism inc = make_morphism(sub, wide, {{"a", {"a"}}, {"b", {"b"}}});
  BorelifyResult rs = borelify(sub);
  BorelifyResult rw = borelify(wide);
  REQUIRE(rs.ok());
  REQUIRE(rw.ok());
  CHECK_THROWS_AS(bor_on_morphism(*rs.value, *rw.value, inc), std::invalid_argument);
}
