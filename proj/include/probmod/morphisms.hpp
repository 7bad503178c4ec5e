#pragma once

// Morphisms between probabilistic models: event-valued maps on outcomes,
// extended to events by unions. A valid map must
//   (i)   send events to events,
//   (ii)  preserve orthogonality of outcomes,
//   (iii) preserve perspectivity of events,
// and in addition pull every state of the target back to a (possibly
// sub-normalized) state of the source. Condition (iii) is checked on test
// pairs by default; `strict` re-checks it over all perspective event pairs.
//
// Classification flags identify the structured kinds used elsewhere:
// interpretations (positive + test-preserving), quotients (outcome- and
// test-preserving, surjective), and embeddings (injective outcome- and
// test-preserving maps that are isomorphisms onto their image and identify
// the source state set with the pullback of the target's).
//
// Spans (quotient leg + embedding leg from a common apex) describe one model
// explaining another; the dual co-span composes via a pullback, constructed
// here concretely on outcomes and verified by reclassification.

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

struct Morphism {
  ProbModel source;
  ProbModel target;
  std::vector<Event> map;  // one target event per source outcome
};

inline Event apply_morphism(const Morphism& f, const Event& a) {
  Event img;
  for (std::size_t x : a) img = event_union(img, f.map[x]);
  return img;
}

struct MorphismViolation {
  enum class Kind {
    MapShape,                    // wrong arity or a value that is not an event
    EventImageNotEvent,          // condition (i)
    OrthogonalityNotPreserved,   // condition (ii)
    PerspectivityNotPreserved,   // condition (iii)
    PullbackNotSubnormalized     // state condition
  };
  Kind kind;
  Event event_a, event_b;      // witnesses for (i)/(iii)
  std::size_t outcome_x = 0, outcome_y = 0;  // witnesses for (ii)
  std::size_t generator = 0;   // witness for the state condition
  std::string detail;
};

// Structural conditions (i)-(iii) for an outcome map between bare test
// spaces; state spaces are not consulted.
inline std::optional<MorphismViolation> check_outcome_map(const TestSpace& src,
                                                          const TestSpace& tgt,
                                                          const std::vector<Event>& map,
                                                          bool strict = false) {
  using K = MorphismViolation::Kind;
  if (map.size() != src.outcome_ids.size())
    return MorphismViolation{K::MapShape, {}, {}, 0, 0, 0, "map arity differs from outcome count"};
  for (std::size_t x = 0; x < map.size(); ++x) {
    if (!std::is_sorted(map[x].begin(), map[x].end()) ||
        std::adjacent_find(map[x].begin(), map[x].end()) != map[x].end())
      return MorphismViolation{K::MapShape, {}, {}, x, 0, 0, "image event is not canonical"};
    if (!is_event(tgt, map[x]))
      return MorphismViolation{K::MapShape, map[x], {}, x, 0, 0,
                               "image of outcome " + src.outcome_ids[x] + " is not an event"};
  }

  Morphism probe{ProbModel{src, {}, std::nullopt}, ProbModel{tgt, {}, std::nullopt}, map};

  // (ii) first: cheap and prunes most broken maps.
  for (std::size_t x = 0; x < map.size(); ++x)
    for (std::size_t y = x + 1; y < map.size(); ++y)
      if (are_orthogonal_outcomes(src, x, y))
        if (!events_disjoint(map[x], map[y]) || !is_event(tgt, event_union(map[x], map[y])))
          return MorphismViolation{K::OrthogonalityNotPreserved, {}, {}, x, y, 0, ""};

  // (i) over all events of the source.
  for (const Event& a : enumerate_events(src)) {
    if (!is_event(tgt, apply_morphism(probe, a)))
      return MorphismViolation{K::EventImageNotEvent, a, {}, 0, 0, 0, ""};
  }

  // (iii): all test pairs are perspective (via the empty complement), so
  // their images must be; strict mode covers every perspective event pair.
  for (const Event& e : src.tests)
    for (const Event& f : src.tests)
      if (!are_perspective(tgt, apply_morphism(probe, e), apply_morphism(probe, f)))
        return MorphismViolation{K::PerspectivityNotPreserved, e, f, 0, 0, 0, ""};
  if (strict) {
    const auto events = enumerate_events(src);
    for (const Event& a : events)
      for (const Event& b : events)
        if (are_perspective(src, a, b))
          if (!are_perspective(tgt, apply_morphism(probe, a), apply_morphism(probe, b)))
            return MorphismViolation{K::PerspectivityNotPreserved, a, b, 0, 0, 0, ""};
  }
  return std::nullopt;
}

inline Weight pullback_weight(const Morphism& f, const Weight& beta) {
  Weight w(f.source.space.outcome_ids.size());
  for (std::size_t x = 0; x < w.size(); ++x) w[x] = event_weight(beta, f.map[x]);
  return w;
}

inline std::optional<MorphismViolation> check_morphism(const Morphism& f, bool strict = false) {
  using K = MorphismViolation::Kind;
  if (auto v = check_outcome_map(f.source.space, f.target.space, f.map, strict)) return v;
  const auto gens = state_generators(f.target);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    Weight w = pullback_weight(f, gens[g]);
    SubnormalizedCheck sc = subnormalized_state_check(f.source, w);
    if (!sc.ok)
      return MorphismViolation{K::PullbackNotSubnormalized, {}, {}, 0, 0, g,
                               sc.uneven ? "pullback has uneven test sums" : "pullback leaves the state set"};
  }
  return std::nullopt;
}

inline bool is_valid_morphism(const Morphism& f, bool strict = false) {
  return !check_morphism(f, strict).has_value();
}

inline Morphism make_morphism(ProbModel source, ProbModel target,
                              const std::map<std::string, std::vector<std::string>>& map_by_id) {
  std::vector<Event> map(source.space.outcome_ids.size());
  for (const auto& [id, img] : map_by_id) {
    map[outcome_index(source.space, id)] = make_event(target.space, img);
  }
  for (const auto& id : source.space.outcome_ids)
    if (!map_by_id.count(id)) throw std::invalid_argument("morphism map misses outcome " + id);
  return Morphism{std::move(source), std::move(target), std::move(map)};
}

inline Morphism identity_morphism(const ProbModel& m) {
  std::vector<Event> map(m.space.outcome_ids.size());
  for (std::size_t x = 0; x < map.size(); ++x) map[x] = {x};
  return Morphism{m, m, std::move(map)};
}

// (psi . phi)(x) = union of psi over phi(x).
inline Morphism compose(const Morphism& psi, const Morphism& phi) {
  if (!(phi.target.space == psi.source.space))
    throw std::invalid_argument("composition requires matching intermediate test space");
  if (!(phi.target == psi.source))
    throw std::invalid_argument("composition requires matching intermediate state set");
  std::vector<Event> map(phi.source.space.outcome_ids.size());
  for (std::size_t x = 0; x < map.size(); ++x) map[x] = apply_morphism(psi, phi.map[x]);
  return Morphism{phi.source, psi.target, std::move(map)};
}

struct MorphismClass {
  bool valid = false;
  bool test_preserving = false;
  bool positive = false;
  bool outcome_preserving = false;
  bool interpretation = false;
  bool quotient = false;
  bool embedding = false;
};

inline MorphismClass classify(const Morphism& f, bool strict = false) {
  MorphismClass c;
  c.valid = is_valid_morphism(f, strict);
  if (!c.valid) return c;
  const TestSpace& src = f.source.space;
  const TestSpace& tgt = f.target.space;

  c.test_preserving = true;
  std::set<Event> image_tests;
  for (const Event& e : src.tests) {
    Event img = apply_morphism(f, e);
    if (!is_test(tgt, img)) c.test_preserving = false;
    image_tests.insert(std::move(img));
  }
  c.positive = true;
  c.outcome_preserving = true;
  for (const Event& img : f.map) {
    if (img.empty()) c.positive = false;
    if (img.size() != 1) c.outcome_preserving = false;
  }
  c.interpretation = c.positive && c.test_preserving;

  if (c.outcome_preserving && c.test_preserving) {
    std::set<Event> tgt_tests(tgt.tests.begin(), tgt.tests.end());
    std::set<std::size_t> hit;
    for (const Event& img : f.map) hit.insert(img[0]);
    c.quotient = image_tests == tgt_tests && hit.size() == tgt.outcome_ids.size();

    const bool injective = hit.size() == f.map.size();
    if (injective) {
      // Isomorphism onto the image: the inverse outcome map from the image
      // test space must itself satisfy (i)-(iii).
      std::vector<std::vector<std::string>> image_test_ids;
      for (const Event& e : image_tests) {
        std::vector<std::string> ids;
        for (std::size_t y : e) ids.push_back(tgt.outcome_ids[y]);
        image_test_ids.push_back(std::move(ids));
      }
      TestSpace image_space = make_test_space(image_test_ids);
      std::vector<Event> inverse(image_space.outcome_ids.size());
      for (std::size_t x = 0; x < f.map.size(); ++x) {
        std::size_t y = outcome_index(image_space, tgt.outcome_ids[f.map[x][0]]);
        inverse[y] = {x};
      }
      bool iso = !check_outcome_map(image_space, src, inverse, strict).has_value();

      if (iso) {
        // State surjectivity: pullbacks of target generators span exactly
        // the source state set.
        std::vector<Vec> pulled;
        for (const Weight& beta : state_generators(f.target)) pulled.push_back(pullback_weight(f, beta));
        bool surjective = true;
        for (const Weight& alpha : state_generators(f.source))
          if (!hull_membership(alpha, pulled).member) {
            surjective = false;
            break;
          }
        // The reverse inclusion is the state condition, already verified.
        c.embedding = surjective;
      }
    }
  }
  return c;
}

// Support morphisms: for a set S of outcomes meeting every test, with
// {E cap S} irredundant, x -> {x} on S and -> empty off S is a morphism onto
// the induced space. Both ends carry full state sets here.
inline bool is_support(const TestSpace& s, const Event& set) {
  std::set<Event> cut;
  for (const Event& t : s.tests) {
    Event c = event_intersection(t, set);
    if (c.empty()) return false;
    cut.insert(std::move(c));
  }
  for (const Event& a : cut)
    for (const Event& b : cut)
      if (a != b && event_subset(a, b)) return false;
  return true;
}

inline Morphism support_morphism(const TestSpace& s, const Event& set) {
  if (!is_support(s, set)) throw std::invalid_argument("not a support: induced tests degenerate");
  std::vector<std::vector<std::string>> cut_ids;
  for (const Event& t : s.tests) {
    std::vector<std::string> ids;
    for (std::size_t x : event_intersection(t, set)) ids.push_back(s.outcome_ids[x]);
    cut_ids.push_back(std::move(ids));
  }
  ProbModel target = make_full_model(make_test_space(cut_ids));
  std::vector<Event> map(s.outcome_ids.size());
  for (std::size_t x : set) map[x] = {outcome_index(target.space, s.outcome_ids[x])};
  return Morphism{make_full_model(s), std::move(target), std::move(map)};
}

// One model explaining another: a span whose legs share the apex model, the
// quotient leg onto the explained model and the embedding leg into the
// explaining one.
struct Explanation {
  ProbModel apex;
  Morphism quotient_leg;
  Morphism embedding_leg;
};

inline std::optional<std::string> validate_explanation(const Explanation& e, bool strict = false) {
  if (!(e.quotient_leg.source == e.apex) || !(e.embedding_leg.source == e.apex))
    return "legs do not share the apex model";
  MorphismClass q = classify(e.quotient_leg, strict);
  if (!q.valid) return "quotient leg is not a morphism";
  if (!q.quotient) return "quotient leg does not classify as a quotient";
  MorphismClass m = classify(e.embedding_leg, strict);
  if (!m.valid) return "embedding leg is not a morphism";
  if (!m.embedding) return "embedding leg does not classify as an embedding";
  return std::nullopt;
}

// Pullback of the co-span  e: A -> C  <- q: B  (e an embedding, q a
// quotient): the sub-model of B carried by q onto the image of A, with the
// restricted states of B. Returns the span explaining A by B.
inline Explanation pullback_subquotient(const Morphism& e, const Morphism& q, bool strict = false) {
  if (!(e.target == q.target)) throw std::invalid_argument("legs must share their target model");
  MorphismClass ec = classify(e, strict);
  if (!ec.valid || !ec.embedding) throw std::invalid_argument("first leg must be an embedding");
  MorphismClass qc = classify(q, strict);
  if (!qc.valid || !qc.quotient) throw std::invalid_argument("second leg must be a quotient");

  const ProbModel& a = e.source;
  const ProbModel& b = q.source;
  const TestSpace& cs = e.target.space;

  // Image of A's outcomes and tests inside C.
  std::map<std::size_t, std::size_t> from_image;  // C outcome -> A outcome
  for (std::size_t x = 0; x < e.map.size(); ++x) from_image[e.map[x][0]] = x;
  std::set<Event> image_tests;
  for (const Event& t : a.space.tests) image_tests.insert(apply_morphism(e, t));

  // Tests of B whose image under q is an image test of A.
  std::vector<Event> kept;
  for (const Event& g : b.space.tests)
    if (image_tests.count(apply_morphism(q, g))) kept.push_back(g);

  std::set<std::size_t> universe;
  for (const Event& g : kept)
    for (std::size_t y : g) universe.insert(y);

  std::vector<std::vector<std::string>> apex_tests;
  for (const Event& g : kept) {
    std::vector<std::string> ids;
    for (std::size_t y : g) ids.push_back(b.space.outcome_ids[y]);
    apex_tests.push_back(std::move(ids));
  }
  TestSpace apex_space = make_test_space(apex_tests);

  // Restrictions of B's states, deduplicated into deterministic order.
  std::set<Weight> restricted;
  for (const Weight& beta : state_generators(b)) {
    Weight w(apex_space.outcome_ids.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = beta[outcome_index(b.space, apex_space.outcome_ids[i])];
    restricted.insert(std::move(w));
  }
  ProbModel apex = make_prob_model(apex_space, {restricted.begin(), restricted.end()});

  std::vector<Event> down(apex_space.outcome_ids.size());  // quotient leg onto A
  std::vector<Event> inc(apex_space.outcome_ids.size());   // embedding leg into B
  for (std::size_t i = 0; i < apex_space.outcome_ids.size(); ++i) {
    std::size_t y = outcome_index(b.space, apex_space.outcome_ids[i]);
    inc[i] = {y};
    std::size_t z = q.map[y][0];
    auto it = from_image.find(z);
    if (it == from_image.end()) throw std::logic_error("apex outcome escapes the image of the embedding");
    down[i] = {it->second};
  }

  Explanation out{apex, Morphism{apex, a, std::move(down)}, Morphism{apex, b, std::move(inc)}};
  if (auto why = validate_explanation(out, strict))
    throw std::logic_error("pullback legs failed to classify: " + *why);
  return out;
}

// Mediating morphism for the pullback: given phi: D -> A and psi: D -> B
// with e.phi = q.psi, the unique xi: D -> apex with q'.xi = phi and
// e'.xi = psi is psi co-restricted to the apex. Returns nullopt when psi
// escapes the apex (then no cone morphism exists).
inline std::optional<Morphism> mediate_pullback(const Explanation& pb, const Morphism& psi) {
  const TestSpace& apex = pb.apex.space;
  const TestSpace& bs = psi.target.space;
  std::vector<Event> map(psi.source.space.outcome_ids.size());
  for (std::size_t x = 0; x < map.size(); ++x) {
    Event img;
    for (std::size_t y : psi.map[x]) {
      const std::string& id = bs.outcome_ids[y];
      auto it = std::lower_bound(apex.outcome_ids.begin(), apex.outcome_ids.end(), id);
      if (it == apex.outcome_ids.end() || *it != id) return std::nullopt;
      img.push_back(std::size_t(it - apex.outcome_ids.begin()));
    }
    std::sort(img.begin(), img.end());
    map[x] = std::move(img);
  }
  return Morphism{psi.source, pb.apex, std::move(map)};
}

// Explanations compose through the pullback of the middle co-span.
inline Explanation compose_explanations(const Explanation& first, const Explanation& second,
                                        bool strict = false) {
  if (!(first.embedding_leg.target == second.quotient_leg.target))
    throw std::invalid_argument("explanations do not share the middle model");
  Explanation mid = pullback_subquotient(first.embedding_leg, second.quotient_leg, strict);
  Explanation out{mid.apex, compose(first.quotient_leg, mid.quotient_leg),
                  compose(second.embedding_leg, mid.embedding_leg)};
  if (auto why = validate_explanation(out, strict))
    throw std::logic_error("composite explanation failed to classify: " + *why);
  return out;
}

// Exhaustive enumeration of valid morphisms src -> tgt at desk scale: DFS
// over per-outcome image events with orthogonality pruning. The DFS already
// enforces condition (ii) pair by pair, so the leaf check replays only the
// remaining conditions, with the source-side event and pair lists hoisted
// out of the recursion.
inline std::vector<Morphism> enumerate_morphisms(const ProbModel& src, const ProbModel& tgt,
                                                 bool strict = false) {
  const auto images = enumerate_events(tgt.space);
  const auto src_events = enumerate_events(src.space);
  std::vector<std::pair<Event, Event>> pairs;
  for (const Event& e : src.space.tests)
    for (const Event& f : src.space.tests) pairs.emplace_back(e, f);
  if (strict) {
    for (const Event& a : src_events)
      for (const Event& b : src_events)
        if (are_perspective(src.space, a, b)) pairs.emplace_back(a, b);
  }
  const auto tgt_gens = state_generators(tgt);

  const std::size_t n = src.space.outcome_ids.size();
  std::vector<Morphism> out;
  std::vector<Event> partial(n);

  auto image_of = [&](const Event& a) {
    Event img;
    for (std::size_t x : a) img = event_union(img, partial[x]);
    return img;
  };
  auto leaf_ok = [&]() {
    for (const Event& a : src_events)
      if (!is_event(tgt.space, image_of(a))) return false;
    for (const auto& [a, b] : pairs)
      if (!are_perspective(tgt.space, image_of(a), image_of(b))) return false;
    for (const Weight& beta : tgt_gens) {
      Weight w(n);
      for (std::size_t x = 0; x < n; ++x) w[x] = event_weight(beta, partial[x]);
      if (!subnormalized_state_check(src, w).ok) return false;
    }
    return true;
  };

  auto rec = [&](auto&& self, std::size_t x) -> void {
    if (x == n) {
      if (leaf_ok()) out.push_back(Morphism{src, tgt, partial});
      return;
    }
    for (const Event& img : images) {
      bool ok = true;
      for (std::size_t y = 0; y < x && ok; ++y)
        if (are_orthogonal_outcomes(src.space, x, y))
          ok = events_disjoint(img, partial[y]) &&
               is_event(tgt.space, event_union(img, partial[y]));
      if (!ok) continue;
      partial[x] = img;
      self(self, x + 1);
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace probmod
