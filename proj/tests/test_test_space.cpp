#include "probmod/test_space.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace probmod;

namespace {

TestSpace square() { return make_test_space({{"a", "b"}, {"u", "v"}}); }
TestSpace triangle() { return make_test_space({{"a", "b"}, {"b", "c"}, {"c", "a"}}); }

}  // namespace

TEST_CASE("construction canonicalizes outcomes and tests", "[test_space]") {
  TestSpace s = make_test_space({{"u", "v"}, {"b", "a"}, {"a", "b"}});
  CHECK(s.outcome_ids == std::vector<std::string>{"a", "b", "u", "v"});
  CHECK(s.tests.size() == 2);  // duplicate test collapses
  CHECK(s == square());
  CHECK_THROWS_AS(make_test_space({{}}), std::invalid_argument);
}

TEST_CASE("events are subsets of tests", "[test_space]") {
  TestSpace s = square();
  CHECK(is_event(s, make_event(s, {"a"})));
  CHECK(is_event(s, make_event(s, {"a", "b"})));
  CHECK(is_event(s, {}));
  CHECK_FALSE(is_event(s, make_event(s, {"a", "u"})));
}

TEST_CASE("orthogonality of outcomes and events", "[test_space]") {
  TestSpace s = square();
  CHECK(are_orthogonal_outcomes(s, outcome_index(s, "a"), outcome_index(s, "b")));
  CHECK_FALSE(are_orthogonal_outcomes(s, outcome_index(s, "a"), outcome_index(s, "u")));
  CHECK_FALSE(are_orthogonal_outcomes(s, outcome_index(s, "a"), outcome_index(s, "a")));

  CHECK(are_orthogonal_events(s, make_event(s, {"a"}), make_event(s, {"b"})));
  CHECK_FALSE(are_orthogonal_events(s, make_event(s, {"a"}), make_event(s, {"u"})));
  CHECK_THROWS_AS(are_orthogonal_events(s, make_event(s, {"a", "u"}), {}), std::domain_error);
}

TEST_CASE("perspectivity in the square", "[test_space]") {
  TestSpace s = square();
  // The two tests are perspective via the empty complement.
  CHECK(are_perspective(s, make_event(s, {"a", "b"}), make_event(s, {"u", "v"})));
  // Singletons from different tests are not.
  CHECK_FALSE(are_perspective(s, make_event(s, {"a"}), make_event(s, {"u"})));
  CHECK_FALSE(are_perspective(s, make_event(s, {"a"}), make_event(s, {"b"})));
}

TEST_CASE("perspectivity is reflexive on events", "[test_space]") {
  for (const TestSpace& s : {square(), triangle(), make_test_space({{"x"}, {"x", "y"}})}) {
    for (const Event& e : enumerate_events(s)) CHECK(are_perspective(s, e, e));
  }
}

TEST_CASE("triangle outcomes are pairwise perspective", "[test_space]") {
  TestSpace s = triangle();
  // {a} and {c} share the complement {b} inside {a,b} and {b,c}.
  CHECK(are_perspective(s, make_event(s, {"a"}), make_event(s, {"c"})));
  CHECK(are_perspective(s, make_event(s, {"a"}), make_event(s, {"b"})));
  CHECK(are_perspective(s, make_event(s, {"b"}), make_event(s, {"c"})));
}

TEST_CASE("irredundancy and semiclassicality", "[test_space]") {
  CHECK(is_irredundant(square()));
  CHECK(is_semiclassical(square()));
  CHECK(is_irredundant(triangle()));
  CHECK_FALSE(is_semiclassical(triangle()));

  TestSpace nested = make_test_space({{"a"}, {"a", "b"}});
  CHECK_FALSE(is_irredundant(nested));
  CHECK_FALSE(is_semiclassical(nested));

  CHECK(count_single_outcome_tests(nested) == 1);
  CHECK(count_single_outcome_tests(make_test_space({{"x"}, {"y"}})) == 2);
}

TEST_CASE("event enumeration covers all subsets of tests", "[test_space]") {
  TestSpace s = square();
  auto events = enumerate_events(s);
  // empty + 3 per test + nothing across tests
  CHECK(events.size() == 7);
  for (const Event& e : events) CHECK(is_event(s, e));
}
