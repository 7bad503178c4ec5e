#include <catch2/catch_amalgamated.hpp>

#include "probmod/serialization.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

using namespace probmod;

namespace {

ProbModel square_with_states() {
  TestSpace sq = make_test_space({{"a", "b"}, {"c", "d"}});
  Weight u = zero_vec(4);
  for (auto& v : u) v = Rational(1, 2);
  Weight p = zero_vec(4);
  p[outcome_index(sq, "a")] = 1;
  p[outcome_index(sq, "d")] = Rational(1, 3);
  p[outcome_index(sq, "c")] = Rational(2, 3);
  return ProbModel{sq, {u, p}, std::nullopt};
}

Json reparse(const Json& j) { return parse_document(dump_document(j), "doc"); }

}  // namespace

TEST_CASE("model documents round-trip exactly") {
  ProbModel m = square_with_states();
  ProbModel back = model_from_json(reparse(model_to_json(m)), "doc");
  CHECK(back.space == m.space);
  CHECK(back.generators == m.generators);

  // Canonical form: serializing twice gives identical bytes, keys sorted.
  std::string once = dump_document(model_to_json(m));
  std::string twice = dump_document(model_to_json(back));
  CHECK(once == twice);
  CHECK(once.find("\"outcomes\"") < once.find("\"states\""));
  CHECK(once.find("\"states\"") < once.find("\"tests\""));
}

TEST_CASE("numeric literals are rejected everywhere") {
  CHECK_THROWS_AS(parse_document(R"({"outcomes": 3})", "doc"), ParseError);
  CHECK_THROWS_AS(parse_document(R"(["x", 0.5])", "doc"), ParseError);
  CHECK_THROWS_AS(parse_document(R"({"a": {"b": [1]}})", "doc"), ParseError);
  try {
    parse_document(R"({"states": [{"a": 0.5}]})", "doc");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    // The diagnostic names the offending path.
    CHECK(std::string(e.what()).find("doc.states[0].a") != std::string::npos);
  }
  // Rationals as strings pass.
  CHECK_NOTHROW(parse_document(R"({"p": "1/2"})", "doc"));
}

TEST_CASE("model parsing validates structure") {
  Json good = model_to_json(square_with_states());

  SECTION("unknown key") {
    Json j = good;
    j["extra"] = "x";
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
  SECTION("missing key") {
    Json j = good;
    j.erase("states");
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
  SECTION("outcome list out of step with tests") {
    Json j = good;
    j["outcomes"] = Json::array({"a", "b", "c"});
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
  SECTION("state that is not a weight") {
    Json j = good;
    j["states"] = Json::array({Json::object({{"a", "1/2"}})});
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
  SECTION("state naming an unknown outcome") {
    Json j = good;
    j["states"] = Json::array({Json::object({{"z", "1"}})});
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
  SECTION("empty test") {
    Json j = good;
    j["tests"].push_back(Json::array());
    CHECK_THROWS_AS(model_from_json(j, "doc"), ParseError);
  }
}

TEST_CASE("zero entries are omitted from serialized states") {
  ProbModel m = square_with_states();
  Json j = model_to_json(m);
  // Second generator vanishes on b.
  CHECK(!j["states"][1].contains("b"));
  CHECK(j["states"][1]["a"] == "1");
  CHECK(j["states"][1]["d"] == "1/3");
}

TEST_CASE("model references resolve against the referencing document") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "probmod_ser_refs";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "part.model");
    out << dump_document(model_to_json(square_with_states()));
  }

  Json j = Json::object();
  j["source"] = "part.model";
  j["target"] = model_to_json(square_with_states());
  Json map = Json::object();
  for (const char* id : {"a", "b", "c", "d"}) map[id] = Json::array({id});
  j["map"] = map;

  Morphism f = morphism_from_json(j, dir, "doc");
  CHECK(f.source.space == square_with_states().space);
  CHECK(is_valid_morphism(f));

  j["source"] = "absent.model";
  CHECK_THROWS_AS(morphism_from_json(j, dir, "doc"), ParseError);
}

TEST_CASE("morphism documents round-trip") {
  ProbModel src = make_full_model(make_test_space({{"a", "b"}, {"c", "d"}}));
  ProbModel tgt = make_full_model(make_test_space({{"x", "y"}}));
  Morphism f = make_morphism(src, tgt,
                             {{"a", {"x"}}, {"b", {"y"}}, {"c", {"x"}}, {"d", {"y"}}});
  Morphism back = morphism_from_json(reparse(morphism_to_json(f)), ".", "doc");
  CHECK(back.source == f.source);
  CHECK(back.target == f.target);
  CHECK(back.map == f.map);
}

TEST_CASE("explanation documents round-trip") {
  ProbModel apex = make_full_model(make_test_space({{"a0", "a1"}, {"b0", "b1"}}));
  ProbModel base = make_full_model(make_test_space({{"u", "v"}}));
  Morphism q = make_morphism(apex, base,
                             {{"a0", {"u"}}, {"a1", {"v"}}, {"b0", {"u"}}, {"b1", {"v"}}});
  Morphism e = identity_morphism(apex);
  Explanation ex{apex, q, e};

  Explanation back = explanation_from_json(reparse(explanation_to_json(ex)), ".", "doc");
  CHECK(back.apex == ex.apex);
  CHECK(back.quotient_leg.map == q.map);
  CHECK(back.embedding_leg.map == e.map);
  CHECK(!validate_explanation(back).has_value());
}

TEST_CASE("joint documents round-trip and are validated") {
  PrBoxFixture pr = build_pr_box();
  const ProductSpace& ps = pr.composite.product;
  Json j = joint_to_json(ps, pr.box, pr.composite.part_a, pr.composite.part_b);

  JointDocument d = joint_from_json(reparse(j), ".", "doc");
  CHECK(d.product.space == ps.space);
  CHECK(d.weight == pr.box);
  // Only nonzero entries travel: the box has eight of sixteen.
  CHECK(j["table"].size() == 8);

  SECTION("duplicate entries rejected") {
    Json bad = j;
    bad["table"].push_back(bad["table"][0]);
    CHECK_THROWS_AS(joint_from_json(bad, ".", "doc"), ParseError);
  }
  SECTION("table must be a weight") {
    Json bad = j;
    bad["table"][0]["p"] = "1/3";
    CHECK_THROWS_AS(joint_from_json(bad, ".", "doc"), ParseError);
  }
  SECTION("unknown part outcome rejected") {
    Json bad = j;
    bad["table"][0]["a"] = "nope";
    CHECK_THROWS_AS(joint_from_json(bad, ".", "doc"), ParseError);
  }
}

TEST_CASE("sparse weight maps round-trip") {
  TestSpace sq = make_test_space({{"a", "b"}, {"c", "d"}});
  Weight w = zero_vec(4);
  w[outcome_index(sq, "b")] = 1;
  w[outcome_index(sq, "c")] = 1;
  Json j = weight_to_json(sq, w);
  CHECK(j.size() == 2);
  CHECK(weight_from_json(sq, reparse(j), "doc") == w);
}
