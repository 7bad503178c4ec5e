#pragma once

// Text documents for models, joint weights, morphisms and explanations. The
// carrier is JSON with one canonical form: object keys are emitted sorted,
// every rational travels as an exact lowest-terms string, zero entries are
// omitted, and numeric literals are rejected outright on input so no
// document can smuggle in floating point.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bell.hpp"

namespace probmod {

using Json = nlohmann::json;

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

inline void reject_numbers(const Json& j, const std::string& where) {
  if (j.is_number())
    bad(where, "numeric literals are not accepted; write exact rationals as strings");
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      reject_numbers(j[i], where + "[" + std::to_string(i) + "]");
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) reject_numbers(v, where + "." + k);
  }
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing key '") + key + "'");
  return *it;
}

inline void require_keys(const Json& j, std::initializer_list<const char*> keys,
                         const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) bad(where, "unknown key '" + k + "'");
  }
  for (const char* key : keys) field(j, key, where);
}

inline std::string str(const Json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

inline Rational rational(const Json& j, const std::string& where) {
  auto r = try_parse_rational(str(j, where));
  if (!r) bad(where, "not an exact rational");
  return *r;
}

inline std::size_t outcome_or_bad(const TestSpace& s, const std::string& id,
                                  const std::string& where) {
  try {
    return outcome_index(s, id);
  } catch (const std::exception&) {
    bad(where, "unknown outcome '" + id + "'");
  }
}

inline std::string weight_violation_message(const TestSpace& s, const WeightViolation& v) {
  switch (v.kind) {
    case WeightViolation::Kind::WrongLength:
      return "wrong number of entries";
    case WeightViolation::Kind::ValueOutOfRange:
      return "value " + format_rational(v.value) + " at outcome '" + s.outcome_ids[v.index] +
             "' is outside [0,1]";
    case WeightViolation::Kind::TestSumNotOne:
    default:
      return "test " + std::to_string(v.index) + " sums to " + format_rational(v.value) +
             ", not 1";
  }
}

}  // namespace detail

inline Json parse_document(const std::string& text, const std::string& name) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(name + ": " + e.what());
  }
  detail::reject_numbers(j, name);
  return j;
}

inline Json read_document_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ParseError(p.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), p.string());
}

inline std::string dump_document(const Json& j) { return j.dump(2) + "\n"; }

// Sparse map view of a weight: nonzero entries keyed by outcome id.
inline Json weight_to_json(const TestSpace& s, const Weight& w) {
  Json o = Json::object();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0) o[s.outcome_ids[i]] = format_rational(w[i]);
  return o;
}

inline Weight weight_from_json(const TestSpace& s, const Json& j, const std::string& where) {
  if (!j.is_object()) detail::bad(where, "expected an object");
  Weight w = zero_vec(s.outcome_ids.size());
  for (const auto& [k, v] : j.items())
    w[detail::outcome_or_bad(s, k, where)] = detail::rational(v, where + "." + k);
  return w;
}

inline Json model_to_json(const ProbModel& m) {
  Json j = Json::object();
  j["outcomes"] = m.space.outcome_ids;
  Json tests = Json::array();
  for (const Event& t : m.space.tests) {
    Json ids = Json::array();
    for (std::size_t x : t) ids.push_back(m.space.outcome_ids[x]);
    tests.push_back(std::move(ids));
  }
  j["tests"] = std::move(tests);
  Json states = Json::array();
  for (const Weight& w : m.generators) states.push_back(weight_to_json(m.space, w));
  j["states"] = std::move(states);
  return j;
}

inline ProbModel model_from_json(const Json& j, const std::string& where) {
  detail::require_keys(j, {"outcomes", "states", "tests"}, where);

  const Json& jt = j["tests"];
  if (!jt.is_array() || jt.empty()) detail::bad(where + ".tests", "expected a non-empty array");
  std::vector<std::vector<std::string>> tests;
  for (std::size_t k = 0; k < jt.size(); ++k) {
    const std::string at = where + ".tests[" + std::to_string(k) + "]";
    if (!jt[k].is_array() || jt[k].empty()) detail::bad(at, "expected a non-empty array");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < jt[k].size(); ++i)
      ids.push_back(detail::str(jt[k][i], at + "[" + std::to_string(i) + "]"));
    tests.push_back(std::move(ids));
  }
  TestSpace space;
  try {
    space = make_test_space(tests);
  } catch (const std::exception& e) {
    detail::bad(where + ".tests", e.what());
  }

  const Json& jo = j["outcomes"];
  if (!jo.is_array()) detail::bad(where + ".outcomes", "expected an array");
  std::vector<std::string> outcomes;
  for (std::size_t i = 0; i < jo.size(); ++i)
    outcomes.push_back(detail::str(jo[i], where + ".outcomes[" + std::to_string(i) + "]"));
  std::sort(outcomes.begin(), outcomes.end());
  if (outcomes != space.outcome_ids)
    detail::bad(where + ".outcomes", "do not match the outcomes appearing in tests");

  const Json& js = j["states"];
  if (!js.is_array()) detail::bad(where + ".states", "expected an array");
  std::vector<Weight> gens;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const std::string at = where + ".states[" + std::to_string(i) + "]";
    Weight w = weight_from_json(space, js[i], at);
    if (auto v = check_weight(space, w))
      detail::bad(at, "not a probability weight: " + detail::weight_violation_message(space, *v));
    gens.push_back(std::move(w));
  }
  return ProbModel{std::move(space), std::move(gens), std::nullopt};
}

// A model reference is either an inline model object or a path string,
// resolved relative to the referencing document's directory.
inline ProbModel model_from_ref(const Json& j, const std::filesystem::path& base,
                                const std::string& where) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    return model_from_json(read_document_file(p), p.string());
  }
  return model_from_json(j, where);
}

struct JointDocument {
  ProbModel part_a;
  ProbModel part_b;
  ProductSpace product;
  Weight weight;
};

inline Json joint_to_json(const ProductSpace& ps, const Weight& w, const ProbModel& a,
                          const ProbModel& b) {
  Json j = Json::object();
  j["part_a"] = model_to_json(a);
  j["part_b"] = model_to_json(b);
  Json table = Json::array();
  for (std::size_t ia = 0; ia < ps.part_a.outcome_ids.size(); ++ia)
    for (std::size_t ib = 0; ib < ps.part_b.outcome_ids.size(); ++ib) {
      const Rational& v = w[ps.pair_index[ia][ib]];
      if (v == 0) continue;
      Json entry = Json::object();
      entry["a"] = ps.part_a.outcome_ids[ia];
      entry["b"] = ps.part_b.outcome_ids[ib];
      entry["p"] = format_rational(v);
      table.push_back(std::move(entry));
    }
  j["table"] = std::move(table);
  return j;
}

inline JointDocument joint_from_json(const Json& j, const std::filesystem::path& base,
                                     const std::string& where) {
  detail::require_keys(j, {"part_a", "part_b", "table"}, where);
  JointDocument d{model_from_ref(j["part_a"], base, where + ".part_a"),
                  model_from_ref(j["part_b"], base, where + ".part_b"),
                  {},
                  {}};
  d.product = product_space(d.part_a.space, d.part_b.space);
  d.weight = zero_vec(d.product.space.outcome_ids.size());

  const Json& table = j["table"];
  if (!table.is_array()) detail::bad(where + ".table", "expected an array");
  std::vector<bool> seen(d.weight.size(), false);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const std::string at = where + ".table[" + std::to_string(k) + "]";
    detail::require_keys(table[k], {"a", "b", "p"}, at);
    std::size_t ia = detail::outcome_or_bad(d.part_a.space, detail::str(table[k]["a"], at + ".a"), at + ".a");
    std::size_t ib = detail::outcome_or_bad(d.part_b.space, detail::str(table[k]["b"], at + ".b"), at + ".b");
    std::size_t i = d.product.pair_index[ia][ib];
    if (seen[i]) detail::bad(at, "duplicate table entry");
    seen[i] = true;
    d.weight[i] = detail::rational(table[k]["p"], at + ".p");
  }
  if (auto v = check_weight(d.product.space, d.weight))
    detail::bad(where + ".table", "not a probability weight on the product space: " +
                                      detail::weight_violation_message(d.product.space, *v));
  return d;
}

namespace detail {

inline Json outcome_map_to_json(const Morphism& f) {
  Json m = Json::object();
  for (std::size_t x = 0; x < f.map.size(); ++x) {
    Json arr = Json::array();
    for (std::size_t y : f.map[x]) arr.push_back(f.target.space.outcome_ids[y]);
    m[f.source.space.outcome_ids[x]] = std::move(arr);
  }
  return m;
}

inline std::map<std::string, std::vector<std::string>> outcome_map_from_json(
    const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  std::map<std::string, std::vector<std::string>> m;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_array()) bad(where + "." + k, "expected an array of outcome ids");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < v.size(); ++i)
      ids.push_back(str(v[i], where + "." + k + "[" + std::to_string(i) + "]"));
    m[k] = std::move(ids);
  }
  return m;
}

}  // namespace detail

inline Json morphism_to_json(const Morphism& f) {
  Json j = Json::object();
  j["map"] = detail::outcome_map_to_json(f);
  j["source"] = model_to_json(f.source);
  j["target"] = model_to_json(f.target);
  return j;
}

inline Morphism morphism_from_json(const Json& j, const std::filesystem::path& base,
                                   const std::string& where) {
  detail::require_keys(j, {"map", "source", "target"}, where);
  ProbModel source = model_from_ref(j["source"], base, where + ".source");
  ProbModel target = model_from_ref(j["target"], base, where + ".target");
  auto m = detail::outcome_map_from_json(j["map"], where + ".map");
  try {
    return make_morphism(std::move(source), std::move(target), m);
  } catch (const std::exception& e) {
    detail::bad(where + ".map", e.what());
  }
}

// Explanations are spans: one apex model, a quotient leg and an embedding
// leg, both rooted at the apex.
inline Json explanation_to_json(const Explanation& e) {
  auto leg = [](const Morphism& f) {
    Json j = Json::object();
    j["map"] = detail::outcome_map_to_json(f);
    j["target"] = model_to_json(f.target);
    return j;
  };
  Json j = Json::object();
  j["apex"] = model_to_json(e.apex);
  j["embedding"] = leg(e.embedding_leg);
  j["quotient"] = leg(e.quotient_leg);
  return j;
}

inline Explanation explanation_from_json(const Json& j, const std::filesystem::path& base,
                                         const std::string& where) {
  detail::require_keys(j, {"apex", "embedding", "quotient"}, where);
  ProbModel apex = model_from_ref(j["apex"], base, where + ".apex");
  auto leg = [&](const char* key) {
    const std::string at = where + "." + key;
    const Json& lj = j[key];
    detail::require_keys(lj, {"map", "target"}, at);
    ProbModel target = model_from_ref(lj["target"], base, at + ".target");
    auto m = detail::outcome_map_from_json(lj["map"], at + ".map");
    try {
      return make_morphism(apex, std::move(target), m);
    } catch (const std::exception& e) {
      detail::bad(at + ".map", e.what());
    }
  };
  Morphism q = leg("quotient");
  Morphism emb = leg("embedding");
  return Explanation{std::move(apex), std::move(q), std::move(emb)};
}

}  // namespace probmod
