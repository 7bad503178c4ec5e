// Command-line front end. Every subcommand reads canonical JSON documents
// (file paths, or "-" for stdin) and writes one JSON document or report to
// stdout. Exit status: 0 when the checked property holds or output was
// produced, 1 when a check fails (the report carries a witness), 2 on
// malformed input or usage.

#include <CLI11.hpp>

#include "probmod/serialization.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace probmod;

struct Loaded {
  Json doc;
  std::filesystem::path base;
  std::string name;
};

Loaded load_input(const std::string& arg) {
  if (arg == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return {parse_document(ss.str(), "stdin"), std::filesystem::current_path(), "stdin"};
  }
  std::filesystem::path p(arg);
  auto base = p.parent_path();
  if (base.empty()) base = ".";
  return {read_document_file(p), base, p.string()};
}

ProbModel load_model(const std::string& arg) {
  Loaded in = load_input(arg);
  return model_from_json(in.doc, in.name);
}

JointDocument load_joint(const std::string& arg) {
  Loaded in = load_input(arg);
  return joint_from_json(in.doc, in.base, in.name);
}

Morphism load_morph(const std::string& arg) {
  Loaded in = load_input(arg);
  return morphism_from_json(in.doc, in.base, in.name);
}

Explanation load_expl(const std::string& arg) {
  Loaded in = load_input(arg);
  return explanation_from_json(in.doc, in.base, in.name);
}

void emit(const Json& j) { std::cout << dump_document(j); }

Json event_ids(const TestSpace& s, const Event& e) {
  Json arr = Json::array();
  for (std::size_t x : e) arr.push_back(s.outcome_ids[x]);
  return arr;
}

Json violation_json(const TestSpace& src, const MorphismViolation& v) {
  using K = MorphismViolation::Kind;
  Json j = Json::object();
  switch (v.kind) {
    case K::MapShape:
      j["kind"] = "map-shape";
      if (!v.detail.empty()) j["detail"] = v.detail;
      break;
    case K::EventImageNotEvent:
      j["kind"] = "event-image-not-event";
      j["event"] = event_ids(src, v.event_a);
      break;
    case K::OrthogonalityNotPreserved:
      j["kind"] = "orthogonality-not-preserved";
      j["outcomes"] = Json::array({src.outcome_ids[v.outcome_x], src.outcome_ids[v.outcome_y]});
      break;
    case K::PerspectivityNotPreserved:
      j["kind"] = "perspectivity-not-preserved";
      j["event_a"] = event_ids(src, v.event_a);
      j["event_b"] = event_ids(src, v.event_b);
      break;
    case K::PullbackNotSubnormalized:
    default:
      j["kind"] = "pullback-not-subnormalized";
      j["generator"] = v.generator;
      if (!v.detail.empty()) j["detail"] = v.detail;
      break;
  }
  return j;
}

Json signalling_json(const ProductSpace& ps, const SignallingWitness& w) {
  const TestSpace& moved = w.marginal_on_b ? ps.part_b : ps.part_a;
  const TestSpace& other = w.marginal_on_b ? ps.part_a : ps.part_b;
  Json j = Json::object();
  j["marginal_of"] = w.marginal_on_b ? "b" : "a";
  j["outcome"] = moved.outcome_ids[w.outcome];
  j["other_test_first"] = event_ids(other, other.tests[w.test_first]);
  j["other_test_second"] = event_ids(other, other.tests[w.test_second]);
  j["value_first"] = format_rational(w.value_first);
  j["value_second"] = format_rational(w.value_second);
  return j;
}

Json combination_json(const ProductSpace& ps, const std::vector<Weight>& gens,
                      const HullCombination& comb) {
  Json arr = Json::array();
  for (std::size_t i : comb.support) {
    Json e = Json::object();
    e["p"] = format_rational(comb.coefficients[i]);
    e["weight"] = weight_to_json(ps.space, gens[i]);
    arr.push_back(std::move(e));
  }
  return arr;
}

Json separator_json(const TestSpace& s, const SeparatingHyperplane& sep) {
  Json j = Json::object();
  j["normal"] = weight_to_json(s, sep.normal);
  j["offset"] = format_rational(sep.offset);
  return j;
}

Json bell_witness_json(const Composite& c, const BellWitness& w) {
  Json j = Json::object();
  j["point"] = w.point;
  if (w.kind == BellWitness::Kind::ContextDependent) {
    j["kind"] = "context-dependent";
    j["cover_outcomes"] = Json::array({w.cover_first, w.cover_second});
    return j;
  }
  j["kind"] = "not-product";
  j["joint"] = weight_to_json(c.product.space, w.joint);
  j["minor_a"] = Json::array({c.product.part_a.outcome_ids[w.a_first],
                              c.product.part_a.outcome_ids[w.a_second]});
  j["minor_b"] = Json::array({c.product.part_b.outcome_ids[w.b_first],
                              c.product.part_b.outcome_ids[w.b_second]});
  if (w.signalling) j["signalling"] = signalling_json(c.product, *w.signalling);
  return j;
}

// Parts plus optional joint documents supplying the total state set. With no
// joints the composite is the minimal one over the non-signalling polytope.
Composite build_composite(const std::string& a_path, const std::string& b_path,
                          const std::vector<std::string>& totals) {
  ProbModel a = load_model(a_path);
  ProbModel b = load_model(b_path);
  if (totals.empty()) return minimal_ns_composite(a, b);
  std::vector<Weight> gens;
  for (const std::string& t : totals) {
    JointDocument d = load_joint(t);
    if (!(d.part_a.space == a.space) || !(d.part_b.space == b.space))
      throw std::invalid_argument(t + ": joint document parts do not match the composite parts");
    gens.push_back(d.weight);
  }
  return composite_over(a, b, gens);
}

int run_validate(const std::string& arg) {
  Loaded in = load_input(arg);
  Json out = Json::object();
  if (in.doc.is_object() && in.doc.contains("table")) {
    JointDocument d = joint_from_json(in.doc, in.base, in.name);
    out["kind"] = "joint";
    out["a_outcome_count"] = d.part_a.space.outcome_ids.size();
    out["b_outcome_count"] = d.part_b.space.outcome_ids.size();
    out["nonzero_count"] = in.doc["table"].size();
  } else if (in.doc.is_object() && in.doc.contains("apex")) {
    Explanation e = explanation_from_json(in.doc, in.base, in.name);
    out["kind"] = "explanation";
    out["apex_outcome_count"] = e.apex.space.outcome_ids.size();
    out["quotient_target_outcome_count"] = e.quotient_leg.target.space.outcome_ids.size();
    out["embedding_target_outcome_count"] = e.embedding_leg.target.space.outcome_ids.size();
  } else if (in.doc.is_object() && in.doc.contains("map")) {
    Morphism f = morphism_from_json(in.doc, in.base, in.name);
    out["kind"] = "morphism";
    out["source_outcome_count"] = f.source.space.outcome_ids.size();
    out["target_outcome_count"] = f.target.space.outcome_ids.size();
  } else {
    ProbModel m = model_from_json(in.doc, in.name);
    out["kind"] = "model";
    out["outcome_count"] = m.space.outcome_ids.size();
    out["test_count"] = m.space.tests.size();
    out["state_count"] = m.generators.size();
  }
  emit(out);
  return 0;
}

int run_df_enum(const std::string& arg) {
  ProbModel m = load_model(arg);
  std::vector<Weight> dfs = enumerate_dispersion_free(m.space);
  Json out = Json::object();
  out["count"] = dfs.size();
  Json ws = Json::array();
  for (const Weight& w : dfs) ws.push_back(weight_to_json(m.space, w));
  out["weights"] = std::move(ws);
  emit(out);
  return 0;
}

int run_vertices(const std::string& arg) {
  ProbModel m = load_model(arg);
  std::vector<Weight> vs = full_weight_polytope_vertices(m.space);
  Json out = Json::object();
  out["count"] = vs.size();
  Json ws = Json::array();
  for (const Weight& w : vs) ws.push_back(weight_to_json(m.space, w));
  out["vertices"] = std::move(ws);
  emit(out);
  return 0;
}

int run_cover(const std::string& arg, const std::string& what) {
  CoverModel cm = semiclassical_cover(load_model(arg));
  if (what == "model")
    emit(model_to_json(cm.model));
  else
    emit(morphism_to_json(cm.projection));
  return 0;
}

int run_borelify(const std::string& arg) {
  ProbModel m = load_model(arg);
  BorelifyResult r = borelify(m);
  Json out = Json::object();
  if (!r.ok()) {
    out["ok"] = false;
    Json w = Json::object();
    w["test_a"] = r.rejected->test_a;
    w["test_b"] = r.rejected->test_b;
    out["witness"] = std::move(w);
    emit(out);
    return 1;
  }
  const Borelification& b = *r.value;
  MaterializedBorel mb = materialize_borelification(b);
  out["ok"] = true;
  out["point_count"] = b.points.size();
  out["embedding"] = morphism_to_json(mb.embedding);
  Json ms = Json::array();
  for (const Vec& mu : b.measures) {
    Json row = Json::array();
    for (const Rational& v : mu) row.push_back(format_rational(v));
    ms.push_back(std::move(row));
  }
  out["measures"] = std::move(ms);
  emit(out);
  return 0;
}

int run_decompose(const std::string& arg, std::size_t gen) {
  ProbModel m = load_model(arg);
  if (gen >= m.generators.size())
    throw std::invalid_argument("generator index out of range (model has " +
                                std::to_string(m.generators.size()) + " states)");
  std::vector<Weight> dfs = enumerate_dispersion_free(m.space);
  std::optional<Vec> mu = barycenter_measure(dfs, m.generators[gen]);
  Json out = Json::object();
  if (!mu) {
    out["decomposable"] = false;
    emit(out);
    return 1;
  }
  out["decomposable"] = true;
  Json terms = Json::array();
  for (std::size_t i = 0; i < dfs.size(); ++i) {
    if ((*mu)[i] == 0) continue;
    Json t = Json::object();
    t["p"] = format_rational((*mu)[i]);
    t["weight"] = weight_to_json(m.space, dfs[i]);
    terms.push_back(std::move(t));
  }
  out["terms"] = std::move(terms);
  emit(out);
  return 0;
}

int run_morphism_check(const std::string& arg, bool strict) {
  Morphism f = load_morph(arg);
  MorphismClass cls = classify(f, strict);
  Json out = Json::object();
  out["valid"] = cls.valid;
  Json c = Json::object();
  c["test_preserving"] = cls.test_preserving;
  c["positive"] = cls.positive;
  c["outcome_preserving"] = cls.outcome_preserving;
  c["interpretation"] = cls.interpretation;
  c["quotient"] = cls.quotient;
  c["embedding"] = cls.embedding;
  out["classes"] = std::move(c);
  if (auto v = check_morphism(f, strict)) out["violation"] = violation_json(f.source.space, *v);
  emit(out);
  return cls.valid ? 0 : 1;
}

int run_pullback(const std::string& e_path, const std::string& q_path, bool strict) {
  Morphism e = load_morph(e_path);
  Morphism q = load_morph(q_path);
  emit(explanation_to_json(pullback_subquotient(e, q, strict)));
  return 0;
}

int run_compose(const std::string& first, const std::string& second, bool strict) {
  Explanation a = load_expl(first);
  Explanation b = load_expl(second);
  emit(explanation_to_json(compose_explanations(a, b, strict)));
  return 0;
}

int run_product(const std::string& a_path, const std::string& b_path) {
  ProductSpace ps = product_space(load_model(a_path).space, load_model(b_path).space);
  emit(model_to_json(ProbModel{ps.space, {}, std::nullopt}));
  return 0;
}

int run_ns_check(const std::string& arg) {
  JointDocument d = load_joint(arg);
  MarginalReport r = marginals_and_conditionals(d.product, d.weight);
  Json out = Json::object();
  if (r.signalling) {
    out["non_signalling"] = false;
    out["witness"] = signalling_json(d.product, *r.signalling);
    emit(out);
    return 1;
  }
  out["non_signalling"] = true;
  out["marginal_a"] = weight_to_json(d.product.part_a, r.marginal_a);
  out["marginal_b"] = weight_to_json(d.product.part_b, r.marginal_b);
  // Membership in the polytope cut out by the parts' own state sets; finer
  // than the marginal condition when the parts are restricted.
  Composite c = minimal_ns_composite(d.part_a, d.part_b);
  out["ns_member"] = state_member(c.ns, d.weight);
  emit(out);
  return 0;
}

int run_separable(const std::string& arg, bool state_mode) {
  JointDocument d = load_joint(arg);
  HullResult r;
  std::vector<Weight> gens;
  if (state_mode) {
    Composite c = minimal_ns_composite(d.part_a, d.part_b);
    r = is_separable_state(c, d.weight);
    for (const Weight& p : vertex_product_weights(c.product))
      if (preparable_joint(c, p)) gens.push_back(p);
  } else {
    r = is_separable_weight(d.product, d.weight);
    gens = vertex_product_weights(d.product);
  }
  Json out = Json::object();
  out["separable"] = r.member;
  if (r.member)
    out["combination"] = combination_json(d.product, gens, r.combination);
  else
    out["separator"] = separator_json(d.product.space, r.separator);
  emit(out);
  return r.member ? 0 : 1;
}

int run_composite_flags(const std::string& a_path, const std::string& b_path,
                        const std::vector<std::string>& totals) {
  Composite c = build_composite(a_path, b_path, totals);
  CompositeReport rep = check_composite(c);
  Json out = Json::object();
  out["valid"] = rep.valid;
  if (!rep.valid) {
    out["detail"] = rep.detail;
    emit(out);
    return 1;
  }
  out["locally_tomographic"] = rep.locally_tomographic;
  out["strong"] = rep.strong;
  if (rep.strong_failure)
    out["strong_failure"] = Json::array({rep.strong_failure->first, rep.strong_failure->second});
  emit(out);
  return 0;
}

int run_bell(const std::string& a_path, const std::string& b_path,
             const std::vector<std::string>& totals, const std::string& emb_path,
             std::size_t max_witnesses) {
  Composite c = build_composite(a_path, b_path, totals);
  BellVerdict v = emb_path.empty() ? check_bell_local(c)
                                   : check_bell_local_via(c, load_morph(emb_path));
  Json out = Json::object();
  out["local"] = v.local;
  if (v.local) {
    out["point_count"] = v.joints.size();
    emit(out);
    return 0;
  }
  out["witness_count"] = v.witnesses.size();
  Json ws = Json::array();
  for (std::size_t i = 0; i < v.witnesses.size() && i < max_witnesses; ++i)
    ws.push_back(bell_witness_json(c, v.witnesses[i]));
  out["witnesses"] = std::move(ws);
  emit(out);
  return 1;
}

int run_pr_box(const std::string& component) {
  PrBoxFixture pr = build_pr_box();
  const Weight* w = &pr.box;
  if (component == "one") w = &pr.component_one;
  if (component == "two") w = &pr.component_two;
  emit(joint_to_json(pr.composite.product, *w, pr.composite.part_a, pr.composite.part_b));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact finite probabilistic models: test spaces, weights, morphisms, composites"};
  app.require_subcommand(1);
  int rc = 0;

  std::string doc_path, second_path, emb_path;
  std::vector<std::string> totals;
  bool strict = false, state_mode = false;
  std::size_t generator = 0, max_witnesses = 8;
  std::string cover_emit = "projection", component = "box";

  auto* validate = app.add_subcommand("validate", "parse a document and report its kind");
  validate->add_option("doc", doc_path, "document path or -")->required();
  validate->callback([&] { rc = run_validate(doc_path); });

  auto* dfe = app.add_subcommand("df-enum", "enumerate dispersion-free weights of a model's space");
  dfe->add_option("model", doc_path, "model document")->required();
  dfe->callback([&] { rc = run_df_enum(doc_path); });

  auto* vert = app.add_subcommand("vertices", "vertices of the full probability-weight polytope");
  vert->add_option("model", doc_path, "model document")->required();
  vert->callback([&] { rc = run_vertices(doc_path); });

  auto* cov = app.add_subcommand("cover", "semiclassical cover of a model");
  cov->add_option("model", doc_path, "model document")->required();
  cov->add_option("--emit", cover_emit, "projection (morphism document) or model")
      ->check(CLI::IsMember({"projection", "model"}));
  cov->callback([&] { rc = run_cover(doc_path, cover_emit); });

  auto* bor = app.add_subcommand("borelify", "classical measure-theoretic form of a model");
  bor->add_option("model", doc_path, "model document")->required();
  bor->callback([&] { rc = run_borelify(doc_path); });

  auto* dec = app.add_subcommand("decompose",
                                 "write a state as a mixture of dispersion-free weights");
  dec->add_option("model", doc_path, "model document")->required();
  dec->add_option("--generator", generator, "index of the state to decompose");
  dec->callback([&] { rc = run_decompose(doc_path, generator); });

  auto* mc = app.add_subcommand("morphism-check", "validate and classify a morphism");
  mc->add_option("morphism", doc_path, "morphism document")->required();
  mc->add_flag("--strict", strict, "check every perspective event pair, not only tests");
  mc->callback([&] { rc = run_morphism_check(doc_path, strict); });

  auto* pb = app.add_subcommand("pullback",
                                "pull a quotient back along an embedding into a common target");
  pb->add_option("embedding", doc_path, "embedding morphism document")->required();
  pb->add_option("quotient", second_path, "quotient morphism document")->required();
  pb->add_flag("--strict", strict, "classify legs against every perspective event pair");
  pb->callback([&] { rc = run_pullback(doc_path, second_path, strict); });

  auto* ce = app.add_subcommand("compose-explanations",
                                "compose two explanations through the middle model");
  ce->add_option("first", doc_path, "explanation document")->required();
  ce->add_option("second", second_path, "explanation document")->required();
  ce->add_flag("--strict", strict, "classify legs against every perspective event pair");
  ce->callback([&] { rc = run_compose(doc_path, second_path, strict); });

  auto* prod = app.add_subcommand("product", "product test space of two models, as a model");
  prod->add_option("a", doc_path, "first part model")->required();
  prod->add_option("b", second_path, "second part model")->required();
  prod->callback([&] { rc = run_product(doc_path, second_path); });

  auto* ns = app.add_subcommand("ns-check", "marginals of a joint weight, or a signalling witness");
  ns->add_option("joint", doc_path, "joint document")->required();
  ns->callback([&] { rc = run_ns_check(doc_path); });

  auto* sep = app.add_subcommand("separable-check",
                                 "decompose a joint weight over product weights, or separate it");
  sep->add_option("joint", doc_path, "joint document")->required();
  sep->add_flag("--state", state_mode,
                "test as a state of the minimal composite (preparable products only)");
  sep->callback([&] { rc = run_separable(doc_path, state_mode); });

  auto* cf = app.add_subcommand("composite-flags", "validity, tomography and strength of a composite");
  cf->add_option("a", doc_path, "first part model")->required();
  cf->add_option("b", second_path, "second part model")->required();
  cf->add_option("--total", totals, "joint documents generating the total state set");
  cf->callback([&] { rc = run_composite_flags(doc_path, second_path, totals); });

  auto* bell = app.add_subcommand("bell-check", "certify Bell locality of a composite");
  bell->add_option("--parts", totals, "part model documents (exactly two)")
      ->required()
      ->expected(2);
  std::vector<std::string> bell_totals;
  bell->add_option("--total", bell_totals, "joint documents generating the total state set");
  bell->add_option("--embedding", emb_path, "classical embedding morphism for the cover");
  bell->add_option("--max-witnesses", max_witnesses, "cap on reported witnesses");
  bell->callback([&] { rc = run_bell(totals[0], totals[1], bell_totals, emb_path, max_witnesses); });

  auto* prb = app.add_subcommand("pr-box", "the two-box joint weight that signals nowhere");
  prb->add_option("--component", component, "box, one or two")
      ->check(CLI::IsMember({"box", "one", "two"}));
  prb->callback([&] { rc = run_pr_box(component); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const probmod::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
