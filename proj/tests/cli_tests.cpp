#include <catch2/catch_amalgamated.hpp>

// End-to-end runs of the command-line tool against the fixture documents.
// The binary and fixture directory arrive through the environment so the
// tests work from any build layout.

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <sys/wait.h>

namespace {

using Json = nlohmann::json;

std::string cli() {
  const char* c = std::getenv("PROBMOD_CLI");
  REQUIRE(c != nullptr);
  return c;
}

std::string fix(const std::string& name) {
  const char* f = std::getenv("PROBMOD_FIXTURES");
  REQUIRE(f != nullptr);
  return std::string(f) + "/" + name;
}

struct RunResult {
  int status = -1;
  std::string out;
};

RunResult run_shell(const std::string& command) {
  FILE* p = popen(command.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

RunResult run_cli(const std::string& args) { return run_shell(cli() + " " + args); }

Json parsed(const RunResult& r) { return Json::parse(r.out); }

}  // namespace

TEST_CASE("validate reports document kinds") {
  auto model = run_cli("validate " + fix("square.model"));
  REQUIRE(model.status == 0);
  Json m = parsed(model);
  CHECK(m["kind"] == "model");
  CHECK(m["outcome_count"] == 4);
  CHECK(m["test_count"] == 2);
  CHECK(m["state_count"] == 4);

  CHECK(parsed(run_cli("validate " + fix("fold.morphism")))["kind"] == "morphism");
  CHECK(parsed(run_cli("validate " + fix("single_by_square.explanation")))["kind"] ==
        "explanation");
  Json joint = parsed(run_cli("validate " + fix("corr.joint")));
  CHECK(joint["kind"] == "joint");
  CHECK(joint["nonzero_count"] == 2);
}

TEST_CASE("documents with numeric literals are refused") {
  auto r = run_shell(cli() + " validate " + fix("bad_float.model") + " 2>&1");
  CHECK(r.status == 2);
  CHECK(r.out.find("numeric literals") != std::string::npos);
}

TEST_CASE("dispersion-free enumeration matches the known counts") {
  Json tri = parsed(run_cli("df-enum " + fix("triangle.model")));
  CHECK(tri["count"] == 0);
  CHECK(tri["weights"].empty());

  Json sq = parsed(run_cli("df-enum " + fix("square.model")));
  CHECK(sq["count"] == 4);
  for (const auto& w : sq["weights"])
    for (const auto& [id, v] : w.items()) CHECK(v == "1");
}

TEST_CASE("vertex enumeration on the odd cycle finds the single center") {
  Json tri = parsed(run_cli("vertices " + fix("triangle.model")));
  REQUIRE(tri["count"] == 1);
  CHECK(tri["vertices"][0]["a"] == "1/2");
  CHECK(tri["vertices"][0]["b"] == "1/2");
  CHECK(tri["vertices"][0]["c"] == "1/2");
}

TEST_CASE("reports are byte-stable across reruns") {
  auto once = run_cli("pr-box");
  auto again = run_cli("pr-box");
  REQUIRE(once.status == 0);
  CHECK(once.out == again.out);
  // Canonical form: parsing and re-dumping reproduces the bytes.
  CHECK(parsed(once).dump(2) + "\n" == once.out);

  auto v1 = run_cli("validate " + fix("triangle.model"));
  auto v2 = run_cli("validate " + fix("triangle.model"));
  CHECK(v1.out == v2.out);
}

TEST_CASE("the box weight passes the marginal check that its components fail") {
  auto good = run_shell(cli() + " pr-box | " + cli() + " ns-check -");
  REQUIRE(good.status == 0);
  Json g = parsed(good);
  CHECK(g["non_signalling"] == true);
  CHECK(g["ns_member"] == true);
  for (const auto& [id, p] : g["marginal_a"].items()) CHECK(p == "1/2");

  auto badone = run_shell(cli() + " pr-box --component one | " + cli() + " ns-check -");
  CHECK(badone.status == 1);
  Json b = parsed(badone);
  CHECK(b["non_signalling"] == false);
  CHECK(b["witness"].contains("outcome"));
  CHECK(b["witness"]["value_first"] != b["witness"]["value_second"]);
}

TEST_CASE("separability of the box fails with a certificate") {
  auto r = run_shell(cli() + " pr-box | " + cli() + " separable-check -");
  CHECK(r.status == 1);
  Json j = parsed(r);
  CHECK(j["separable"] == false);
  CHECK(j["separator"].contains("normal"));
  CHECK(j["separator"].contains("offset"));

  auto corr = run_cli("separable-check " + fix("corr.joint"));
  CHECK(corr.status == 0);
  Json c = parsed(corr);
  CHECK(c["separable"] == true);
  CHECK(c["combination"].size() >= 2);

  auto state = run_cli("separable-check --state " + fix("corr.joint"));
  CHECK(state.status == 0);
  CHECK(parsed(state)["separable"] == true);
}

TEST_CASE("the hand-built signalling joint is caught on the far marginal") {
  auto r = run_cli("ns-check " + fix("signal.joint"));
  CHECK(r.status == 1);
  Json j = parsed(r);
  CHECK(j["non_signalling"] == false);
  CHECK(j["witness"]["marginal_of"] == "a");
  CHECK(j["witness"]["outcome"] == "c");
}

TEST_CASE("morphism classification through documents") {
  Json fold = parsed(run_cli("morphism-check " + fix("fold.morphism")));
  CHECK(fold["valid"] == true);
  CHECK(fold["classes"]["quotient"] == true);

  Json diag = parsed(run_cli("morphism-check " + fix("diag.morphism")));
  CHECK(diag["valid"] == true);
  CHECK(diag["classes"]["embedding"] == true);
}

TEST_CASE("cover projection pipes into the morphism checker") {
  auto r = run_shell(cli() + " cover " + fix("square.model") + " | " + cli() +
                     " morphism-check -");
  REQUIRE(r.status == 0);
  Json j = parsed(r);
  CHECK(j["valid"] == true);
  CHECK(j["classes"]["quotient"] == true);

  auto model = run_shell(cli() + " cover " + fix("square.model") + " --emit model | " + cli() +
                         " df-enum -");
  REQUIRE(model.status == 0);
  CHECK(parsed(model)["count"] == 4);
}

TEST_CASE("classical form succeeds on the square and refuses twin singleton tests") {
  Json ok = parsed(run_cli("borelify " + fix("square.model")));
  CHECK(ok["ok"] == true);
  CHECK(ok["point_count"] == 4);
  CHECK(ok["measures"].size() == 4);

  auto bad = run_cli("borelify " + fix("two_singletons.model"));
  CHECK(bad.status == 1);
  Json b = parsed(bad);
  CHECK(b["ok"] == false);
  CHECK(b["witness"].contains("test_a"));
}

TEST_CASE("mixture decomposition over dispersion-free weights") {
  Json sq = parsed(run_cli("decompose " + fix("square.model") + " --generator 0"));
  CHECK(sq["decomposable"] == true);
  REQUIRE(sq["terms"].size() == 1);
  CHECK(sq["terms"][0]["p"] == "1");

  auto tri = run_cli("decompose " + fix("triangle.model"));
  CHECK(tri.status == 1);
  CHECK(parsed(tri)["decomposable"] == false);
}

TEST_CASE("pullback and composition of explanations through documents") {
  auto pb = run_cli("pullback " + fix("id_single.morphism") + " " + fix("fold.morphism"));
  REQUIRE(pb.status == 0);
  Json j = parsed(pb);
  CHECK(j.contains("apex"));
  CHECK(j["quotient"]["map"] == Json::parse(R"({"a":["u"],"b":["v"],"c":["u"],"d":["v"]})"));

  auto comp = run_cli("compose-explanations " + fix("single_by_square.explanation") + " " +
                      fix("square_self.explanation"));
  REQUIRE(comp.status == 0);
  Json c = parsed(comp);
  CHECK(c["quotient"]["target"]["outcomes"] == Json::array({"u", "v"}));
  CHECK(c["embedding"]["target"]["outcomes"] == Json::array({"a", "b", "c", "d"}));
}

TEST_CASE("product spaces pipe into other commands") {
  auto r = run_shell(cli() + " product " + fix("single.model") + " " + fix("single.model") +
                     " | " + cli() + " df-enum -");
  REQUIRE(r.status == 0);
  CHECK(parsed(r)["count"] == 4);
}

TEST_CASE("composite flags through documents") {
  Json minimal = parsed(run_cli("composite-flags " + fix("single.model") + " " +
                                fix("single.model")));
  CHECK(minimal["valid"] == true);
  CHECK(minimal["locally_tomographic"] == true);
  CHECK(minimal["strong"] == true);
}

TEST_CASE("locality verdicts through documents") {
  auto local = run_cli("bell-check --parts " + fix("single.model") + " " + fix("single.model"));
  REQUIRE(local.status == 0);
  Json l = parsed(local);
  CHECK(l["local"] == true);
  CHECK(l["point_count"] == 4);

  auto box = run_cli("bell-check --parts " + fix("square.model") + " " + fix("square.model"));
  REQUIRE(box.status == 1);
  Json b = parsed(box);
  CHECK(b["local"] == false);
  CHECK(b["witness_count"] == 240);
  REQUIRE(b["witnesses"].size() == 8);
  for (const auto& w : b["witnesses"]) {
    CHECK(w["kind"] == "not-product");
    CHECK(w.contains("signalling"));
  }
}

TEST_CASE("usage and input errors exit with status two") {
  CHECK(run_shell(cli() + " df-enum 2>/dev/null").status == 2);
  CHECK(run_shell(cli() + " no-such-command 2>/dev/null").status == 2);
  CHECK(run_shell(cli() + " df-enum /nonexistent.model 2>/dev/null").status == 2);
  // A joint fed where a model is expected fails key validation.
  CHECK(run_shell(cli() + " df-enum " + fix("corr.joint") + " 2>/dev/null").status == 2);
  // Deep precondition failures are input errors as well.
  CHECK(run_shell(cli() + " pullback " + fix("fold.morphism") + " " + fix("fold.morphism") +
                  " 2>/dev/null")
            .status == 2);
}
