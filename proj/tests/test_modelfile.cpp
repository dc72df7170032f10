#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "horiforge/modelfile.hpp"
#include "horiforge/report.hpp"

using namespace hf;

namespace {

const char* kT3 = R"(# T^3 with k = 1 units of flux vs the nilmanifold dual
maxdeg 6
gen x1 1
gen x2 1
bundle A d=0
bundle Ahat d=x1*x2
flux h3=0 Fhat=x1*x2
)";

const char* kModules = R"(maxdeg 6
gen x1 1
gen x2 1
gen u 2
gen v 2
gen c 1 d=u
module E rank=2 B=u roots=v, u+x1*x2
module E0 rank=2 B=u roots=0, 2*u
module Ec rank=1 B=v conn=[[c]]
)";

}  // namespace

TEST_CASE("t3 pair parses and satisfies flux duality") {
  auto m = parse_model_text<Exact>(kT3);
  REQUIRE(m.pair.has_value());
  CHECK(m.algebra->generator_count() == 4);
  CHECK(m.algebra->max_degree() == 6);
  CHECK(flux_duality_holds(*m.pair));
  CHECK(m.pair->F.is_zero());
  int ix1 = m.algebra->index_of("x1"), ix2 = m.algebra->index_of("x2");
  auto x1 = Form<Exact>::generator(m.algebra, ix1);
  auto x2 = Form<Exact>::generator(m.algebra, ix2);
  CHECK(m.pair->Fhat == x1 * x2);

  // same text parses over complex coefficients
  auto mc = parse_model_text<Cx>(kT3);
  CHECK(flux_duality_holds(*mc.pair));
}

TEST_CASE("module stanzas: roots, connections, declaration order") {
  auto m = parse_model_text<Exact>(kModules);
  CHECK_FALSE(m.pair.has_value());
  REQUIRE(m.modules.size() == 3);
  CHECK(m.modules[0].first == "E");
  CHECK(m.modules[1].first == "E0");
  const auto* E = m.find_module("E");
  const auto* E0 = m.find_module("E0");
  REQUIRE(E != nullptr);
  REQUIRE(E0 != nullptr);
  CHECK(E->rank == 2);
  CHECK(E->diagonal());
  int iu = m.algebra->index_of("u");
  CHECK(E->B == Form<Exact>::generator(m.algebra, iu));
  CHECK(E0->roots[0].is_zero());
  CHECK(E0->roots[1] == Form<Exact>::generator(m.algebra, iu).scaled(Exact(2)));

  const auto* Ec = m.find_module("Ec");
  REQUIRE(Ec != nullptr);
  CHECK_FALSE(Ec->diagonal());
  // curvature of conn=[[c]] is diag(u)
  CHECK(Ec->curvature_matrix().at(0, 0) == Form<Exact>::generator(m.algebra, iu));
  CHECK(m.find_module("nope") == nullptr);
}

TEST_CASE("literals: rationals, imaginary parts, signs, parentheses") {
  auto m = parse_model_text<Exact>(
      "maxdeg 4\ngen u 2\nmodule E rank=1 B=0 roots=(1/2+3i)*u - u*1/4\n");
  auto u = Form<Exact>::generator(m.algebra, m.algebra->index_of("u"));
  Exact want = Exact::from_ratio(1, 4) + Exact(GaussRat(0, 3));
  CHECK(m.find_module("E")->roots[0] == u.scaled(want));

  auto mc = parse_model_text<Cx>(
      "maxdeg 4\ngen u 2\nmodule E rank=1 B=0 roots=-2i*u\n");
  CHECK(mc.find_module("E")->roots[0] ==
        Form<Cx>::generator(mc.algebra, 0).scaled(Cx{0, -2}));
}

TEST_CASE("parse errors carry line and column") {
  auto expect_err = [](const char* text, int line) {
    try {
      parse_model_text<Exact>(text);
      FAIL_CHECK("expected ParseError for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.line == line);
      CHECK(e.col >= 1);
    }
  };
  expect_err("gen x 1\n", 1);                                  // missing maxdeg
  expect_err("maxdeg 0\n", 1);                                 // bad bound
  expect_err("maxdeg 4\ngen x 1 d=y\n", 2);                    // unknown generator
  expect_err("maxdeg 4\ngen x 1\ngen x 1\n", 3);               // duplicate name
  expect_err("maxdeg 4\ngen i 1\n", 2);                        // reserved name
  expect_err("maxdeg 4\nwibble 3\n", 2);                       // unknown keyword
  expect_err("maxdeg 4\ngen u 2\nmodule E rank=2 B=0 roots=u\n", 3);  // rank
  expect_err("maxdeg 4\ngen x 1\nmodule E rank=1 B=0 roots=x\n", 3);  // odd root
  expect_err("maxdeg 4\ngen u 2\nmodule E rank=1 B=0 conn=[[u]]\n", 3);  // degree
  expect_err("maxdeg 4\nbundle A d=0\n", 1);                   // lone bundle
  expect_err("maxdeg 4\ngen u 2 d=\n", 2);                     // empty expression
  expect_err("maxdeg 4\ngen u 2\ngen q 1 d=u u\n", 3);         // trailing input
  expect_err("maxdeg 4\n%\n", 2);                              // bad character

  // Fhat must agree with the declared bundle differential
  expect_err(
      "maxdeg 6\ngen x1 1\ngen x2 1\nbundle A d=0\nbundle Ahat d=x1*x2\n"
      "flux h3=0 Fhat=2*x1*x2\n",
      6);
}

TEST_CASE("flux consistency is validated through the pair constructor") {
  // dh3 + Fhat /\ F != 0 -> rejected
  CHECK_THROWS_AS(parse_model_text<Exact>(
                      "maxdeg 6\ngen u 2\ngen w 1 d=u\nbundle A d=u\n"
                      "bundle Ahat d=u\nflux h3=u*w Fhat=u\n"),
                  ParseError);
}

TEST_CASE("report: verdict, sorting, json round trip") {
  CheckReport rep;
  rep.suite = "demo";
  rep.add("b-second", 1e-12, 1e-9, 3.0);
  rep.add("a-first", 2e-9, 1e-9, 1.5);
  rep.add({"c-gate", CheckStatus::Refused, 0, 0, 0.5, "anomaly gate"});
  CHECK_FALSE(rep.passed());
  CHECK(rep.exit_code() == 1);

  auto j = rep.to_json();
  CHECK(j["version"] == kReportVersion);
  CHECK(j["verdict"] == "fail");
  CHECK(j["checks"][0]["name"] == "a-first");
  CHECK(j["checks"][0]["status"] == "fail");
  CHECK(j["checks"][2]["note"] == "anomaly gate");

  auto back = report_from_json(j);
  CHECK(back.suite == "demo");
  CHECK(back.records.size() == 3);
  CHECK(back.to_json() == j);

  CheckReport ok;
  ok.suite = "gates";
  ok.add({"gate", CheckStatus::Refused, 0, 0, 0, "hypothesis violated"});
  ok.add({"skip", CheckStatus::Skipped, 0, 0, 0, "resampling exhausted"});
  CHECK(ok.passed());  // refused/skipped do not fail a suite
}
