#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <string>

#include "pglc/lexer.hpp"
#include "pglc/prelude.hpp"
#include "pglc/proof.hpp"

using namespace pglc;

namespace {

const char* kProg =
    "enum Coin = H | T\n"
    "def two : Nat = 2\n"
    "def flip : Dist Coin = unif {H, T}\n"
    "def sure : Dist Coin = return H\n";

std::shared_ptr<Program> fresh_prog() { return load_program(kProg); }

struct Run {
  ProofScript sc;
  CheckReport rep;
};

Run run_one(const std::string& script) {
  Run r;
  auto prog = fresh_prog();
  r.sc = parse_proof_script_text(script, prog);
  REQUIRE(r.sc.thms.size() >= 1);
  r.rep = check_proof(r.sc.thms[0].root, r.sc.thms[0].goal, *prog);
  return r;
}

}  // namespace

TEST_CASE("propositional skeleton") {
  CHECK(run_one("theorem t ghol shows true ; proof TOP_I;").rep.fully_discharged());
  CHECK(run_one("theorem t ghol hyp [1 = 1] shows 1 = 1 /\\ true ;\n"
                "proof AND_I { AX_U; TOP_I; }")
            .rep.fully_discharged());
  CHECK(run_one("theorem t ghol shows 1 = 2 => 1 = 2 ; proof IMP_I { AX_U; }")
            .rep.fully_discharged());
  CHECK(run_one("theorem t ghol shows two = 2 ; proof CONV;").rep.fully_discharged());
}

TEST_CASE("hypothesis must actually be present") {
  Run r = run_one("theorem t ghol hyp [1 = 1] shows 1 = 2 ; proof AX_U;");
  CHECK_FALSE(r.rep.accepted);
  CHECK(r.rep.error.find("AX_U") != std::string::npos);
}

TEST_CASE("unit distributions couple pointwise") {
  CHECK(run_one("theorem t ghol shows dia [a <- return 1, b <- return 1] a = b ;\n"
                "proof UNIT2 { CONV; }")
            .rep.fully_discharged());
}

TEST_CASE("unary abstraction") {
  Run r = run_one(
      "theorem t uhol left \\x : Nat. x : Nat -> Nat\n"
      "shows forall x : Nat. true => r x = x ;\n"
      "proof U_ABS [phi = r = x] { U_VAR { CONV; } }");
  CHECK(r.rep.fully_discharged());
}

TEST_CASE("assume is reported") {
  Run r = run_one("theorem t ghol shows 1 = 2 ; proof assume;");
  CHECK(r.rep.accepted);
  CHECK(r.rep.assumptions.size() == 1);
  CHECK_FALSE(r.rep.fully_discharged());
}

TEST_CASE("semantic leaf enumerates bounded domains") {
  Run r = run_one(
      "theorem t ghol shows forall n : Nat in {0 .. 3}. n <= 3 ;\n"
      "proof semantic [depth = 2];");
  CHECK(r.rep.fully_discharged());
  Run bad = run_one(
      "theorem t ghol shows forall n : Nat in {0 .. 3}. n <= 2 ;\n"
      "proof semantic [depth = 2];");
  CHECK_FALSE(bad.rep.accepted);
}

TEST_CASE("coupling by direct flow") {
  Run ok = run_one(
      "theorem t rhol left flip : Dist Coin right flip : Dist Coin\n"
      "shows dia [a <- r1, b <- r2] a = b ;\n"
      "proof COUPLING { strassen [depth = 2]; }");
  CHECK(ok.rep.fully_discharged());
  Run bad = run_one(
      "theorem t rhol left flip : Dist Coin right sure : Dist Coin\n"
      "shows dia [a <- r1, b <- r2] a = b ;\n"
      "proof COUPLING { strassen [depth = 2]; }");
  CHECK_FALSE(bad.rep.accepted);
}

TEST_CASE("parse errors") {
  auto prog = fresh_prog();
  CHECK_THROWS_AS(parse_proof_script_text(
                      "theorem t ghol shows true ; proof FROB;", prog),
                  ParseError);
  CHECK_THROWS_AS(parse_proof_script_text(
                      "theorem t ghol shows true ; proof TOP_I { TOP_I; }", prog),
                  ParseError);
  CHECK_THROWS_AS(parse_proof_script_text(
                      "theorem t ghol shows true ; proof AND_I [frob = 1] { TOP_I; TOP_I; }",
                      prog),
                  ParseError);
}
