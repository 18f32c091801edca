#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pglc/evalsem.hpp"
#include "pglc/parser.hpp"
#include "pglc/prelude.hpp"
#include "pglc/pretty.hpp"
#include "pglc/typesys.hpp"
#include "pglc/value.hpp"

using namespace pglc;

TEST_CASE("built-in declarations load on their own") {
  auto p = load_program("");
  const Decl* mk = p->find("markov");
  REQUIRE(mk != nullptr);
  CHECK(mk->from_prelude);
  CHECK(mk->tyvars == std::vector<std::string>{"C"});
  CHECK(pp_type(mk->declared_ty) == "C -> [] (C -> Dist C) -> Dist Str C");
  REQUIRE(p->find("ones") != nullptr);
  CHECK(pp_type(p->find("ones")->declared_ty) == "[] Str Nat");
  for (const char* ax : {"all_cons", "all2_cons", "all21_cons"}) {
    const Decl* d = p->find(ax);
    REQUIRE(d != nullptr);
    CHECK(d->k == DeclKind::Axiom);
    CHECK(d->from_prelude);
  }
  CHECK(p->find("all_cons")->fmetas == std::vector<std::pair<std::string, int>>{{"P", 1}});
  CHECK(p->find("all21_cons")->fmetas == std::vector<std::pair<std::string, int>>{{"P", 2}});
}

TEST_CASE("constant stream of ones unboxes to a stream prefix") {
  auto p = load_program("def u : Str Nat = let box s = ones in s\n");
  EvalCtx cx{p.get()};
  CHECK(value_sexpr(eval_closed(cx, tm_var("u"), 3)) == "(str 1 1 1 1)");
  CHECK(value_sexpr(eval_closed(cx, tm_var("u"), 0)) == "(str 1)");
}

TEST_CASE("markov is available to user programs") {
  auto p = load_program(
      "def walk : Dist Str Int =\n"
      "  markov@Int 0 (box (\\x : Int. mlet b = unif {-1, 1} in return (x + b)))\n");
  EvalCtx cx{p.get()};
  CHECK(value_sexpr(eval_closed(cx, tm_var("walk"), 1)) ==
        "(dist ((str 0 -1) 1/2) ((str 0 1) 1/2))");
}

TEST_CASE("pointwise stream axioms instantiate") {
  auto p = load_program("");
  const Decl* ax = p->find("all_cons");
  Parser body_p("z <= 1");
  auto body = body_p.parse_formula();
  auto inst = subst_pred_formula(ax->formula, "P", {"z"}, body);
  auto s = pp_formula(inst);
  CHECK(s.find("n <= 1") != std::string::npos);
  CHECK(s.find("all v <- n :: xs. v <= 1") != std::string::npos);
  CHECK(s.find("P(") == std::string::npos);
}

TEST_CASE("redefining a built-in name is rejected") {
  CHECK_THROWS_AS(load_program("def ones : Nat = 1\n"), TypeError);
}
