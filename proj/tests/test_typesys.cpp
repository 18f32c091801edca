#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pglc/parser.hpp"
#include "pglc/pretty.hpp"
#include "pglc/typesys.hpp"

using namespace pglc;

namespace {

TypePtr synth_str(const std::string& term, const TypeCtx& ctx = {}) {
  return synth(ctx, parse_term_text(term));
}

void check_str(const std::string& term, const std::string& ty,
               const TypeCtx& ctx = {}) {
  check(ctx, parse_term_text(term), parse_type_text(ty));
}

std::string synth_pp(const std::string& term, const TypeCtx& ctx = {}) {
  return pp_type(synth_str(term, ctx));
}

TypeCtx ctx_of(std::initializer_list<std::pair<std::string, std::string>> gamma,
               std::initializer_list<std::pair<std::string, std::string>> delta = {}) {
  TypeCtx c;
  for (auto& [x, t] : gamma) c.gamma[x] = parse_type_text(t);
  for (auto& [x, t] : delta) c.delta[x] = parse_type_text(t);
  return c;
}

}  // namespace

TEST_CASE("literal polymorphism") {
  CHECK(synth_pp("5") == "Nat");
  CHECK(synth_pp("-3") == "Int");
  CHECK(synth_pp("1/3") == "Rat");
  CHECK_NOTHROW(check_str("5", "Int"));
  CHECK_NOTHROW(check_str("5", "Rat"));
  CHECK_NOTHROW(check_str("-3", "Rat"));
  CHECK_THROWS_AS(check_str("-3", "Nat"), TypeError);
  CHECK_THROWS_AS(check_str("1/3", "Int"), TypeError);

  TermPtr five = parse_term_text("5");
  TypeCtx c;
  check(c, five, ty_rat());
  CHECK(five->ty->k == TyKind::Rat);
}

TEST_CASE("arithmetic joins and promotions") {
  auto c = ctx_of({{"i", "Int"}, {"q", "Rat"}, {"n", "Nat"}});
  CHECK(synth_pp("1 + 1") == "Nat");
  CHECK(synth_pp("i + 1", c) == "Int");
  CHECK(synth_pp("q * 2", c) == "Rat");
  CHECK(synth_pp("0 - 1") == "Int");      // subtraction never stays in Nat
  CHECK(synth_pp("neg 5") == "Int");
  CHECK(synth_pp("q - 1", c) == "Rat");
  CHECK(synth_pp("1 / 2") == "Rat");
  CHECK(synth_pp("i / 1", c) == "Rat");
  CHECK(synth_pp("xor 5 3") == "Nat");
  CHECK(synth_pp("int 5") == "Int");
  CHECK(synth_pp("int n", c) == "Int");
  CHECK_THROWS_AS(synth_str("n - n", c), TypeError);   // needs int n
  CHECK_THROWS_AS(synth_str("neg n", c), TypeError);
  CHECK_THROWS_AS(synth_str("xor i 1", c), TypeError);
  CHECK_THROWS_AS(synth_str("1 + q + n - i + <1, 2>", c), TypeError);
}

TEST_CASE("functions and application") {
  CHECK(synth_pp("\\x : Nat. x + 1") == "Nat -> Nat");
  CHECK(synth_pp("(\\x : Nat. x + 1) 4") == "Nat");
  CHECK_NOTHROW(check_str("\\x. x", "Nat -> Nat"));
  CHECK_THROWS_AS(synth_str("\\x. x"), TypeError);
  CHECK_THROWS_AS(synth_str("5 5"), TypeError);
  CHECK_THROWS_AS(check_str("\\x : Int. x", "Nat -> Nat"), TypeError);

  TermPtr lam = parse_term_text("\\x. x");
  TypeCtx c;
  check(c, lam, parse_type_text("Nat -> Nat"));
  REQUIRE(lam->binder_ty);
  CHECK(lam->binder_ty->k == TyKind::Nat);
}

TEST_CASE("products sums and case") {
  CHECK(synth_pp("<1, -2>") == "Nat * Int");
  CHECK(synth_pp("fst <1, -2>") == "Nat");
  auto c = ctx_of({{"s", "Nat + Int"}});
  CHECK(synth_pp("case s of inl a => a + 1 | inr b => 7", c) == "Nat");
  CHECK_THROWS_AS(synth_str("case s of inl a => a | inr b => b", c), TypeError);
  CHECK_NOTHROW(check_str("inl 3", "Nat + Int"));
  CHECK_THROWS_AS(synth_str("inl 3"), TypeError);
  CHECK(synth_pp("case 3 of 0 => -1 | S m => int m") == "Int");
  TermPtr cs = parse_term_text("case s of inl a => 0 | inr b => 1");
  synth(ctx_of({{"s", "Nat + Int"}}), cs);
  CHECK(cs->binder_ty->k == TyKind::Nat);
  CHECK(cs->binder_ty2->k == TyKind::Int);
}

TEST_CASE("streams and guarded recursion") {
  CHECK(synth_pp("fix s : |> Str Nat. 0 :: s") == "Str Nat");
  auto c = ctx_of({{"xs", "Str Nat"}});
  CHECK(synth_pp("hd xs", c) == "Nat");
  CHECK(synth_pp("tl xs", c) == "|> Str Nat");
  CHECK(synth_pp("\\s : |> Str Nat. next [xs <- s] (hd xs)") ==
        "|> Str Nat -> |> Nat");
  CHECK_THROWS_AS(synth_str("fix s : Str Nat. 0 :: s"), TypeError);
  CHECK_THROWS_AS(synth_str("hd 5"), TypeError);
  CHECK_THROWS_AS(synth_str("next [x <- 5] x"), TypeError);

  TermPtr nx = parse_term_text("\\s : |> Str Nat. next [xs <- s] (hd xs)");
  TypeCtx c0;
  synth(c0, nx);
  REQUIRE(nx->a->ds.var_types.size() == 1);
  CHECK(nx->a->ds.var_types[0]->k == TyKind::Stream);
}

TEST_CASE("box and prev follow the constant discipline") {
  auto c = ctx_of({{"x", "Str Nat"}}, {{"k", "Nat"}});
  CHECK(synth_pp("box (k + 1)", c) == "[] Nat");
  CHECK_THROWS_AS(synth_str("box (hd x)", c), TypeError);  // x is not constant
  CHECK(synth_pp("let const j = 5 in box (j + j)") == "[] Nat");
  CHECK_THROWS_AS(synth_str("\\s : Str Nat. let const j = s in 0"), TypeError);
  CHECK(synth_pp("\\b : [] (|> Nat). let box y = b in prev y") ==
        "[] |> Nat -> Nat");
  CHECK_THROWS_AS(synth_str("\\y : |> Nat. prev y"), TypeError);
  CHECK(synth_pp("\\b : [] Str Nat. let box s = b in hd s") ==
        "[] Str Nat -> Nat");
  CHECK_THROWS_AS(synth_str("let box y = 5 in y"), TypeError);
}

TEST_CASE("distribution typing") {
  CHECK(synth_pp("bern 1/3") == "Dist Nat");
  CHECK(synth_pp("unif {1, 2, 3}") == "Dist Nat");
  CHECK(synth_pp("unif {-1, 1}") == "Dist Int");
  CHECK(synth_pp("mlet x = bern 1/2 in return (x + 1)") == "Dist Nat");
  CHECK(synth_pp("\\d : |> Dist Nat. swap d") == "|> Dist Nat -> Dist |> Nat");
  CHECK(synth_pp("return (fix s : |> Str Nat. 0 :: s)") == "Dist Str Nat");
  CHECK_THROWS_AS(synth_str("return (\\x : Nat. x)"), TypeError);  // not discrete
  CHECK_THROWS_AS(synth_str("bern 3/2"), TypeError);
  CHECK(synth_pp("unif {1, 1/2, 0}") == "Dist Rat");
  CHECK_THROWS_AS(synth_str("\\x : Nat. unif {x, 1}"), TypeError);  // literals only
  CHECK_THROWS_AS(synth_str("mlet x = 5 in return x"), TypeError);
  CHECK_THROWS_AS(synth_str("\\x : Dist (Nat -> Nat). 0"), TypeError);
  CHECK_THROWS_AS(synth_str("swap (bern 1/2)"), TypeError);
}

TEST_CASE("discrete and constant classification") {
  CHECK(is_discrete(parse_type_text("Str (Nat * Int)")));
  CHECK(is_discrete(parse_type_text("|> Str Rat")));
  CHECK_FALSE(is_discrete(parse_type_text("Nat -> Nat")));
  CHECK_FALSE(is_discrete(parse_type_text("[] Str Nat")));
  CHECK_FALSE(is_discrete(parse_type_text("Dist Nat")));

  CHECK(is_constant(parse_type_text("Nat -> Rat")));
  CHECK(is_constant(parse_type_text("[] Str Nat")));
  CHECK(is_constant(parse_type_text("Nat * (Int + Rat)")));
  CHECK_FALSE(is_constant(parse_type_text("Str Nat")));
  CHECK_FALSE(is_constant(parse_type_text("|> Nat")));
  CHECK_FALSE(is_constant(parse_type_text("Dist Nat")));
  CHECK_FALSE(is_constant(parse_type_text("Nat -> Str Nat")));
}

TEST_CASE("whole program with schematic definition") {
  std::string text =
      "def markov [C] : C -> [] (C -> Dist C) -> Dist Str C =\n"
      "  fix m. \\x. \\h.\n"
      "    let box step = h in\n"
      "    mlet z = step x in\n"
      "    mlet t = swap (m <*> next z <*> next h) in\n"
      "    return (x :: t)\n"
      "\n"
      "def walk : Dist Str Int =\n"
      "  markov@Int 0 (box (\\x : Int. mlet b = unif {-1, 1} in return (x + b)))\n";
  auto prog = parse_program_text(text);
  CHECK_NOTHROW(typecheck_program(*prog));

  TypeCtx ctx;
  ctx.prog = prog.get();
  CHECK(pp_type(synth(ctx, parse_term_text("markov@Int"))) ==
        "Int -> [] (Int -> Dist Int) -> Dist Str Int");
  CHECK_THROWS_AS(synth(ctx, parse_term_text("markov")), TypeError);
  CHECK_THROWS_AS(synth(ctx, parse_term_text("walk@Nat")), TypeError);
  CHECK(pp_type(synth(ctx, parse_term_text("walk"))) == "Dist Str Int");
}

TEST_CASE("program level errors") {
  CHECK_THROWS_AS(typecheck_program(*parse_program_text(
                      "def a : Nat = 1\n\ndef a : Nat = 2")),
                  TypeError);
  CHECK_THROWS_AS(typecheck_program(*parse_program_text(
                      "enum A = X | Y\n\nenum B = Y | Z")),
                  TypeError);
  CHECK_THROWS_AS(typecheck_program(*parse_program_text("def f : Foo = 1")),
                  TypeError);
  CHECK_THROWS_AS(typecheck_program(*parse_program_text(
                      "def f : Nat -> Nat = \\x. x + x\n\ndef g : Nat = f 1 2")),
                  TypeError);
  CHECK_NOTHROW(typecheck_program(*parse_program_text(
      "enum Coin = H | T\n\ndef pick : Dist Coin = unif {H, T}")));
}

TEST_CASE("formula well-formedness") {
  auto c = ctx_of({{"x", "Int"}, {"xs", "Str Nat"}, {"ys", "Str Nat"},
                   {"d", "Dist Nat"}, {"e", "Dist Int"}, {"s", "|> Str Nat"}});
  CHECK_NOTHROW(typecheck_formula(c, parse_formula_text("x = -1 \\/ x <= 0")));
  CHECK_NOTHROW(typecheck_formula(c, parse_formula_text(
                                         "forall y : Int. x <= y => x <= y")));
  CHECK_NOTHROW(typecheck_formula(
      c, parse_formula_text("dia [a <- d, b <- e] int a <= b")));
  CHECK_NOTHROW(typecheck_formula(c, parse_formula_text("dia [a <- d] a = 0")));
  CHECK_NOTHROW(typecheck_formula(
      c, parse_formula_text("all2 a <- xs, b <- ys. a = b")));
  CHECK_NOTHROW(typecheck_formula(
      c, parse_formula_text("all[2,1] a <- xs, b <- ys. a <= b")));
  CHECK_NOTHROW(
      typecheck_formula(c, parse_formula_text("|> [t <- tl xs] hd t = 0")));
  CHECK_NOTHROW(typecheck_formula(c, parse_formula_text("hd xs = hd ys")));

  FormulaPtr eq = parse_formula_text("x = 1");
  typecheck_formula(c, eq);
  REQUIRE(eq->rel_ty);
  CHECK(eq->rel_ty->k == TyKind::Int);

  FormulaPtr st = parse_formula_text("xs = ys");
  typecheck_formula(c, st);
  CHECK(st->rel_ty->k == TyKind::Stream);

  CHECK_THROWS_AS(typecheck_formula(c, parse_formula_text("x = xs")), TypeError);
  CHECK_THROWS_AS(typecheck_formula(c, parse_formula_text("xs <= ys")), TypeError);
  CHECK_THROWS_AS(typecheck_formula(c, parse_formula_text("dia [a <- x] a = 0")),
                  TypeError);
  CHECK_THROWS_AS(
      typecheck_formula(c, parse_formula_text("all a <- d. a = 0")), TypeError);
  CHECK_THROWS_AS(
      typecheck_formula(c, parse_formula_text("all[0,1] a <- xs, b <- ys. a = b")),
      TypeError);
  CHECK_THROWS_AS(typecheck_formula(c, parse_formula_text("y = 0")), TypeError);
  // box clears the ordinary context
  CHECK_THROWS_AS(typecheck_formula(c, parse_formula_text("[] x = 0")), TypeError);
  TypeCtx cd = ctx_of({}, {{"k", "Int"}});
  CHECK_NOTHROW(typecheck_formula(cd, parse_formula_text("[] k = 0")));
}

TEST_CASE("constant formulas") {
  TypeCtx cd = ctx_of({}, {{"k", "Int"}, {"b", "[] Str Nat"}});
  auto fc = [&](const std::string& s) {
    return formula_constant(cd, parse_formula_text(s));
  };
  CHECK(fc("k = 0"));
  CHECK(fc("k = 0 /\\ k <= 1"));
  CHECK(fc("forall y : Int. y = k"));
  CHECK(fc("[] (|> true)"));
  CHECK(fc("not k = 1 => false"));
  CHECK_FALSE(fc("|> true"));
  CHECK_FALSE(fc("forall s : Str Nat. hd s = 0"));
  TypeCtx cg = ctx_of({{"x", "Int"}});
  CHECK_FALSE(formula_constant(cg, parse_formula_text("x = 0")));  // x not in delta
  TypeCtx cs = ctx_of({}, {{"u", "[] Str Nat"}});
  CHECK_NOTHROW(typecheck_formula(cs, parse_formula_text(
                                          "exists y : [] Str Nat. u = y")));
  CHECK_FALSE(formula_constant(
      cs, parse_formula_text("forall s : Str Nat. s = s")));
}
