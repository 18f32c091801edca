#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pglc/evalsem.hpp"
#include "pglc/parser.hpp"
#include "pglc/pretty.hpp"
#include "pglc/typesys.hpp"

using namespace pglc;

namespace {

std::string pp_of(const std::string& s) { return pp_term(parse_term_text(s)); }

std::string norm_pp(const std::string& s, NormOpts o = {}, const Program* prog = nullptr) {
  return pp_term(normalize(parse_term_text(s), prog, o));
}

auto load(const std::string& src) {
  auto p = parse_program_text(src);
  elaborate_program(*p);
  typecheck_program(*p);
  return p;
}

ValuePtr run(const Program& p, const std::string& name, int stage,
             long long fuel = 1000000) {
  EvalCtx cx{&p, fuel};
  return eval_closed(cx, tm_var(name), stage);
}

const char* kProgram =
    "enum Coin = H | T\n"
    "\n"
    "def markov [C] : C -> [] (C -> Dist C) -> Dist Str C =\n"
    "  fix m. \\x. \\h.\n"
    "    let box step = h in\n"
    "    mlet z = step x in\n"
    "    mlet t = swap (m <*> next z <*> next h) in\n"
    "    return (x :: t)\n"
    "\n"
    "def walk : Dist Str Int =\n"
    "  markov@Int 0 (box (\\x : Int. mlet b = unif {-1, 1} in return (x + b)))\n"
    "\n"
    "def iter : (Rat -> Rat) -> Rat -> Str Rat =\n"
    "  \\f. fix g. \\x. x :: (g <*> next (f x))\n"
    "\n"
    "def sqrts : Str Rat = iter (\\a. (a + 2 / a) / 2) 2\n"
    "\n"
    "def smap [C] : [] (C -> C) -> Str C -> Str C =\n"
    "  \\h. let box f = h in fix g. \\xs. f (hd xs) :: (g <*> tl xs)\n"
    "\n"
    "def nats : Str Nat = fix s. 0 :: (next (smap@Nat (box (\\v : Nat. S v))) <*> s)\n"
    "\n"
    "def ones : Str Nat = fix s. 1 :: s\n"
    "\n"
    "def flip : Dist Nat = bern 1/3\n"
    "\n"
    "def toss : Dist Coin = unif {H, T}\n"
    "\n"
    "def delayed : Nat = prev (next 21)\n"
    "\n"
    "def through : Nat = (\\b : [] Nat. let box u = b in u) (box 42)\n"
    "\n"
    "def kconst : Nat = let const c = 3 + 4 in c\n"
    "\n"
    "def swapped : Dist |> Nat = swap (next flip)\n";

}  // namespace

TEST_CASE("free variables and substitution") {
  CHECK(free_vars(parse_term_text("\\x. x + y")) == std::set<std::string>{"y"});
  CHECK(free_vars(parse_term_text("next [a <- t] (a + b)")) ==
        std::set<std::string>{"t", "b"});
  CHECK(free_vars(parse_term_text("mlet a = d in return a")) ==
        std::set<std::string>{"d"});

  // shadowed occurrences are untouched
  auto idt = subst_term(parse_term_text("\\x. x"), "x", parse_term_text("5"));
  CHECK(alpha_eq_term(idt, parse_term_text("\\x. x")));

  // capture forces a rename of the binder
  auto cap = subst_term(parse_term_text("\\y. x"), "x", parse_term_text("y"));
  CHECK(alpha_eq_term(cap, parse_term_text("\\q. y")));
  CHECK_FALSE(alpha_eq_term(cap, parse_term_text("\\y. y")));

  auto both = subst_many(parse_term_text("x + y"),
                         {{"x", parse_term_text("y")}, {"y", parse_term_text("x")}});
  CHECK(pp_term(both) == "y + x");
}

TEST_CASE("alpha equality") {
  CHECK(alpha_eq_term(parse_term_text("\\x. x"), parse_term_text("\\y. y")));
  CHECK(alpha_eq_term(parse_term_text("\\x. x + z"), parse_term_text("\\y. y + z")));
  CHECK_FALSE(alpha_eq_term(parse_term_text("\\x. x + z"), parse_term_text("\\y. y + w")));
  CHECK(alpha_eq_term(parse_term_text("next [a <- t] (a + 1)"),
                      parse_term_text("next [c <- t] (c + 1)")));
  CHECK_FALSE(alpha_eq_term(parse_term_text("next [a <- t] (a + 1)"),
                            parse_term_text("next [a <- u] (a + 1)")));
  CHECK(alpha_eq_term(parse_term_text("fix s. 0 :: s"), parse_term_text("fix r. 0 :: r")));

  // numeric literals compare by value across literal kinds
  CHECK(alpha_eq_term(parse_term_text("2"), tm_rat(Rat(2))));
  CHECK(alpha_eq_term(tm_int(3), parse_term_text("3")));
  CHECK_FALSE(alpha_eq_term(parse_term_text("2"), parse_term_text("3")));

  CHECK(alpha_eq_formula(parse_formula_text("forall x : Nat. x = x"),
                         parse_formula_text("forall y : Nat. y = y")));
  CHECK_FALSE(alpha_eq_formula(parse_formula_text("forall x : Nat. x = x"),
                               parse_formula_text("forall x : Int. x = x")));
  CHECK(alpha_eq_formula(parse_formula_text("all v <- s. v <= 3"),
                         parse_formula_text("all w <- s. w <= 3")));
}

TEST_CASE("normalization of redexes") {
  CHECK(norm_pp("(\\x. x + x) 3") == "6");
  CHECK(norm_pp("fst <1, 2>") == "1");
  CHECK(norm_pp("snd <1, 2>") == "2");
  CHECK(norm_pp("hd (0 :: xs)") == "0");
  CHECK(norm_pp("tl (0 :: xs)") == "xs");
  CHECK(norm_pp("case inl 3 of inl a => a + 1 | inr b => b") == "4");
  CHECK(norm_pp("case inr 9 of inl a => a + 1 | inr b => b") == "9");
  CHECK(norm_pp("case 2 of 0 => 9 | S k => k") == "1");
  CHECK(norm_pp("case 0 of 0 => 9 | S k => k") == "9");
  CHECK(norm_pp("case S n of 0 => 9 | S k => k") == "n");
  CHECK(norm_pp("prev (next (f 1))") == "f 1");
  CHECK(norm_pp("let box u = box (\\v. v) in u 5") == "5");
  CHECK(norm_pp("let const c = f in c 2") == "f 2");
}

TEST_CASE("normalization of the distribution monad") {
  CHECK(norm_pp("mlet a = return 3 in return (a + b)") == pp_of("return (3 + b)"));
  CHECK(norm_pp("mlet a = d in return a") == "d");
  CHECK(norm_pp("mlet a = (mlet b = d in return (b + 1)) in return (a * 2)") ==
        pp_of("mlet b = d in return ((b + 1) * 2)"));
}

TEST_CASE("normalization of delayed substitutions") {
  CHECK(norm_pp("next [a <- t, b <- u] (a + 1)") == pp_of("next [a <- t] (a + 1)"));
  CHECK(norm_pp("next [a <- next 3, b <- u] (a + b)") == pp_of("next [b <- u] (3 + b)"));
  CHECK(norm_pp("next [a <- t] a") == "t");
  CHECK(norm_pp("next [b <- u, a <- t] (a + b)") == pp_of("next [a <- t, b <- u] (a + b)"));
  // inlining must not capture an outer variable by a sibling binder
  CHECK(norm_pp("next [a <- next b, b <- u] (a + b)") == pp_of("next [b' <- u] (b + b')"));
  // a binding of a variable bound again later is shadowed and dropped
  CHECK(norm_pp("next [a <- t, a <- u] a") == "u");
}

TEST_CASE("normalization budgets") {
  CHECK(norm_pp("fix s. 1 :: s") == "fix s. 1 :: s");
  CHECK(norm_pp("fix s. 1 :: s", NormOpts{.unfold = 1}) ==
        "1 :: next (fix s. 1 :: s)");
  CHECK(norm_pp("xs", NormOpts{.eta = 1}) == "hd xs :: tl xs");

  NormOpts tiny;
  tiny.fuel = 5;
  CHECK_THROWS_AS(norm_pp("(\\x. x x) (\\x. x x)", tiny), EvalError);
}

TEST_CASE("literal arithmetic folds") {
  CHECK(norm_pp("2 + 3") == "5");
  CHECK(norm_pp("2 - 3") == "-1");
  CHECK(norm_pp("2 * 3/2") == "3");
  CHECK(norm_pp("1/2 + 1/2") == "1");
  CHECK(norm_pp("neg 4") == "-4");
  CHECK(norm_pp("xor 6 3") == "5");
  CHECK(norm_pp("int 7") == "7");
  CHECK(norm_pp("5 / 2") == "5/2");
  CHECK(norm_pp("S 4") == "5");
  // division by a literal zero is left in place
  CHECK(norm_pp("n / 0") == "n / 0");
}

TEST_CASE("definition unfolding during normalization") {
  auto p = load("def two : Nat = 2\n\ndef four : Nat = two + two\n");
  CHECK(norm_pp("four", {}, p.get()) == "4");
  CHECK(norm_pp("two + 1", {}, p.get()) == "3");
}

TEST_CASE("formula normalization") {
  TypeCtx ctx;
  ctx.gamma["x"] = parse_type_text("|> Nat");
  ctx.gamma["y"] = parse_type_text("|> Nat");
  ctx.gamma["a"] = parse_type_text("Nat");
  ctx.gamma["b"] = parse_type_text("Nat");

  auto f = parse_formula_text("x = y");
  typecheck_formula(ctx, f);
  CHECK(pp_formula(normalize_formula(f)) == "|> [u <- x, v <- y] u = v");

  auto g = parse_formula_text("next a = next b");
  typecheck_formula(ctx, g);
  CHECK(pp_formula(normalize_formula(g)) == "|> a = b");

  // later over truth collapses; later distributes over conjunction
  CHECK(pp_formula(normalize_formula(parse_formula_text("|> [c <- x] true"))) == "true");
  CHECK(pp_formula(normalize_formula(parse_formula_text("|> [c <- x] (c = 0 /\\ 0 = 0)"))) ==
        "|> [c <- x] c = 0 /\\ |> 0 = 0");
  // but not over implication
  CHECK(pp_formula(normalize_formula(parse_formula_text("|> [c <- x] (c = 0 => c = 1)"))) ==
        "|> [c <- x] (c = 0 => c = 1)");
}

TEST_CASE("axiom schema instantiation") {
  Parser p("forall z : Nat. P(z, w) => z = z");
  p.fmetas["P"] = 2;
  auto f = p.parse_formula();
  auto inst = subst_pred_formula(f, "P", {"x", "y"}, parse_formula_text("x <= y"));
  CHECK(alpha_eq_formula(inst, parse_formula_text("forall z : Nat. z <= w => z = z")));

  // binder renamed when it would capture a free variable of the body
  Parser q("forall q : Nat. P(q, w)");
  q.fmetas["P"] = 2;
  auto g = q.parse_formula();
  auto inst2 = subst_pred_formula(g, "P", {"x", "y"}, parse_formula_text("x <= q"));
  CHECK(alpha_eq_formula(inst2, parse_formula_text("forall r : Nat. r <= q")));

  Parser r("P(1)");
  r.fmetas["P"] = 1;
  auto h = r.parse_formula();
  CHECK_THROWS_AS(subst_pred_formula(h, "P", {"x", "y"}, parse_formula_text("x <= y")),
                  EvalError);
}

TEST_CASE("schematic expansion") {
  auto p = load("def id [C] : C -> C = \\w. w\n\ndef five : Nat = id@Nat 5\n");
  REQUIRE(p->find("id@Nat") != nullptr);
  const Decl* five = p->find("five");
  REQUIRE(five != nullptr);
  CHECK(five->body->a->k == TmKind::Var);
  CHECK(five->body->a->name == "id@Nat");
  CHECK(value_sexpr(run(*p, "five", 0)) == "5");
}

TEST_CASE("basic evaluation") {
  auto p = load(kProgram);
  CHECK(value_sexpr(run(*p, "delayed", 0)) == "21");
  CHECK(value_sexpr(run(*p, "through", 2)) == "42");
  CHECK(value_sexpr(run(*p, "kconst", 1)) == "7");
  CHECK(value_sexpr(run(*p, "flip", 0)) == "(dist (0 2/3) (1 1/3))");
  CHECK(value_sexpr(run(*p, "toss", 0)) == "(dist (H 1/2) (T 1/2))");
}

TEST_CASE("stream evaluation by stage") {
  auto p = load(kProgram);
  CHECK(value_sexpr(run(*p, "ones", 4)) == "(str 1 1 1 1 1)");
  CHECK(value_sexpr(run(*p, "nats", 3)) == "(str 0 1 2 3)");
  CHECK(value_sexpr(run(*p, "sqrts", 3)) == "(str 2 3/2 17/12 577/408)");
  CHECK(value_sexpr(run(*p, "nats", 0)) == "(str 0)");
}

TEST_CASE("probabilistic process evaluation") {
  auto p = load(kProgram);
  CHECK(value_sexpr(run(*p, "walk", 0)) == "(dist ((str 0) 1))");
  CHECK(value_sexpr(run(*p, "walk", 1)) ==
        "(dist ((str 0 -1) 1/2) ((str 0 1) 1/2))");
  CHECK(value_sexpr(run(*p, "walk", 2)) ==
        "(dist ((str 0 -1 -2) 1/4) ((str 0 -1 0) 1/4) ((str 0 1 0) 1/4) "
        "((str 0 1 2) 1/4))");

  EvalCtx cx{p.get(), 1000000};
  FiniteDist d = dist_of(cx, tm_var("walk"), 2);
  CHECK(d.total() == Rat(1));
  CHECK(d.support.size() == 4);
}

TEST_CASE("restriction merges distribution mass") {
  auto p = load(kProgram);
  auto v2 = run(*p, "walk", 2);
  auto r1 = restrict_value(v2, 1);
  CHECK(value_sexpr(r1) == "(dist ((str 0 -1) 1/2) ((str 0 1) 1/2))");
  CHECK(value_eq(r1, run(*p, "walk", 1)));
  CHECK(value_sexpr(restrict_value(v2, 0)) == "(dist ((str 0) 1))");
}

TEST_CASE("restriction naturality") {
  auto p = load(kProgram);
  for (const char* name : {"ones", "nats", "sqrts"}) {
    auto v = run(*p, name, 5);
    for (int k = 0; k <= 5; ++k) {
      CAPTURE(name);
      CAPTURE(k);
      CHECK(value_eq(restrict_value(v, k), run(*p, name, k)));
    }
  }
  auto w = run(*p, "walk", 3);
  for (int k = 0; k <= 3; ++k) CHECK(value_eq(restrict_value(w, k), run(*p, "walk", k)));
}

TEST_CASE("evaluation runs out of fuel") {
  auto p = load(kProgram);
  CHECK_THROWS_AS(run(*p, "walk", 3, 20), EvalError);
}

TEST_CASE("equality decision with hints") {
  CHECK(equiv(parse_term_text("mlet k = unif {0, 1} in return k"), parse_term_text("unif {0, 1}")));
  CHECK(equiv(parse_term_text("fix s. 1 :: s"), parse_term_text("1 :: next (fix s. 1 :: s)"),
              nullptr, NormOpts{.unfold = 1}, NormOpts{}));
  CHECK(equiv(parse_term_text("xs"), parse_term_text("hd xs :: tl xs"), nullptr,
              NormOpts{.eta = 1}, NormOpts{}));
  CHECK_FALSE(equiv(parse_term_text("0"), parse_term_text("S 0")));
  CHECK_FALSE(equiv(parse_term_text("fix s. 1 :: s"), parse_term_text("1 :: next (fix s. 1 :: s)")));
}

TEST_CASE("normalization preserves evaluation") {
  auto p = load(kProgram);
  for (const char* name : {"walk", "sqrts", "nats", "ones", "flip", "toss", "delayed", "through",
                           "kconst", "swapped"}) {
    const Decl* d = p->find(name);
    REQUIRE(d != nullptr);
    auto nb = normalize(d->body, p.get());
    for (int s = 0; s <= 3; ++s) {
      CAPTURE(name);
      CAPTURE(s);
      EvalCtx c1{p.get()};
      EvalCtx c2{p.get()};
      CHECK(value_sexpr(eval_closed(c2, nb, s)) == value_sexpr(eval_closed(c1, d->body, s)));
    }
  }
}

TEST_CASE("swap round-trips delayed distributions") {
  auto p = load(kProgram);
  CHECK(value_sexpr(run(*p, "swapped", 0)) == "(dist (* 1))");
  for (int s = 1; s <= 4; ++s) {
    auto v = run(*p, "swapped", s);
    REQUIRE(v->k == VKind::Dist);
    std::vector<std::pair<ValuePtr, Rat>> stripped;
    for (const auto& [sv, pr] : v->dist.support) {
      REQUIRE(sv->k == VKind::Later);
      stripped.push_back({sv->a, pr});
    }
    auto back = v_dist(make_dist(std::move(stripped)), s - 1);
    CHECK(value_eq(back, run(*p, "flip", s - 1)));
  }
}
