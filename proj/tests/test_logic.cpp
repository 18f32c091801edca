#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "pglc/coupling.hpp"
#include "pglc/logic.hpp"
#include "pglc/parser.hpp"
#include "pglc/prelude.hpp"
#include "pglc/value.hpp"

using namespace pglc;

namespace {

const char* kProg =
    "enum Coin = H | T\n"
    "\n"
    "def u : Str Nat = let box s = ones in s\n"
    "\n"
    "def st2 : Str Nat = 0 :: next (fix s. 2 :: s)\n"
    "\n"
    "def flip13 : Dist Nat = bern 1/3\n"
    "\n"
    "def flip23 : Dist Nat = bern 2/3\n";

std::shared_ptr<Program> the_prog() {
  static std::shared_ptr<Program> p = load_program(kProg);
  return p;
}

FormulaPtr fml(const std::string& s) {
  Parser p(s);
  p.enum_ctors["H"] = "Coin";
  p.enum_ctors["T"] = "Coin";
  return p.parse_formula();
}

CheckResult go(const std::string& s, int stage, long long fuel = 1000000) {
  auto pr = the_prog();
  EvalCtx cx{pr.get(), fuel};
  return check_closed(cx, fml(s), stage);
}

}  // namespace

TEST_CASE("propositional and atomic clauses") {
  CHECK(go("true", 0).ok);
  CHECK_FALSE(go("false", 2).ok);
  CHECK(go("1 = 1", 0).ok);
  CHECK_FALSE(go("1 = 2", 0).ok);
  CHECK(go("1 <= 2", 0).ok);
  CHECK_FALSE(go("2 <= 1", 0).ok);
  CHECK(go("1 = 2 => false", 3).ok);
  CHECK(go("not (1 = 2)", 3).ok);
  CHECK(go("1 = 1 /\\ 2 <= 2", 1).ok);
  CHECK(go("1 = 2 \\/ 2 <= 2", 1).ok);
}

TEST_CASE("later strips a stage and is vacuous at zero") {
  for (int s = 0; s <= 3; ++s) CHECK(go("|> [] true", s).ok);
  CHECK(go("|> false", 0).ok);
  CHECK_FALSE(go("|> false", 1).ok);
  CHECK(go("|> [v <- next 4] v = 4", 2).ok);
  CHECK_FALSE(go("|> [v <- next 4] v = 5", 2).ok);
}

TEST_CASE("stream prefix predicates") {
  CHECK(go("all v <- u. v = 1", 3).ok);
  CHECK_FALSE(go("all v <- u. v = 2", 3).ok);
  CHECK(go("all v <- st2. v <= 1", 0).ok);
  CHECK_FALSE(go("all v <- st2. v <= 1", 1).ok);
  CHECK(go("all2 v <- u, w <- u. v = w", 3).ok);
  CHECK(go("all [2,1] v <- st2, w <- st2. v <= w", 4).ok);
}

TEST_CASE("prefix helpers match the hand unfoldings") {
  auto nat = [](unsigned long long n, int st) { return v_nat(n, st); };
  auto leq1 = [](const ValuePtr& v, int) { return v->nat <= 1; };
  CHECK(all_prefix_un({nat(0, 1), nat(1, 0)}, 1, leq1));
  CHECK_FALSE(all_prefix_un({nat(0, 1), nat(2, 0)}, 1, leq1));

  std::vector<ValuePtr> l{v_int(0, 2), v_int(-1, 1), v_int(0, 0)};
  std::vector<ValuePtr> r{v_int(0, 1), v_int(0, 0)};
  auto eq = [](const ValuePtr& a, const ValuePtr& b, int) {
    return value_eq(restrict_value(a, 0), restrict_value(b, 0));
  };
  CHECK(all_prefix_rel(l, r, 2, 1, 2, eq));
  std::vector<ValuePtr> l2{v_int(0, 2), v_int(-1, 1), v_int(1, 0)};
  CHECK_FALSE(all_prefix_rel(l2, r, 2, 1, 2, eq));
}

TEST_CASE("distribution modalities") {
  for (int s = 0; s <= 2; ++s) {
    CHECK(go("dia [y1 <- flip13, y2 <- flip23] y1 <= y2", s).ok);
    CHECK_FALSE(go("dia [y1 <- flip23, y2 <- flip13] y1 <= y2", s).ok);
  }
  CHECK(go("dia [y <- flip13] y <= 1", 0).ok);
  CHECK_FALSE(go("dia [y <- flip13] y = 0", 0).ok);
}

TEST_CASE("modality verdict agrees with the coupling layer") {
  auto pr = the_prog();
  EvalCtx cx{pr.get()};
  auto d1 = eval_closed(cx, tm_var("flip13"), 0);
  auto d2 = eval_closed(cx, tm_var("flip23"), 0);
  REQUIRE(d1->k == VKind::Dist);
  REQUIRE(d2->k == VKind::Dist);
  CHECK(go("dia [y1 <- flip13, y2 <- flip23] y1 <= y2", 0).ok ==
        lift_check_rel(d1->dist, d2->dist, rel_leq()));
  CHECK(go("dia [y1 <- flip23, y2 <- flip13] y1 <= y2", 0).ok ==
        lift_check_rel(d2->dist, d1->dist, rel_leq()));
}

TEST_CASE("quantifiers over finite domains") {
  CHECK(go("exists x : Nat in {0..3}. x = 2", 1).ok);
  CHECK_FALSE(go("exists x : Nat in {0..3}. x = 9", 1).ok);
  CHECK(go("forall x : Int in {-2..2}. x <= 2", 2).ok);
  CHECK_FALSE(go("forall x : Int in {-2..2}. 0 <= x", 2).ok);
  CHECK(go("forall c : Coin. c = c", 1).ok);
  CHECK_FALSE(go("forall c : Coin. c = H", 1).ok);
  CHECK(go("exists c : Coin. c = T", 0).ok);
  CHECK(go("forall p : Coin * Coin. p = p", 1).ok);
  CHECK(go("forall d : |> Coin. d = d", 0).ok);
  CHECK_FALSE(go("forall d : |> Coin. d = next H", 1).ok);
  CHECK(go("forall s : Str Coin. all v <- s. v = H \\/ v = T", 1).ok);
  CHECK_THROWS_AS(go("forall x : Nat. x = x", 1), CheckError);
}

TEST_CASE("box checks all reachable stages") {
  auto r = go("[] (1 = 1)", 3);
  CHECK(r.ok);
  CHECK_FALSE(r.bounded);
  auto b = go("[] (all v <- u. v = 1)", 3);
  CHECK(b.ok);
  CHECK(b.bounded);
  auto z = go("[] (|> false)", 0);
  CHECK(z.ok);
  CHECK_FALSE(go("[] (|> false)", 2).ok);
}

TEST_CASE("uninterpreted predicates are rejected") {
  auto pr = the_prog();
  EvalCtx cx{pr.get()};
  Parser p("P(1)");
  p.fmetas["P"] = 1;
  auto f = p.parse_formula();
  CHECK_THROWS_AS(check_closed(cx, f, 1), CheckError);
}

TEST_CASE("verdicts are downward closed") {
  const char* fs[] = {
      "all v <- u. v = 1",
      "all v <- st2. v <= 1",
      "dia [y1 <- flip13, y2 <- flip23] y1 <= y2",
      "dia [y1 <- flip23, y2 <- flip13] y1 <= y2",
      "|> [] true",
      "|> false",
      "[] (all v <- u. v = 1)",
      "forall x : Nat in {0..2}. x <= 2",
      "all2 v <- u, w <- u. v = w",
      "exists c : Coin. c = T",
      "all [2,1] v <- st2, w <- st2. v <= w",
  };
  for (const char* s : fs)
    for (int n = 0; n <= 4; ++n) {
      CAPTURE(s);
      CAPTURE(n);
      if (go(s, n + 1).ok) CHECK(go(s, n).ok);
    }
}

TEST_CASE("pointwise prefix check equals a direct fold") {
  auto pr = the_prog();
  for (const char* name : {"u", "st2"}) {
    for (int n = 0; n <= 4; ++n) {
      EvalCtx cx{pr.get()};
      auto elems = stream_elems(eval_closed(cx, tm_var(name), n));
      bool fold = true;
      for (const auto& e : elems) fold = fold && e->nat <= 1;
      CAPTURE(name);
      CAPTURE(n);
      CHECK(go(std::string("all v <- ") + name + ". v <= 1", n).ok == fold);
    }
  }
}
