#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "pglc/parser.hpp"
#include "pglc/pretty.hpp"

using namespace pglc;

namespace {

// Printing must be stable: after one parse/print round the string is a fixpoint.
void check_term_stable(const std::string& src) {
  TermPtr t1 = parse_term_text(src);
  std::string s1 = pp_term(t1);
  TermPtr t2 = parse_term_text(s1);
  CHECK(pp_term(t2) == s1);
}

void check_formula_stable(const std::string& src) {
  FormulaPtr f1 = parse_formula_text(src);
  std::string s1 = pp_formula(f1);
  FormulaPtr f2 = parse_formula_text(s1);
  CHECK(pp_formula(f2) == s1);
}

std::string canon_term(const std::string& src) { return pp_term(parse_term_text(src)); }
std::string canon_type(const std::string& src) { return pp_type(parse_type_text(src)); }
std::string canon_formula(const std::string& src) {
  return pp_formula(parse_formula_text(src));
}

}  // namespace

TEST_CASE("lexer token shapes") {
  auto ts = lex("next [x <- a] <*> <= <~ :: |> [] .. /\\ \\/ | ~ @ 42 \"hi\"");
  std::vector<Tok> ks;
  for (auto& t : ts) ks.push_back(t.k);
  std::vector<Tok> want = {Tok::Ident,  Tok::LBracket, Tok::Ident, Tok::LArrow,
                           Tok::Ident,  Tok::RBracket, Tok::Ap,    Tok::Leq,
                           Tok::SampleArrow, Tok::ColonColon, Tok::LaterTy,
                           Tok::BoxTy,  Tok::DotDot,   Tok::AndAnd, Tok::OrOr,
                           Tok::Bar,    Tok::Tilde,    Tok::At,    Tok::Number,
                           Tok::String, Tok::Eof};
  CHECK(ks == want);
  CHECK(ts[18].num == 42);
  CHECK(ts[19].text == "hi");

  auto cs = lex("a -- trailing words\nb");
  CHECK(cs.size() == 3);
  CHECK(cs[0].text == "a");
  CHECK(cs[1].text == "b");
  CHECK(cs[1].sp.line == 2);

  // [] must be adjacent to lex as one token
  auto sq = lex("[ ]");
  CHECK(sq[0].k == Tok::LBracket);
  CHECK(sq[1].k == Tok::RBracket);

  CHECK_THROWS_AS(lex("#"), ParseError);
  CHECK_THROWS_AS(lex("\"unterminated"), ParseError);
}

TEST_CASE("type parsing and printing") {
  CHECK(canon_type("Nat -> Nat -> Nat") == "Nat -> Nat -> Nat");
  CHECK(canon_type("(Nat -> Int) -> Rat") == "(Nat -> Int) -> Rat");
  CHECK(canon_type("Str Nat * Int") == "Str Nat * Int");
  CHECK(canon_type("Str (Nat * Int)") == "Str (Nat * Int)");
  CHECK(canon_type("Dist (Str Nat)") == "Dist Str Nat");
  CHECK(canon_type("|> Str Nat") == "|> Str Nat");
  CHECK(canon_type("[] (Nat -> Dist Nat)") == "[] (Nat -> Dist Nat)");
  CHECK(canon_type("Nat + Int * Rat") == "Nat + Int * Rat");
  CHECK(canon_type("(Nat + Int) * Rat") == "(Nat + Int) * Rat");

  TypePtr arr = parse_type_text("Nat -> Nat -> Nat");
  REQUIRE(arr->k == TyKind::Arrow);
  CHECK(arr->b->k == TyKind::Arrow);  // right associated

  TypePtr p = parse_type_text("Str Nat * Int");
  CHECK(p->k == TyKind::Prod);
  CHECK(p->a->k == TyKind::Stream);

  CHECK(type_eq(parse_type_text("Dist (Str Nat)"), parse_type_text("Dist Str Nat")));
  CHECK_FALSE(type_eq(parse_type_text("Nat"), parse_type_text("Int")));
  CHECK_THROWS_AS(parse_type_text("Nat ->"), ParseError);
  CHECK_THROWS_AS(parse_type_text("Str"), ParseError);
}

TEST_CASE("term atoms and literals") {
  TermPtr n = parse_term_text("42");
  CHECK(n->k == TmKind::NatLit);
  CHECK(n->nat == 42);

  TermPtr i = parse_term_text("-5");
  CHECK(i->k == TmKind::IntLit);
  CHECK(i->int_ == -5);

  TermPtr r = parse_term_text("1/3");
  REQUIRE(r->k == TmKind::RatLit);
  CHECK(r->rat == Rat(1, 3));
  CHECK(canon_term("2/4") == "1/2");
  CHECK(canon_term("-2/4") == "-1/2");

  TermPtr d = parse_term_text("x / 3");
  REQUIRE(d->k == TmKind::PrimOp);
  CHECK(d->name == "div");

  CHECK_THROWS_AS(parse_term_text("1/0"), ParseError);

  TermPtr inst = parse_term_text("markov@(Str Nat)");
  REQUIRE(inst->k == TmKind::Inst);
  CHECK(inst->targ->k == TyKind::Stream);
  CHECK(canon_term("markov@Nat x") == "markov@Nat x");
}

TEST_CASE("term precedence") {
  TermPtr t = parse_term_text("1 + 2 * 3");
  REQUIRE(t->k == TmKind::PrimOp);
  CHECK(t->name == "add");
  CHECK(t->args[1]->k == TmKind::PrimOp);
  CHECK(t->args[1]->name == "mul");

  TermPtr c = parse_term_text("0 :: 1 :: xs");
  REQUIRE(c->k == TmKind::Cons);
  CHECK(c->b->k == TmKind::Cons);  // right associated

  CHECK(canon_term("cons 0 xs") == "0 :: xs");
  CHECK(canon_term("f x y") == "f x y");
  CHECK(canon_term("f (g x)") == "f (g x)");
  CHECK(canon_term("hd tl xs") == "hd (tl xs)");
  CHECK(canon_term("f (-5)") == "f (-5)");
  CHECK(canon_term("(\\x. x) y") == "(\\x. x) y");
  CHECK(canon_term("prev box x") == "prev (box x)");
  CHECK(canon_term("x - -3") == "x - -3");

  // application binds tighter than arithmetic
  TermPtr a = parse_term_text("f x + g y");
  REQUIRE(a->k == TmKind::PrimOp);
  CHECK(a->args[0]->k == TmKind::App);
}

TEST_CASE("tuples") {
  TermPtr t = parse_term_text("<1, 2, 3>");
  REQUIRE(t->k == TmKind::Pair);
  CHECK(t->b->k == TmKind::Pair);
  CHECK(pp_term(t) == "<1, 2, 3>");
  CHECK(canon_term("<1, <2, 3>>") == "<1, 2, 3>");  // same nesting
  CHECK_THROWS_AS(parse_term_text("<x>"), ParseError);
}

TEST_CASE("binders and let forms") {
  check_term_stable("\\x : Nat. x + 1");
  check_term_stable("fix s : |> Str Nat. 0 :: tl ones");
  check_term_stable("let box g = box f in g 1");
  check_term_stable("let const k = 5 in k");
  check_term_stable("mlet x = bern 1/2 in return (x + x)");
  check_term_stable("case s of inl a => a | inr b => f b");
  check_term_stable("case n of 0 => 1 | S m => g m");
  check_term_stable("next [f <- g, x <- y] (f x)");
  check_term_stable("next x");
  check_term_stable("unif {-1, 1}");
  check_term_stable("swap (next d)");
  check_term_stable("xor k m");

  TermPtr lam = parse_term_text("\\x. \\y. x");
  REQUIRE(lam->k == TmKind::Lam);
  CHECK(lam->ann == nullptr);
  CHECK(lam->a->k == TmKind::Lam);

  CHECK_THROWS_AS(parse_term_text("\\def. x"), ParseError);
  CHECK_THROWS_AS(parse_term_text("case x of foo => 1 | bar => 2"), ParseError);
  CHECK_THROWS_AS(parse_term_text("(x"), ParseError);
  CHECK_THROWS_AS(parse_term_text("1 +"), ParseError);
}

TEST_CASE("applicative sugar expands to delayed substitution") {
  TermPtr t = parse_term_text("a <*> b");
  REQUIRE(t->k == TmKind::Next);
  REQUIRE(t->ds.size() == 2);
  CHECK(t->ds.terms[0]->name == "a");
  CHECK(t->ds.terms[1]->name == "b");
  REQUIRE(t->a->k == TmKind::App);
  CHECK(t->a->a->name == t->ds.vars[0]);
  CHECK(t->a->b->name == t->ds.vars[1]);
  check_term_stable("a <*> b");
  check_term_stable("f <*> next z <*> next h");
}

TEST_CASE("bern takes a literal probability") {
  TermPtr b = parse_term_text("bern 1/3");
  REQUIRE(b->k == TmKind::PrimDist);
  CHECK(b->dk == DistKind::Bern);
  CHECK(b->rat == Rat(1, 3));
  CHECK(parse_term_text("bern (2/5)")->rat == Rat(2, 5));
  CHECK(parse_term_text("bern 1")->rat == Rat(1));
  CHECK_THROWS_AS(parse_term_text("bern p"), ParseError);
  CHECK_THROWS_AS(parse_term_text("bern 1/0"), ParseError);
}

TEST_CASE("formula parsing and printing") {
  check_formula_stable("x = y");
  check_formula_stable("x <= y /\\ y <= z => x <= z");
  check_formula_stable("a = b \\/ c = d => e = f");
  check_formula_stable("not (forall x : Nat. x = x)");
  check_formula_stable("exists w : Rat. w <= 1");
  check_formula_stable("|> [a <- s] a = 0");
  check_formula_stable("|> true");
  check_formula_stable("[] x = y");
  check_formula_stable("dia [y1 <- d1, y2 <- d2] y1 <= y2");
  check_formula_stable("dia [y <- d] y = 0");
  check_formula_stable("all a <- xs. a <= 5");
  check_formula_stable("all2 a <- xs, b <- ys. a = b");
  check_formula_stable("all[2,1] a <- xs, b <- ys. a <= b");
  check_formula_stable("(all a <- xs. a = 0) /\\ true");

  FormulaPtr imp = parse_formula_text("x <= y /\\ y <= z => x <= z");
  REQUIRE(imp->k == FmKind::Implies);
  CHECK(imp->f1->k == FmKind::And);

  CHECK(canon_formula("(x = y) /\\ (y = z)") == "x = y /\\ y = z");
  CHECK(canon_formula("~ (x = y)") == "not x = y");
  CHECK(canon_formula("forall x : Nat in {0..3}. x <= 3") ==
        "forall x : Nat in {0, 1, 2, 3}. x <= 3");
  CHECK(canon_formula("forall x : Int in {-1..1}. x <= 1") ==
        "forall x : Int in {-1, 0, 1}. x <= 1");
  CHECK(canon_formula("forall x : Nat, y : Nat. x + y = y + x") ==
        "forall x : Nat. forall y : Nat. x + y = y + x");

  FormulaPtr all21 = parse_formula_text("all[2,1] a <- xs, b <- ys. a <= b");
  REQUIRE(all21->k == FmKind::AllStream);
  CHECK(all21->m == 2);
  CHECK(all21->n == 1);
  FormulaPtr allu = parse_formula_text("all a <- xs. a <= 5");
  CHECK(allu->t2 == nullptr);
  CHECK(allu->m == 1);
  CHECK(allu->n == 0);

  CHECK_THROWS_AS(parse_formula_text("x"), ParseError);
  CHECK_THROWS_AS(parse_formula_text("all2 a <- xs. a = a"), ParseError);
  CHECK_THROWS_AS(parse_formula_text("forall x. x = x"), ParseError);
}

TEST_CASE("relation sides are full terms") {
  FormulaPtr f = parse_formula_text("(f x) = g y");
  REQUIRE(f->k == FmKind::Eq);
  CHECK(f->t1->k == TmKind::App);
  CHECK(f->t2->k == TmKind::App);
  FormulaPtr g = parse_formula_text("hd xs = 0 /\\ tl xs = ys");
  REQUIRE(g->k == FmKind::And);
  CHECK(g->f1->k == FmKind::Eq);
}

TEST_CASE("formula metavariables need declared context") {
  Parser p("P(x, y) => P(y, x)");
  p.fmetas["P"] = 2;
  FormulaPtr f = p.parse_formula();
  REQUIRE(f->k == FmKind::Implies);
  CHECK(f->f1->k == FmKind::PredApp);
  CHECK(f->f1->pred == "P");
  CHECK(f->f1->args.size() == 2);
  CHECK(pp_formula(f) == "P(x, y) => P(y, x)");

  Parser bad("P(x)");
  bad.fmetas["P"] = 2;
  CHECK_THROWS_AS(bad.parse_formula(), ParseError);
}

TEST_CASE("program declarations") {
  std::string text =
      "def two : Nat = S (S 0)\n"
      "\n"
      "enum Coin = H | T\n"
      "\n"
      "def flip : Coin = H\n"
      "\n"
      "def idi [C] : C -> C = \\x. x\n"
      "\n"
      "def use : Nat = idi@Nat 5\n"
      "\n"
      "axiom sym [C, P/2] : forall x : C, y : C. P(x, y) => P(y, x)\n";
  auto prog = parse_program_text(text);
  REQUIRE(prog->decls.size() == 6);

  const Decl* two = prog->find("two");
  REQUIRE(two != nullptr);
  CHECK(two->body->k == TmKind::Succ);

  const Decl* flip = prog->find("flip");
  REQUIRE(flip != nullptr);
  CHECK(flip->body->k == TmKind::EnumLit);
  CHECK(flip->body->enum_type == "Coin");

  const Decl* idi = prog->find("idi");
  REQUIRE(idi != nullptr);
  REQUIRE(idi->tyvars.size() == 1);
  CHECK(idi->declared_ty->a->k == TyKind::TyVar);

  const Decl* use = prog->find("use");
  REQUIRE(use != nullptr);
  CHECK(use->body->a->k == TmKind::Inst);

  const Decl* sym = prog->find("sym");
  REQUIRE(sym != nullptr);
  REQUIRE(sym->fmetas.size() == 1);
  CHECK(sym->fmetas[0].first == "P");
  CHECK(sym->tyvars == std::vector<std::string>{"C"});
  CHECK(sym->formula->k == FmKind::Forall);
  CHECK(sym->formula->ty->k == TyKind::TyVar);

  // whole-program print/parse fixpoint
  std::string s1 = pp_program(*prog);
  auto prog2 = parse_program_text(s1);
  CHECK(pp_program(*prog2) == s1);

  CHECK_THROWS_AS(parse_program_text("frob x : Nat = 1"), ParseError);
}

// ---------------------------------------------------------------------------
// Randomized print/parse fixpoint
// ---------------------------------------------------------------------------

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}
  int pick(int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); }
  std::string var() {
    static const char* pool[] = {"x", "y", "z", "f", "g", "xs", "s1"};
    return pool[pick(7)];
  }

  TypePtr type(int depth) {
    if (depth <= 0) {
      switch (pick(4)) {
        case 0: return ty_nat();
        case 1: return ty_int();
        case 2: return ty_rat();
        default: return ty_base("B" + std::to_string(pick(3)));
      }
    }
    switch (pick(8)) {
      case 0: return ty_arrow(type(depth - 1), type(depth - 1));
      case 1: return ty_prod(type(depth - 1), type(depth - 1));
      case 2: return ty_sum(type(depth - 1), type(depth - 1));
      case 3: return ty_stream(type(depth - 1));
      case 4: return ty_later(type(depth - 1));
      case 5: return ty_box(type(depth - 1));
      case 6: return ty_dist(type(depth - 1));
      default: return type(0);
    }
  }

  TermPtr lit() {
    switch (pick(3)) {
      case 0: return tm_nat(static_cast<unsigned long long>(pick(10)));
      case 1: return tm_int(-1 - pick(5));
      default: {
        long n = pick(7) - 3, d = 1 + pick(5);
        return tm_rat(Rat(n, d));
      }
    }
  }

  TermPtr term(int depth) {
    if (depth <= 0) {
      switch (pick(3)) {
        case 0: return tm_var(var());
        default: return lit();
      }
    }
    switch (pick(24)) {
      case 0: return tm_succ(term(depth - 1));
      case 1: {
        TypePtr ann = pick(2) ? type(1) : nullptr;
        return tm_lam(var(), ann, term(depth - 1));
      }
      case 2: return tm_app(term(depth - 1), term(depth - 1));
      case 3: {
        TypePtr ann = pick(2) ? type(1) : nullptr;
        return tm_fix(var(), ann, term(depth - 1));
      }
      case 4: return tm_pair(term(depth - 1), term(depth - 1));
      case 5: return tm_fst(term(depth - 1));
      case 6: return tm_snd(term(depth - 1));
      case 7: return tm_inl(term(depth - 1), nullptr);
      case 8:
        return tm_case_sum(term(depth - 1), var(), term(depth - 1), var(),
                           term(depth - 1));
      case 9:
        return tm_case_nat(term(depth - 1), term(depth - 1), var(),
                           term(depth - 1));
      case 10: return tm_cons(term(depth - 1), term(depth - 1));
      case 11: return tm_head(term(depth - 1));
      case 12: return tm_tail(term(depth - 1));
      case 13: {
        DSubst ds;
        int k = pick(3);
        for (int i = 0; i < k; ++i) {
          ds.vars.push_back("b" + std::to_string(i));
          ds.terms.push_back(term(depth - 1));
        }
        return tm_next(std::move(ds), term(depth - 1));
      }
      case 14: return tm_prev(term(depth - 1));
      case 15: return tm_box(term(depth - 1));
      case 16: return tm_let_box(var(), term(depth - 1), term(depth - 1));
      case 17: return tm_let_const(var(), term(depth - 1), term(depth - 1));
      case 18: return tm_munit(term(depth - 1));
      case 19: return tm_mlet(var(), term(depth - 1), term(depth - 1));
      case 20: {
        if (pick(2)) return tm_bern(Rat(pick(5), 1 + pick(5) + 4));
        std::vector<TermPtr> lits;
        int k = 1 + pick(3);
        for (int i = 0; i < k; ++i) lits.push_back(lit());
        return tm_unif(std::move(lits));
      }
      case 21: {
        static const char* bin[] = {"add", "sub", "mul", "xor"};
        return tm_primop(bin[pick(4)], {term(depth - 1), term(depth - 1)});
      }
      case 22: {
        // division right side kept non-literal so printing cannot re-fold
        static const char* un[] = {"neg", "int", "swap"};
        if (pick(2)) return tm_primop(un[pick(3)], {term(depth - 1)});
        return tm_primop("div", {term(depth - 1), tm_var(var())});
      }
      default: return tm_inst("m" + std::to_string(pick(2)), type(1));
    }
  }

  FormulaPtr rel(int depth) {
    return pick(2) ? fm_eq(term(depth), term(depth)) : fm_leq(term(depth), term(depth));
  }

  FormulaPtr formula(int depth) {
    if (depth <= 0) {
      switch (pick(4)) {
        case 0: return fm_top();
        case 1: return fm_bot();
        default: return rel(1);
      }
    }
    switch (pick(13)) {
      case 0: return fm_and(formula(depth - 1), formula(depth - 1));
      case 1: return fm_or(formula(depth - 1), formula(depth - 1));
      case 2: return fm_not(formula(depth - 1));
      case 3: return fm_implies(formula(depth - 1), formula(depth - 1));
      case 4: {
        std::optional<QBounds> qb;
        if (pick(2)) {
          QBounds b;
          int k = 1 + pick(3);
          for (int i = 0; i < k; ++i) b.values.push_back(lit());
          qb = b;
        }
        TypePtr ty = type(1);
        FormulaPtr body = formula(depth - 1);
        return pick(2) ? fm_forall(var(), ty, qb, body)
                       : fm_exists(var(), ty, qb, body);
      }
      case 5: {
        DSubst ds;
        int k = pick(3);
        for (int i = 0; i < k; ++i) {
          ds.vars.push_back("b" + std::to_string(i));
          ds.terms.push_back(term(1));
        }
        return fm_later(std::move(ds), formula(depth - 1));
      }
      case 6: return fm_boxf(formula(depth - 1));
      case 7:
        return fm_dia_rel("u1", term(1), "u2", term(1), formula(depth - 1));
      case 8: return fm_dia_un("u1", term(1), formula(depth - 1));
      case 9: return fm_all_un(term(1), "e1", formula(depth - 1));
      case 10: {
        int m = 1 + pick(2), n = 1 + pick(2);
        return fm_all_rel(m, n, term(1), term(1), "e1", "e2", formula(depth - 1));
      }
      default: return rel(depth - 1);
    }
  }
};

}  // namespace

TEST_CASE("random term print/parse fixpoint") {
  Gen g(20260823u);
  for (int i = 0; i < 400; ++i) {
    TermPtr t = g.term(1 + g.pick(4));
    std::string s1 = pp_term(t);
    CAPTURE(s1);
    TermPtr back;
    REQUIRE_NOTHROW(back = parse_term_text(s1));
    std::string s2 = pp_term(back);
    std::string s3 = pp_term(parse_term_text(s2));
    CHECK(s2 == s3);
  }
}

TEST_CASE("random formula print/parse fixpoint") {
  Gen g(777001u);
  for (int i = 0; i < 300; ++i) {
    FormulaPtr f = g.formula(1 + g.pick(3));
    std::string s1 = pp_formula(f);
    CAPTURE(s1);
    FormulaPtr back;
    REQUIRE_NOTHROW(back = parse_formula_text(s1));
    std::string s2 = pp_formula(back);
    std::string s3 = pp_formula(parse_formula_text(s2));
    CHECK(s2 == s3);
  }
}
