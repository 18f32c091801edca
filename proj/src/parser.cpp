#include "pglc/parser.hpp"

#include <unordered_set>

namespace pglc {

namespace {

const std::unordered_set<std::string>& kw_set() {
  static const std::unordered_set<std::string> s = {
      "Nat", "Int",    "Rat",  "Str",    "Dist",   "fix",  "let",  "box",
      "const", "in",   "mlet", "case",   "of",     "inl",  "inr",  "hd",
      "tl",  "fst",    "snd",  "S",      "return", "next", "prev", "cons",
      "xor", "neg",    "int",  "swap",   "unif",   "bern", "forall",
      "exists", "not", "true", "false",  "all",    "all2", "dia",  "def",
      "axiom", "enum"};
  return s;
}

std::optional<Rat> lit_value(const TermPtr& t) {
  switch (t->k) {
    case TmKind::NatLit: return Rat(static_cast<long>(t->nat));
    case TmKind::IntLit: return Rat(static_cast<long>(t->int_));
    case TmKind::RatLit: return t->rat;
    default: return std::nullopt;
  }
}

}  // namespace

bool Parser::reserved(const std::string& s) { return kw_set().count(s) > 0; }

Parser::Parser(const std::string& src) : toks_(lex(src)) {}

bool Parser::accept(Tok k) {
  if (at(k)) {
    eat();
    return true;
  }
  return false;
}

bool Parser::accept_kw(const std::string& s) {
  if (at_kw(s)) {
    eat();
    return true;
  }
  return false;
}

Token Parser::expect(Tok k, const std::string& what) {
  if (!at(k)) fail("expected " + what);
  return eat();
}

void Parser::expect_kw(const std::string& s) {
  if (!at_kw(s)) fail("expected '" + s + "'");
  eat();
}

std::string Parser::ident(const std::string& what) {
  if (!at(Tok::Ident)) fail("expected " + what);
  if (reserved(cur().text)) fail("reserved word '" + cur().text + "' used as " + what);
  return eat().text;
}

DSubst Parser::parse_bindings() {
  expect(Tok::LBracket, "'['");
  DSubst ds;
  if (!at(Tok::RBracket)) {
    do {
      ds.vars.push_back(ident("binding name"));
      expect(Tok::LArrow, "'<-'");
      ds.terms.push_back(parse_term());
    } while (accept(Tok::Comma));
  }
  expect(Tok::RBracket, "']'");
  return ds;
}

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

TypePtr Parser::parse_type() { return type_arrow(); }

TypePtr Parser::type_arrow() {
  TypePtr a = type_sum();
  if (accept(Tok::Arrow)) return ty_arrow(a, type_arrow());
  return a;
}

TypePtr Parser::type_sum() {
  TypePtr a = type_prod();
  while (accept(Tok::Plus)) a = ty_sum(a, type_prod());
  return a;
}

TypePtr Parser::type_prod() {
  TypePtr a = type_prefix();
  while (accept(Tok::Star)) a = ty_prod(a, type_prefix());
  return a;
}

TypePtr Parser::type_prefix() {
  if (accept_kw("Str")) return ty_stream(type_prefix());
  if (accept_kw("Dist")) return ty_dist(type_prefix());
  if (accept(Tok::LaterTy)) return ty_later(type_prefix());
  if (accept(Tok::BoxTy)) return ty_box(type_prefix());
  return type_atom();
}

TypePtr Parser::type_atom() {
  if (accept_kw("Nat")) return ty_nat();
  if (accept_kw("Int")) return ty_int();
  if (accept_kw("Rat")) return ty_rat();
  if (accept(Tok::LParen)) {
    TypePtr t = parse_type();
    expect(Tok::RParen, "')'");
    return t;
  }
  if (at(Tok::Ident) && !reserved(cur().text)) {
    std::string n = eat().text;
    if (tyvars.count(n)) return ty_var(n);
    return ty_base(n);
  }
  fail("expected type");
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

TermPtr Parser::parse_term() { return term_lamlike(); }

TermPtr Parser::term_lamlike() {
  Span sp = cur().sp;
  if (accept(Tok::Backslash)) {
    std::string x = ident("binder");
    TypePtr ann;
    if (accept(Tok::Colon)) ann = parse_type();
    expect(Tok::Dot, "'.'");
    return tm_lam(x, ann, term_lamlike(), sp);
  }
  if (accept_kw("fix")) {
    std::string x = ident("binder");
    TypePtr ann;
    if (accept(Tok::Colon)) ann = parse_type();
    expect(Tok::Dot, "'.'");
    return tm_fix(x, ann, term_lamlike(), sp);
  }
  if (accept_kw("let")) {
    bool isbox = accept_kw("box");
    if (!isbox) expect_kw("const");
    std::string x = ident("binder");
    expect(Tok::Eq, "'='");
    TermPtr bound = parse_term();
    expect_kw("in");
    TermPtr body = term_lamlike();
    return isbox ? tm_let_box(x, bound, body, sp) : tm_let_const(x, bound, body, sp);
  }
  if (accept_kw("mlet")) {
    std::string x = ident("binder");
    expect(Tok::Eq, "'='");
    TermPtr d = parse_term();
    expect_kw("in");
    return tm_mlet(x, d, term_lamlike(), sp);
  }
  if (accept_kw("case")) {
    TermPtr scrut = parse_term();
    expect_kw("of");
    if (accept_kw("inl")) {
      std::string x = ident("binder");
      expect(Tok::FatArrow, "'=>'");
      TermPtr l = parse_term();
      expect(Tok::Bar, "'|'");
      expect_kw("inr");
      std::string y = ident("binder");
      expect(Tok::FatArrow, "'=>'");
      TermPtr r = parse_term();
      return tm_case_sum(scrut, x, l, y, r, sp);
    }
    if (at(Tok::Number) && cur().num == 0) {
      eat();
      expect(Tok::FatArrow, "'=>'");
      TermPtr z = parse_term();
      expect(Tok::Bar, "'|'");
      expect_kw("S");
      std::string y = ident("binder");
      expect(Tok::FatArrow, "'=>'");
      TermPtr s = parse_term();
      return tm_case_nat(scrut, z, y, s, sp);
    }
    fail("expected 'inl' or '0' branch");
  }
  return term_ap();
}

TermPtr Parser::term_ap() {
  TermPtr t = term_cons();
  while (at(Tok::Ap)) {
    Span sp = eat().sp;
    TermPtr rhs = term_cons();
    ++fresh_;
    std::string f = "_f" + std::to_string(fresh_);
    std::string x = "_a" + std::to_string(fresh_);
    DSubst ds;
    ds.vars = {f, x};
    ds.terms = {t, rhs};
    t = tm_next(std::move(ds), tm_app(tm_var(f, sp), tm_var(x, sp), sp), sp);
  }
  return t;
}

TermPtr Parser::term_cons() {
  TermPtr h = term_add();
  if (at(Tok::ColonColon)) {
    Span sp = eat().sp;
    return tm_cons(h, term_cons(), sp);
  }
  return h;
}

TermPtr Parser::term_add() {
  TermPtr t = term_mul();
  while (at(Tok::Plus) || at(Tok::Minus)) {
    bool plus = at(Tok::Plus);
    Span sp = eat().sp;
    TermPtr r = term_mul();
    t = tm_primop(plus ? "add" : "sub", {t, r}, sp);
  }
  return t;
}

TermPtr Parser::term_mul() {
  TermPtr t = term_app();
  while (at(Tok::Star) || at(Tok::Slash)) {
    bool mul = at(Tok::Star);
    Span sp = eat().sp;
    TermPtr r = term_app();
    if (!mul) {
      // A quotient of two literals is a rational literal.
      auto lv = lit_value(t), rv = lit_value(r);
      if (lv && rv) {
        if (rv->is_zero()) throw ParseError("division by zero in literal", sp);
        t = tm_rat(*lv / *rv, sp);
        continue;
      }
    }
    t = tm_primop(mul ? "mul" : "div", {t, r}, sp);
  }
  return t;
}

TermPtr Parser::term_app() {
  TermPtr f = term_app_atom();
  while (starts_app_atom()) f = tm_app(f, term_app_atom(), f->sp);
  return f;
}

bool Parser::starts_app_atom() const {
  switch (cur().k) {
    case Tok::Number:
    case Tok::LParen:
    case Tok::Lt:
      return true;
    case Tok::Ident: {
      const std::string& s = cur().text;
      if (!reserved(s)) return true;
      static const std::unordered_set<std::string> tk = {
          "hd",  "tl",  "fst",  "snd", "S",    "inl",  "inr", "return", "prev",
          "box", "neg", "int",  "swap", "cons", "xor",  "next", "unif", "bern"};
      return tk.count(s) > 0;
    }
    default:
      return false;
  }
}

TermPtr Parser::term_app_atom() {
  Span sp = cur().sp;
  if (at(Tok::Ident) && reserved(cur().text)) {
    const std::string s = cur().text;
    if (s == "hd") { eat(); return tm_head(term_app_atom(), sp); }
    if (s == "tl") { eat(); return tm_tail(term_app_atom(), sp); }
    if (s == "fst") { eat(); return tm_fst(term_app_atom(), sp); }
    if (s == "snd") { eat(); return tm_snd(term_app_atom(), sp); }
    if (s == "S") { eat(); return tm_succ(term_app_atom(), sp); }
    if (s == "return") { eat(); return tm_munit(term_app_atom(), sp); }
    if (s == "prev") { eat(); return tm_prev(term_app_atom(), sp); }
    if (s == "box") { eat(); return tm_box(term_app_atom(), sp); }
    if (s == "inl") { eat(); return tm_inl(term_app_atom(), nullptr, sp); }
    if (s == "inr") { eat(); return tm_inr(term_app_atom(), nullptr, sp); }
    if (s == "neg") { eat(); return tm_primop("neg", {term_app_atom()}, sp); }
    if (s == "int") { eat(); return tm_primop("int", {term_app_atom()}, sp); }
    if (s == "swap") { eat(); return tm_primop("swap", {term_app_atom()}, sp); }
    if (s == "cons") {
      eat();
      TermPtr h = term_app_atom();
      TermPtr t = term_app_atom();
      return tm_cons(h, t, sp);
    }
    if (s == "xor") {
      eat();
      TermPtr a = term_app_atom();
      TermPtr b = term_app_atom();
      return tm_primop("xor", {a, b}, sp);
    }
    if (s == "next") {
      eat();
      DSubst ds;
      if (at(Tok::LBracket)) ds = parse_bindings();
      return tm_next(std::move(ds), term_app_atom(), sp);
    }
    if (s == "unif") {
      eat();
      expect(Tok::LBrace, "'{'");
      std::vector<TermPtr> xs;
      if (!at(Tok::RBrace)) {
        xs.push_back(parse_term());
        while (accept(Tok::Comma)) xs.push_back(parse_term());
      }
      expect(Tok::RBrace, "'}'");
      if (xs.empty()) fail("unif needs at least one outcome");
      return tm_unif(std::move(xs), sp);
    }
    if (s == "bern") {
      eat();
      return tm_bern(literal_fraction(), sp);
    }
    fail("unexpected keyword '" + s + "' in term");
  }
  return term_atom();
}

Rat Parser::literal_fraction() {
  if (accept(Tok::LParen)) {
    Rat r = literal_fraction();
    expect(Tok::RParen, "')'");
    return r;
  }
  Token n = expect(Tok::Number, "probability literal");
  if (accept(Tok::Slash)) {
    Token d = expect(Tok::Number, "denominator");
    if (d.num == 0) throw ParseError("division by zero in literal", d.sp);
    return Rat(static_cast<long>(n.num), static_cast<long>(d.num));
  }
  return Rat(static_cast<long>(n.num));
}

TermPtr Parser::term_atom() {
  Span sp = cur().sp;
  if (at(Tok::Number)) return tm_nat(eat().num, sp);
  if (at(Tok::Minus) && peek(1).k == Tok::Number) {
    eat();
    Token n = eat();
    return tm_int(-static_cast<long long>(n.num), sp);
  }
  if (at(Tok::Ident) && !reserved(cur().text)) {
    std::string n = eat().text;
    if (accept(Tok::At)) return tm_inst(n, type_atom(), sp);
    auto it = enum_ctors.find(n);
    if (it != enum_ctors.end()) return tm_enum(n, it->second, sp);
    return tm_var(n, sp);
  }
  if (accept(Tok::LParen)) {
    TermPtr t = parse_term();
    expect(Tok::RParen, "')'");
    return t;
  }
  if (accept(Tok::Lt)) {
    std::vector<TermPtr> es;
    es.push_back(parse_term());
    while (accept(Tok::Comma)) es.push_back(parse_term());
    expect(Tok::Gt, "'>'");
    if (es.size() < 2) fail("tuple needs at least two components");
    TermPtr t = es.back();
    for (size_t i = es.size() - 1; i-- > 0;) t = tm_pair(es[i], t, sp);
    return t;
  }
  fail("expected term");
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

FormulaPtr Parser::parse_formula() { return fm_implies_lvl(); }

FormulaPtr Parser::fm_implies_lvl() {
  FormulaPtr a = fm_or_lvl();
  if (at(Tok::FatArrow)) {
    Span sp = eat().sp;
    return fm_implies(a, fm_implies_lvl(), sp);
  }
  return a;
}

FormulaPtr Parser::fm_or_lvl() {
  FormulaPtr a = fm_and_lvl();
  while (at(Tok::OrOr)) {
    Span sp = eat().sp;
    FormulaPtr b = fm_and_lvl();
    a = fm_or(a, b, sp);
  }
  return a;
}

FormulaPtr Parser::fm_and_lvl() {
  FormulaPtr a = fm_unit();
  while (at(Tok::AndAnd)) {
    Span sp = eat().sp;
    FormulaPtr b = fm_unit();
    a = fm_and(a, b, sp);
  }
  return a;
}

std::optional<QBounds> Parser::parse_qbounds(const TypePtr& ty) {
  expect(Tok::LBrace, "'{'");
  QBounds qb;
  size_t save = pos();
  bool is_range = false;
  if (at(Tok::Minus) || at(Tok::Number)) {
    accept(Tok::Minus);
    if (accept(Tok::Number) && at(Tok::DotDot)) is_range = true;
    rewind(save);
  }
  bool nat = ty && ty->k == TyKind::Nat;
  if (is_range) {
    auto lit_int = [&]() -> long long {
      bool neg = accept(Tok::Minus);
      Token n = expect(Tok::Number, "integer literal");
      long long v = static_cast<long long>(n.num);
      return neg ? -v : v;
    };
    long long lo = lit_int();
    expect(Tok::DotDot, "'..'");
    long long hi = lit_int();
    if (lo > hi) fail("empty range");
    for (long long v = lo; v <= hi; ++v)
      qb.values.push_back(nat && v >= 0 ? tm_nat(static_cast<unsigned long long>(v))
                                        : tm_int(v));
  } else {
    do {
      qb.values.push_back(parse_term());
    } while (accept(Tok::Comma));
  }
  expect(Tok::RBrace, "'}'");
  return qb;
}

FormulaPtr Parser::fm_unit() {
  Span sp = cur().sp;
  if (accept_kw("true")) return fm_top(sp);
  if (accept_kw("false")) return fm_bot(sp);
  if (accept_kw("not")) return fm_not(fm_unit(), sp);
  if (accept(Tok::Tilde)) return fm_not(fm_unit(), sp);
  if (at_kw("forall") || at_kw("exists")) {
    bool uni = at_kw("forall");
    eat();
    struct Binder {
      std::string x;
      TypePtr ty;
      std::optional<QBounds> bs;
    };
    std::vector<Binder> bs;
    do {
      Binder b;
      b.x = ident("binder");
      expect(Tok::Colon, "':'");
      b.ty = parse_type();
      if (accept_kw("in")) b.bs = parse_qbounds(b.ty);
      bs.push_back(std::move(b));
    } while (accept(Tok::Comma));
    expect(Tok::Dot, "'.'");
    FormulaPtr body = parse_formula();
    for (size_t i = bs.size(); i-- > 0;)
      body = uni ? fm_forall(bs[i].x, bs[i].ty, bs[i].bs, body, sp)
                 : fm_exists(bs[i].x, bs[i].ty, bs[i].bs, body, sp);
    return body;
  }
  if (accept(Tok::LaterTy)) {
    DSubst ds;
    if (at(Tok::LBracket)) ds = parse_bindings();
    return fm_later(std::move(ds), fm_unit(), sp);
  }
  if (accept(Tok::BoxTy)) return fm_boxf(fm_unit(), sp);
  if (accept_kw("dia")) {
    DSubst ds = parse_bindings();
    FormulaPtr b = fm_unit();
    if (ds.size() == 1) return fm_dia_un(ds.vars[0], ds.terms[0], b, sp);
    if (ds.size() == 2)
      return fm_dia_rel(ds.vars[0], ds.terms[0], ds.vars[1], ds.terms[1], b, sp);
    fail("dia takes one or two bindings");
  }
  if (at_kw("all") || at_kw("all2")) {
    bool two = at_kw("all2");
    eat();
    int m = 1, n = 1;
    bool widths = false;
    if (!two && at(Tok::LBracket)) {
      eat();
      m = static_cast<int>(expect(Tok::Number, "step width").num);
      expect(Tok::Comma, "','");
      n = static_cast<int>(expect(Tok::Number, "step width").num);
      expect(Tok::RBracket, "']'");
      widths = true;
    }
    std::string x1 = ident("binder");
    expect(Tok::LArrow, "'<-'");
    TermPtr s1 = parse_term();
    if (accept(Tok::Comma)) {
      std::string x2 = ident("binder");
      expect(Tok::LArrow, "'<-'");
      TermPtr s2 = parse_term();
      expect(Tok::Dot, "'.'");
      return fm_all_rel(m, n, s1, s2, x1, x2, parse_formula(), sp);
    }
    if (two || widths) fail("two stream bindings expected");
    expect(Tok::Dot, "'.'");
    return fm_all_un(s1, x1, parse_formula(), sp);
  }
  if (at(Tok::LParen)) {
    size_t save = pos();
    eat();
    try {
      FormulaPtr f = parse_formula();
      expect(Tok::RParen, "')'");
      return f;
    } catch (const ParseError&) {
      rewind(save);
    }
  }
  return fm_relation();
}

FormulaPtr Parser::fm_relation() {
  Span sp = cur().sp;
  if (at(Tok::Ident) && fmetas.count(cur().text) && peek(1).k == Tok::LParen) {
    std::string p = eat().text;
    eat();
    std::vector<TermPtr> args;
    if (!at(Tok::RParen)) {
      args.push_back(parse_term());
      while (accept(Tok::Comma)) args.push_back(parse_term());
    }
    expect(Tok::RParen, "')'");
    int ar = fmetas[p];
    if (static_cast<int>(args.size()) != ar)
      fail("metavariable " + p + " expects " + std::to_string(ar) + " arguments");
    return fm_pred_app(p, std::move(args), sp);
  }
  TermPtr a = parse_term();
  if (accept(Tok::Eq)) return fm_eq(a, parse_term(), sp);
  if (accept(Tok::Leq)) return fm_leq(a, parse_term(), sp);
  fail("expected '=' or '<=' after term in formula");
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

std::shared_ptr<Program> Parser::parse_program() {
  auto prog = std::make_shared<Program>();
  while (!at_eof()) prog->decls.push_back(parse_decl());
  return prog;
}

Decl Parser::parse_decl() {
  Decl d;
  d.sp = cur().sp;
  if (accept_kw("def")) {
    d.k = DeclKind::Def;
    d.name = ident("definition name");
    if (accept(Tok::LBracket)) {
      do {
        d.tyvars.push_back(ident("type variable"));
      } while (accept(Tok::Comma));
      expect(Tok::RBracket, "']'");
    }
    for (auto& v : d.tyvars) tyvars.insert(v);
    expect(Tok::Colon, "':'");
    d.declared_ty = parse_type();
    expect(Tok::Eq, "'='");
    d.body = parse_term();
    for (auto& v : d.tyvars) tyvars.erase(v);
    return d;
  }
  if (accept_kw("axiom")) {
    d.k = DeclKind::Axiom;
    d.name = ident("axiom name");
    if (accept(Tok::LBracket)) {
      do {
        std::string n = ident("schema parameter");
        if (accept(Tok::Slash)) {
          int ar = static_cast<int>(expect(Tok::Number, "arity").num);
          d.fmetas.emplace_back(n, ar);
        } else {
          d.tyvars.push_back(n);
        }
      } while (accept(Tok::Comma));
      expect(Tok::RBracket, "']'");
    }
    for (auto& v : d.tyvars) tyvars.insert(v);
    for (auto& [n, ar] : d.fmetas) fmetas[n] = ar;
    expect(Tok::Colon, "':'");
    d.formula = parse_formula();
    for (auto& v : d.tyvars) tyvars.erase(v);
    for (auto& [n, ar] : d.fmetas) fmetas.erase(n);
    return d;
  }
  if (accept_kw("enum")) {
    d.k = DeclKind::Enum;
    d.name = ident("enum name");
    expect(Tok::Eq, "'='");
    do {
      d.ctors.push_back(ident("constructor"));
    } while (accept(Tok::Bar));
    for (auto& c : d.ctors) enum_ctors[c] = d.name;
    return d;
  }
  fail("expected declaration");
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

TypePtr parse_type_text(const std::string& src) {
  Parser p(src);
  TypePtr t = p.parse_type();
  if (!p.at_eof()) p.fail("unexpected trailing input");
  return t;
}

TermPtr parse_term_text(const std::string& src) {
  Parser p(src);
  TermPtr t = p.parse_term();
  if (!p.at_eof()) p.fail("unexpected trailing input");
  return t;
}

FormulaPtr parse_formula_text(const std::string& src) {
  Parser p(src);
  FormulaPtr f = p.parse_formula();
  if (!p.at_eof()) p.fail("unexpected trailing input");
  return f;
}

std::shared_ptr<Program> parse_program_text(const std::string& src) {
  Parser p(src);
  return p.parse_program();
}

}  // namespace pglc
