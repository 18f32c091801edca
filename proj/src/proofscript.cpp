#include <algorithm>
#include <sstream>

#include "pglc/evalsem.hpp"
#include "pglc/parser.hpp"
#include "pglc/pretty.hpp"
#include "pglc/proof.hpp"
#include "pglc/typesys.hpp"

namespace pglc {

std::string pp_judgment(const Judgment& j) {
  std::ostringstream os;
  auto tys = [&](const std::vector<std::pair<std::string, TypePtr>>& v) {
    os << "[";
    for (size_t i = 0; i < v.size(); ++i)
      os << (i ? "; " : "") << v[i].first << " : " << pp_type(v[i].second);
    os << "]";
  };
  auto fms = [&](const std::vector<FormulaPtr>& v) {
    os << "[";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << pp_formula(v[i]);
    os << "]";
  };
  tys(j.delta);
  os << " ";
  fms(j.sigma);
  os << " ";
  tys(j.gamma);
  os << " ";
  fms(j.psi);
  os << " |- ";
  if (j.k != JKind::Ghol) os << pp_term(j.t1) << " : " << pp_type(j.a1);
  if (j.k == JKind::Rhol) os << " ~ " << pp_term(j.t2) << " : " << pp_type(j.a2);
  if (j.k != JKind::Ghol) os << " | ";
  os << pp_formula(j.phi);
  return os.str();
}

namespace {

// Script grammar, layered on the term/formula/type parsers:
//
//   script   := ("program" STRING)? theorem*
//   theorem  := "theorem" NAME kind block* subjects "shows" formula ";"
//               "proof" node
//   kind     := "ghol" | "uhol" | "rhol"
//   block    := "const" "[" (x ":" type) ";"... "]"     (constant variables)
//             | "boxed" "[" formula ";"... "]"          (constant hypotheses)
//             | "var"   "[" (x ":" type) ";"... "]"     (ordinary variables)
//             | "hyp"   "[" formula ";"... "]"          (ordinary hypotheses)
//   subjects := ("left" term ":" type)? ("right" term ":" type)?
//   node     := RULE inst? ( "{" node* "}" | ";" )
//             | "assume" ";"
//             | ("semantic" | "strassen") leafopts? ";"
//   inst     := "[" key "=" value (";" key "=" value)* "]"
//   leafopts := "[" ("depth" "=" NUM | x "in" "{" range-or-terms "}") ";"... "]"
//
// Every embedded term and formula is expanded against the program right away,
// so schematic references like markov@Nat pick up their instances.
struct ScriptParser {
  Parser& P;
  std::shared_ptr<Program> prog;

  TermPtr elab_t(TermPtr t) {
    size_t before = prog->decls.size();
    TermPtr r = elaborate_term_in(*prog, t);
    if (prog->decls.size() != before) typecheck_program(*prog);
    return r;
  }
  FormulaPtr elab_f(FormulaPtr f) {
    size_t before = prog->decls.size();
    FormulaPtr r = elaborate_formula_in(*prog, f);
    if (prog->decls.size() != before) typecheck_program(*prog);
    return r;
  }

  std::vector<std::pair<std::string, TypePtr>> ty_block() {
    std::vector<std::pair<std::string, TypePtr>> v;
    if (P.accept(Tok::BoxTy)) return v;  // [] lexes as one token
    P.expect(Tok::LBracket, "'['");
    if (!P.at(Tok::RBracket)) {
      do {
        std::string x = P.ident("context variable");
        P.expect(Tok::Colon, "':'");
        v.emplace_back(x, P.parse_type());
      } while (P.accept(Tok::Semi));
    }
    P.expect(Tok::RBracket, "']'");
    return v;
  }

  std::vector<FormulaPtr> fm_block() {
    std::vector<FormulaPtr> v;
    if (P.accept(Tok::BoxTy)) return v;
    P.expect(Tok::LBracket, "'['");
    if (!P.at(Tok::RBracket)) {
      do {
        v.push_back(elab_f(P.parse_formula()));
      } while (P.accept(Tok::Semi));
    }
    P.expect(Tok::RBracket, "']'");
    return v;
  }

  long long int_lit() {
    bool neg = P.accept(Tok::Minus);
    Token n = P.expect(Tok::Number, "integer literal");
    long long v = static_cast<long long>(n.num);
    return neg ? -v : v;
  }

  QBounds qbounds() {
    P.expect(Tok::LBrace, "'{'");
    QBounds qb;
    size_t save = P.pos();
    bool is_range = false;
    if (P.at(Tok::Minus) || P.at(Tok::Number)) {
      P.accept(Tok::Minus);
      if (P.accept(Tok::Number) && P.at(Tok::DotDot)) is_range = true;
      P.rewind(save);
    }
    if (is_range) {
      long long lo = int_lit();
      P.expect(Tok::DotDot, "'..'");
      long long hi = int_lit();
      if (lo > hi) P.fail("empty range");
      if (hi - lo > 4096) P.fail("range too large to enumerate");
      for (long long v = lo; v <= hi; ++v)
        qb.values.push_back(lo >= 0 ? tm_nat(static_cast<unsigned long long>(v))
                                    : tm_int(v));
    } else {
      do {
        qb.values.push_back(elab_t(P.parse_term()));
      } while (P.accept(Tok::Comma));
    }
    P.expect(Tok::RBrace, "'}'");
    return qb;
  }

  InstVal value_of(IKind k) {
    InstVal v;
    v.k = k;
    switch (k) {
      case IKind::Term: v.t = elab_t(P.parse_term()); break;
      case IKind::Type: v.ty = P.parse_type(); break;
      case IKind::Formula: v.f = elab_f(P.parse_formula()); break;
      case IKind::Name: v.s = P.ident("name value"); break;
      case IKind::Int: v.i = int_lit(); break;
      case IKind::Pred: {
        P.expect_kw("pred");
        while (!P.at(Tok::Dot)) v.pred_params.push_back(P.ident("predicate parameter"));
        P.expect(Tok::Dot, "'.'");
        v.pred_body = elab_f(P.parse_formula());
        break;
      }
    }
    return v;
  }

  void inst_block(ProofNode& n) {
    const RuleSig& sig = rule_sig(n.rule);
    if (P.accept(Tok::BoxTy)) return;
    P.expect(Tok::LBracket, "'['");
    bool first = true;
    if (!P.at(Tok::RBracket)) {
      do {
        Span ksp = P.cur().sp;
        std::string key = P.ident("instantiation key");
        if (n.inst.count(key)) throw ParseError("duplicate key '" + key + "'", ksp);
        IKind kind;
        if (sig.open_keys) {
          if (first) {
            if (key != "name")
              throw ParseError("the axiom name must come first", ksp);
            kind = IKind::Name;
          } else {
            const Decl* d = prog->find(n.inst.at("name").s);
            if (!d || d->k != DeclKind::Axiom)
              throw ParseError("no axiom named '" + n.inst.at("name").s + "'", ksp);
            if (std::find(d->tyvars.begin(), d->tyvars.end(), key) != d->tyvars.end()) {
              kind = IKind::Type;
            } else {
              bool is_pred = false;
              for (const auto& [pn, ar] : d->fmetas) is_pred = is_pred || pn == key;
              if (!is_pred)
                throw ParseError(
                    "axiom '" + d->name + "' has no parameter '" + key + "'", ksp);
              kind = IKind::Pred;
            }
          }
        } else {
          auto it = sig.keys.find(key);
          if (it == sig.keys.end())
            throw ParseError(std::string("rule ") + rule_name(n.rule) + " has no key '" +
                                 key + "'",
                             ksp);
          kind = it->second;
        }
        P.expect(Tok::Eq, "'='");
        n.inst[key] = value_of(kind);
        first = false;
      } while (P.accept(Tok::Semi));
    }
    P.expect(Tok::RBracket, "']'");
  }

  void leaf_opts(ProofNode& n) {
    if (P.accept(Tok::BoxTy)) return;
    P.expect(Tok::LBracket, "'['");
    if (!P.at(Tok::RBracket)) {
      do {
        if (P.at_kw("depth")) {
          P.eat();
          P.expect(Tok::Eq, "'='");
          n.depth = static_cast<int>(P.expect(Tok::Number, "stage bound").num);
        } else {
          Span sp = P.cur().sp;
          std::string x = P.ident("bounded variable");
          for (const auto& [bn, bv] : n.bounds)
            if (bn == x) throw ParseError("duplicate bounds for '" + x + "'", sp);
          P.expect_kw("in");
          n.bounds.emplace_back(x, qbounds());
        }
      } while (P.accept(Tok::Semi));
    }
    P.expect(Tok::RBracket, "']'");
  }

  ProofNodePtr node() {
    auto n = std::make_shared<ProofNode>();
    n->sp = P.cur().sp;
    if (P.accept_kw("assume")) {
      n->k = ProofNode::K::Assume;
      P.expect(Tok::Semi, "';'");
      return n;
    }
    if (P.at_kw("semantic") || P.at_kw("strassen")) {
      n->k = P.cur().text == "semantic" ? ProofNode::K::Semantic : ProofNode::K::Strassen;
      P.eat();
      if (P.at(Tok::LBracket) || P.at(Tok::BoxTy)) leaf_opts(*n);
      P.expect(Tok::Semi, "';'");
      return n;
    }
    Token t = P.expect(Tok::Ident, "rule name");
    auto id = rule_by_name(t.text);
    if (!id) throw ParseError("unknown rule '" + t.text + "'", t.sp);
    n->rule = *id;
    if (P.at(Tok::LBracket) || P.at(Tok::BoxTy)) inst_block(*n);
    if (!P.accept(Tok::Semi)) {
      P.expect(Tok::LBrace, "'{' or ';'");
      while (!P.accept(Tok::RBrace)) n->children.push_back(node());
    }
    int ar = rule_arity(n->rule);
    if (ar >= 0 && static_cast<int>(n->children.size()) != ar)
      throw ParseError(std::string("rule ") + t.text + " takes " + std::to_string(ar) +
                           " premise(s), " + std::to_string(n->children.size()) + " given",
                       t.sp);
    return n;
  }

  Theorem theorem() {
    Theorem th;
    th.sp = P.cur().sp;
    P.expect_kw("theorem");
    th.name = P.ident("theorem name");
    Judgment j;
    j.sp = th.sp;
    if (P.accept_kw("ghol")) {
      j.k = JKind::Ghol;
    } else if (P.accept_kw("uhol")) {
      j.k = JKind::Uhol;
    } else if (P.accept_kw("rhol")) {
      j.k = JKind::Rhol;
    } else {
      P.fail("expected judgment kind: ghol, uhol or rhol");
    }
    if (P.accept_kw("const")) j.delta = ty_block();
    if (P.accept_kw("boxed")) j.sigma = fm_block();
    if (P.accept_kw("var")) j.gamma = ty_block();
    if (P.accept_kw("hyp")) j.psi = fm_block();
    if (j.k != JKind::Ghol) {
      P.expect_kw("left");
      j.t1 = elab_t(P.parse_term());
      P.expect(Tok::Colon, "':'");
      j.a1 = P.parse_type();
    }
    if (j.k == JKind::Rhol) {
      P.expect_kw("right");
      j.t2 = elab_t(P.parse_term());
      P.expect(Tok::Colon, "':'");
      j.a2 = P.parse_type();
    }
    P.expect_kw("shows");
    j.phi = elab_f(P.parse_formula());
    P.expect(Tok::Semi, "';'");
    P.expect_kw("proof");
    th.goal = std::move(j);
    th.root = node();
    return th;
  }
};

ProofScript parse_rest(Parser& P, std::shared_ptr<Program> prog, std::string path) {
  ProofScript sc;
  sc.prog = prog;
  sc.program_path = std::move(path);
  for (const auto& d : prog->decls)
    if (d.k == DeclKind::Enum)
      for (const auto& ctor : d.ctors) P.enum_ctors[ctor] = d.name;
  ScriptParser S{P, prog};
  while (!P.at_eof()) sc.thms.push_back(S.theorem());
  return sc;
}

}  // namespace

ProofScript parse_proof_script(const std::string& src, const ProgLoader& loader) {
  Parser P(src);
  P.expect_kw("program");
  Token path = P.expect(Tok::String, "program path");
  std::shared_ptr<Program> prog = loader(path.text);
  if (!prog) throw ParseError("cannot load program '" + path.text + "'", path.sp);
  return parse_rest(P, std::move(prog), path.text);
}

ProofScript parse_proof_script_text(const std::string& src, std::shared_ptr<Program> prog) {
  Parser P(src);
  if (P.at_kw("program"))
    P.fail("the program is supplied directly; drop the program item");
  return parse_rest(P, std::move(prog), "");
}

}  // namespace pglc
