#include "pglc/proof.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pglc/coupling.hpp"
#include "pglc/evalsem.hpp"
#include "pglc/logic.hpp"
#include "pglc/pretty.hpp"
#include "pglc/typesys.hpp"
#include "pglc/value.hpp"

namespace pglc {

namespace {

TermPtr V(const std::string& n) { return tm_var(n); }

FormulaPtr fsub(const FormulaPtr& f, const std::string& x, const TermPtr& t) {
  return subst_formula(f, x, t);
}

FormulaPtr fsub2(const FormulaPtr& f, const std::string& x1, const TermPtr& t1,
                 const std::string& x2, const TermPtr& t2) {
  std::map<std::string, TermPtr> m;
  m[x1] = t1;
  m[x2] = t2;
  return subst_formula_many(f, m);
}

// letbox x = r in x, the unwrapping used by the box-introduction schemas.
TermPtr unbox_of(const std::string& r) { return tm_let_box("ub", V(r), V("ub")); }

// Deep copy of a formula with schematic type variables replaced in every
// annotation (quantifier types and term annotations alike).
FormulaPtr clone_types_formula(const FormulaPtr& f, const std::map<std::string, TypePtr>& su) {
  if (!f) return f;
  auto n = std::make_shared<Formula>(*f);
  auto sub_ty = [&](const TypePtr& t) {
    TypePtr r = t;
    for (const auto& [v, rep] : su) r = r ? type_subst(r, v, rep) : r;
    return r;
  };
  n->ty = sub_ty(f->ty);
  n->t1 = f->t1 ? clone_subst_types(f->t1, su) : nullptr;
  n->t2 = f->t2 ? clone_subst_types(f->t2, su) : nullptr;
  for (auto& u : n->ds.terms) u = clone_subst_types(u, su);
  for (auto& u : n->args) u = clone_subst_types(u, su);
  if (f->bounds) {
    QBounds b = *f->bounds;
    for (auto& u : b.values) u = clone_subst_types(u, su);
    n->bounds = std::move(b);
  }
  n->f1 = clone_types_formula(f->f1, su);
  n->f2 = clone_types_formula(f->f2, su);
  return n;
}

// ---------------------------------------------------------------------------
// r1 <-> r2 renaming, binder-inclusive.  Mirrored (_R) rules are checked by
// swapping the judgment, running the _L implementation, and swapping the
// produced premises back; this rename is the involution that justifies it.
// ---------------------------------------------------------------------------

std::string swnm(const std::string& n) {
  if (n == kRet1) return kRet2;
  if (n == kRet2) return kRet1;
  return n;
}

TermPtr swt(const TermPtr& t) {
  if (!t) return t;
  auto n = std::make_shared<Term>(*t);
  if (t->k == TmKind::Var) n->name = swnm(t->name);
  n->x = swnm(t->x);
  n->y = swnm(t->y);
  n->a = swt(t->a);
  n->b = swt(t->b);
  n->c = swt(t->c);
  for (auto& v : n->ds.vars) v = swnm(v);
  for (auto& u : n->ds.terms) u = swt(u);
  for (auto& u : n->args) u = swt(u);
  return n;
}

FormulaPtr swf(const FormulaPtr& f) {
  if (!f) return f;
  auto n = std::make_shared<Formula>(*f);
  n->x1 = swnm(f->x1);
  n->x2 = swnm(f->x2);
  n->f1 = swf(f->f1);
  n->f2 = swf(f->f2);
  n->t1 = swt(f->t1);
  n->t2 = swt(f->t2);
  for (auto& v : n->ds.vars) v = swnm(v);
  for (auto& u : n->ds.terms) u = swt(u);
  for (auto& u : n->args) u = swt(u);
  if (f->bounds) {
    QBounds b = *f->bounds;
    for (auto& u : b.values) u = swt(u);
    n->bounds = std::move(b);
  }
  return n;
}

Judgment swap_judgment(const Judgment& j) {
  Judgment s = j;
  if (j.k == JKind::Rhol) {
    std::swap(s.t1, s.t2);
    std::swap(s.a1, s.a2);
  }
  s.t1 = swt(s.t1);
  s.t2 = swt(s.t2);
  s.phi = swf(s.phi);
  return s;
}

InstVal swap_inst_val(const InstVal& v) {
  InstVal w = v;
  w.t = swt(v.t);
  w.f = swf(v.f);
  w.pred_body = swf(v.pred_body);
  return w;
}

Inst swap_inst(const Inst& in) {
  Inst out;
  for (const auto& [k, v] : in) out[k] = swap_inst_val(v);
  return out;
}

// ---------------------------------------------------------------------------
// Rule tables
// ---------------------------------------------------------------------------

struct RuleMeta {
  RuleId id;
  const char* name;
  int arity;  // -1: depends on the conclusion shape
  RuleSig sig;
};

std::vector<RuleMeta> make_rule_table() {
  using K = IKind;
  auto sig = [](RuleId id, std::map<std::string, IKind> keys, bool open = false) {
    RuleSig s;
    s.id = id;
    s.keys = std::move(keys);
    s.open_keys = open;
    return s;
  };
  std::vector<RuleMeta> t;
  auto add = [&](RuleId id, const char* nm, int ar, std::map<std::string, IKind> keys,
                 bool open = false) {
    t.push_back({id, nm, ar, sig(id, std::move(keys), open)});
  };
  add(RuleId::AX_U, "AX_U", 0, {});
  add(RuleId::AX_G, "AX_G", 0, {});
  add(RuleId::CONV, "CONV", 0,
      {{"unfold_l", K::Int}, {"unfold_r", K::Int}, {"eta_l", K::Int}, {"eta_r", K::Int}});
  add(RuleId::SUBST, "SUBST", 2,
      {{"phi", K::Formula}, {"x", K::Name}, {"t", K::Term}, {"u", K::Term}});
  add(RuleId::LOEB, "LOEB", 1, {});
  add(RuleId::TOP_I, "TOP_I", 0, {});
  add(RuleId::BOT_E, "BOT_E", 1, {});
  add(RuleId::AND_I, "AND_I", 2, {});
  add(RuleId::AND_E1, "AND_E1", 1, {{"other", K::Formula}});
  add(RuleId::AND_E2, "AND_E2", 1, {{"other", K::Formula}});
  add(RuleId::OR_I1, "OR_I1", 1, {});
  add(RuleId::OR_I2, "OR_I2", 1, {});
  add(RuleId::OR_E, "OR_E", 3, {{"a", K::Formula}, {"b", K::Formula}});
  add(RuleId::IMP_I, "IMP_I", 1, {});
  add(RuleId::IMP_E, "IMP_E", 2, {{"a", K::Formula}});
  add(RuleId::NOT_I, "NOT_I", 1, {});
  add(RuleId::NOT_E, "NOT_E", 2, {{"a", K::Formula}});
  add(RuleId::FORALL_I, "FORALL_I", 1, {});
  add(RuleId::FORALL_E, "FORALL_E", 1, {{"all", K::Formula}, {"t", K::Term}});
  add(RuleId::EXISTS_I, "EXISTS_I", 1, {{"t", K::Term}});
  add(RuleId::EXISTS_E, "EXISTS_E", 2, {{"ex", K::Formula}});
  add(RuleId::LATER_I, "LATER_I", 1, {});
  add(RuleId::LATER_E, "LATER_E", 1, {{"later", K::Formula}});
  add(RuleId::LATER_APP, "LATER_APP", 2, {{"psi", K::Formula}});
  add(RuleId::BOX_I, "BOX_I", 1, {});
  add(RuleId::BOX_E, "BOX_E", 2, {{"psi", K::Formula}});
  add(RuleId::MONO2, "MONO2", 2, {{"phi", K::Formula}});
  add(RuleId::UNIT2, "UNIT2", 1, {});
  add(RuleId::MLET2, "MLET2", 2, {{"phi", K::Formula}});
  add(RuleId::MLET_L_GHOL, "MLET_L_GHOL", 2, {{"phi", K::Formula}});
  add(RuleId::MONO1, "MONO1", 2, {{"phi", K::Formula}});
  add(RuleId::UNIT1, "UNIT1", 1, {});
  add(RuleId::MLET1, "MLET1", 2, {{"phi", K::Formula}});
  add(RuleId::SUPP, "SUPP", 1, {});
  add(RuleId::AXIOM, "AXIOM", 0, {{"name", K::Name}}, /*open=*/true);
  add(RuleId::U_ABS, "U_ABS", 1, {{"phi", K::Formula}});
  add(RuleId::U_APP, "U_APP", 2, {{"phi", K::Formula}, {"phi2", K::Formula}, {"x", K::Name}});
  add(RuleId::U_VAR, "U_VAR", 1, {});
  add(RuleId::U_SUB, "U_SUB", 2, {{"phi", K::Formula}});
  add(RuleId::U_EQUIV, "U_EQUIV", 1,
      {{"lhs", K::Term}, {"unfold", K::Int}, {"eta", K::Int}});
  {
    std::map<std::string, IKind> ks;
    for (int i = 1; i <= 9; ++i) ks["inv" + std::to_string(i)] = K::Formula;
    add(RuleId::U_NEXT, "U_NEXT", -1, std::move(ks));
  }
  add(RuleId::U_PREV, "U_PREV", 1, {});
  add(RuleId::U_BOX, "U_BOX", 1, {{"phi", K::Formula}});
  add(RuleId::U_LETBOX, "U_LETBOX", 2, {{"phi", K::Formula}});
  add(RuleId::U_LETCONST, "U_LETCONST", 2, {{"phi", K::Formula}});
  add(RuleId::U_FIX, "U_FIX", 1, {});
  add(RuleId::U_CONS, "U_CONS", 3,
      {{"phih", K::Formula}, {"phit", K::Formula}, {"x", K::Name}, {"xs", K::Name}});
  add(RuleId::U_CONSHAT, "U_CONSHAT", 3,
      {{"phih", K::Formula}, {"phit", K::Formula}, {"x", K::Name}, {"xs", K::Name}});
  add(RuleId::U_HEAD, "U_HEAD", 1, {});
  add(RuleId::U_TAIL, "U_TAIL", 1, {});
  add(RuleId::U_UNIT, "U_UNIT", 1, {});
  add(RuleId::U_MLET, "U_MLET", 2, {{"phi", K::Formula}});
  add(RuleId::ABS, "ABS", 1, {{"phi", K::Formula}});
  add(RuleId::APP, "APP", 2,
      {{"phi", K::Formula}, {"phi2", K::Formula}, {"x1", K::Name}, {"x2", K::Name}});
  add(RuleId::VAR, "VAR", 1, {});
  add(RuleId::SUB, "SUB", 2, {{"phi", K::Formula}});
  add(RuleId::EQUIV, "EQUIV", 1,
      {{"lhs", K::Term}, {"rhs", K::Term}, {"unfold", K::Int}, {"eta", K::Int}});
  add(RuleId::UHOL_L, "UHOL_L", 1, {});
  add(RuleId::UHOL_R, "UHOL_R", 1, {});
  add(RuleId::EMBED, "EMBED", 2, {});
  add(RuleId::ABS_L, "ABS_L", 1, {{"phi", K::Formula}});
  add(RuleId::ABS_R, "ABS_R", 1, {{"phi", K::Formula}});
  add(RuleId::APP_L, "APP_L", 2, {{"phi", K::Formula}, {"phi2", K::Formula}, {"x1", K::Name}});
  add(RuleId::APP_R, "APP_R", 2, {{"phi", K::Formula}, {"phi2", K::Formula}, {"x1", K::Name}});
  add(RuleId::VAR_L, "VAR_L", 0, {});
  add(RuleId::VAR_R, "VAR_R", 0, {});
  add(RuleId::NEXT, "NEXT", -1, {{"inv", K::Formula}});
  add(RuleId::PREV, "PREV", 1, {});
  add(RuleId::BOX, "BOX", 1, {{"phi", K::Formula}});
  add(RuleId::LETBOX, "LETBOX", 2, {{"phi", K::Formula}});
  add(RuleId::LETCONST, "LETCONST", 2, {{"phi", K::Formula}});
  add(RuleId::FIX, "FIX", 1, {});
  add(RuleId::CONS, "CONS", 3,
      {{"phih", K::Formula},
       {"phit", K::Formula},
       {"x1", K::Name},
       {"x2", K::Name},
       {"s1", K::Name},
       {"s2", K::Name}});
  add(RuleId::HEAD, "HEAD", 1, {});
  add(RuleId::TAIL, "TAIL", 1, {});
  add(RuleId::NEXT_L, "NEXT_L", -1, {{"inv", K::Formula}});
  add(RuleId::NEXT_R, "NEXT_R", -1, {{"inv", K::Formula}});
  add(RuleId::PREV_L, "PREV_L", 1, {});
  add(RuleId::PREV_R, "PREV_R", 1, {});
  add(RuleId::BOX_L, "BOX_L", 1, {{"phi", K::Formula}, {"gamma2", K::Int}, {"psi2", K::Int}});
  add(RuleId::BOX_R, "BOX_R", 1, {{"phi", K::Formula}, {"gamma2", K::Int}, {"psi2", K::Int}});
  add(RuleId::LETBOX_L, "LETBOX_L", 2, {{"phi", K::Formula}});
  add(RuleId::LETBOX_R, "LETBOX_R", 2, {{"phi", K::Formula}});
  add(RuleId::LETCONST_L, "LETCONST_L", 2, {{"phi", K::Formula}});
  add(RuleId::LETCONST_R, "LETCONST_R", 2, {{"phi", K::Formula}});
  add(RuleId::FIX_L, "FIX_L", 1, {});
  add(RuleId::FIX_R, "FIX_R", 1, {});
  add(RuleId::CONS_L, "CONS_L", 3,
      {{"phih", K::Formula},
       {"phit", K::Formula},
       {"x1", K::Name},
       {"x2", K::Name},
       {"xs1", K::Name}});
  add(RuleId::CONS_R, "CONS_R", 3,
      {{"phih", K::Formula},
       {"phit", K::Formula},
       {"x1", K::Name},
       {"x2", K::Name},
       {"xs1", K::Name}});
  add(RuleId::HEAD_L, "HEAD_L", 1, {});
  add(RuleId::HEAD_R, "HEAD_R", 1, {});
  add(RuleId::TAIL_L, "TAIL_L", 1, {});
  add(RuleId::TAIL_R, "TAIL_R", 1, {});
  add(RuleId::UNIT_P, "UNIT_P", 1, {});
  add(RuleId::MLET_P, "MLET_P", 2, {{"phi", K::Formula}});
  add(RuleId::MLET_P_L, "MLET_P_L", 2, {{"phi", K::Formula}});
  add(RuleId::MLET_P_R, "MLET_P_R", 2, {{"phi", K::Formula}});
  add(RuleId::COUPLING, "COUPLING", 1, {});
  add(RuleId::MARKOV, "MARKOV", 3,
      {{"phi", K::Formula},
       {"x1", K::Name},
       {"x2", K::Name},
       {"xs1", K::Name},
       {"xs2", K::Name}});
  add(RuleId::MARKOV_M_N, "MARKOV_M_N", 2,
      {{"m", K::Int},
       {"n", K::Int},
       {"phi", K::Formula},
       {"x1", K::Name},
       {"x2", K::Name},
       {"w", K::Name}});
  return t;
}

const std::vector<RuleMeta>& rule_table() {
  static const std::vector<RuleMeta> t = make_rule_table();
  return t;
}

const RuleMeta& meta_of(RuleId id) {
  for (const auto& m : rule_table())
    if (m.id == id) return m;
  throw std::logic_error("unregistered rule id");
}

std::optional<RuleId> mirror_of(RuleId id) {
  switch (id) {
    case RuleId::UHOL_R: return RuleId::UHOL_L;
    case RuleId::ABS_R: return RuleId::ABS_L;
    case RuleId::APP_R: return RuleId::APP_L;
    case RuleId::VAR_R: return RuleId::VAR_L;
    case RuleId::NEXT_R: return RuleId::NEXT_L;
    case RuleId::PREV_R: return RuleId::PREV_L;
    case RuleId::BOX_R: return RuleId::BOX_L;
    case RuleId::LETBOX_R: return RuleId::LETBOX_L;
    case RuleId::LETCONST_R: return RuleId::LETCONST_L;
    case RuleId::FIX_R: return RuleId::FIX_L;
    case RuleId::CONS_R: return RuleId::CONS_L;
    case RuleId::HEAD_R: return RuleId::HEAD_L;
    case RuleId::TAIL_R: return RuleId::TAIL_L;
    case RuleId::MLET_P_R: return RuleId::MLET_P_L;
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// First-difference reporting for schema mismatches
// ---------------------------------------------------------------------------

bool diff_term(const TermPtr& a, const TermPtr& b, std::string& out);

bool diff_list(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b, std::string& out) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (diff_term(a[i], b[i], out)) return true;
  return false;
}

// Walks both trees in lockstep and reports the shallowest structural
// disagreement. Returns false when it cannot localize further.
bool diff_term(const TermPtr& a, const TermPtr& b, std::string& out) {
  if (!a || !b) {
    if (a == b) return false;
    out = (a ? pp_term(a) : "<none>") + "  vs  " + (b ? pp_term(b) : "<none>");
    return true;
  }
  if (alpha_eq_term(a, b)) return false;
  auto here = [&] {
    out = pp_term(a) + "  vs  " + pp_term(b);
    return true;
  };
  if (a->k != b->k) return here();
  if (a->name != b->name || a->nat != b->nat || a->int_ != b->int_ ||
      !(a->rat == b->rat) || a->ds.vars.size() != b->ds.vars.size() ||
      a->args.size() != b->args.size())
    return here();
  if (diff_term(a->a, b->a, out) || diff_term(a->b, b->b, out) || diff_term(a->c, b->c, out))
    return true;
  if (diff_list(a->ds.terms, b->ds.terms, out) || diff_list(a->args, b->args, out)) return true;
  return here();
}

bool diff_formula(const FormulaPtr& a, const FormulaPtr& b, std::string& out) {
  if (!a || !b) {
    if (a == b) return false;
    out = (a ? pp_formula(a) : "<none>") + "  vs  " + (b ? pp_formula(b) : "<none>");
    return true;
  }
  if (alpha_eq_formula(a, b)) return false;
  auto here = [&] {
    out = pp_formula(a) + "  vs  " + pp_formula(b);
    return true;
  };
  if (a->k != b->k) return here();
  if (a->ds.vars.size() != b->ds.vars.size() || a->args.size() != b->args.size() ||
      a->m != b->m || a->n != b->n || a->pred != b->pred)
    return here();
  if (diff_term(a->t1, b->t1, out) || diff_term(a->t2, b->t2, out)) return true;
  if (diff_list(a->ds.terms, b->ds.terms, out) || diff_list(a->args, b->args, out)) return true;
  if (diff_formula(a->f1, b->f1, out) || diff_formula(a->f2, b->f2, out)) return true;
  return here();
}

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

struct Premise {
  Judgment j;
  // COUPLING's meta-inequality premise: only a strassen or assume leaf may
  // discharge it, never a symbolic derivation or plain semantic check.
  bool coupling = false;
};

struct Kernel {
  Program& prog;
  CheckOptions opts;
  CheckReport rep;

  Kernel(Program& p, CheckOptions o) : prog(p), opts(o) {}

  [[noreturn]] void bail(const std::string& msg, Span sp) { throw ProofError(msg, sp); }

  TypeCtx ctx_of(const Judgment& j) const {
    TypeCtx c;
    c.prog = &prog;
    for (const auto& [x, ty] : j.delta) c.delta[x] = ty;
    for (const auto& [x, ty] : j.gamma) c.gamma[x] = ty;
    return c;
  }

  FormulaPtr nf(const FormulaPtr& f) { return normalize_formula(f, &prog); }
  TermPtr nt(const TermPtr& t) { return normalize(t, &prog); }
  bool feq(const FormulaPtr& a, const FormulaPtr& b) {
    return alpha_eq_formula(nf(a), nf(b));
  }
  bool teq(const TermPtr& a, const TermPtr& b) { return alpha_eq_term(nt(a), nt(b)); }

  void need_feq(const FormulaPtr& actual, const FormulaPtr& want, const std::string& what,
                Span sp) {
    FormulaPtr na = nf(actual), nw = nf(want);
    if (alpha_eq_formula(na, nw)) return;
    std::string d;
    diff_formula(na, nw, d);
    bail("schema mismatch in " + what + ": first difference: " + d, sp);
  }
  void need_teq(const TermPtr& actual, const TermPtr& want, const std::string& what, Span sp) {
    TermPtr na = nt(actual), nw = nt(want);
    if (alpha_eq_term(na, nw)) return;
    std::string d;
    diff_term(na, nw, d);
    bail("schema mismatch in " + what + ": first difference: " + d, sp);
  }

  // --- instantiation access -----------------------------------------------

  const InstVal* find_inst(const Inst& in, const std::string& k) const {
    auto it = in.find(k);
    return it == in.end() ? nullptr : &it->second;
  }
  FormulaPtr need_f(const Inst& in, const std::string& k, Span sp) {
    const InstVal* v = find_inst(in, k);
    if (!v || v->k != IKind::Formula) bail("rule needs formula value for key '" + k + "'", sp);
    return v->f;
  }
  TermPtr need_t(const Inst& in, const std::string& k, Span sp) {
    const InstVal* v = find_inst(in, k);
    if (!v || v->k != IKind::Term) bail("rule needs term value for key '" + k + "'", sp);
    return v->t;
  }
  std::string need_n(const Inst& in, const std::string& k, Span sp) {
    const InstVal* v = find_inst(in, k);
    if (!v || v->k != IKind::Name) bail("rule needs name value for key '" + k + "'", sp);
    return v->s;
  }
  std::string opt_n(const Inst& in, const std::string& k, const std::string& dflt) const {
    const InstVal* v = find_inst(in, k);
    return v && v->k == IKind::Name ? v->s : dflt;
  }
  long long opt_i(const Inst& in, const std::string& k, long long dflt) const {
    const InstVal* v = find_inst(in, k);
    return v && v->k == IKind::Int ? v->i : dflt;
  }

  // --- shape helpers -------------------------------------------------------

  const Term& want_tm(const TermPtr& t, TmKind k, const std::string& what, Span sp) {
    if (!t || t->k != k) bail("conclusion subject is not " + what, sp);
    return *t;
  }
  const Formula& want_fm(const FormulaPtr& f, FmKind k, const std::string& what, Span sp) {
    if (!f || f->k != k) bail("conclusion formula is not " + what, sp);
    return *f;
  }
  TypePtr want_ty(const TypePtr& ty, TyKind k, const std::string& what, Span sp) {
    if (!ty || ty->k != k) bail("type is not " + what + (ty ? ": " + pp_type(ty) : ""), sp);
    return ty->a;
  }
  TypePtr tsynth(const Judgment& j, const TermPtr& t, Span sp) {
    try {
      return synth(ctx_of(j), t);
    } catch (const TypeError& e) {
      bail(std::string("ill-typed instantiation: ") + e.what(), sp);
    }
  }
  void tcheck(const Judgment& j, const TermPtr& t, const TypePtr& ty, Span sp) {
    try {
      check(ctx_of(j), t, ty);
    } catch (const TypeError& e) {
      bail(std::string("ill-typed instantiation: ") + e.what(), sp);
    }
  }

  bool in_ctx(const Judgment& j, const std::string& x) const {
    for (const auto& [n, ty] : j.delta)
      if (n == x) return true;
    for (const auto& [n, ty] : j.gamma)
      if (n == x) return true;
    return false;
  }
  void fresh_binder(const Judgment& j, const std::string& x,
                    const std::vector<FormulaPtr>& avoid, Span sp) {
    if (x == kRetU || x == kRet1 || x == kRet2)
      bail("binder name '" + x + "' collides with a result variable", sp);
    if (in_ctx(j, x)) bail("binder name '" + x + "' collides with the context", sp);
    for (const auto& f : avoid)
      if (f && free_vars_formula(f).count(x))
        bail("binder name '" + x + "' occurs free in a rule formula; pick another", sp);
  }

  Judgment ghol_of(const Judgment& c, FormulaPtr phi) const {
    Judgment j = c;
    j.k = JKind::Ghol;
    j.t1 = j.t2 = nullptr;
    j.a1 = j.a2 = nullptr;
    j.phi = std::move(phi);
    return j;
  }
  Judgment uhol_of(const Judgment& c, TermPtr t, TypePtr a, FormulaPtr phi) const {
    Judgment j = c;
    j.k = JKind::Uhol;
    j.t1 = std::move(t);
    j.a1 = std::move(a);
    j.t2 = nullptr;
    j.a2 = nullptr;
    j.phi = std::move(phi);
    return j;
  }
  Judgment rhol_of(const Judgment& c, TermPtr t1, TypePtr a1, TermPtr t2, TypePtr a2,
                   FormulaPtr phi) const {
    Judgment j = c;
    j.k = JKind::Rhol;
    j.t1 = std::move(t1);
    j.a1 = std::move(a1);
    j.t2 = std::move(t2);
    j.a2 = std::move(a2);
    j.phi = std::move(phi);
    return j;
  }

  void want_kind(const Judgment& c, JKind k, RuleId id, Span sp) {
    if (c.k != k)
      bail(std::string(rule_name(id)) + " does not apply to this judgment kind", sp);
  }

  // ---------------------------------------------------------------------
  // Premise schemas.  Each case inspects the literal conclusion, consumes
  // the instantiation, and emits the premise judgments in order.
  // ---------------------------------------------------------------------

  std::vector<Premise> premises(RuleId id, const Inst& inst, const Judgment& c, Span sp);

  // --- leaves --------------------------------------------------------------

  // Collapses a sequent into one closed formula: box the constant
  // hypotheses, quantify both context zones (with script bounds), chain the
  // ordinary hypotheses, and substitute the subjects for the result
  // variables.
  FormulaPtr sequent_formula(const Judgment& j,
                             const std::vector<std::pair<std::string, QBounds>>& bounds,
                             Span sp) {
    FormulaPtr f = j.phi;
    if (j.k == JKind::Uhol) f = fsub(f, kRetU, j.t1);
    if (j.k == JKind::Rhol) f = fsub2(f, kRet1, j.t1, kRet2, j.t2);
    auto bounds_for = [&](const std::string& x) -> std::optional<QBounds> {
      for (const auto& [n, b] : bounds)
        if (n == x) return b;
      return std::nullopt;
    };
    for (auto it = j.psi.rbegin(); it != j.psi.rend(); ++it) f = fm_implies(*it, f);
    for (auto it = j.gamma.rbegin(); it != j.gamma.rend(); ++it)
      f = fm_forall(it->first, it->second, bounds_for(it->first), f);
    for (auto it = j.sigma.rbegin(); it != j.sigma.rend(); ++it)
      f = fm_implies(fm_boxf(*it), f);
    for (auto it = j.delta.rbegin(); it != j.delta.rend(); ++it)
      f = fm_forall(it->first, it->second, bounds_for(it->first), f);
    for (const auto& [n, b] : bounds) {
      bool used = false;
      for (const auto& [x, ty] : j.gamma) used = used || x == n;
      for (const auto& [x, ty] : j.delta) used = used || x == n;
      if (!used) bail("bound given for '" + n + "' which is not a context variable", sp);
    }
    return f;
  }

  // A bounds list describes its variable's domain exactly only when it spells
  // out every constructor of a finite base type.  Restricting Nat, Int or a
  // partial constructor list is an approximation and taints the verdict.
  bool bounds_cover_type(const TypePtr& ty, const QBounds& qb) {
    if (!ty || ty->k != TyKind::Base) return false;
    const Decl* d = prog.find(ty->name);
    if (!d || d->k != DeclKind::Enum) return false;
    std::set<std::string> seen;
    for (const auto& v : qb.values) {
      if (!v || v->k != TmKind::EnumLit) return false;
      seen.insert(v->name);
    }
    for (const auto& c : d->ctors)
      if (!seen.count(c)) return false;
    return true;
  }

  bool bounds_taint(const Judgment& j, const ProofNode& n) {
    for (const auto& [x, qb] : n.bounds) {
      TypePtr ty;
      for (const auto& [g, t] : j.gamma)
        if (g == x) ty = t;
      for (const auto& [g, t] : j.delta)
        if (g == x) ty = t;
      if (!bounds_cover_type(ty, qb)) return true;
    }
    return false;
  }

  void leaf_semantic(const Judgment& j, const ProofNode& n, NodeReport& nr) {
    FormulaPtr f = sequent_formula(j, n.bounds, n.sp);
    try {
      typecheck_formula(TypeCtx{&prog, {}, {}}, f);
    } catch (const TypeError& e) {
      bail(std::string("semantic leaf: ") + e.what(), n.sp);
    }
    EvalCtx cx{&prog, opts.fuel};
    bool bounded = bounds_taint(j, n);
    for (int s = 0; s <= n.depth; ++s) {
      CheckResult r;
      try {
        r = check_closed(cx, f, s);
      } catch (const CheckError& e) {
        bail(std::string("semantic leaf: ") + e.what(), n.sp);
      }
      if (!r.ok) bail("semantic check refuted at stage " + std::to_string(s), n.sp);
      bounded = bounded || r.bounded;
    }
    if (bounded) rep.bounded = true;
    nr.note = "holds at stages 0.." + std::to_string(n.depth) + (bounded ? " (bounded)" : "");
  }

  void leaf_strassen(const Judgment& j, const ProofNode& n, NodeReport& nr) {
    if (j.k != JKind::Rhol) bail("strassen leaf needs a relational judgment", n.sp);
    const Formula& dia = want_fm(j.phi, FmKind::DiamondRel, "a relational diamond", n.sp);
    if (!dia.t1 || dia.t1->k != TmKind::Var || dia.t1->name != kRet1 || !dia.t2 ||
        dia.t2->k != TmKind::Var || dia.t2->name != kRet2)
      bail("strassen leaf: diamond must range over the result variables", n.sp);
    if (!j.delta.empty() || !j.sigma.empty())
      bail("strassen leaf: constant context must be empty", n.sp);
    // Enumerate the ordinary context from the script bounds.
    std::vector<std::string> names;
    std::vector<TypePtr> tys;
    std::vector<const QBounds*> doms;
    for (const auto& [x, ty] : j.gamma) {
      names.push_back(x);
      tys.push_back(ty);
      const QBounds* b = nullptr;
      for (const auto& [bn, bv] : n.bounds)
        if (bn == x) b = &bv;
      if (!b) bail("strassen leaf: no bounds for context variable '" + x + "'", n.sp);
      doms.push_back(b);
    }
    EvalCtx cx{&prog, opts.fuel};
    long long found = 0, skipped = 0;
    bool bounded = bounds_taint(j, n);
    for (int s = 0; s <= n.depth; ++s) {
      std::vector<size_t> ix(names.size(), 0);
      bool more = true;
      while (more) {
        Env env;
        env.stage = s;
        std::string where;
        for (size_t i = 0; i < names.size(); ++i) {
          TermPtr bt = doms[i]->values[ix[i]];
          env = env.with_gamma(names[i], eval_closed(cx, bt, s), tys[i]);
          where += (i ? ", " : "") + names[i] + " = " + pp_term(bt);
        }
        bool hyp = true;
        for (const auto& h : j.psi) {
          CheckResult r = check_formula(cx, env, h, s);
          bounded = bounded || r.bounded;
          if (!r.ok) {
            hyp = false;
            break;
          }
        }
        if (hyp) {
          ValuePtr v1 = eval(cx, env, j.t1);
          ValuePtr v2 = eval(cx, env, j.t2);
          if (v1->k != VKind::Dist || v2->k != VKind::Dist)
            bail("strassen leaf: subjects are not distributions", n.sp);
          RelationSpec R;
          R.name = "diamond body";
          FormulaPtr body = dia.f1;
          std::string b1 = dia.x1, b2 = dia.x2;
          R.holds = [&cx, env, body, b1, b2, s, &bounded](const ValuePtr& a,
                                                          const ValuePtr& b) {
            Env e = env.with_gamma(b1, a, nullptr).with_gamma(b2, b, nullptr);
            CheckResult r = check_formula(cx, e, body, s);
            bounded = bounded || r.bounded;
            return r.ok;
          };
          auto w = strassen_flow(v1->dist, v2->dist, R);
          if (!w)
            bail("strassen leaf: no coupling at stage " + std::to_string(s) +
                     (where.empty() ? "" : " with " + where),
                 n.sp);
          ++found;
        } else {
          ++skipped;
        }
        more = false;
        for (size_t i = 0; i < ix.size(); ++i) {
          if (++ix[i] < doms[i]->values.size()) {
            more = true;
            break;
          }
          ix[i] = 0;
        }
      }
    }
    if (bounded) rep.bounded = true;
    std::ostringstream os;
    os << found << " couplings found by flow";
    if (skipped) os << ", " << skipped << " cases vacuous";
    nr.note = os.str();
  }

  // --- tree walk -----------------------------------------------------------

  void run(const ProofNodePtr& node, const Judgment& expected, bool coupling, int depth) {
    if (!node) bail("missing proof node", expected.sp);
    auto t0 = std::chrono::steady_clock::now();
    NodeReport nr;
    nr.depth = depth;
    nr.judgment = pp_judgment(expected);
    size_t slot = rep.nodes.size();
    rep.nodes.push_back(nr);
    auto done = [&](NodeReport r) {
      r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                 .count();
      rep.nodes[slot] = std::move(r);
    };
    switch (node->k) {
      case ProofNode::K::Assume: {
        validate_judgment(expected, prog);
        nr.rule = "assume";
        rep.assumptions.push_back(pp_judgment(expected));
        done(nr);
        return;
      }
      case ProofNode::K::Semantic: {
        if (coupling)
          bail("a COUPLING premise must be discharged by strassen or assume", node->sp);
        nr.rule = "semantic";
        leaf_semantic(expected, *node, nr);
        done(nr);
        return;
      }
      case ProofNode::K::Strassen: {
        if (!coupling) bail("strassen leaf is only valid under COUPLING", node->sp);
        nr.rule = "strassen";
        leaf_strassen(expected, *node, nr);
        done(nr);
        return;
      }
      case ProofNode::K::Rule: {
        nr.rule = rule_name(node->rule);
        std::vector<Premise> ps = premises(node->rule, node->inst, expected, node->sp);
        if (node->children.size() != ps.size())
          bail(std::string(rule_name(node->rule)) + " expects " + std::to_string(ps.size()) +
                   " premises, proof supplies " + std::to_string(node->children.size()),
               node->sp);
        done(nr);
        for (size_t i = 0; i < ps.size(); ++i)
          run(node->children[i], ps[i].j, ps[i].coupling, depth + 1);
        return;
      }
    }
  }
};

// ---------------------------------------------------------------------------
// The rule schemas
// ---------------------------------------------------------------------------

std::vector<Premise> Kernel::premises(RuleId id, const Inst& inst, const Judgment& c, Span sp) {
  std::vector<Premise> ps;
  auto push = [&](Judgment j) {
    j.sp = sp;
    ps.push_back({std::move(j), false});
  };

  // Mirrored one-sided rules: swap, run the left implementation, swap back.
  if (auto lm = mirror_of(id)) {
    std::vector<Premise> sw = premises(*lm, swap_inst(inst), swap_judgment(c), sp);
    for (auto& p : sw) p.j = swap_judgment(p.j);
    return sw;
  }

  switch (id) {
    // ---------------- Guarded HOL: structural ----------------
    case RuleId::AX_U: {
      want_kind(c, JKind::Ghol, id, sp);
      for (const auto& h : c.psi)
        if (feq(h, c.phi)) return ps;
      bail("AX_U: conclusion is not among the hypotheses", sp);
    }
    case RuleId::AX_G: {
      want_kind(c, JKind::Ghol, id, sp);
      for (const auto& h : c.sigma)
        if (feq(h, c.phi)) return ps;
      bail("AX_G: conclusion is not among the constant hypotheses", sp);
    }
    case RuleId::CONV: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& eq = want_fm(c.phi, FmKind::Eq, "an equality", sp);
      NormOpts l, r;
      l.unfold = static_cast<int>(opt_i(inst, "unfold_l", 0));
      l.eta = static_cast<int>(opt_i(inst, "eta_l", 0));
      r.unfold = static_cast<int>(opt_i(inst, "unfold_r", 0));
      r.eta = static_cast<int>(opt_i(inst, "eta_r", 0));
      tsynth(c, eq.t1, sp);
      tsynth(c, eq.t2, sp);
      if (!equiv(eq.t1, eq.t2, &prog, l, r))
        bail("CONV: sides are not definitionally equal", sp);
      return ps;
    }
    case RuleId::SUBST: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      std::string x = need_n(inst, "x", sp);
      TermPtr t = need_t(inst, "t", sp), u = need_t(inst, "u", sp);
      need_feq(c.phi, fsub(phi, x, u), "SUBST conclusion", sp);
      push(ghol_of(c, fsub(phi, x, t)));
      push(ghol_of(c, fm_eq(t, u)));
      return ps;
    }
    case RuleId::LOEB: {
      want_kind(c, JKind::Ghol, id, sp);
      Judgment p = c;
      p.psi.push_back(fm_later(DSubst{}, c.phi));
      push(std::move(p));
      return ps;
    }

    // ---------------- Guarded HOL: connectives ----------------
    case RuleId::TOP_I: {
      want_kind(c, JKind::Ghol, id, sp);
      want_fm(c.phi, FmKind::Top, "top", sp);
      return ps;
    }
    case RuleId::BOT_E: {
      want_kind(c, JKind::Ghol, id, sp);
      push(ghol_of(c, fm_bot()));
      return ps;
    }
    case RuleId::AND_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::And, "a conjunction", sp);
      push(ghol_of(c, f.f1));
      push(ghol_of(c, f.f2));
      return ps;
    }
    case RuleId::AND_E1: {
      want_kind(c, JKind::Ghol, id, sp);
      push(ghol_of(c, fm_and(c.phi, need_f(inst, "other", sp))));
      return ps;
    }
    case RuleId::AND_E2: {
      want_kind(c, JKind::Ghol, id, sp);
      push(ghol_of(c, fm_and(need_f(inst, "other", sp), c.phi)));
      return ps;
    }
    case RuleId::OR_I1: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Or, "a disjunction", sp);
      push(ghol_of(c, f.f1));
      return ps;
    }
    case RuleId::OR_I2: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Or, "a disjunction", sp);
      push(ghol_of(c, f.f2));
      return ps;
    }
    case RuleId::OR_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr a = need_f(inst, "a", sp), b = need_f(inst, "b", sp);
      push(ghol_of(c, fm_or(a, b)));
      Judgment l = c;
      l.psi.push_back(a);
      push(std::move(l));
      Judgment r = c;
      r.psi.push_back(b);
      push(std::move(r));
      return ps;
    }
    case RuleId::IMP_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Implies, "an implication", sp);
      Judgment p = ghol_of(c, f.f2);
      p.psi.push_back(f.f1);
      push(std::move(p));
      return ps;
    }
    case RuleId::IMP_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr a = need_f(inst, "a", sp);
      push(ghol_of(c, fm_implies(a, c.phi)));
      push(ghol_of(c, a));
      return ps;
    }
    case RuleId::NOT_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Not, "a negation", sp);
      Judgment p = ghol_of(c, fm_bot());
      p.psi.push_back(f.f1);
      push(std::move(p));
      return ps;
    }
    case RuleId::NOT_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr a = need_f(inst, "a", sp);
      push(ghol_of(c, fm_not(a)));
      push(ghol_of(c, a));
      return ps;
    }
    case RuleId::FORALL_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Forall, "a universal", sp);
      fresh_binder(c, f.x1, {}, sp);
      Judgment p = ghol_of(c, f.f1);
      p.gamma.emplace_back(f.x1, f.ty);
      push(std::move(p));
      return ps;
    }
    case RuleId::FORALL_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr all = need_f(inst, "all", sp);
      TermPtr t = need_t(inst, "t", sp);
      const Formula& f = want_fm(all, FmKind::Forall, "a universal", sp);
      tcheck(c, t, f.ty, sp);
      if (f.bounds) {
        bool member = false;
        for (const auto& v : f.bounds->values) member = member || teq(t, v);
        if (!member) bail("FORALL_E: instance term is outside the quantifier bounds", sp);
      }
      need_feq(c.phi, fsub(all->f1, f.x1, t), "FORALL_E conclusion", sp);
      push(ghol_of(c, all));
      return ps;
    }
    case RuleId::EXISTS_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::Exists, "an existential", sp);
      TermPtr t = need_t(inst, "t", sp);
      tcheck(c, t, f.ty, sp);
      if (f.bounds) {
        bool member = false;
        for (const auto& v : f.bounds->values) member = member || teq(t, v);
        if (!member) bail("EXISTS_I: witness is outside the quantifier bounds", sp);
      }
      push(ghol_of(c, fsub(f.f1, f.x1, t)));
      return ps;
    }
    case RuleId::EXISTS_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr ex = need_f(inst, "ex", sp);
      const Formula& f = want_fm(ex, FmKind::Exists, "an existential", sp);
      fresh_binder(c, f.x1, {c.phi}, sp);
      push(ghol_of(c, ex));
      Judgment p = c;
      p.gamma.emplace_back(f.x1, f.ty);
      p.psi.push_back(f.f1);
      push(std::move(p));
      return ps;
    }

    // ---------------- Guarded HOL: modal ----------------
    case RuleId::LATER_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::LaterF, "a later formula", sp);
      Judgment p = ghol_of(c, f.f1);
      for (size_t i = 0; i < f.ds.vars.size(); ++i) {
        TypePtr ti = tsynth(c, f.ds.terms[i], sp);
        p.gamma.emplace_back(f.ds.vars[i], want_ty(ti, TyKind::Later, "a later type", sp));
      }
      push(std::move(p));
      return ps;
    }
    case RuleId::LATER_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr lf = need_f(inst, "later", sp);
      const Formula& f = want_fm(lf, FmKind::LaterF, "a later formula", sp);
      Judgment base = c;
      base.gamma.clear();
      base.psi.clear();
      std::map<std::string, TermPtr> sub;
      for (size_t i = 0; i < f.ds.vars.size(); ++i) {
        want_ty(tsynth(base, f.ds.terms[i], sp), TyKind::Later, "a later type", sp);
        sub[f.ds.vars[i]] = tm_prev(f.ds.terms[i]);
      }
      need_feq(c.phi, subst_formula_many(f.f1, sub), "LATER_E conclusion", sp);
      push(ghol_of(base, lf));
      return ps;
    }
    case RuleId::LATER_APP: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::LaterF, "a later formula", sp);
      FormulaPtr psif = need_f(inst, "psi", sp);
      push(ghol_of(c, fm_later(f.ds, psif)));
      Judgment p = ghol_of(c, f.f1);
      for (size_t i = 0; i < f.ds.vars.size(); ++i) {
        TypePtr ti = tsynth(c, f.ds.terms[i], sp);
        p.gamma.emplace_back(f.ds.vars[i], want_ty(ti, TyKind::Later, "a later type", sp));
      }
      p.psi.push_back(psif);
      push(std::move(p));
      return ps;
    }
    case RuleId::BOX_I: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::BoxF, "a boxed formula", sp);
      Judgment p = ghol_of(c, f.f1);
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::BOX_E: {
      want_kind(c, JKind::Ghol, id, sp);
      FormulaPtr psif = need_f(inst, "psi", sp);
      push(ghol_of(c, fm_boxf(psif)));
      Judgment p = c;
      p.sigma.push_back(psif);
      push(std::move(p));
      return ps;
    }

    // ---------------- Guarded HOL: probabilistic ----------------
    case RuleId::MONO2: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(ghol_of(c, fm_dia_rel(f.x1, f.t1, f.x2, f.t2, phi)));
      Judgment p = ghol_of(c, f.f1);
      p.gamma.emplace_back(f.x1, want_ty(tsynth(c, f.t1, sp), TyKind::Dist, "a distribution", sp));
      p.gamma.emplace_back(f.x2, want_ty(tsynth(c, f.t2, sp), TyKind::Dist, "a distribution", sp));
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::UNIT2: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      const Term& u1 = want_tm(f.t1, TmKind::MUnit, "a unit distribution", sp);
      const Term& u2 = want_tm(f.t2, TmKind::MUnit, "a unit distribution", sp);
      push(ghol_of(c, fsub2(f.f1, f.x1, u1.a, f.x2, u2.a)));
      return ps;
    }
    case RuleId::MLET2: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      const Term& m1 = want_tm(f.t1, TmKind::MLet, "a monadic binding", sp);
      const Term& m2 = want_tm(f.t2, TmKind::MLet, "a monadic binding", sp);
      if (m1.x == m2.x) bail("MLET2: rename the two bound variables apart", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(ghol_of(c, fm_dia_rel(m1.x, m1.a, m2.x, m2.a, phi)));
      Judgment p = ghol_of(c, fm_dia_rel(f.x1, m1.b, f.x2, m2.b, f.f1));
      p.gamma.emplace_back(m1.x, want_ty(tsynth(c, m1.a, sp), TyKind::Dist, "a distribution", sp));
      p.gamma.emplace_back(m2.x, want_ty(tsynth(c, m2.a, sp), TyKind::Dist, "a distribution", sp));
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::MLET_L_GHOL: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      const Term& m1 = want_tm(f.t1, TmKind::MLet, "a monadic binding", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(ghol_of(c, fm_dia_un(m1.x, m1.a, phi)));
      Judgment p = ghol_of(c, fm_dia_rel(f.x1, m1.b, f.x2, f.t2, f.f1));
      p.gamma.emplace_back(m1.x, want_ty(tsynth(c, m1.a, sp), TyKind::Dist, "a distribution", sp));
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::MONO1: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondUn, "a unary diamond", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(ghol_of(c, fm_dia_un(f.x1, f.t1, phi)));
      Judgment p = ghol_of(c, f.f1);
      p.gamma.emplace_back(f.x1, want_ty(tsynth(c, f.t1, sp), TyKind::Dist, "a distribution", sp));
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::UNIT1: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondUn, "a unary diamond", sp);
      const Term& u1 = want_tm(f.t1, TmKind::MUnit, "a unit distribution", sp);
      push(ghol_of(c, fsub(f.f1, f.x1, u1.a)));
      return ps;
    }
    case RuleId::MLET1: {
      want_kind(c, JKind::Ghol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondUn, "a unary diamond", sp);
      const Term& m1 = want_tm(f.t1, TmKind::MLet, "a monadic binding", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(ghol_of(c, fm_dia_un(m1.x, m1.a, phi)));
      Judgment p = ghol_of(c, fm_dia_un(f.x1, m1.b, f.f1));
      p.gamma.emplace_back(m1.x, want_ty(tsynth(c, m1.a, sp), TyKind::Dist, "a distribution", sp));
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::SUPP: {
      want_kind(c, JKind::Uhol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondUn, "a unary diamond", sp);
      if (!f.t1 || f.t1->k != TmKind::Var || f.t1->name != kRetU)
        bail("SUPP: diamond must range over the result variable", sp);
      want_ty(c.a1, TyKind::Dist, "a distribution type", sp);
      push(ghol_of(c, fm_dia_un(f.x1, c.t1, f.f1)));
      return ps;
    }

    // ---------------- Axiom instantiation ----------------
    case RuleId::AXIOM: {
      want_kind(c, JKind::Ghol, id, sp);
      std::string name = need_n(inst, "name", sp);
      const Decl* d = prog.find(name);
      if (!d || d->k != DeclKind::Axiom) bail("AXIOM: no axiom named '" + name + "'", sp);
      FormulaPtr f = d->formula;
      {
        std::map<std::string, TypePtr> su;
        for (const auto& tv : d->tyvars) {
          const InstVal* v = find_inst(inst, tv);
          if (!v || v->k != IKind::Type)
            bail("AXIOM: missing type argument for parameter '" + tv + "'", sp);
          su[tv] = v->ty;
        }
        if (!su.empty()) f = clone_types_formula(f, su);
      }
      for (const auto& [pn, arity] : d->fmetas) {
        const InstVal* v = find_inst(inst, pn);
        if (!v || v->k != IKind::Pred)
          bail("AXIOM: missing predicate for metavariable '" + pn + "'", sp);
        if (static_cast<int>(v->pred_params.size()) != arity)
          bail("AXIOM: predicate '" + pn + "' needs " + std::to_string(arity) + " parameters",
               sp);
        f = subst_pred_formula(f, pn, v->pred_params, v->pred_body);
      }
      for (const auto& [k, v] : inst) {
        if (k == "name") continue;
        bool known = std::find(d->tyvars.begin(), d->tyvars.end(), k) != d->tyvars.end();
        for (const auto& [pn, ar] : d->fmetas) known = known || pn == k;
        if (!known) bail("AXIOM: '" + name + "' has no parameter '" + k + "'", sp);
      }
      need_feq(c.phi, f, "AXIOM conclusion", sp);
      return ps;
    }

    // ---------------- Unary HOL core ----------------
    case RuleId::U_ABS: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& lam = want_tm(c.t1, TmKind::Lam, "a lambda", sp);
      TypePtr arg = c.a1 && c.a1->k == TyKind::Arrow ? c.a1->a : nullptr;
      TypePtr res = c.a1 && c.a1->k == TyKind::Arrow ? c.a1->b : nullptr;
      if (!arg) bail("U_ABS: subject type is not an arrow", sp);
      const Formula& q = want_fm(c.phi, FmKind::Forall, "a universal", sp);
      if (q.bounds) bail("U_ABS: conclusion quantifier must be unbounded", sp);
      if (q.x1 != lam.x) bail("U_ABS: quantifier binder must match the lambda binder", sp);
      fresh_binder(c, q.x1, {}, sp);
      if (!type_eq(q.ty, arg)) bail("U_ABS: quantifier type differs from the argument type", sp);
      const Formula& imp = want_fm(q.f1, FmKind::Implies, "an implication", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      need_feq(imp.f2, fsub(phi, kRetU, tm_app(V(kRetU), V(lam.x))), "U_ABS consequent", sp);
      Judgment p = uhol_of(c, lam.a, res, phi);
      p.gamma.emplace_back(lam.x, arg);
      p.psi.push_back(imp.f1);
      push(std::move(p));
      return ps;
    }
    case RuleId::U_APP: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& ap = want_tm(c.t1, TmKind::App, "an application", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      FormulaPtr phi2 = need_f(inst, "phi2", sp);
      std::string x = need_n(inst, "x", sp);
      fresh_binder(c, x, {phi2}, sp);
      TypePtr targ = tsynth(c, ap.b, sp);
      need_feq(c.phi, fsub(phi, x, ap.b), "U_APP conclusion", sp);
      FormulaPtr funf = fm_forall(
          x, targ, std::nullopt,
          fm_implies(fsub(phi2, kRetU, V(x)), fsub(phi, kRetU, tm_app(V(kRetU), V(x)))));
      push(uhol_of(c, ap.a, ty_arrow(targ, c.a1), funf));
      push(uhol_of(c, ap.b, targ, phi2));
      return ps;
    }
    case RuleId::U_VAR: {
      want_kind(c, JKind::Uhol, id, sp);
      want_tm(c.t1, TmKind::Var, "a variable", sp);
      push(ghol_of(c, fsub(c.phi, kRetU, c.t1)));
      return ps;
    }
    case RuleId::U_SUB: {
      want_kind(c, JKind::Uhol, id, sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(uhol_of(c, c.t1, c.a1, phi));
      push(ghol_of(c, fm_implies(fsub(phi, kRetU, c.t1), fsub(c.phi, kRetU, c.t1))));
      return ps;
    }
    case RuleId::U_EQUIV: {
      want_kind(c, JKind::Uhol, id, sp);
      TermPtr lhs = need_t(inst, "lhs", sp);
      NormOpts o;
      o.unfold = static_cast<int>(opt_i(inst, "unfold", 0));
      o.eta = static_cast<int>(opt_i(inst, "eta", 0));
      tcheck(c, lhs, c.a1, sp);
      if (!equiv(c.t1, lhs, &prog, o, o))
        bail("U_EQUIV: subject and replacement are not definitionally equal", sp);
      push(uhol_of(c, lhs, c.a1, c.phi));
      return ps;
    }

    // ---------------- Unary HOL guarded ----------------
    case RuleId::U_NEXT: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& nx = want_tm(c.t1, TmKind::Next, "a next", sp);
      TypePtr inner = want_ty(c.a1, TyKind::Later, "a later type", sp);
      const Formula& lf = want_fm(c.phi, FmKind::LaterF, "a later formula", sp);
      size_t nb = nx.ds.vars.size();
      if (lf.ds.vars.size() != nb + 1)
        bail("U_NEXT: formula must delay the bindings plus the result variable", sp);
      // Locate the result self-binding and the subject bindings by name.
      FormulaPtr invs[10];
      std::vector<TypePtr> btys(nb);
      bool saw_r = false;
      for (size_t i = 0; i < lf.ds.vars.size(); ++i) {
        const std::string& v = lf.ds.vars[i];
        if (v == kRetU) {
          if (!lf.ds.terms[i] || lf.ds.terms[i]->k != TmKind::Var ||
              lf.ds.terms[i]->name != kRetU)
            bail("U_NEXT: the result binding must be the identity", sp);
          saw_r = true;
          continue;
        }
        bool matched = false;
        for (size_t k = 0; k < nb; ++k) {
          if (nx.ds.vars[k] != v) continue;
          if (!teq(lf.ds.terms[i], nx.ds.terms[k]))
            bail("U_NEXT: delayed term for '" + v + "' differs between subject and formula", sp);
          matched = true;
        }
        if (!matched) bail("U_NEXT: formula binding '" + v + "' has no subject binding", sp);
      }
      if (!saw_r) bail("U_NEXT: formula must rebind the result variable", sp);
      for (size_t k = 0; k < nb; ++k)
        btys[k] = want_ty(tsynth(c, nx.ds.terms[k], sp), TyKind::Later, "a later type", sp);
      Judgment first = uhol_of(c, nx.a, inner, lf.f1);
      for (size_t k = 0; k < nb; ++k) {
        FormulaPtr inv = need_f(inst, "inv" + std::to_string(k + 1), sp);
        invs[k] = inv;
        first.gamma.emplace_back(nx.ds.vars[k], btys[k]);
        first.psi.push_back(fsub(inv, kRetU, V(nx.ds.vars[k])));
      }
      push(std::move(first));
      for (size_t k = 0; k < nb; ++k) {
        DSubst d;
        d.vars.push_back(kRetU);
        d.terms.push_back(V(kRetU));
        push(uhol_of(c, nx.ds.terms[k], ty_later(btys[k]), fm_later(d, invs[k])));
      }
      return ps;
    }
    case RuleId::U_PREV: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& pv = want_tm(c.t1, TmKind::Prev, "a prev", sp);
      DSubst d;
      d.vars.push_back(kRetU);
      d.terms.push_back(V(kRetU));
      Judgment p = uhol_of(c, pv.a, ty_later(c.a1), fm_later(d, c.phi));
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::U_BOX: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& bx = want_tm(c.t1, TmKind::BoxT, "a box", sp);
      TypePtr inner = want_ty(c.a1, TyKind::Box, "a boxed type", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      need_feq(c.phi, fm_boxf(fsub(phi, kRetU, unbox_of(kRetU))), "U_BOX conclusion", sp);
      Judgment p = uhol_of(c, bx.a, inner, phi);
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::U_LETBOX: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& lb = want_tm(c.t1, TmKind::LetBox, "a letbox", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bty = want_ty(tsynth(c, lb.a, sp), TyKind::Box, "a boxed type", sp);
      push(uhol_of(c, lb.a, ty_box(bty), fm_boxf(fsub(phi, kRetU, unbox_of(kRetU)))));
      if (in_ctx(c, lb.x)) bail("U_LETBOX: binder shadows the context; rename it", sp);
      Judgment p = uhol_of(c, lb.b, c.a1, c.phi);
      p.delta.emplace_back(lb.x, bty);
      p.sigma.push_back(fsub(phi, kRetU, V(lb.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::U_LETCONST: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& lc = want_tm(c.t1, TmKind::LetConst, "a letconst", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bty = tsynth(c, lc.a, sp);
      if (!is_constant(bty)) bail("U_LETCONST: bound type is not constant", sp);
      {
        TypeCtx cc = ctx_of(c);
        cc.delta[kRetU] = bty;
        if (!formula_constant(cc, phi)) bail("U_LETCONST: invariant is not constant", sp);
      }
      for (const auto& [g, ty] : c.gamma)
        if (free_vars_formula(phi).count(g))
          bail("U_LETCONST: invariant mentions the ordinary context variable '" + g + "'", sp);
      push(uhol_of(c, lc.a, bty, phi));
      if (in_ctx(c, lc.x)) bail("U_LETCONST: binder shadows the context; rename it", sp);
      Judgment p = uhol_of(c, lc.b, c.a1, c.phi);
      p.delta.emplace_back(lc.x, bty);
      p.sigma.push_back(fsub(phi, kRetU, V(lc.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::U_FIX: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& fx = want_tm(c.t1, TmKind::Fix, "a fixpoint", sp);
      if (in_ctx(c, fx.x)) bail("U_FIX: binder shadows the context; rename it", sp);
      Judgment p = uhol_of(c, fx.a, c.a1, c.phi);
      p.gamma.emplace_back(fx.x, ty_later(c.a1));
      DSubst d;
      d.vars.push_back(kRetU);
      d.terms.push_back(V(fx.x));
      p.psi.push_back(fm_later(d, c.phi));
      push(std::move(p));
      return ps;
    }
    case RuleId::U_CONS: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& cn = want_tm(c.t1, TmKind::Cons, "a cons", sp);
      TypePtr el = want_ty(c.a1, TyKind::Stream, "a stream type", sp);
      FormulaPtr ph = need_f(inst, "phih", sp), pt = need_f(inst, "phit", sp);
      std::string x = opt_n(inst, "x", "x"), xs = opt_n(inst, "xs", "xs");
      if (x == xs) bail("U_CONS: binder names must differ", sp);
      fresh_binder(c, x, {ph, pt, c.phi}, sp);
      fresh_binder(c, xs, {ph, pt, c.phi}, sp);
      push(uhol_of(c, cn.a, el, ph));
      push(uhol_of(c, cn.b, ty_later(ty_stream(el)), pt));
      FormulaPtr goal = fm_implies(
          fsub(ph, kRetU, V(x)),
          fm_implies(fsub(pt, kRetU, V(xs)), fsub(c.phi, kRetU, tm_cons(V(x), V(xs)))));
      push(ghol_of(c, fm_forall(x, el, std::nullopt,
                                fm_forall(xs, ty_later(ty_stream(el)), std::nullopt, goal))));
      return ps;
    }
    case RuleId::U_CONSHAT: {
      want_kind(c, JKind::Uhol, id, sp);
      // Subject must be the boxed-cons expansion:
      //   letbox y = u1 in letbox t = u2 in box (y :: next t)
      const Term& lb1 = want_tm(c.t1, TmKind::LetBox, "a boxed cons", sp);
      const Term& lb2 = want_tm(lb1.b, TmKind::LetBox, "a boxed cons", sp);
      const Term& bx = want_tm(lb2.b, TmKind::BoxT, "a boxed cons", sp);
      const Term& cn = want_tm(bx.a, TmKind::Cons, "a boxed cons", sp);
      const Term& nxt = want_tm(cn.b, TmKind::Next, "a boxed cons", sp);
      if (!cn.a || cn.a->k != TmKind::Var || cn.a->name != lb1.x || !nxt.ds.vars.empty() ||
          !nxt.a || nxt.a->k != TmKind::Var || nxt.a->name != lb2.x)
        bail("U_CONSHAT: subject is not the boxed cons expansion", sp);
      TypePtr sty = want_ty(c.a1, TyKind::Box, "a boxed stream type", sp);
      TypePtr el = want_ty(sty, TyKind::Stream, "a stream type", sp);
      const Formula& bf = want_fm(c.phi, FmKind::BoxF, "a boxed formula", sp);
      FormulaPtr ph = need_f(inst, "phih", sp), pt = need_f(inst, "phit", sp);
      std::string x = opt_n(inst, "x", "x"), xs = opt_n(inst, "xs", "xs");
      if (x == xs) bail("U_CONSHAT: binder names must differ", sp);
      fresh_binder(c, x, {ph, pt, c.phi}, sp);
      fresh_binder(c, xs, {ph, pt, c.phi}, sp);
      if (!is_constant(el)) bail("U_CONSHAT: element type is not constant", sp);
      {
        TypeCtx cc = ctx_of(c);
        cc.delta[kRetU] = el;
        if (!formula_constant(cc, ph)) bail("U_CONSHAT: head invariant is not constant", sp);
      }
      push(uhol_of(c, lb1.a, ty_box(el), fm_boxf(fsub(ph, kRetU, unbox_of(kRetU)))));
      push(uhol_of(c, lb2.a, ty_box(ty_stream(el)),
                   fm_boxf(fsub(pt, kRetU, unbox_of(kRetU)))));
      FormulaPtr goal = fm_implies(
          fsub(ph, kRetU, V(x)),
          fm_implies(fsub(pt, kRetU, V(xs)),
                     fsub(bf.f1, kRetU, tm_cons(V(x), tm_next(DSubst{}, V(xs))))));
      push(ghol_of(c, fm_forall(x, el, std::nullopt,
                                fm_forall(xs, ty_stream(el), std::nullopt, goal))));
      return ps;
    }
    case RuleId::U_HEAD: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& hd = want_tm(c.t1, TmKind::Head, "a head", sp);
      push(uhol_of(c, hd.a, ty_stream(c.a1), fsub(c.phi, kRetU, tm_head(V(kRetU)))));
      return ps;
    }
    case RuleId::U_TAIL: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& tl = want_tm(c.t1, TmKind::Tail, "a tail", sp);
      TypePtr st = want_ty(c.a1, TyKind::Later, "a later stream type", sp);
      want_ty(st, TyKind::Stream, "a stream type", sp);
      push(uhol_of(c, tl.a, st, fsub(c.phi, kRetU, tm_tail(V(kRetU)))));
      return ps;
    }
    case RuleId::U_UNIT: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& mu = want_tm(c.t1, TmKind::MUnit, "a unit distribution", sp);
      TypePtr el = want_ty(c.a1, TyKind::Dist, "a distribution type", sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondUn, "a unary diamond", sp);
      if (!f.t1 || f.t1->k != TmKind::Var || f.t1->name != kRetU)
        bail("U_UNIT: diamond must range over the result variable", sp);
      if (free_vars_formula(f.f1).count(kRetU))
        bail("U_UNIT: formula mentions the result variable outside the binder", sp);
      push(uhol_of(c, mu.a, el, fsub(f.f1, f.x1, V(kRetU))));
      return ps;
    }
    case RuleId::U_MLET: {
      want_kind(c, JKind::Uhol, id, sp);
      const Term& ml = want_tm(c.t1, TmKind::MLet, "a monadic binding", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr ety = want_ty(tsynth(c, ml.a, sp), TyKind::Dist, "a distribution", sp);
      if (in_ctx(c, ml.x)) bail("U_MLET: binder shadows the context; rename it", sp);
      push(uhol_of(c, ml.a, ty_dist(ety), fm_dia_un(ml.x, V(kRetU), phi)));
      Judgment p = uhol_of(c, ml.b, c.a1, c.phi);
      p.gamma.emplace_back(ml.x, ety);
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }

    // ---------------- Relational HOL core ----------------
    case RuleId::ABS: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::Lam, "a lambda", sp);
      const Term& l2 = want_tm(c.t2, TmKind::Lam, "a lambda", sp);
      if (c.a1->k != TyKind::Arrow || c.a2->k != TyKind::Arrow)
        bail("ABS: subject types are not arrows", sp);
      const Formula& q1 = want_fm(c.phi, FmKind::Forall, "a universal", sp);
      const Formula& q2 = want_fm(q1.f1, FmKind::Forall, "a nested universal", sp);
      if (q1.bounds || q2.bounds) bail("ABS: conclusion quantifiers must be unbounded", sp);
      if (q1.x1 != l1.x || q2.x1 != l2.x)
        bail("ABS: quantifier binders must match the lambda binders", sp);
      if (l1.x == l2.x) bail("ABS: rename the two lambda binders apart", sp);
      fresh_binder(c, l1.x, {}, sp);
      fresh_binder(c, l2.x, {}, sp);
      if (!type_eq(q1.ty, c.a1->a) || !type_eq(q2.ty, c.a2->a))
        bail("ABS: quantifier types differ from the argument types", sp);
      const Formula& imp = want_fm(q2.f1, FmKind::Implies, "an implication", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      need_feq(imp.f2,
               fsub2(phi, kRet1, tm_app(V(kRet1), V(l1.x)), kRet2, tm_app(V(kRet2), V(l2.x))),
               "ABS consequent", sp);
      Judgment p = rhol_of(c, l1.a, c.a1->b, l2.a, c.a2->b, phi);
      p.gamma.emplace_back(l1.x, c.a1->a);
      p.gamma.emplace_back(l2.x, c.a2->a);
      p.psi.push_back(imp.f1);
      push(std::move(p));
      return ps;
    }
    case RuleId::APP: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& a1 = want_tm(c.t1, TmKind::App, "an application", sp);
      const Term& a2 = want_tm(c.t2, TmKind::App, "an application", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      FormulaPtr phi2 = need_f(inst, "phi2", sp);
      std::string x1 = need_n(inst, "x1", sp), x2 = need_n(inst, "x2", sp);
      if (x1 == x2) bail("APP: binder names must differ", sp);
      fresh_binder(c, x1, {phi2}, sp);
      fresh_binder(c, x2, {phi2}, sp);
      TypePtr t1 = tsynth(c, a1.b, sp), t2 = tsynth(c, a2.b, sp);
      need_feq(c.phi, fsub2(phi, x1, a1.b, x2, a2.b), "APP conclusion", sp);
      FormulaPtr funf = fm_forall(
          x1, t1, std::nullopt,
          fm_forall(x2, t2, std::nullopt,
                    fm_implies(fsub2(phi2, kRet1, V(x1), kRet2, V(x2)),
                               fsub2(phi, kRet1, tm_app(V(kRet1), V(x1)), kRet2,
                                     tm_app(V(kRet2), V(x2))))));
      push(rhol_of(c, a1.a, ty_arrow(t1, c.a1), a2.a, ty_arrow(t2, c.a2), funf));
      push(rhol_of(c, a1.b, t1, a2.b, t2, phi2));
      return ps;
    }
    case RuleId::VAR: {
      want_kind(c, JKind::Rhol, id, sp);
      want_tm(c.t1, TmKind::Var, "a variable", sp);
      want_tm(c.t2, TmKind::Var, "a variable", sp);
      push(ghol_of(c, fsub2(c.phi, kRet1, c.t1, kRet2, c.t2)));
      return ps;
    }
    case RuleId::SUB: {
      want_kind(c, JKind::Rhol, id, sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      push(rhol_of(c, c.t1, c.a1, c.t2, c.a2, phi));
      push(ghol_of(c, fm_implies(fsub2(phi, kRet1, c.t1, kRet2, c.t2),
                                 fsub2(c.phi, kRet1, c.t1, kRet2, c.t2))));
      return ps;
    }
    case RuleId::EQUIV: {
      want_kind(c, JKind::Rhol, id, sp);
      TermPtr lhs = need_t(inst, "lhs", sp), rhs = need_t(inst, "rhs", sp);
      NormOpts o;
      o.unfold = static_cast<int>(opt_i(inst, "unfold", 0));
      o.eta = static_cast<int>(opt_i(inst, "eta", 0));
      tcheck(c, lhs, c.a1, sp);
      tcheck(c, rhs, c.a2, sp);
      if (!equiv(c.t1, lhs, &prog, o, o))
        bail("EQUIV: left subject and replacement are not definitionally equal", sp);
      if (!equiv(c.t2, rhs, &prog, o, o))
        bail("EQUIV: right subject and replacement are not definitionally equal", sp);
      push(rhol_of(c, lhs, c.a1, rhs, c.a2, c.phi));
      return ps;
    }
    case RuleId::UHOL_L: {
      want_kind(c, JKind::Rhol, id, sp);
      if (free_vars_formula(c.phi).count(kRetU))
        bail("UHOL_L: formula already mentions the unary result variable", sp);
      push(uhol_of(c, c.t1, c.a1, fsub2(c.phi, kRet1, V(kRetU), kRet2, c.t2)));
      return ps;
    }
    case RuleId::EMBED: {
      want_kind(c, JKind::Rhol, id, sp);
      const Formula& f = want_fm(c.phi, FmKind::And, "a conjunction", sp);
      if (free_vars_formula(f.f1).count(kRet2) || free_vars_formula(f.f2).count(kRet1))
        bail("EMBED: each conjunct may mention only its own side", sp);
      if (free_vars_formula(c.phi).count(kRetU))
        bail("EMBED: formula already mentions the unary result variable", sp);
      push(uhol_of(c, c.t1, c.a1, fsub(f.f1, kRet1, V(kRetU))));
      push(uhol_of(c, c.t2, c.a2, fsub(f.f2, kRet2, V(kRetU))));
      return ps;
    }
    case RuleId::ABS_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::Lam, "a lambda", sp);
      if (c.a1->k != TyKind::Arrow) bail("ABS_L: left subject type is not an arrow", sp);
      const Formula& q = want_fm(c.phi, FmKind::Forall, "a universal", sp);
      if (q.bounds) bail("ABS_L: conclusion quantifier must be unbounded", sp);
      if (q.x1 != l1.x) bail("ABS_L: quantifier binder must match the lambda binder", sp);
      fresh_binder(c, q.x1, {}, sp);
      if (!type_eq(q.ty, c.a1->a))
        bail("ABS_L: quantifier type differs from the argument type", sp);
      const Formula& imp = want_fm(q.f1, FmKind::Implies, "an implication", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      need_feq(imp.f2, fsub(phi, kRet1, tm_app(V(kRet1), V(l1.x))), "ABS_L consequent", sp);
      Judgment p = rhol_of(c, l1.a, c.a1->b, c.t2, c.a2, phi);
      p.gamma.emplace_back(l1.x, c.a1->a);
      p.psi.push_back(imp.f1);
      push(std::move(p));
      return ps;
    }
    case RuleId::APP_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& a1 = want_tm(c.t1, TmKind::App, "an application", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      FormulaPtr phi2 = need_f(inst, "phi2", sp);
      std::string x1 = need_n(inst, "x1", sp);
      fresh_binder(c, x1, {phi2}, sp);
      TypePtr t1 = tsynth(c, a1.b, sp);
      need_feq(c.phi, fsub(phi, x1, a1.b), "APP_L conclusion", sp);
      FormulaPtr funf =
          fm_forall(x1, t1, std::nullopt,
                    fm_implies(fsub(phi2, kRetU, V(x1)),
                               fsub(phi, kRet1, tm_app(V(kRet1), V(x1)))));
      push(rhol_of(c, a1.a, ty_arrow(t1, c.a1), c.t2, c.a2, funf));
      push(uhol_of(c, a1.b, t1, phi2));
      return ps;
    }
    case RuleId::VAR_L: {
      want_kind(c, JKind::Rhol, id, sp);
      want_tm(c.t1, TmKind::Var, "a variable", sp);
      if (free_vars_formula(c.phi).count(kRet2))
        bail("VAR_L: formula must not mention the right result variable", sp);
      FormulaPtr want = fsub(c.phi, kRet1, c.t1);
      for (const auto& h : c.psi)
        if (feq(h, want)) return ps;
      bail("VAR_L: instantiated formula is not among the hypotheses", sp);
    }

    // ---------------- Relational HOL, synchronous guarded ----------------
    case RuleId::NEXT: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& n1 = want_tm(c.t1, TmKind::Next, "a next", sp);
      const Term& n2 = want_tm(c.t2, TmKind::Next, "a next", sp);
      TypePtr in1 = want_ty(c.a1, TyKind::Later, "a later type", sp);
      TypePtr in2 = want_ty(c.a2, TyKind::Later, "a later type", sp);
      if (n1.ds.vars.size() > 1 || n2.ds.vars.size() > 1)
        bail("NEXT: at most one delayed binding per side is supported", sp);
      if (n1.ds.vars.size() != n2.ds.vars.size())
        bail("NEXT: both sides must delay the same number of bindings", sp);
      bool paired = n1.ds.vars.size() == 1;
      const Formula& lf = want_fm(c.phi, FmKind::LaterF, "a later formula", sp);
      size_t expect = 2 + (paired ? 2 : 0);
      if (lf.ds.vars.size() != expect)
        bail("NEXT: formula must delay the bindings plus both result variables", sp);
      FormulaPtr inv;
      std::string x1, x2;
      TypePtr b1, b2;
      bool saw1 = false, saw2 = false;
      if (paired) {
        x1 = n1.ds.vars[0];
        x2 = n2.ds.vars[0];
        if (x1 == x2) bail("NEXT: rename the delayed binders apart", sp);
        inv = need_f(inst, "inv", sp);
        b1 = want_ty(tsynth(c, n1.ds.terms[0], sp), TyKind::Later, "a later type", sp);
        b2 = want_ty(tsynth(c, n2.ds.terms[0], sp), TyKind::Later, "a later type", sp);
      }
      for (size_t i = 0; i < lf.ds.vars.size(); ++i) {
        const std::string& v = lf.ds.vars[i];
        const TermPtr& tm = lf.ds.terms[i];
        if (v == kRet1 || v == kRet2) {
          if (!tm || tm->k != TmKind::Var || tm->name != v)
            bail("NEXT: the result bindings must be the identity", sp);
          (v == kRet1 ? saw1 : saw2) = true;
        } else if (paired && v == x1) {
          if (!teq(tm, n1.ds.terms[0]))
            bail("NEXT: delayed term for '" + v + "' differs between subject and formula", sp);
        } else if (paired && v == x2) {
          if (!teq(tm, n2.ds.terms[0]))
            bail("NEXT: delayed term for '" + v + "' differs between subject and formula", sp);
        } else {
          bail("NEXT: formula binding '" + v + "' has no subject binding", sp);
        }
      }
      if (!saw1 || !saw2) bail("NEXT: formula must rebind both result variables", sp);
      Judgment first = rhol_of(c, n1.a, in1, n2.a, in2, lf.f1);
      if (paired) {
        first.gamma.emplace_back(x1, b1);
        first.gamma.emplace_back(x2, b2);
        first.psi.push_back(fsub2(inv, kRet1, V(x1), kRet2, V(x2)));
      }
      push(std::move(first));
      if (paired) {
        DSubst d;
        d.vars.push_back(kRet1);
        d.terms.push_back(V(kRet1));
        d.vars.push_back(kRet2);
        d.terms.push_back(V(kRet2));
        push(rhol_of(c, n1.ds.terms[0], ty_later(b1), n2.ds.terms[0], ty_later(b2),
                     fm_later(d, inv)));
      }
      return ps;
    }
    case RuleId::PREV: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& p1 = want_tm(c.t1, TmKind::Prev, "a prev", sp);
      const Term& p2 = want_tm(c.t2, TmKind::Prev, "a prev", sp);
      DSubst d;
      d.vars.push_back(kRet1);
      d.terms.push_back(V(kRet1));
      d.vars.push_back(kRet2);
      d.terms.push_back(V(kRet2));
      Judgment p = rhol_of(c, p1.a, ty_later(c.a1), p2.a, ty_later(c.a2), fm_later(d, c.phi));
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::BOX: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& b1 = want_tm(c.t1, TmKind::BoxT, "a box", sp);
      const Term& b2 = want_tm(c.t2, TmKind::BoxT, "a box", sp);
      TypePtr in1 = want_ty(c.a1, TyKind::Box, "a boxed type", sp);
      TypePtr in2 = want_ty(c.a2, TyKind::Box, "a boxed type", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      need_feq(c.phi, fm_boxf(fsub2(phi, kRet1, unbox_of(kRet1), kRet2, unbox_of(kRet2))),
               "BOX conclusion", sp);
      Judgment p = rhol_of(c, b1.a, in1, b2.a, in2, phi);
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::LETBOX: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::LetBox, "a letbox", sp);
      const Term& l2 = want_tm(c.t2, TmKind::LetBox, "a letbox", sp);
      if (l1.x == l2.x) bail("LETBOX: rename the two binders apart", sp);
      if (in_ctx(c, l1.x) || in_ctx(c, l2.x))
        bail("LETBOX: binder shadows the context; rename it", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bt1 = want_ty(tsynth(c, l1.a, sp), TyKind::Box, "a boxed type", sp);
      TypePtr bt2 = want_ty(tsynth(c, l2.a, sp), TyKind::Box, "a boxed type", sp);
      push(rhol_of(c, l1.a, ty_box(bt1), l2.a, ty_box(bt2),
                   fm_boxf(fsub2(phi, kRet1, unbox_of(kRet1), kRet2, unbox_of(kRet2)))));
      Judgment p = rhol_of(c, l1.b, c.a1, l2.b, c.a2, c.phi);
      p.delta.emplace_back(l1.x, bt1);
      p.delta.emplace_back(l2.x, bt2);
      p.sigma.push_back(fsub2(phi, kRet1, V(l1.x), kRet2, V(l2.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::LETCONST: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::LetConst, "a letconst", sp);
      const Term& l2 = want_tm(c.t2, TmKind::LetConst, "a letconst", sp);
      if (l1.x == l2.x) bail("LETCONST: rename the two binders apart", sp);
      if (in_ctx(c, l1.x) || in_ctx(c, l2.x))
        bail("LETCONST: binder shadows the context; rename it", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bt1 = tsynth(c, l1.a, sp), bt2 = tsynth(c, l2.a, sp);
      if (!is_constant(bt1) || !is_constant(bt2))
        bail("LETCONST: bound types are not constant", sp);
      {
        TypeCtx cc = ctx_of(c);
        cc.delta[kRet1] = bt1;
        cc.delta[kRet2] = bt2;
        if (!formula_constant(cc, phi)) bail("LETCONST: invariant is not constant", sp);
      }
      for (const auto& [g, ty] : c.gamma)
        if (free_vars_formula(phi).count(g))
          bail("LETCONST: invariant mentions the ordinary context variable '" + g + "'", sp);
      push(rhol_of(c, l1.a, bt1, l2.a, bt2, phi));
      Judgment p = rhol_of(c, l1.b, c.a1, l2.b, c.a2, c.phi);
      p.delta.emplace_back(l1.x, bt1);
      p.delta.emplace_back(l2.x, bt2);
      p.sigma.push_back(fsub2(phi, kRet1, V(l1.x), kRet2, V(l2.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::FIX: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& f1 = want_tm(c.t1, TmKind::Fix, "a fixpoint", sp);
      const Term& f2 = want_tm(c.t2, TmKind::Fix, "a fixpoint", sp);
      if (f1.x == f2.x) bail("FIX: rename the two binders apart", sp);
      if (in_ctx(c, f1.x) || in_ctx(c, f2.x))
        bail("FIX: binder shadows the context; rename it", sp);
      Judgment p = rhol_of(c, f1.a, c.a1, f2.a, c.a2, c.phi);
      p.gamma.emplace_back(f1.x, ty_later(c.a1));
      p.gamma.emplace_back(f2.x, ty_later(c.a2));
      DSubst d;
      d.vars.push_back(kRet1);
      d.terms.push_back(V(f1.x));
      d.vars.push_back(kRet2);
      d.terms.push_back(V(f2.x));
      p.psi.push_back(fm_later(d, c.phi));
      push(std::move(p));
      return ps;
    }
    case RuleId::CONS: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& c1 = want_tm(c.t1, TmKind::Cons, "a cons", sp);
      const Term& c2 = want_tm(c.t2, TmKind::Cons, "a cons", sp);
      TypePtr e1 = want_ty(c.a1, TyKind::Stream, "a stream type", sp);
      TypePtr e2 = want_ty(c.a2, TyKind::Stream, "a stream type", sp);
      FormulaPtr ph = need_f(inst, "phih", sp), pt = need_f(inst, "phit", sp);
      std::string x1 = opt_n(inst, "x1", "x1"), x2 = opt_n(inst, "x2", "x2");
      std::string s1 = opt_n(inst, "s1", "s1"), s2 = opt_n(inst, "s2", "s2");
      std::set<std::string> names{x1, x2, s1, s2};
      if (names.size() != 4) bail("CONS: binder names must be pairwise distinct", sp);
      for (const auto& nx : names) fresh_binder(c, nx, {ph, pt, c.phi}, sp);
      push(rhol_of(c, c1.a, e1, c2.a, e2, ph));
      push(rhol_of(c, c1.b, ty_later(ty_stream(e1)), c2.b, ty_later(ty_stream(e2)), pt));
      FormulaPtr goal = fm_implies(
          fsub2(ph, kRet1, V(x1), kRet2, V(x2)),
          fm_implies(fsub2(pt, kRet1, V(s1), kRet2, V(s2)),
                     fsub2(c.phi, kRet1, tm_cons(V(x1), V(s1)), kRet2,
                           tm_cons(V(x2), V(s2)))));
      push(ghol_of(
          c, fm_forall(x1, e1, std::nullopt,
                       fm_forall(x2, e2, std::nullopt,
                                 fm_forall(s1, ty_later(ty_stream(e1)), std::nullopt,
                                           fm_forall(s2, ty_later(ty_stream(e2)),
                                                     std::nullopt, goal))))));
      return ps;
    }
    case RuleId::HEAD: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& h1 = want_tm(c.t1, TmKind::Head, "a head", sp);
      const Term& h2 = want_tm(c.t2, TmKind::Head, "a head", sp);
      push(rhol_of(c, h1.a, ty_stream(c.a1), h2.a, ty_stream(c.a2),
                   fsub2(c.phi, kRet1, tm_head(V(kRet1)), kRet2, tm_head(V(kRet2)))));
      return ps;
    }
    case RuleId::TAIL: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& t1 = want_tm(c.t1, TmKind::Tail, "a tail", sp);
      const Term& t2 = want_tm(c.t2, TmKind::Tail, "a tail", sp);
      TypePtr s1 = want_ty(c.a1, TyKind::Later, "a later stream type", sp);
      TypePtr s2 = want_ty(c.a2, TyKind::Later, "a later stream type", sp);
      want_ty(s1, TyKind::Stream, "a stream type", sp);
      want_ty(s2, TyKind::Stream, "a stream type", sp);
      push(rhol_of(c, t1.a, s1, t2.a, s2,
                   fsub2(c.phi, kRet1, tm_tail(V(kRet1)), kRet2, tm_tail(V(kRet2)))));
      return ps;
    }

    // ---------------- Relational HOL, left one-sided ----------------
    case RuleId::NEXT_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& n1 = want_tm(c.t1, TmKind::Next, "a next", sp);
      TypePtr in1 = want_ty(c.a1, TyKind::Later, "a later type", sp);
      if (n1.ds.vars.size() > 1)
        bail("NEXT_L: at most one delayed binding is supported", sp);
      bool paired = n1.ds.vars.size() == 1;
      const Formula& lf = want_fm(c.phi, FmKind::LaterF, "a later formula", sp);
      size_t expect = 1 + (paired ? 1 : 0);
      if (lf.ds.vars.size() != expect)
        bail("NEXT_L: formula must delay the binding plus the left result variable", sp);
      FormulaPtr inv;
      std::string x1;
      TypePtr b1;
      bool saw1 = false;
      if (paired) {
        x1 = n1.ds.vars[0];
        inv = need_f(inst, "inv", sp);
        b1 = want_ty(tsynth(c, n1.ds.terms[0], sp), TyKind::Later, "a later type", sp);
      }
      for (size_t i = 0; i < lf.ds.vars.size(); ++i) {
        const std::string& v = lf.ds.vars[i];
        const TermPtr& tm = lf.ds.terms[i];
        if (v == kRet1) {
          if (!tm || tm->k != TmKind::Var || tm->name != v)
            bail("NEXT_L: the result binding must be the identity", sp);
          saw1 = true;
        } else if (paired && v == x1) {
          if (!teq(tm, n1.ds.terms[0]))
            bail("NEXT_L: delayed term for '" + v + "' differs between subject and formula",
                 sp);
        } else {
          bail("NEXT_L: formula binding '" + v + "' has no subject binding", sp);
        }
      }
      if (!saw1) bail("NEXT_L: formula must rebind the left result variable", sp);
      Judgment first = rhol_of(c, n1.a, in1, c.t2, c.a2, lf.f1);
      if (paired) {
        first.gamma.emplace_back(x1, b1);
        first.psi.push_back(fsub(inv, kRetU, V(x1)));
      }
      push(std::move(first));
      if (paired) {
        DSubst d;
        d.vars.push_back(kRetU);
        d.terms.push_back(V(kRetU));
        push(uhol_of(c, n1.ds.terms[0], ty_later(b1), fm_later(d, inv)));
      }
      return ps;
    }
    case RuleId::PREV_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& p1 = want_tm(c.t1, TmKind::Prev, "a prev", sp);
      DSubst d;
      d.vars.push_back(kRet1);
      d.terms.push_back(V(kRet1));
      Judgment p = rhol_of(c, p1.a, ty_later(c.a1), c.t2, c.a2, fm_later(d, c.phi));
      p.gamma.clear();
      p.psi.clear();
      push(std::move(p));
      return ps;
    }
    case RuleId::BOX_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& b1 = want_tm(c.t1, TmKind::BoxT, "a box", sp);
      TypePtr in1 = want_ty(c.a1, TyKind::Box, "a boxed type", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      size_t g2 = static_cast<size_t>(opt_i(inst, "gamma2", 0));
      size_t p2 = static_cast<size_t>(opt_i(inst, "psi2", 0));
      if (g2 > c.gamma.size() || p2 > c.psi.size())
        bail("BOX_L: context split exceeds the context", sp);
      std::vector<std::pair<std::string, TypePtr>> gamma2(c.gamma.end() - g2, c.gamma.end());
      std::vector<FormulaPtr> psi2(c.psi.end() - p2, c.psi.end());
      std::set<std::string> g2names;
      for (const auto& [x, ty] : gamma2) g2names.insert(x);
      std::set<std::string> fv1 = free_vars(c.t1);
      bool subset = true;
      for (const auto& v : fv1) subset = subset && g2names.count(v);
      if (subset) bail("BOX_L: left subject lies entirely inside the kept context", sp);
      std::set<std::string> gnames;
      for (const auto& [x, ty] : c.gamma) gnames.insert(x);
      for (const auto& h : psi2)
        for (const auto& v : free_vars_formula(h))
          if (gnames.count(v) && !g2names.count(v))
            bail("BOX_L: kept hypothesis mentions a dropped context variable", sp);
      need_feq(c.phi, fm_boxf(fsub(phi, kRet1, unbox_of(kRet1))), "BOX_L conclusion", sp);
      Judgment p = rhol_of(c, b1.a, in1, c.t2, c.a2, phi);
      p.gamma = gamma2;
      p.psi = psi2;
      push(std::move(p));
      return ps;
    }
    case RuleId::LETBOX_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::LetBox, "a letbox", sp);
      if (in_ctx(c, l1.x)) bail("LETBOX_L: binder shadows the context; rename it", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bt1 = want_ty(tsynth(c, l1.a, sp), TyKind::Box, "a boxed type", sp);
      push(uhol_of(c, l1.a, ty_box(bt1), fm_boxf(fsub(phi, kRetU, unbox_of(kRetU)))));
      Judgment p = rhol_of(c, l1.b, c.a1, c.t2, c.a2, c.phi);
      p.delta.emplace_back(l1.x, bt1);
      p.sigma.push_back(fsub(phi, kRetU, V(l1.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::LETCONST_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& l1 = want_tm(c.t1, TmKind::LetConst, "a letconst", sp);
      if (in_ctx(c, l1.x)) bail("LETCONST_L: binder shadows the context; rename it", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr bt1 = tsynth(c, l1.a, sp);
      if (!is_constant(bt1)) bail("LETCONST_L: bound type is not constant", sp);
      {
        TypeCtx cc = ctx_of(c);
        cc.delta[kRetU] = bt1;
        if (!formula_constant(cc, phi)) bail("LETCONST_L: invariant is not constant", sp);
      }
      for (const auto& [g, ty] : c.gamma)
        if (free_vars_formula(phi).count(g))
          bail("LETCONST_L: invariant mentions the ordinary context variable '" + g + "'", sp);
      push(uhol_of(c, l1.a, bt1, phi));
      Judgment p = rhol_of(c, l1.b, c.a1, c.t2, c.a2, c.phi);
      p.delta.emplace_back(l1.x, bt1);
      p.sigma.push_back(fsub(phi, kRetU, V(l1.x)));
      push(std::move(p));
      return ps;
    }
    case RuleId::FIX_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& f1 = want_tm(c.t1, TmKind::Fix, "a fixpoint", sp);
      if (in_ctx(c, f1.x)) bail("FIX_L: binder shadows the context; rename it", sp);
      Judgment p = rhol_of(c, f1.a, c.a1, c.t2, c.a2, c.phi);
      p.gamma.emplace_back(f1.x, ty_later(c.a1));
      DSubst d;
      d.vars.push_back(kRet1);
      d.terms.push_back(V(f1.x));
      p.psi.push_back(fm_later(d, fsub(c.phi, kRet2, c.t2)));
      push(std::move(p));
      return ps;
    }
    case RuleId::CONS_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& c1 = want_tm(c.t1, TmKind::Cons, "a cons", sp);
      TypePtr e1 = want_ty(c.a1, TyKind::Stream, "a stream type", sp);
      FormulaPtr ph = need_f(inst, "phih", sp), pt = need_f(inst, "phit", sp);
      std::string x1 = opt_n(inst, "x1", "x1"), x2 = opt_n(inst, "x2", "x2");
      std::string xs1 = opt_n(inst, "xs1", "xs1");
      std::set<std::string> names{x1, x2, xs1};
      if (names.size() != 3) bail("CONS_L: binder names must be pairwise distinct", sp);
      for (const auto& nx : names) fresh_binder(c, nx, {ph, pt, c.phi}, sp);
      push(rhol_of(c, c1.a, e1, c.t2, c.a2, ph));
      push(rhol_of(c, c1.b, ty_later(ty_stream(e1)), c.t2, c.a2, pt));
      FormulaPtr goal = fm_implies(
          fsub2(ph, kRet1, V(x1), kRet2, V(x2)),
          fm_implies(fsub2(pt, kRet1, V(xs1), kRet2, V(x2)),
                     fsub2(c.phi, kRet1, tm_cons(V(x1), V(xs1)), kRet2, V(x2))));
      push(ghol_of(c, fm_forall(x1, e1, std::nullopt,
                                fm_forall(x2, c.a2, std::nullopt,
                                          fm_forall(xs1, ty_later(ty_stream(e1)),
                                                    std::nullopt, goal)))));
      return ps;
    }
    case RuleId::HEAD_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& h1 = want_tm(c.t1, TmKind::Head, "a head", sp);
      push(rhol_of(c, h1.a, ty_stream(c.a1), c.t2, c.a2,
                   fsub(c.phi, kRet1, tm_head(V(kRet1)))));
      return ps;
    }
    case RuleId::TAIL_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& t1 = want_tm(c.t1, TmKind::Tail, "a tail", sp);
      TypePtr s1 = want_ty(c.a1, TyKind::Later, "a later stream type", sp);
      want_ty(s1, TyKind::Stream, "a stream type", sp);
      push(rhol_of(c, t1.a, s1, c.t2, c.a2, fsub(c.phi, kRet1, tm_tail(V(kRet1)))));
      return ps;
    }

    // ---------------- Relational HOL, probabilistic ----------------
    case RuleId::UNIT_P: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& u1 = want_tm(c.t1, TmKind::MUnit, "a unit distribution", sp);
      const Term& u2 = want_tm(c.t2, TmKind::MUnit, "a unit distribution", sp);
      TypePtr e1 = want_ty(c.a1, TyKind::Dist, "a distribution type", sp);
      TypePtr e2 = want_ty(c.a2, TyKind::Dist, "a distribution type", sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      if (!f.t1 || f.t1->k != TmKind::Var || f.t1->name != kRet1 || !f.t2 ||
          f.t2->k != TmKind::Var || f.t2->name != kRet2)
        bail("UNIT_P: diamond must range over the result variables", sp);
      if (free_vars_formula(f.f1).count(kRet1) || free_vars_formula(f.f1).count(kRet2))
        bail("UNIT_P: formula mentions a result variable outside the binder", sp);
      push(rhol_of(c, u1.a, e1, u2.a, e2, fsub2(f.f1, f.x1, V(kRet1), f.x2, V(kRet2))));
      return ps;
    }
    case RuleId::MLET_P: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& m1 = want_tm(c.t1, TmKind::MLet, "a monadic binding", sp);
      const Term& m2 = want_tm(c.t2, TmKind::MLet, "a monadic binding", sp);
      if (m1.x == m2.x) bail("MLET_P: rename the two bound variables apart", sp);
      if (in_ctx(c, m1.x) || in_ctx(c, m2.x))
        bail("MLET_P: binder shadows the context; rename it", sp);
      want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr e1 = want_ty(tsynth(c, m1.a, sp), TyKind::Dist, "a distribution", sp);
      TypePtr e2 = want_ty(tsynth(c, m2.a, sp), TyKind::Dist, "a distribution", sp);
      push(rhol_of(c, m1.a, ty_dist(e1), m2.a, ty_dist(e2),
                   fm_dia_rel(m1.x, V(kRet1), m2.x, V(kRet2), phi)));
      Judgment p = rhol_of(c, m1.b, c.a1, m2.b, c.a2, c.phi);
      p.gamma.emplace_back(m1.x, e1);
      p.gamma.emplace_back(m2.x, e2);
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::MLET_P_L: {
      want_kind(c, JKind::Rhol, id, sp);
      const Term& m1 = want_tm(c.t1, TmKind::MLet, "a monadic binding", sp);
      if (in_ctx(c, m1.x)) bail("MLET_P_L: binder shadows the context; rename it", sp);
      want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      TypePtr e1 = want_ty(tsynth(c, m1.a, sp), TyKind::Dist, "a distribution", sp);
      push(uhol_of(c, m1.a, ty_dist(e1), fm_dia_un(m1.x, V(kRetU), phi)));
      Judgment p = rhol_of(c, m1.b, c.a1, c.t2, c.a2, c.phi);
      p.gamma.emplace_back(m1.x, e1);
      p.psi.push_back(phi);
      push(std::move(p));
      return ps;
    }
    case RuleId::COUPLING: {
      want_kind(c, JKind::Rhol, id, sp);
      want_ty(c.a1, TyKind::Dist, "a distribution type", sp);
      want_ty(c.a2, TyKind::Dist, "a distribution type", sp);
      const Formula& f = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      if (!f.t1 || f.t1->k != TmKind::Var || f.t1->name != kRet1 || !f.t2 ||
          f.t2->k != TmKind::Var || f.t2->name != kRet2)
        bail("COUPLING: diamond must range over the result variables", sp);
      Judgment p = c;
      p.sp = sp;
      ps.push_back({std::move(p), true});
      return ps;
    }
    case RuleId::MARKOV:
    case RuleId::MARKOV_M_N: {
      want_kind(c, JKind::Rhol, id, sp);
      bool async = id == RuleId::MARKOV_M_N;
      if (async) {
        if (opt_i(inst, "m", 0) != 2 || opt_i(inst, "n", 0) != 1)
          bail("MARKOV_M_N: only the (2, 1) instance is implemented", sp);
      }
      // markov t (box h) on both sides, decomposed literally.
      const Term& ap1 = want_tm(c.t1, TmKind::App, "markov applied to a state", sp);
      const Term& ap2 = want_tm(c.t2, TmKind::App, "markov applied to a state", sp);
      const Term& hd1 = want_tm(ap1.a, TmKind::App, "markov applied to a state", sp);
      const Term& hd2 = want_tm(ap2.a, TmKind::App, "markov applied to a state", sp);
      const Term& bx1 = want_tm(ap1.b, TmKind::BoxT, "a boxed transition", sp);
      const Term& bx2 = want_tm(ap2.b, TmKind::BoxT, "a boxed transition", sp);
      TypePtr st1 = want_ty(c.a1, TyKind::Dist, "a distribution type", sp);
      TypePtr st2 = want_ty(c.a2, TyKind::Dist, "a distribution type", sp);
      TypePtr c1 = want_ty(st1, TyKind::Stream, "a stream type", sp);
      TypePtr c2 = want_ty(st2, TyKind::Stream, "a stream type", sp);
      need_teq(hd1.a, V("markov@" + pp_type(c1)), "MARKOV left chain", sp);
      need_teq(hd2.a, V("markov@" + pp_type(c2)), "MARKOV right chain", sp);
      const Formula& dia = want_fm(c.phi, FmKind::DiamondRel, "a relational diamond", sp);
      if (!dia.t1 || dia.t1->k != TmKind::Var || dia.t1->name != kRet1 || !dia.t2 ||
          dia.t2->k != TmKind::Var || dia.t2->name != kRet2)
        bail("MARKOV: diamond must range over the result variables", sp);
      FormulaPtr phi = need_f(inst, "phi", sp);
      std::string x1 = opt_n(inst, "x1", "x1"), x2 = opt_n(inst, "x2", "x2");
      TermPtr i1 = hd1.b, i2 = hd2.b, h1 = bx1.a, h2 = bx2.a;
      TypePtr step1 = ty_arrow(c1, ty_dist(c1)), step2 = ty_arrow(c2, ty_dist(c2));
      if (!async) {
        std::string xs1 = opt_n(inst, "xs1", "xs1"), xs2 = opt_n(inst, "xs2", "xs2");
        std::set<std::string> names{x1, x2, xs1, xs2};
        if (names.size() != 4) bail("MARKOV: binder names must be pairwise distinct", sp);
        FormulaPtr phip = dia.f1;  // stream invariant, over the diamond binders
        std::string y1 = dia.x1, y2 = dia.x2;
        for (const auto& nx : names) {
          fresh_binder(c, nx, {phi, phip}, sp);
          if (nx == y1 || nx == y2)
            bail("MARKOV: binder '" + nx + "' collides with a diamond binder", sp);
        }
        push(rhol_of(c, i1, c1, i2, c2, phi));
        FormulaPtr psi3 = fm_forall(
            x1, c1, std::nullopt,
            fm_forall(x2, c2, std::nullopt,
                      fm_implies(fsub2(phi, kRet1, V(x1), kRet2, V(x2)),
                                 fm_dia_rel(y1, tm_app(V(kRet1), V(x1)), y2,
                                            tm_app(V(kRet2), V(x2)),
                                            fsub2(phi, kRet1, V(y1), kRet2, V(y2))))));
        push(rhol_of(c, h1, step1, h2, step2, psi3));
        DSubst d;
        d.vars.push_back(y1);
        d.terms.push_back(V(xs1));
        d.vars.push_back(y2);
        d.terms.push_back(V(xs2));
        FormulaPtr psi4 = fm_forall(
            x1, c1, std::nullopt,
            fm_forall(
                x2, c2, std::nullopt,
                fm_forall(
                    xs1, ty_later(ty_stream(c1)), std::nullopt,
                    fm_forall(
                        xs2, ty_later(ty_stream(c2)), std::nullopt,
                        fm_implies(
                            fsub2(phi, kRet1, V(x1), kRet2, V(x2)),
                            fm_implies(fm_later(d, phip),
                                       fsub2(phip, y1, tm_cons(V(x1), V(xs1)), y2,
                                             tm_cons(V(x2), V(xs2)))))))));
        push(ghol_of(c, psi4));
        return ps;
      }
      // Asynchronous (2, 1): the left chain advances twice per step.
      const Formula& all = want_fm(dia.f1, FmKind::AllStream, "a prefix quantifier", sp);
      if (all.m != 2 || all.n != 1)
        bail("MARKOV_M_N: conclusion prefix widths must be (2, 1)", sp);
      if (!all.t1 || all.t1->k != TmKind::Var || all.t1->name != dia.x1 || !all.t2 ||
          all.t2->k != TmKind::Var || all.t2->name != dia.x2)
        bail("MARKOV_M_N: prefix quantifier must range over the diamond binders", sp);
      FormulaPtr body = all.f1;
      std::string z1 = all.x1, z2 = all.x2;
      std::string w = opt_n(inst, "w", "w");
      std::set<std::string> names{x1, x2, w};
      if (names.size() != 3) bail("MARKOV_M_N: binder names must be pairwise distinct", sp);
      for (const auto& nx : names) {
        fresh_binder(c, nx, {phi, body}, sp);
        if (nx == z1 || nx == z2)
          bail("MARKOV_M_N: binder '" + nx + "' collides with a prefix binder", sp);
      }
      need_feq(phi, body, "MARKOV_M_N invariant", sp);
      push(rhol_of(c, i1, c1, i2, c2, fsub2(phi, z1, V(kRet1), z2, V(kRet2))));
      TermPtr dbl =
          tm_lam(x1, c1, tm_mlet(w, tm_app(h1, V(x1)), tm_app(h1, V(w))));
      FormulaPtr psi = fm_forall(
          x1, c1, std::nullopt,
          fm_forall(x2, c2, std::nullopt,
                    fm_implies(fsub2(phi, z1, V(x1), z2, V(x2)),
                               fm_dia_rel(z1, tm_app(V(kRet1), V(x1)), z2,
                                          tm_app(V(kRet2), V(x2)), phi))));
      push(rhol_of(c, dbl, step1, h2, step2, psi));
      return ps;
    }

    default:
      bail(std::string("rule ") + rule_name(id) + " is not implemented", sp);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

const char* rule_name(RuleId id) { return meta_of(id).name; }

std::optional<RuleId> rule_by_name(const std::string& name) {
  for (const auto& m : rule_table())
    if (name == m.name) return m.id;
  return std::nullopt;
}

const RuleSig& rule_sig(RuleId id) { return meta_of(id).sig; }

int rule_arity(RuleId id) { return meta_of(id).arity; }

void validate_judgment(const Judgment& j, const Program& prog) {
  TypeCtx ctx;
  ctx.prog = &prog;
  std::set<std::string> seen;
  auto add_name = [&](const std::string& x) {
    if (x == kRetU || x == kRet1 || x == kRet2)
      throw ProofError("context binds the reserved name '" + x + "'", j.sp);
    if (!seen.insert(x).second)
      throw ProofError("duplicate context variable '" + x + "'", j.sp);
  };
  for (const auto& [x, ty] : j.delta) {
    add_name(x);
    ctx.delta[x] = ty;
  }
  for (const auto& [x, ty] : j.gamma) {
    add_name(x);
    ctx.gamma[x] = ty;
  }
  // Quantifier binders over the reserved names would silently shadow the
  // result variables; refuse them everywhere in the judgment's formulas.
  std::function<void(const FormulaPtr&)> scan = [&](const FormulaPtr& f) {
    if (!f) return;
    if (f->k == FmKind::Forall || f->k == FmKind::Exists || f->k == FmKind::DiamondRel ||
        f->k == FmKind::DiamondUn || f->k == FmKind::AllStream) {
      for (const std::string& b : {f->x1, f->x2})
        if (b == kRetU || b == kRet1 || b == kRet2)
          throw ProofError("formula binds the reserved name '" + b + "'", f->sp);
    }
    scan(f->f1);
    scan(f->f2);
  };
  try {
    for (const auto& s : j.sigma) {
      scan(s);
      typecheck_formula(ctx.gamma_cleared(), s);
    }
    for (const auto& p : j.psi) {
      scan(p);
      typecheck_formula(ctx, p);
    }
    if (j.k != JKind::Ghol) {
      if (!j.t1 || !j.a1) throw ProofError("judgment is missing its subject", j.sp);
      check(ctx, j.t1, j.a1);
    }
    if (j.k == JKind::Rhol) {
      if (!j.t2 || !j.a2) throw ProofError("judgment is missing its right subject", j.sp);
      check(ctx, j.t2, j.a2);
    }
    scan(j.phi);
    TypeCtx phictx = ctx;
    if (j.k == JKind::Uhol) phictx.gamma[kRetU] = j.a1;
    if (j.k == JKind::Rhol) {
      phictx.gamma[kRet1] = j.a1;
      phictx.gamma[kRet2] = j.a2;
    }
    typecheck_formula(phictx, j.phi);
  } catch (const TypeError& e) {
    throw ProofError(std::string("judgment does not typecheck: ") + e.what(), j.sp);
  }
}

CheckReport check_proof(const ProofNodePtr& root, const Judgment& goal, Program& prog,
                        const CheckOptions& opts) {
  Kernel k(prog, opts);
  try {
    validate_judgment(goal, prog);
    k.run(root, goal, false, 0);
    k.rep.accepted = true;
  } catch (const ProofError& e) {
    k.rep.accepted = false;
    k.rep.error = e.what();
    k.rep.error_sp = e.sp;
  } catch (const std::exception& e) {
    k.rep.accepted = false;
    k.rep.error = e.what();
  }
  return k.rep;
}

EmbedResult embed_uhol(const Judgment& u1, const ProofNodePtr& p1, const Judgment& u2,
                       const ProofNodePtr& p2) {
  if (u1.k != JKind::Uhol || u2.k != JKind::Uhol)
    throw ProofError("embedding needs two unary judgments", u1.sp);
  auto same_tys = [](const std::vector<std::pair<std::string, TypePtr>>& a,
                     const std::vector<std::pair<std::string, TypePtr>>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].first != b[i].first || !type_eq(a[i].second, b[i].second)) return false;
    return true;
  };
  auto same_fms = [](const std::vector<FormulaPtr>& a, const std::vector<FormulaPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!alpha_eq_formula(a[i], b[i])) return false;
    return true;
  };
  if (!same_tys(u1.delta, u2.delta) || !same_tys(u1.gamma, u2.gamma) ||
      !same_fms(u1.sigma, u2.sigma) || !same_fms(u1.psi, u2.psi))
    throw ProofError("embedding: the two judgments have different contexts", u1.sp);
  Judgment r = u1;
  r.k = JKind::Rhol;
  r.t2 = u2.t1;
  r.a2 = u2.a1;
  r.phi = fm_and(fsub(u1.phi, kRetU, V(kRet1)), fsub(u2.phi, kRetU, V(kRet2)));
  auto root = std::make_shared<ProofNode>();
  root->k = ProofNode::K::Rule;
  root->rule = RuleId::EMBED;
  root->children = {p1, p2};
  root->sp = u1.sp;
  return EmbedResult{std::move(r), std::move(root)};
}

bool soundness_probe(const Judgment& j, int depth, Program& prog,
                     const std::vector<std::pair<std::string, QBounds>>& bounds,
                     long long fuel) {
  if (!j.delta.empty() || !j.sigma.empty() || !j.gamma.empty() || !j.psi.empty())
    throw ProofError("soundness probe needs a closed judgment", j.sp);
  Kernel k(prog, CheckOptions{fuel});
  FormulaPtr f = k.sequent_formula(j, bounds, j.sp);
  EvalCtx cx{&prog, fuel};
  for (int s = 0; s <= depth; ++s)
    if (!check_closed(cx, f, s).ok) return false;
  return true;
}

}  // namespace pglc
