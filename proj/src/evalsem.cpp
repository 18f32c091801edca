#include "pglc/evalsem.hpp"

#include <algorithm>
#include <functional>

#include "pglc/pretty.hpp"

namespace pglc {

namespace {

void fv_term(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out);

void fv_under(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out,
              const std::vector<std::string>& binders) {
  std::vector<std::string> added;
  for (const auto& b : binders)
    if (bound.insert(b).second) added.push_back(b);
  fv_term(t, bound, out);
  for (const auto& b : added) bound.erase(b);
}

void fv_term(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!t) return;
  switch (t->k) {
    case TmKind::Var:
      if (!bound.count(t->name)) out.insert(t->name);
      return;
    case TmKind::Inst:
    case TmKind::NatLit:
    case TmKind::IntLit:
    case TmKind::RatLit:
    case TmKind::EnumLit:
      return;
    case TmKind::Lam:
    case TmKind::Fix:
      fv_under(t->a, bound, out, {t->x});
      return;
    case TmKind::CaseSum:
      fv_term(t->a, bound, out);
      fv_under(t->b, bound, out, {t->x});
      fv_under(t->c, bound, out, {t->y});
      return;
    case TmKind::CaseNat:
      fv_term(t->a, bound, out);
      fv_term(t->b, bound, out);
      fv_under(t->c, bound, out, {t->y});
      return;
    case TmKind::Next: {
      for (const auto& bt : t->ds.terms) fv_term(bt, bound, out);
      fv_under(t->a, bound, out, t->ds.vars);
      return;
    }
    case TmKind::LetBox:
    case TmKind::LetConst:
    case TmKind::MLet:
      fv_term(t->a, bound, out);
      fv_under(t->b, bound, out, {t->x});
      return;
    default:
      fv_term(t->a, bound, out);
      fv_term(t->b, bound, out);
      fv_term(t->c, bound, out);
      for (const auto& u : t->args) fv_term(u, bound, out);
      return;
  }
}

void fv_fm(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!f) return;
  auto under = [&](const FormulaPtr& g, const std::vector<std::string>& binders) {
    std::vector<std::string> added;
    for (const auto& b : binders)
      if (!b.empty() && bound.insert(b).second) added.push_back(b);
    fv_fm(g, bound, out);
    for (const auto& b : added) bound.erase(b);
  };
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return;
    case FmKind::And:
    case FmKind::Or:
    case FmKind::Implies:
      fv_fm(f->f1, bound, out);
      fv_fm(f->f2, bound, out);
      return;
    case FmKind::Not:
    case FmKind::BoxF:
      fv_fm(f->f1, bound, out);
      return;
    case FmKind::Forall:
    case FmKind::Exists:
      under(f->f1, {f->x1});
      return;
    case FmKind::Eq:
    case FmKind::Leq:
      fv_term(f->t1, bound, out);
      fv_term(f->t2, bound, out);
      return;
    case FmKind::LaterF:
      for (const auto& bt : f->ds.terms) fv_term(bt, bound, out);
      under(f->f1, f->ds.vars);
      return;
    case FmKind::DiamondRel:
      fv_term(f->t1, bound, out);
      fv_term(f->t2, bound, out);
      under(f->f1, {f->x1, f->x2});
      return;
    case FmKind::DiamondUn:
      fv_term(f->t1, bound, out);
      under(f->f1, {f->x1});
      return;
    case FmKind::AllStream:
      fv_term(f->t1, bound, out);
      fv_term(f->t2, bound, out);
      under(f->f1, f->t2 ? std::vector<std::string>{f->x1, f->x2}
                         : std::vector<std::string>{f->x1});
      return;
    case FmKind::PredApp:
      for (const auto& u : f->args) fv_term(u, bound, out);
      return;
  }
}

std::string fresh_name(std::string base, const std::set<std::string>& avoid) {
  while (avoid.count(base)) base += "'";
  return base;
}

using SubMap = std::map<std::string, TermPtr>;

std::set<std::string> images_fv(const SubMap& sub) {
  std::set<std::string> out;
  for (const auto& [k, v] : sub) {
    auto fv = free_vars(v);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

TermPtr sub_t(const TermPtr& t, const SubMap& sub);
FormulaPtr sub_f(const FormulaPtr& f, const SubMap& sub);

// Prepares one binder for substitution under it: removes a shadowed mapping
// and renames the binder when it would capture a substituted image.
struct BinderPrep {
  std::string name;
  SubMap sub;
};

BinderPrep prep_binder(const std::string& x, const SubMap& sub, const TermPtr& body) {
  SubMap inner = sub;
  inner.erase(x);
  if (inner.empty()) return {x, inner};
  auto avoid = images_fv(inner);
  if (!avoid.count(x)) return {x, inner};
  for (const auto& [k, v] : inner) avoid.insert(k);
  auto bfv = free_vars(body);
  avoid.insert(bfv.begin(), bfv.end());
  std::string nx = fresh_name(x, avoid);
  inner[x] = tm_var(nx);
  return {nx, inner};
}

// Rebuilding a node through the factories loses the recorded type
// annotations, which evaluation consults for literal coercion and operator
// narrowing. These helpers carry them over to the rebuilt node; filling is
// sound because substitution and rewriting preserve the term's type.
TermPtr keep_tm(const TermPtr& r, const TermPtr& t) {
  if (!r || !t || r == t) return r;
  if (!r->ty && t->ty) r->ty = t->ty;
  if (r->k == t->k) {
    if (!r->binder_ty && t->binder_ty) r->binder_ty = t->binder_ty;
    if (!r->binder_ty2 && t->binder_ty2) r->binder_ty2 = t->binder_ty2;
    if (r->k == TmKind::Next && r->ds.var_types.empty() && r->ds.vars == t->ds.vars)
      r->ds.var_types = t->ds.var_types;
  }
  return r;
}

FormulaPtr keep_fm(const FormulaPtr& r, const FormulaPtr& f) {
  if (!r || !f || r == f || r->k != f->k) return r;
  if (!r->rel_ty && f->rel_ty) r->rel_ty = f->rel_ty;
  if (r->k == FmKind::LaterF && r->ds.var_types.empty() && r->ds.vars == f->ds.vars)
    r->ds.var_types = f->ds.var_types;
  return r;
}

TermPtr sub_t_node(const TermPtr& t, const SubMap& sub) {
  if (!t || sub.empty()) return t;
  switch (t->k) {
    case TmKind::Var: {
      auto it = sub.find(t->name);
      return it == sub.end() ? t : it->second;
    }
    case TmKind::Inst:
    case TmKind::NatLit:
    case TmKind::IntLit:
    case TmKind::RatLit:
    case TmKind::EnumLit:
      return t;
    case TmKind::Lam: {
      auto p = prep_binder(t->x, sub, t->a);
      return tm_lam(p.name, t->ann, sub_t(t->a, p.sub), t->sp);
    }
    case TmKind::Fix: {
      auto p = prep_binder(t->x, sub, t->a);
      return tm_fix(p.name, t->ann, sub_t(t->a, p.sub), t->sp);
    }
    case TmKind::Succ:
      return tm_succ(sub_t(t->a, sub), t->sp);
    case TmKind::App:
      return tm_app(sub_t(t->a, sub), sub_t(t->b, sub), t->sp);
    case TmKind::Pair:
      return tm_pair(sub_t(t->a, sub), sub_t(t->b, sub), t->sp);
    case TmKind::Fst:
      return tm_fst(sub_t(t->a, sub), t->sp);
    case TmKind::Snd:
      return tm_snd(sub_t(t->a, sub), t->sp);
    case TmKind::Inl:
      return tm_inl(sub_t(t->a, sub), t->ann, t->sp);
    case TmKind::Inr:
      return tm_inr(sub_t(t->a, sub), t->ann, t->sp);
    case TmKind::CaseSum: {
      auto pl = prep_binder(t->x, sub, t->b);
      auto pr = prep_binder(t->y, sub, t->c);
      return tm_case_sum(sub_t(t->a, sub), pl.name, sub_t(t->b, pl.sub), pr.name,
                         sub_t(t->c, pr.sub), t->sp);
    }
    case TmKind::CaseNat: {
      auto p = prep_binder(t->y, sub, t->c);
      return tm_case_nat(sub_t(t->a, sub), sub_t(t->b, sub), p.name, sub_t(t->c, p.sub), t->sp);
    }
    case TmKind::Cons:
      return tm_cons(sub_t(t->a, sub), sub_t(t->b, sub), t->sp);
    case TmKind::Head:
      return tm_head(sub_t(t->a, sub), t->sp);
    case TmKind::Tail:
      return tm_tail(sub_t(t->a, sub), t->sp);
    case TmKind::Next: {
      DSubst ds;
      for (const auto& bt : t->ds.terms) ds.terms.push_back(sub_t(bt, sub));
      // The binding variables scope over the body only; rename each against
      // the images as for any other binder.
      SubMap inner = sub;
      for (const auto& v : t->ds.vars) inner.erase(v);
      std::set<std::string> avoid = images_fv(inner);
      for (const auto& [k, v] : inner) avoid.insert(k);
      auto bfv = free_vars(t->a);
      avoid.insert(bfv.begin(), bfv.end());
      for (const auto& v : t->ds.vars) {
        if (inner.count(v) || !avoid.count(v)) {
          ds.vars.push_back(v);
        } else {
          std::string nv = fresh_name(v, avoid);
          avoid.insert(nv);
          inner[v] = tm_var(nv);
          ds.vars.push_back(nv);
        }
      }
      return tm_next(std::move(ds), sub_t(t->a, inner), t->sp);
    }
    case TmKind::Prev:
      return tm_prev(sub_t(t->a, sub), t->sp);
    case TmKind::BoxT:
      return tm_box(sub_t(t->a, sub), t->sp);
    case TmKind::LetBox: {
      auto p = prep_binder(t->x, sub, t->b);
      return tm_let_box(p.name, sub_t(t->a, sub), sub_t(t->b, p.sub), t->sp);
    }
    case TmKind::LetConst: {
      auto p = prep_binder(t->x, sub, t->b);
      return tm_let_const(p.name, sub_t(t->a, sub), sub_t(t->b, p.sub), t->sp);
    }
    case TmKind::MUnit:
      return tm_munit(sub_t(t->a, sub), t->sp);
    case TmKind::MLet: {
      auto p = prep_binder(t->x, sub, t->b);
      return tm_mlet(p.name, sub_t(t->a, sub), sub_t(t->b, p.sub), t->sp);
    }
    case TmKind::PrimDist:
      return t;  // carries literals only
    case TmKind::PrimOp: {
      std::vector<TermPtr> args;
      for (const auto& u : t->args) args.push_back(sub_t(u, sub));
      return tm_primop(t->name, std::move(args), t->sp);
    }
  }
  return t;
}

TermPtr sub_t(const TermPtr& t, const SubMap& sub) { return keep_tm(sub_t_node(t, sub), t); }

FormulaPtr sub_f_node(const FormulaPtr& f, const SubMap& sub) {
  if (!f || sub.empty()) return f;
  auto prep_fm = [](const std::string& x, const SubMap& s, const FormulaPtr& body) {
    SubMap inner = s;
    inner.erase(x);
    BinderPrep out{x, inner};
    if (inner.empty() || x.empty()) return out;
    auto avoid = images_fv(inner);
    if (!avoid.count(x)) return out;
    for (const auto& [k, v] : inner) avoid.insert(k);
    auto bfv = free_vars_formula(body);
    avoid.insert(bfv.begin(), bfv.end());
    out.name = fresh_name(x, avoid);
    out.sub[x] = tm_var(out.name);
    return out;
  };
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return f;
    case FmKind::And:
      return fm_and(sub_f(f->f1, sub), sub_f(f->f2, sub), f->sp);
    case FmKind::Or:
      return fm_or(sub_f(f->f1, sub), sub_f(f->f2, sub), f->sp);
    case FmKind::Implies:
      return fm_implies(sub_f(f->f1, sub), sub_f(f->f2, sub), f->sp);
    case FmKind::Not:
      return fm_not(sub_f(f->f1, sub), f->sp);
    case FmKind::BoxF:
      return fm_boxf(sub_f(f->f1, sub), f->sp);
    case FmKind::Forall:
    case FmKind::Exists: {
      auto p = prep_fm(f->x1, sub, f->f1);
      auto body = sub_f(f->f1, p.sub);
      return f->k == FmKind::Forall ? fm_forall(p.name, f->ty, f->bounds, body, f->sp)
                                    : fm_exists(p.name, f->ty, f->bounds, body, f->sp);
    }
    case FmKind::Eq:
    case FmKind::Leq: {
      auto g = f->k == FmKind::Eq ? fm_eq(sub_t(f->t1, sub), sub_t(f->t2, sub), f->sp)
                                  : fm_leq(sub_t(f->t1, sub), sub_t(f->t2, sub), f->sp);
      g->rel_ty = f->rel_ty;
      return g;
    }
    case FmKind::LaterF: {
      DSubst ds;
      for (const auto& bt : f->ds.terms) ds.terms.push_back(sub_t(bt, sub));
      SubMap inner = sub;
      for (const auto& v : f->ds.vars) inner.erase(v);
      std::set<std::string> avoid = images_fv(inner);
      for (const auto& [k, v] : inner) avoid.insert(k);
      auto bfv = free_vars_formula(f->f1);
      avoid.insert(bfv.begin(), bfv.end());
      for (const auto& v : f->ds.vars) {
        if (inner.count(v) || !avoid.count(v)) {
          ds.vars.push_back(v);
        } else {
          std::string nv = fresh_name(v, avoid);
          avoid.insert(nv);
          inner[v] = tm_var(nv);
          ds.vars.push_back(nv);
        }
      }
      return fm_later(std::move(ds), sub_f(f->f1, inner), f->sp);
    }
    case FmKind::DiamondRel: {
      auto t1 = sub_t(f->t1, sub);
      auto t2 = sub_t(f->t2, sub);
      SubMap inner = sub;
      inner.erase(f->x1);
      inner.erase(f->x2);
      std::string x1 = f->x1, x2 = f->x2;
      if (!inner.empty()) {
        auto avoid = images_fv(inner);
        for (const auto& [k, v] : inner) avoid.insert(k);
        auto bfv = free_vars_formula(f->f1);
        avoid.insert(bfv.begin(), bfv.end());
        if (avoid.count(x1)) {
          x1 = fresh_name(f->x1, avoid);
          avoid.insert(x1);
          inner[f->x1] = tm_var(x1);
        }
        if (avoid.count(x2)) {
          x2 = fresh_name(f->x2, avoid);
          inner[f->x2] = tm_var(x2);
        }
      }
      return fm_dia_rel(x1, t1, x2, t2, sub_f(f->f1, inner), f->sp);
    }
    case FmKind::DiamondUn: {
      auto t1 = sub_t(f->t1, sub);
      auto p = prep_fm(f->x1, sub, f->f1);
      return fm_dia_un(p.name, t1, sub_f(f->f1, p.sub), f->sp);
    }
    case FmKind::AllStream: {
      auto t1 = sub_t(f->t1, sub);
      auto t2 = f->t2 ? sub_t(f->t2, sub) : nullptr;
      SubMap inner = sub;
      inner.erase(f->x1);
      if (!f->x2.empty()) inner.erase(f->x2);
      std::string x1 = f->x1, x2 = f->x2;
      if (!inner.empty()) {
        auto avoid = images_fv(inner);
        for (const auto& [k, v] : inner) avoid.insert(k);
        auto bfv = free_vars_formula(f->f1);
        avoid.insert(bfv.begin(), bfv.end());
        if (avoid.count(x1)) {
          x1 = fresh_name(f->x1, avoid);
          avoid.insert(x1);
          inner[f->x1] = tm_var(x1);
        }
        if (!x2.empty() && avoid.count(x2)) {
          x2 = fresh_name(f->x2, avoid);
          inner[f->x2] = tm_var(x2);
        }
      }
      auto body = sub_f(f->f1, inner);
      return t2 ? fm_all_rel(f->m, f->n, t1, t2, x1, x2, body, f->sp)
                : fm_all_un(t1, x1, body, f->sp);
    }
    case FmKind::PredApp: {
      std::vector<TermPtr> args;
      for (const auto& u : f->args) args.push_back(sub_t(u, sub));
      return fm_pred_app(f->pred, std::move(args), f->sp);
    }
  }
  return f;
}

FormulaPtr sub_f(const FormulaPtr& f, const SubMap& sub) { return keep_fm(sub_f_node(f, sub), f); }

// ---------------------------------------------------------------------------
// Alpha equality
// ---------------------------------------------------------------------------

using AEnv = std::map<std::string, int>;

bool aeq_t(const TermPtr& a, const TermPtr& b, AEnv la, AEnv ra, int depth);

bool aeq_ds(const DSubst& da, const DSubst& db, AEnv& la, AEnv& ra, int& depth) {
  if (da.size() != db.size()) return false;
  for (size_t i = 0; i < da.size(); ++i)
    if (!aeq_t(da.terms[i], db.terms[i], la, ra, depth)) return false;
  for (size_t i = 0; i < da.size(); ++i) {
    la[da.vars[i]] = depth;
    ra[db.vars[i]] = depth;
    ++depth;
  }
  return true;
}

bool is_num_lit(const TermPtr& t) {
  return t->k == TmKind::NatLit || t->k == TmKind::IntLit || t->k == TmKind::RatLit;
}

Rat num_lit_value(const TermPtr& t) {
  if (t->k == TmKind::NatLit) return Rat(static_cast<long>(t->nat));
  if (t->k == TmKind::IntLit) return Rat(static_cast<long>(t->int_));
  return t->rat;
}

bool aeq_t(const TermPtr& a, const TermPtr& b, AEnv la, AEnv ra, int depth) {
  if (!a || !b) return a == b;
  // Literal kinds follow the ambient type, so 2 : Rat and 2 : Nat must agree.
  if (is_num_lit(a) && is_num_lit(b)) return num_lit_value(a) == num_lit_value(b);
  if (a->k != b->k) return false;
  auto bind = [&](const std::string& x, const std::string& y) {
    la[x] = depth;
    ra[y] = depth;
    ++depth;
  };
  switch (a->k) {
    case TmKind::Var: {
      auto ia = la.find(a->name), ib = ra.find(b->name);
      if ((ia != la.end()) != (ib != ra.end())) return false;
      return ia != la.end() ? ia->second == ib->second : a->name == b->name;
    }
    case TmKind::Inst:
      return a->name == b->name && type_eq(a->targ, b->targ);
    case TmKind::NatLit:
      return a->nat == b->nat;
    case TmKind::IntLit:
      return a->int_ == b->int_;
    case TmKind::RatLit:
      return a->rat == b->rat;
    case TmKind::EnumLit:
      return a->name == b->name && a->enum_type == b->enum_type;
    case TmKind::Succ:
    case TmKind::Fst:
    case TmKind::Snd:
    case TmKind::Inl:
    case TmKind::Inr:
    case TmKind::Head:
    case TmKind::Tail:
    case TmKind::Prev:
    case TmKind::BoxT:
    case TmKind::MUnit:
      return aeq_t(a->a, b->a, la, ra, depth);
    case TmKind::Lam:
    case TmKind::Fix:
      bind(a->x, b->x);
      return aeq_t(a->a, b->a, la, ra, depth);
    case TmKind::App:
    case TmKind::Pair:
    case TmKind::Cons:
      return aeq_t(a->a, b->a, la, ra, depth) && aeq_t(a->b, b->b, la, ra, depth);
    case TmKind::CaseSum: {
      if (!aeq_t(a->a, b->a, la, ra, depth)) return false;
      AEnv ll = la, rl = ra;
      int d = depth;
      ll[a->x] = d;
      rl[b->x] = d;
      if (!aeq_t(a->b, b->b, ll, rl, d + 1)) return false;
      la[a->y] = depth;
      ra[b->y] = depth;
      return aeq_t(a->c, b->c, la, ra, depth + 1);
    }
    case TmKind::CaseNat: {
      if (!aeq_t(a->a, b->a, la, ra, depth)) return false;
      if (!aeq_t(a->b, b->b, la, ra, depth)) return false;
      bind(a->y, b->y);
      return aeq_t(a->c, b->c, la, ra, depth);
    }
    case TmKind::Next: {
      AEnv ll = la, rl = ra;
      int d = depth;
      if (!aeq_ds(a->ds, b->ds, ll, rl, d)) return false;
      return aeq_t(a->a, b->a, ll, rl, d);
    }
    case TmKind::LetBox:
    case TmKind::LetConst:
    case TmKind::MLet: {
      if (!aeq_t(a->a, b->a, la, ra, depth)) return false;
      bind(a->x, b->x);
      return aeq_t(a->b, b->b, la, ra, depth);
    }
    case TmKind::PrimDist: {
      if (a->dk != b->dk) return false;
      if (a->dk == DistKind::Bern) return a->rat == b->rat;
      if (a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!aeq_t(a->args[i], b->args[i], la, ra, depth)) return false;
      return true;
    }
    case TmKind::PrimOp: {
      if (a->name != b->name || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!aeq_t(a->args[i], b->args[i], la, ra, depth)) return false;
      return true;
    }
  }
  return false;
}

bool aeq_f(const FormulaPtr& a, const FormulaPtr& b, AEnv la, AEnv ra, int depth) {
  if (!a || !b) return a == b;
  if (a->k != b->k) return false;
  auto bind = [&](const std::string& x, const std::string& y) {
    la[x] = depth;
    ra[y] = depth;
    ++depth;
  };
  switch (a->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return true;
    case FmKind::And:
    case FmKind::Or:
    case FmKind::Implies:
      return aeq_f(a->f1, b->f1, la, ra, depth) && aeq_f(a->f2, b->f2, la, ra, depth);
    case FmKind::Not:
    case FmKind::BoxF:
      return aeq_f(a->f1, b->f1, la, ra, depth);
    case FmKind::Forall:
    case FmKind::Exists: {
      if (!type_eq(a->ty, b->ty)) return false;
      if (a->bounds.has_value() != b->bounds.has_value()) return false;
      if (a->bounds) {
        if (a->bounds->values.size() != b->bounds->values.size()) return false;
        for (size_t i = 0; i < a->bounds->values.size(); ++i)
          if (!aeq_t(a->bounds->values[i], b->bounds->values[i], la, ra, depth)) return false;
      }
      bind(a->x1, b->x1);
      return aeq_f(a->f1, b->f1, la, ra, depth);
    }
    case FmKind::Eq:
    case FmKind::Leq:
      return aeq_t(a->t1, b->t1, la, ra, depth) && aeq_t(a->t2, b->t2, la, ra, depth);
    case FmKind::LaterF: {
      AEnv ll = la, rl = ra;
      int d = depth;
      if (!aeq_ds(a->ds, b->ds, ll, rl, d)) return false;
      return aeq_f(a->f1, b->f1, ll, rl, d);
    }
    case FmKind::DiamondRel:
      if (!aeq_t(a->t1, b->t1, la, ra, depth)) return false;
      if (!aeq_t(a->t2, b->t2, la, ra, depth)) return false;
      bind(a->x1, b->x1);
      bind(a->x2, b->x2);
      return aeq_f(a->f1, b->f1, la, ra, depth);
    case FmKind::DiamondUn:
      if (!aeq_t(a->t1, b->t1, la, ra, depth)) return false;
      bind(a->x1, b->x1);
      return aeq_f(a->f1, b->f1, la, ra, depth);
    case FmKind::AllStream: {
      if ((a->t2 == nullptr) != (b->t2 == nullptr)) return false;
      if (a->t2 && (a->m != b->m || a->n != b->n)) return false;
      if (!aeq_t(a->t1, b->t1, la, ra, depth)) return false;
      if (a->t2 && !aeq_t(a->t2, b->t2, la, ra, depth)) return false;
      bind(a->x1, b->x1);
      if (a->t2) bind(a->x2, b->x2);
      return aeq_f(a->f1, b->f1, la, ra, depth);
    }
    case FmKind::PredApp: {
      if (a->pred != b->pred || a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!aeq_t(a->args[i], b->args[i], la, ra, depth)) return false;
      return true;
    }
  }
  return false;
}

}  // namespace

std::set<std::string> free_vars(const TermPtr& t) {
  std::set<std::string> bound, out;
  fv_term(t, bound, out);
  return out;
}

std::set<std::string> free_vars_formula(const FormulaPtr& f) {
  std::set<std::string> bound, out;
  fv_fm(f, bound, out);
  return out;
}

TermPtr subst_many(const TermPtr& t, const SubMap& sub) { return sub_t(t, sub); }

TermPtr subst_term(const TermPtr& t, const std::string& x, const TermPtr& s) {
  SubMap m;
  m[x] = s;
  return sub_t(t, m);
}

FormulaPtr subst_formula_many(const FormulaPtr& f, const SubMap& sub) { return sub_f(f, sub); }

FormulaPtr subst_formula(const FormulaPtr& f, const std::string& x, const TermPtr& s) {
  SubMap m;
  m[x] = s;
  return sub_f(f, m);
}

bool alpha_eq_term(const TermPtr& a, const TermPtr& b) { return aeq_t(a, b, {}, {}, 0); }
bool alpha_eq_formula(const FormulaPtr& a, const FormulaPtr& b) { return aeq_f(a, b, {}, {}, 0); }

// ---------------------------------------------------------------------------
// Formula metavariable instantiation
// ---------------------------------------------------------------------------

namespace {

FormulaPtr pred_walk(const FormulaPtr& f, const std::string& pred,
                     const std::vector<std::string>& params, const FormulaPtr& body,
                     const std::set<std::string>& needed) {
  if (!f) return f;
  if (f->k == FmKind::PredApp && f->pred == pred) {
    if (f->args.size() != params.size())
      throw EvalError("metavariable " + pred + " applied to " + std::to_string(f->args.size()) +
                      " arguments, expected " + std::to_string(params.size()));
    SubMap m;
    for (size_t i = 0; i < params.size(); ++i) m[params[i]] = f->args[i];
    return sub_f(body, m);
  }
  // Rename any binder that would capture a free variable of the instantiated
  // body, then rebuild over the children.
  auto rec = [&](const FormulaPtr& g) { return pred_walk(g, pred, params, body, needed); };
  auto guard1 = [&](const std::string& x, const FormulaPtr& under,
                    std::pair<std::string, FormulaPtr>* out) {
    if (x.empty() || !needed.count(x)) {
      *out = {x, under};
      return;
    }
    auto avoid = needed;
    auto bfv = free_vars_formula(under);
    avoid.insert(bfv.begin(), bfv.end());
    std::string nx = fresh_name(x, avoid);
    *out = {nx, subst_formula(under, x, tm_var(nx))};
  };
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
    case FmKind::Eq:
    case FmKind::Leq:
    case FmKind::PredApp:
      return f;
    case FmKind::And:
      return fm_and(rec(f->f1), rec(f->f2), f->sp);
    case FmKind::Or:
      return fm_or(rec(f->f1), rec(f->f2), f->sp);
    case FmKind::Implies:
      return fm_implies(rec(f->f1), rec(f->f2), f->sp);
    case FmKind::Not:
      return fm_not(rec(f->f1), f->sp);
    case FmKind::BoxF:
      return fm_boxf(rec(f->f1), f->sp);
    case FmKind::Forall:
    case FmKind::Exists: {
      std::pair<std::string, FormulaPtr> p;
      guard1(f->x1, f->f1, &p);
      auto inner = rec(p.second);
      return f->k == FmKind::Forall ? fm_forall(p.first, f->ty, f->bounds, inner, f->sp)
                                    : fm_exists(p.first, f->ty, f->bounds, inner, f->sp);
    }
    case FmKind::LaterF: {
      DSubst ds = f->ds;
      FormulaPtr under = f->f1;
      for (auto& v : ds.vars) {
        if (!needed.count(v)) continue;
        auto avoid = needed;
        auto bfv = free_vars_formula(under);
        avoid.insert(bfv.begin(), bfv.end());
        std::string nv = fresh_name(v, avoid);
        under = subst_formula(under, v, tm_var(nv));
        v = nv;
      }
      return fm_later(std::move(ds), rec(under), f->sp);
    }
    case FmKind::DiamondRel: {
      std::string x1 = f->x1, x2 = f->x2;
      FormulaPtr under = f->f1;
      for (std::string* x : {&x1, &x2}) {
        if (!needed.count(*x)) continue;
        auto avoid = needed;
        auto bfv = free_vars_formula(under);
        avoid.insert(bfv.begin(), bfv.end());
        std::string nx = fresh_name(*x, avoid);
        under = subst_formula(under, *x, tm_var(nx));
        *x = nx;
      }
      return fm_dia_rel(x1, f->t1, x2, f->t2, rec(under), f->sp);
    }
    case FmKind::DiamondUn: {
      std::pair<std::string, FormulaPtr> p;
      guard1(f->x1, f->f1, &p);
      return fm_dia_un(p.first, f->t1, rec(p.second), f->sp);
    }
    case FmKind::AllStream: {
      std::string x1 = f->x1, x2 = f->x2;
      FormulaPtr under = f->f1;
      std::vector<std::string*> xs{&x1};
      if (f->t2) xs.push_back(&x2);
      for (std::string* x : xs) {
        if (!needed.count(*x)) continue;
        auto avoid = needed;
        auto bfv = free_vars_formula(under);
        avoid.insert(bfv.begin(), bfv.end());
        std::string nx = fresh_name(*x, avoid);
        under = subst_formula(under, *x, tm_var(nx));
        *x = nx;
      }
      return f->t2 ? fm_all_rel(f->m, f->n, f->t1, f->t2, x1, x2, rec(under), f->sp)
                   : fm_all_un(f->t1, x1, rec(under), f->sp);
    }
  }
  return f;
}

}  // namespace

FormulaPtr subst_pred_formula(const FormulaPtr& f, const std::string& pred,
                              const std::vector<std::string>& params, const FormulaPtr& body) {
  std::set<std::string> needed = free_vars_formula(body);
  for (const auto& p : params) needed.erase(p);
  return pred_walk(f, pred, params, body, needed);
}

// ---------------------------------------------------------------------------
// Monomorphization
// ---------------------------------------------------------------------------

namespace {

TypePtr ty_subst_map(const TypePtr& t, const std::map<std::string, TypePtr>& su) {
  TypePtr out = t;
  for (const auto& [v, rep] : su) out = type_subst(out, v, rep);
  return out;
}

}  // namespace

TermPtr clone_subst_types(const TermPtr& t, const std::map<std::string, TypePtr>& su) {
  if (!t) return t;
  auto r = [&](const TermPtr& u) { return clone_subst_types(u, su); };
  TypePtr ann = t->ann ? ty_subst_map(t->ann, su) : nullptr;
  switch (t->k) {
    case TmKind::Var:
      return tm_var(t->name, t->sp);
    case TmKind::Inst:
      return tm_inst(t->name, ty_subst_map(t->targ, su), t->sp);
    case TmKind::NatLit:
      return tm_nat(t->nat, t->sp);
    case TmKind::IntLit:
      return tm_int(t->int_, t->sp);
    case TmKind::RatLit:
      return tm_rat(t->rat, t->sp);
    case TmKind::EnumLit:
      return tm_enum(t->name, t->enum_type, t->sp);
    case TmKind::Succ:
      return tm_succ(r(t->a), t->sp);
    case TmKind::Lam:
      return tm_lam(t->x, ann, r(t->a), t->sp);
    case TmKind::App:
      return tm_app(r(t->a), r(t->b), t->sp);
    case TmKind::Fix:
      return tm_fix(t->x, ann, r(t->a), t->sp);
    case TmKind::Pair:
      return tm_pair(r(t->a), r(t->b), t->sp);
    case TmKind::Fst:
      return tm_fst(r(t->a), t->sp);
    case TmKind::Snd:
      return tm_snd(r(t->a), t->sp);
    case TmKind::Inl:
      return tm_inl(r(t->a), ann, t->sp);
    case TmKind::Inr:
      return tm_inr(r(t->a), ann, t->sp);
    case TmKind::CaseSum:
      return tm_case_sum(r(t->a), t->x, r(t->b), t->y, r(t->c), t->sp);
    case TmKind::CaseNat:
      return tm_case_nat(r(t->a), r(t->b), t->y, r(t->c), t->sp);
    case TmKind::Cons:
      return tm_cons(r(t->a), r(t->b), t->sp);
    case TmKind::Head:
      return tm_head(r(t->a), t->sp);
    case TmKind::Tail:
      return tm_tail(r(t->a), t->sp);
    case TmKind::Next: {
      DSubst ds;
      ds.vars = t->ds.vars;
      for (const auto& bt : t->ds.terms) ds.terms.push_back(r(bt));
      return tm_next(std::move(ds), r(t->a), t->sp);
    }
    case TmKind::Prev:
      return tm_prev(r(t->a), t->sp);
    case TmKind::BoxT:
      return tm_box(r(t->a), t->sp);
    case TmKind::LetBox:
      return tm_let_box(t->x, r(t->a), r(t->b), t->sp);
    case TmKind::LetConst:
      return tm_let_const(t->x, r(t->a), r(t->b), t->sp);
    case TmKind::MUnit:
      return tm_munit(r(t->a), t->sp);
    case TmKind::MLet:
      return tm_mlet(t->x, r(t->a), r(t->b), t->sp);
    case TmKind::PrimDist: {
      if (t->dk == DistKind::Bern) return tm_bern(t->rat, t->sp);
      std::vector<TermPtr> args;
      for (const auto& u : t->args) args.push_back(r(u));
      return tm_unif(std::move(args), t->sp);
    }
    case TmKind::PrimOp: {
      std::vector<TermPtr> args;
      for (const auto& u : t->args) args.push_back(r(u));
      return tm_primop(t->name, std::move(args), t->sp);
    }
  }
  return t;
}

namespace {

void collect_insts_term(const TermPtr& t, std::vector<std::pair<std::string, TypePtr>>& out) {
  if (!t) return;
  if (t->k == TmKind::Inst && !type_mentions_var(t->targ)) out.emplace_back(t->name, t->targ);
  collect_insts_term(t->a, out);
  collect_insts_term(t->b, out);
  collect_insts_term(t->c, out);
  for (const auto& u : t->ds.terms) collect_insts_term(u, out);
  for (const auto& u : t->args) collect_insts_term(u, out);
}

void collect_insts_formula(const FormulaPtr& f, std::vector<std::pair<std::string, TypePtr>>& out) {
  if (!f) return;
  collect_insts_term(f->t1, out);
  collect_insts_term(f->t2, out);
  for (const auto& u : f->ds.terms) collect_insts_term(u, out);
  for (const auto& u : f->args) collect_insts_term(u, out);
  if (f->bounds)
    for (const auto& u : f->bounds->values) collect_insts_term(u, out);
  collect_insts_formula(f->f1, out);
  collect_insts_formula(f->f2, out);
}

TermPtr replace_insts_term(const TermPtr& t) {
  if (!t) return t;
  if (t->k == TmKind::Inst && !type_mentions_var(t->targ))
    return tm_var(t->name + "@" + pp_type(t->targ), t->sp);
  bool changed = false;
  auto r = [&](const TermPtr& u) {
    auto v = replace_insts_term(u);
    if (v != u) changed = true;
    return v;
  };
  TermPtr a = r(t->a), b = r(t->b), c = r(t->c);
  DSubst ds = t->ds;
  for (auto& u : ds.terms) u = r(u);
  std::vector<TermPtr> args = t->args;
  for (auto& u : args) u = r(u);
  if (!changed) return t;
  auto n = std::make_shared<Term>(*t);
  n->a = a;
  n->b = b;
  n->c = c;
  n->ds = std::move(ds);
  n->args = std::move(args);
  return n;
}

FormulaPtr replace_insts_formula(const FormulaPtr& f) {
  if (!f) return f;
  bool changed = false;
  auto rt = [&](const TermPtr& u) {
    auto v = replace_insts_term(u);
    if (v != u) changed = true;
    return v;
  };
  auto rf = [&](const FormulaPtr& g) {
    auto v = replace_insts_formula(g);
    if (v != g) changed = true;
    return v;
  };
  TermPtr t1 = rt(f->t1), t2 = rt(f->t2);
  FormulaPtr f1 = rf(f->f1), f2 = rf(f->f2);
  DSubst ds = f->ds;
  for (auto& u : ds.terms) u = rt(u);
  std::vector<TermPtr> args = f->args;
  for (auto& u : args) u = rt(u);
  std::optional<QBounds> bounds = f->bounds;
  if (bounds)
    for (auto& u : bounds->values) u = rt(u);
  if (!changed) return f;
  auto n = std::make_shared<Formula>(*f);
  n->t1 = t1;
  n->t2 = t2;
  n->f1 = f1;
  n->f2 = f2;
  n->ds = std::move(ds);
  n->args = std::move(args);
  n->bounds = std::move(bounds);
  return n;
}

}  // namespace

void elaborate_program(Program& prog) {
  for (int pass = 0; pass < 64; ++pass) {
    std::vector<std::pair<std::string, TypePtr>> wanted;
    for (const auto& d : prog.decls) {
      collect_insts_term(d.body, wanted);
      collect_insts_formula(d.formula, wanted);
    }
    if (wanted.empty()) return;
    for (const auto& [name, targ] : wanted) {
      std::string mangled = name + "@" + pp_type(targ);
      if (prog.find(mangled)) continue;
      const Decl* src = prog.find(name);
      if (!src) throw EvalError("unknown definition in instantiation: " + name);
      if (src->k != DeclKind::Def || src->tyvars.size() != 1)
        throw EvalError(name + " is not a schematic definition with one type parameter");
      std::map<std::string, TypePtr> su;
      su[src->tyvars[0]] = targ;
      Decl inst;
      inst.k = DeclKind::Def;
      inst.sp = src->sp;
      inst.name = mangled;
      inst.declared_ty = src->declared_ty ? ty_subst_map(src->declared_ty, su) : nullptr;
      inst.body = clone_subst_types(src->body, su);
      inst.from_prelude = src->from_prelude;
      prog.decls.push_back(std::move(inst));
    }
    for (auto& d : prog.decls) {
      if (d.body) d.body = replace_insts_term(d.body);
      if (d.formula) d.formula = replace_insts_formula(d.formula);
    }
  }
  throw EvalError("instantiation did not terminate");
}

namespace {

// Make sure every monomorphic instance requested by `wanted` exists as a
// top-level definition, then close the program under further instantiation.
void ensure_insts(Program& prog, const std::vector<std::pair<std::string, TypePtr>>& wanted) {
  bool added = false;
  for (const auto& [name, targ] : wanted) {
    std::string mangled = name + "@" + pp_type(targ);
    if (prog.find(mangled)) continue;
    const Decl* src = prog.find(name);
    if (!src) throw EvalError("unknown definition in instantiation: " + name);
    if (src->k != DeclKind::Def || src->tyvars.size() != 1)
      throw EvalError(name + " is not a schematic definition with one type parameter");
    std::map<std::string, TypePtr> su;
    su[src->tyvars[0]] = targ;
    Decl inst;
    inst.k = DeclKind::Def;
    inst.sp = src->sp;
    inst.name = mangled;
    inst.declared_ty = src->declared_ty ? ty_subst_map(src->declared_ty, su) : nullptr;
    inst.body = clone_subst_types(src->body, su);
    inst.from_prelude = src->from_prelude;
    prog.decls.push_back(std::move(inst));
    added = true;
  }
  if (added) elaborate_program(prog);
}

}  // namespace

TermPtr elaborate_term_in(Program& prog, const TermPtr& t) {
  std::vector<std::pair<std::string, TypePtr>> wanted;
  collect_insts_term(t, wanted);
  if (wanted.empty()) return t;
  ensure_insts(prog, wanted);
  return replace_insts_term(t);
}

FormulaPtr elaborate_formula_in(Program& prog, const FormulaPtr& f) {
  std::vector<std::pair<std::string, TypePtr>> wanted;
  collect_insts_formula(f, wanted);
  if (wanted.empty()) return f;
  ensure_insts(prog, wanted);
  return replace_insts_formula(f);
}

// ---------------------------------------------------------------------------
// Equational normalization
// ---------------------------------------------------------------------------

namespace {

struct NState {
  const Program* prog = nullptr;
  long long fuel = 1000000;
  int unfold = 0;
};

bool is_lit(const TermPtr& t) {
  return t->k == TmKind::NatLit || t->k == TmKind::IntLit || t->k == TmKind::RatLit;
}

Rat lit_rat(const TermPtr& t) {
  switch (t->k) {
    case TmKind::NatLit:
      return Rat(static_cast<long>(t->nat));
    case TmKind::IntLit:
      return Rat(static_cast<long>(t->int_));
    default:
      return t->rat;
  }
}

int lit_rank(const TermPtr& t) {
  return t->k == TmKind::NatLit ? 0 : (t->k == TmKind::IntLit ? 1 : 2);
}

TermPtr rat_to_lit(const Rat& r, int rank) {
  if (rank >= 2 || !r.is_integer()) return tm_rat(r);
  long v = r.to_long();
  if (rank <= 0 && v >= 0) return tm_nat(static_cast<unsigned long long>(v));
  return tm_int(v);
}

TermPtr fold_prim(const std::string& op, const std::vector<TermPtr>& args) {
  for (const auto& a : args)
    if (!is_lit(a)) return nullptr;
  if ((op == "add" || op == "sub" || op == "mul") && args.size() == 2) {
    Rat l = lit_rat(args[0]), r = lit_rat(args[1]);
    Rat v = op == "add" ? l + r : (op == "sub" ? l - r : l * r);
    int rank = std::max(lit_rank(args[0]), lit_rank(args[1]));
    return rat_to_lit(v, rank);
  }
  if (op == "div" && args.size() == 2) {
    Rat r = lit_rat(args[1]);
    if (r.is_zero()) return nullptr;
    return tm_rat(lit_rat(args[0]) / r);
  }
  if (op == "neg" && args.size() == 1)
    return rat_to_lit(Rat(0) - lit_rat(args[0]), std::max(lit_rank(args[0]), 1));
  if (op == "xor" && args.size() == 2 && args[0]->k == TmKind::NatLit &&
      args[1]->k == TmKind::NatLit)
    return tm_nat(args[0]->nat ^ args[1]->nat);
  if (op == "int" && args.size() == 1 && args[0]->k == TmKind::NatLit)
    return tm_int(static_cast<long long>(args[0]->nat));
  return nullptr;
}

void occ_term(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& seen,
              std::vector<std::string>& order);

void occ_under(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& seen,
               std::vector<std::string>& order, const std::vector<std::string>& binders) {
  std::vector<std::string> added;
  for (const auto& b : binders)
    if (bound.insert(b).second) added.push_back(b);
  occ_term(t, bound, seen, order);
  for (const auto& b : added) bound.erase(b);
}

// Free variables in first-occurrence order of a left-to-right walk.
void occ_term(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& seen,
              std::vector<std::string>& order) {
  if (!t) return;
  switch (t->k) {
    case TmKind::Var:
      if (!bound.count(t->name) && seen.insert(t->name).second) order.push_back(t->name);
      return;
    case TmKind::Lam:
    case TmKind::Fix:
      occ_under(t->a, bound, seen, order, {t->x});
      return;
    case TmKind::CaseSum:
      occ_term(t->a, bound, seen, order);
      occ_under(t->b, bound, seen, order, {t->x});
      occ_under(t->c, bound, seen, order, {t->y});
      return;
    case TmKind::CaseNat:
      occ_term(t->a, bound, seen, order);
      occ_term(t->b, bound, seen, order);
      occ_under(t->c, bound, seen, order, {t->y});
      return;
    case TmKind::Next:
      for (const auto& u : t->ds.terms) occ_term(u, bound, seen, order);
      occ_under(t->a, bound, seen, order, t->ds.vars);
      return;
    case TmKind::LetBox:
    case TmKind::LetConst:
    case TmKind::MLet:
      occ_term(t->a, bound, seen, order);
      occ_under(t->b, bound, seen, order, {t->x});
      return;
    default:
      occ_term(t->a, bound, seen, order);
      occ_term(t->b, bound, seen, order);
      occ_term(t->c, bound, seen, order);
      for (const auto& u : t->args) occ_term(u, bound, seen, order);
      return;
  }
}

void occ_formula(const FormulaPtr& f, std::set<std::string>& bound, std::set<std::string>& seen,
                 std::vector<std::string>& order) {
  if (!f) return;
  auto under = [&](const FormulaPtr& g, const std::vector<std::string>& binders) {
    std::vector<std::string> added;
    for (const auto& b : binders)
      if (!b.empty() && bound.insert(b).second) added.push_back(b);
    occ_formula(g, bound, seen, order);
    for (const auto& b : added) bound.erase(b);
  };
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return;
    case FmKind::And:
    case FmKind::Or:
    case FmKind::Implies:
      occ_formula(f->f1, bound, seen, order);
      occ_formula(f->f2, bound, seen, order);
      return;
    case FmKind::Not:
    case FmKind::BoxF:
      occ_formula(f->f1, bound, seen, order);
      return;
    case FmKind::Forall:
    case FmKind::Exists:
      under(f->f1, {f->x1});
      return;
    case FmKind::Eq:
    case FmKind::Leq:
      occ_term(f->t1, bound, seen, order);
      occ_term(f->t2, bound, seen, order);
      return;
    case FmKind::LaterF:
      for (const auto& u : f->ds.terms) occ_term(u, bound, seen, order);
      under(f->f1, f->ds.vars);
      return;
    case FmKind::DiamondRel:
      occ_term(f->t1, bound, seen, order);
      occ_term(f->t2, bound, seen, order);
      under(f->f1, {f->x1, f->x2});
      return;
    case FmKind::DiamondUn:
      occ_term(f->t1, bound, seen, order);
      under(f->f1, {f->x1});
      return;
    case FmKind::AllStream:
      occ_term(f->t1, bound, seen, order);
      occ_term(f->t2, bound, seen, order);
      under(f->f1, f->t2 ? std::vector<std::string>{f->x1, f->x2}
                         : std::vector<std::string>{f->x1});
      return;
    case FmKind::PredApp:
      for (const auto& u : f->args) occ_term(u, bound, seen, order);
      return;
  }
}

// Reorders delayed bindings into the first-occurrence order of the body.
void sort_bindings(std::vector<std::string>& vars, std::vector<TermPtr>& terms,
                   const std::vector<std::string>& order) {
  std::vector<size_t> idx(vars.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto posn = [&](const std::string& v) {
    for (size_t i = 0; i < order.size(); ++i)
      if (order[i] == v) return i;
    return order.size();
  };
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return posn(vars[a]) < posn(vars[b]); });
  std::vector<std::string> nv;
  std::vector<TermPtr> nt;
  for (size_t i : idx) {
    nv.push_back(vars[i]);
    nt.push_back(terms[i]);
  }
  vars = std::move(nv);
  terms = std::move(nt);
}

TermPtr nrm(NState& st, const TermPtr& t);

// Shared delayed-substitution cleanup: shadowed duplicates, unused bindings,
// inlining of bindings whose term is an undecorated next.
template <typename FV, typename Subst>
void ds_laws(std::vector<std::string>& vars, std::vector<TermPtr>& terms, const FV& body_fv,
             const Subst& body_subst) {
  for (size_t i = 0; i < vars.size();) {
    bool shadowed = false;
    for (size_t j = i + 1; j < vars.size(); ++j)
      if (vars[j] == vars[i]) shadowed = true;
    if (shadowed) {
      vars.erase(vars.begin() + i);
      terms.erase(terms.begin() + i);
    } else {
      ++i;
    }
  }
  bool progress = true;
  while (progress) {
    progress = false;
    auto bfv = body_fv();
    for (size_t i = 0; i < vars.size();) {
      if (!bfv.count(vars[i])) {
        vars.erase(vars.begin() + i);
        terms.erase(terms.begin() + i);
        progress = true;
      } else {
        ++i;
      }
    }
    for (size_t i = 0; i < vars.size(); ++i) {
      if (terms[i]->k != TmKind::Next || terms[i]->ds.size() != 0) continue;
      TermPtr inner = terms[i]->a;
      auto ifv = free_vars(inner);
      for (size_t j = 0; j < vars.size(); ++j) {
        if (j == i || !ifv.count(vars[j])) continue;
        auto avoid = ifv;
        auto bfv2 = body_fv();
        avoid.insert(bfv2.begin(), bfv2.end());
        for (const auto& v : vars) avoid.insert(v);
        std::string nv = fresh_name(vars[j], avoid);
        body_subst(vars[j], tm_var(nv));
        vars[j] = nv;
      }
      body_subst(vars[i], inner);
      vars.erase(vars.begin() + i);
      terms.erase(terms.begin() + i);
      progress = true;
      break;
    }
  }
}

TermPtr norm_next(NState& st, const TermPtr& t) {
  std::vector<std::string> vars = t->ds.vars;
  std::vector<TermPtr> terms;
  for (const auto& u : t->ds.terms) terms.push_back(nrm(st, u));
  TermPtr body = nrm(st, t->a);
  ds_laws(vars, terms, [&] { return free_vars(body); },
          [&](const std::string& x, const TermPtr& s) { body = subst_term(body, x, s); });
  body = nrm(st, body);
  auto bfv = free_vars(body);
  for (size_t i = 0; i < vars.size();) {
    if (!bfv.count(vars[i])) {
      vars.erase(vars.begin() + i);
      terms.erase(terms.begin() + i);
    } else {
      ++i;
    }
  }
  if (vars.size() == 1 && body->k == TmKind::Var && body->name == vars[0]) return terms[0];
  std::set<std::string> bound, seen;
  std::vector<std::string> order;
  occ_term(body, bound, seen, order);
  sort_bindings(vars, terms, order);
  DSubst ds;
  ds.vars = std::move(vars);
  ds.terms = std::move(terms);
  return tm_next(std::move(ds), body, t->sp);
}

TermPtr nrm_node(NState& st, const TermPtr& t) {
  if (!t) return t;
  if (--st.fuel <= 0) throw EvalError("normalization ran out of fuel");
  switch (t->k) {
    case TmKind::Var: {
      if (st.prog) {
        const Decl* d = st.prog->find(t->name);
        if (d && d->k == DeclKind::Def && d->tyvars.empty() && d->body) return nrm(st, d->body);
      }
      return t;
    }
    case TmKind::Inst:
    case TmKind::NatLit:
    case TmKind::IntLit:
    case TmKind::RatLit:
    case TmKind::EnumLit:
    case TmKind::PrimDist:
      return t;
    case TmKind::Succ: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::NatLit) return tm_nat(a->nat + 1, t->sp);
      return tm_succ(a, t->sp);
    }
    case TmKind::Lam:
      return tm_lam(t->x, t->ann, nrm(st, t->a), t->sp);
    case TmKind::App: {
      auto f = nrm(st, t->a);
      auto arg = nrm(st, t->b);
      if (f->k == TmKind::Lam) return nrm(st, subst_term(f->a, f->x, arg));
      return tm_app(f, arg, t->sp);
    }
    case TmKind::Fix: {
      if (st.unfold > 0) {
        --st.unfold;
        return nrm(st, subst_term(t->a, t->x, tm_next(DSubst{}, t)));
      }
      return tm_fix(t->x, t->ann, nrm(st, t->a), t->sp);
    }
    case TmKind::Pair:
      return tm_pair(nrm(st, t->a), nrm(st, t->b), t->sp);
    case TmKind::Fst: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::Pair) return a->a;
      return tm_fst(a, t->sp);
    }
    case TmKind::Snd: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::Pair) return a->b;
      return tm_snd(a, t->sp);
    }
    case TmKind::Inl:
      return tm_inl(nrm(st, t->a), t->ann, t->sp);
    case TmKind::Inr:
      return tm_inr(nrm(st, t->a), t->ann, t->sp);
    case TmKind::CaseSum: {
      auto s = nrm(st, t->a);
      if (s->k == TmKind::Inl) return nrm(st, subst_term(t->b, t->x, s->a));
      if (s->k == TmKind::Inr) return nrm(st, subst_term(t->c, t->y, s->a));
      return tm_case_sum(s, t->x, nrm(st, t->b), t->y, nrm(st, t->c), t->sp);
    }
    case TmKind::CaseNat: {
      auto s = nrm(st, t->a);
      if (s->k == TmKind::NatLit) {
        if (s->nat == 0) return nrm(st, t->b);
        return nrm(st, subst_term(t->c, t->y, tm_nat(s->nat - 1)));
      }
      if (s->k == TmKind::Succ) return nrm(st, subst_term(t->c, t->y, s->a));
      return tm_case_nat(s, nrm(st, t->b), t->y, nrm(st, t->c), t->sp);
    }
    case TmKind::Cons:
      return tm_cons(nrm(st, t->a), nrm(st, t->b), t->sp);
    case TmKind::Head: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::Cons) return a->a;
      return tm_head(a, t->sp);
    }
    case TmKind::Tail: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::Cons) return a->b;
      return tm_tail(a, t->sp);
    }
    case TmKind::Next:
      return norm_next(st, t);
    case TmKind::Prev: {
      auto a = nrm(st, t->a);
      if (a->k == TmKind::Next && a->ds.size() == 0) return a->a;
      return tm_prev(a, t->sp);
    }
    case TmKind::BoxT:
      return tm_box(nrm(st, t->a), t->sp);
    case TmKind::LetBox: {
      auto u = nrm(st, t->a);
      if (u->k == TmKind::BoxT) return nrm(st, subst_term(t->b, t->x, u->a));
      return tm_let_box(t->x, u, nrm(st, t->b), t->sp);
    }
    case TmKind::LetConst:
      return nrm(st, subst_term(t->b, t->x, t->a));
    case TmKind::MUnit:
      return tm_munit(nrm(st, t->a), t->sp);
    case TmKind::MLet: {
      auto rhs = nrm(st, t->a);
      if (rhs->k == TmKind::MUnit) return nrm(st, subst_term(t->b, t->x, rhs->a));
      if (rhs->k == TmKind::MLet) {
        std::string y = rhs->x;
        TermPtr d = rhs->b;
        auto bfv = free_vars(t->b);
        if (y == t->x || bfv.count(y)) {
          auto avoid = bfv;
          avoid.insert(t->x);
          auto dfv = free_vars(d);
          avoid.insert(dfv.begin(), dfv.end());
          std::string ny = fresh_name(y, avoid);
          d = subst_term(d, y, tm_var(ny));
          y = ny;
        }
        return nrm(st, tm_mlet(y, rhs->a, tm_mlet(t->x, d, t->b, t->sp), t->sp));
      }
      auto body = nrm(st, t->b);
      if (body->k == TmKind::MUnit && body->a->k == TmKind::Var && body->a->name == t->x)
        return rhs;
      return tm_mlet(t->x, rhs, body, t->sp);
    }
    case TmKind::PrimOp: {
      std::vector<TermPtr> args;
      for (const auto& u : t->args) args.push_back(nrm(st, u));
      if (auto folded = fold_prim(t->name, args)) return folded;
      return tm_primop(t->name, std::move(args), t->sp);
    }
  }
  return t;
}

TermPtr nrm(NState& st, const TermPtr& t) { return keep_tm(nrm_node(st, t), t); }

FormulaPtr nf(NState& st, const FormulaPtr& f);

FormulaPtr norm_laterf(NState& st, std::vector<std::string> vars, std::vector<TermPtr> terms,
                       FormulaPtr body, Span sp) {
  ds_laws(vars, terms, [&] { return free_vars_formula(body); },
          [&](const std::string& x, const TermPtr& s) { body = subst_formula(body, x, s); });
  body = nf(st, body);
  auto bfv = free_vars_formula(body);
  for (size_t i = 0; i < vars.size();) {
    if (!bfv.count(vars[i])) {
      vars.erase(vars.begin() + i);
      terms.erase(terms.begin() + i);
    } else {
      ++i;
    }
  }
  if (body->k == FmKind::Top) return fm_top(sp);
  if (body->k == FmKind::And)
    return fm_and(norm_laterf(st, vars, terms, body->f1, sp),
                  norm_laterf(st, vars, terms, body->f2, sp), sp);
  std::set<std::string> bound, seen;
  std::vector<std::string> order;
  occ_formula(body, bound, seen, order);
  sort_bindings(vars, terms, order);
  DSubst ds;
  ds.vars = std::move(vars);
  ds.terms = std::move(terms);
  return fm_later(std::move(ds), body, sp);
}

FormulaPtr nf_node(NState& st, const FormulaPtr& f) {
  if (!f) return f;
  if (--st.fuel <= 0) throw EvalError("normalization ran out of fuel");
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return f;
    case FmKind::And:
      return fm_and(nf(st, f->f1), nf(st, f->f2), f->sp);
    case FmKind::Or:
      return fm_or(nf(st, f->f1), nf(st, f->f2), f->sp);
    case FmKind::Implies:
      return fm_implies(nf(st, f->f1), nf(st, f->f2), f->sp);
    case FmKind::Not:
      return fm_not(nf(st, f->f1), f->sp);
    case FmKind::BoxF:
      return fm_boxf(nf(st, f->f1), f->sp);
    case FmKind::Forall:
      return fm_forall(f->x1, f->ty, f->bounds, nf(st, f->f1), f->sp);
    case FmKind::Exists:
      return fm_exists(f->x1, f->ty, f->bounds, nf(st, f->f1), f->sp);
    case FmKind::Eq:
    case FmKind::Leq: {
      auto t1 = nrm(st, f->t1);
      auto t2 = nrm(st, f->t2);
      if (f->k == FmKind::Eq && f->rel_ty && f->rel_ty->k == TyKind::Later) {
        auto avoid = free_vars(t1);
        auto fv2 = free_vars(t2);
        avoid.insert(fv2.begin(), fv2.end());
        std::string u = fresh_name("u", avoid);
        avoid.insert(u);
        std::string v = fresh_name("v", avoid);
        auto inner = fm_eq(tm_var(u), tm_var(v), f->sp);
        inner->rel_ty = f->rel_ty->a;
        DSubst ds;
        ds.vars = {u, v};
        ds.terms = {t1, t2};
        return nf(st, fm_later(std::move(ds), inner, f->sp));
      }
      auto g = f->k == FmKind::Eq ? fm_eq(t1, t2, f->sp) : fm_leq(t1, t2, f->sp);
      g->rel_ty = f->rel_ty;
      return g;
    }
    case FmKind::LaterF: {
      std::vector<TermPtr> terms;
      for (const auto& u : f->ds.terms) terms.push_back(nrm(st, u));
      return norm_laterf(st, f->ds.vars, std::move(terms), nf(st, f->f1), f->sp);
    }
    case FmKind::DiamondRel:
      return fm_dia_rel(f->x1, nrm(st, f->t1), f->x2, nrm(st, f->t2), nf(st, f->f1), f->sp);
    case FmKind::DiamondUn:
      return fm_dia_un(f->x1, nrm(st, f->t1), nf(st, f->f1), f->sp);
    case FmKind::AllStream: {
      auto t1 = nrm(st, f->t1);
      auto t2 = f->t2 ? nrm(st, f->t2) : nullptr;
      auto body = nf(st, f->f1);
      return t2 ? fm_all_rel(f->m, f->n, t1, t2, f->x1, f->x2, body, f->sp)
                : fm_all_un(t1, f->x1, body, f->sp);
    }
    case FmKind::PredApp: {
      std::vector<TermPtr> args;
      for (const auto& u : f->args) args.push_back(nrm(st, u));
      return fm_pred_app(f->pred, std::move(args), f->sp);
    }
  }
  return f;
}

FormulaPtr nf(NState& st, const FormulaPtr& f) { return keep_fm(nf_node(st, f), f); }

}  // namespace

TermPtr normalize(const TermPtr& t, const Program* prog, NormOpts opts) {
  NState st;
  st.prog = prog;
  st.fuel = opts.fuel;
  st.unfold = opts.unfold;
  TermPtr cur = t;
  for (int i = 0; i < opts.eta; ++i) cur = tm_cons(tm_head(cur), tm_tail(cur));
  return nrm(st, cur);
}

FormulaPtr normalize_formula(const FormulaPtr& f, const Program* prog, NormOpts opts) {
  NState st;
  st.prog = prog;
  st.fuel = opts.fuel;
  st.unfold = opts.unfold;
  return nf(st, f);
}

bool equiv(const TermPtr& a, const TermPtr& b, const Program* prog, NormOpts left,
           NormOpts right) {
  return alpha_eq_term(normalize(a, prog, left), normalize(b, prog, right));
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

int rank_of_ty(const TypePtr& ty) {
  if (!ty) return -1;
  switch (ty->k) {
    case TyKind::Nat:
      return 0;
    case TyKind::Int:
      return 1;
    case TyKind::Rat:
      return 2;
    default:
      return -1;
  }
}

int num_rank_v(const ValuePtr& v) {
  switch (v->k) {
    case VKind::Nat:
      return 0;
    case VKind::Int:
      return 1;
    case VKind::RatV:
      return 2;
    default:
      throw EvalError("expected a numeric value");
  }
}

Rat rat_of_v(const ValuePtr& v) {
  switch (v->k) {
    case VKind::Nat:
      return Rat(static_cast<long>(v->nat));
    case VKind::Int:
      return Rat(static_cast<long>(v->int_));
    case VKind::RatV:
      return v->rat;
    default:
      throw EvalError("expected a numeric value");
  }
}

ValuePtr num_value(const Rat& r, int rank, int stage) {
  if (rank >= 2) return v_rat(r, stage);
  if (!r.is_integer()) throw EvalError("non-integer result at an integer type");
  long v = r.to_long();
  if (rank <= 0) {
    if (v < 0) throw EvalError("negative result at type Nat");
    return v_nat(static_cast<unsigned long long>(v), stage);
  }
  return v_int(v, stage);
}

// Moves a value of constant type up to a later stage. Streams, later-values
// and distributions have no canonical extension and are rejected.
ValuePtr extend_const_value(const ValuePtr& v, int stage) {
  if (stage == v->stage) return v;
  if (stage < v->stage) return restrict_value(v, stage);
  switch (v->k) {
    case VKind::Nat:
      return v_nat(v->nat, stage);
    case VKind::Int:
      return v_int(v->int_, stage);
    case VKind::RatV:
      return v_rat(v->rat, stage);
    case VKind::Enum:
      return v_enum(v->enum_ctor, v->enum_type, stage);
    case VKind::Pair:
      return v_pair(extend_const_value(v->a, stage), extend_const_value(v->b, stage), stage);
    case VKind::Inl:
      return v_inl(extend_const_value(v->a, stage), stage);
    case VKind::Inr:
      return v_inr(extend_const_value(v->a, stage), stage);
    case VKind::BoxV:
      return v_box(v->box, stage);
    case VKind::Clos: {
      Env e;
      e.stage = stage;
      for (const auto& [k, en] : v->env.m) {
        if (en.is_delta) {
          e.m.emplace(k, en);
        } else {
          EnvEntry n;
          n.v = extend_const_value(en.v, stage);
          n.ty = en.ty;
          e.m.emplace(k, std::move(n));
        }
      }
      return v_clos(std::move(e), v->param, v->param_ty, v->body);
    }
    default:
      throw EvalError("cannot move a value above its stage");
  }
}

ValuePtr eval_primop(EvalCtx& cx, const Env& env, const TermPtr& t) {
  const int s = env.stage;
  const std::string& op = t->name;
  if (op == "swap") {
    auto v = eval(cx, env, t->args[0]);
    if (v->k == VKind::Star) {
      if (s != 0) throw EvalError("swap of a malformed later-value");
      return v_dist(make_dist({{v_star(0), Rat(1)}}), 0);
    }
    if (v->k != VKind::Later) throw EvalError("swap of a non-later value");
    if (v->a->k != VKind::Dist) throw EvalError("swap of a non-distribution");
    std::vector<std::pair<ValuePtr, Rat>> out;
    for (const auto& [w, p] : v->a->dist.support) out.emplace_back(v_later(w, s), p);
    return v_dist(make_dist(std::move(out)), s);
  }
  std::vector<ValuePtr> vs;
  for (const auto& u : t->args) vs.push_back(eval(cx, env, u));
  if (op == "int") {
    if (vs[0]->k != VKind::Nat) throw EvalError("int of a non-natural value");
    return v_int(static_cast<long long>(vs[0]->nat), s);
  }
  if (op == "xor") {
    if (vs[0]->k != VKind::Nat || vs[1]->k != VKind::Nat)
      throw EvalError("xor of non-natural values");
    return v_nat(vs[0]->nat ^ vs[1]->nat, s);
  }
  if (op == "neg") {
    int rank = t->ty ? rank_of_ty(t->ty) : std::max(num_rank_v(vs[0]), 1);
    return num_value(Rat(0) - rat_of_v(vs[0]), rank, s);
  }
  if (op == "div") {
    Rat d = rat_of_v(vs[1]);
    if (d.is_zero()) throw EvalError("division by zero");
    return v_rat(rat_of_v(vs[0]) / d, s);
  }
  if (op == "add" || op == "sub" || op == "mul") {
    Rat l = rat_of_v(vs[0]), r = rat_of_v(vs[1]);
    Rat v = op == "add" ? l + r : (op == "sub" ? l - r : l * r);
    int rank = t->ty ? rank_of_ty(t->ty) : std::max(num_rank_v(vs[0]), num_rank_v(vs[1]));
    if (!t->ty && op == "sub") rank = std::max(rank, 1);
    return num_value(v, rank, s);
  }
  throw EvalError("unknown primitive " + op);
}

}  // namespace

ValuePtr eval(EvalCtx& cx, const Env& env, const TermPtr& t) {
  if (--cx.fuel <= 0) throw EvalError("evaluation ran out of fuel");
  const int s = env.stage;
  switch (t->k) {
    case TmKind::Var: {
      auto it = env.m.find(t->name);
      if (it != env.m.end()) return it->second.is_delta ? it->second.g.at(s) : it->second.v;
      if (cx.prog) {
        const Decl* d = cx.prog->find(t->name);
        if (d && d->k == DeclKind::Def && d->body) {
          if (!d->tyvars.empty())
            throw EvalError("schematic definition " + t->name + " must be instantiated");
          Env closed;
          closed.stage = s;
          return eval(cx, closed, d->body);
        }
      }
      throw EvalError("unbound variable " + t->name);
    }
    case TmKind::Inst:
      throw EvalError("instantiation not expanded: " + t->name);
    case TmKind::NatLit: {
      int r = t->ty ? rank_of_ty(t->ty) : 0;
      if (r == 2) return v_rat(Rat(static_cast<long>(t->nat)), s);
      if (r == 1) return v_int(static_cast<long long>(t->nat), s);
      return v_nat(t->nat, s);
    }
    case TmKind::IntLit: {
      int r = t->ty ? rank_of_ty(t->ty) : 1;
      if (r == 2) return v_rat(Rat(static_cast<long>(t->int_)), s);
      return v_int(t->int_, s);
    }
    case TmKind::RatLit:
      return v_rat(t->rat, s);
    case TmKind::EnumLit:
      return v_enum(t->name, t->enum_type, s);
    case TmKind::Succ: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Nat) throw EvalError("successor of a non-natural value");
      return v_nat(v->nat + 1, s);
    }
    case TmKind::Lam:
      return v_clos(env, t->x, t->ann ? t->ann : t->binder_ty, t->a);
    case TmKind::App: {
      auto f = eval(cx, env, t->a);
      auto a = eval(cx, env, t->b);
      return apply_value(cx, f, a);
    }
    case TmKind::Fix: {
      ValuePtr fv;
      if (s == 0) {
        fv = v_star(0);
      } else {
        fv = v_later(eval(cx, restrict_env(env, s - 1), t), s);
      }
      return eval(cx, env.with_gamma(t->x, fv, t->ann ? t->ann : t->binder_ty), t->a);
    }
    case TmKind::Pair:
      return v_pair(eval(cx, env, t->a), eval(cx, env, t->b), s);
    case TmKind::Fst: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Pair) throw EvalError("first projection of a non-pair");
      return v->a;
    }
    case TmKind::Snd: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Pair) throw EvalError("second projection of a non-pair");
      return v->b;
    }
    case TmKind::Inl:
      return v_inl(eval(cx, env, t->a), s);
    case TmKind::Inr:
      return v_inr(eval(cx, env, t->a), s);
    case TmKind::CaseSum: {
      auto v = eval(cx, env, t->a);
      if (v->k == VKind::Inl) return eval(cx, env.with_gamma(t->x, v->a, t->binder_ty), t->b);
      if (v->k == VKind::Inr) return eval(cx, env.with_gamma(t->y, v->a, t->binder_ty2), t->c);
      throw EvalError("case on a non-sum value");
    }
    case TmKind::CaseNat: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Nat) throw EvalError("case on a non-natural value");
      if (v->nat == 0) return eval(cx, env, t->b);
      return eval(cx, env.with_gamma(t->y, v_nat(v->nat - 1, s), ty_nat()), t->c);
    }
    case TmKind::Cons: {
      auto h = eval(cx, env, t->a);
      auto tv = eval(cx, env, t->b);
      ValuePtr tail;
      if (tv->k == VKind::Star) {
        tail = tv;
      } else if (tv->k == VKind::Later) {
        tail = tv->a;
        if (tail->k != VKind::Stream) throw EvalError("stream tail is not a stream");
      } else {
        throw EvalError("stream tail is not a later-value");
      }
      return v_stream(h, tail, s);
    }
    case TmKind::Head: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Stream) throw EvalError("head of a non-stream value");
      return v->a;
    }
    case TmKind::Tail: {
      auto v = eval(cx, env, t->a);
      if (v->k != VKind::Stream) throw EvalError("tail of a non-stream value");
      return v->b->k == VKind::Star ? v->b : v_later(v->b, s);
    }
    case TmKind::Next: {
      if (s == 0) return v_star(0);
      Env inner = restrict_env(env, s - 1);
      for (size_t i = 0; i < t->ds.size(); ++i) {
        auto bv = eval(cx, env, t->ds.terms[i]);
        if (bv->k != VKind::Later) throw EvalError("delayed binding is not a later-value");
        TypePtr bty = i < t->ds.var_types.size() ? t->ds.var_types[i] : nullptr;
        inner = inner.with_gamma(t->ds.vars[i], bv->a, bty);
      }
      return v_later(eval(cx, inner, t->a), s);
    }
    case TmKind::Prev: {
      auto v = eval(cx, env.delta_only(s + 1), t->a);
      if (v->k != VKind::Later) throw EvalError("prev of a non-later value");
      return v->a;
    }
    case TmKind::BoxT: {
      GlobalSection g;
      const Program* prog = cx.prog;
      const long long budget = cx.fuel;
      Env base = env;
      TermPtr body = t->a;
      g.gen = [prog, budget, base, body](int j) {
        EvalCtx local{prog, budget};
        return eval(local, base.delta_only(j), body);
      };
      return v_box(std::move(g), s);
    }
    case TmKind::LetBox: {
      auto u = eval(cx, env, t->a);
      if (u->k != VKind::BoxV) throw EvalError("let box of a non-box value");
      return eval(cx, env.with_delta(t->x, u->box, t->binder_ty), t->b);
    }
    case TmKind::LetConst: {
      GlobalSection g;
      bool delta_closed = true;
      for (const auto& v : free_vars(t->a)) {
        auto it = env.m.find(v);
        if (it != env.m.end() && !it->second.is_delta) {
          delta_closed = false;
          break;
        }
      }
      if (delta_closed) {
        // The bound term only uses boxed variables (and definitions), so it
        // can be re-evaluated at any stage directly.
        const Program* prog = cx.prog;
        const long long budget = cx.fuel;
        Env base = env;
        TermPtr bound = t->a;
        g.gen = [prog, budget, base, bound](int j) {
          EvalCtx local{prog, budget};
          return eval(local, base.delta_only(j), bound);
        };
      } else {
        ValuePtr snap = eval(cx, env, t->a);
        const int s0 = s;
        g.gen = [snap, s0](int j) {
          return j <= s0 ? restrict_value(snap, j) : extend_const_value(snap, j);
        };
      }
      return eval(cx, env.with_delta(t->x, std::move(g), t->binder_ty), t->b);
    }
    case TmKind::MUnit:
      return v_dist(make_dist({{eval(cx, env, t->a), Rat(1)}}), s);
    case TmKind::MLet: {
      auto dv = eval(cx, env, t->a);
      if (dv->k != VKind::Dist) throw EvalError("mlet of a non-distribution");
      std::vector<std::pair<ValuePtr, Rat>> out;
      for (const auto& [w, p] : dv->dist.support) {
        auto bv = eval(cx, env.with_gamma(t->x, w, t->binder_ty), t->b);
        if (bv->k != VKind::Dist) throw EvalError("mlet body is not a distribution");
        for (const auto& [w2, p2] : bv->dist.support) out.emplace_back(w2, p * p2);
      }
      return v_dist(make_dist(std::move(out)), s);
    }
    case TmKind::PrimDist: {
      std::vector<std::pair<ValuePtr, Rat>> out;
      if (t->dk == DistKind::Bern) {
        out.emplace_back(v_nat(1, s), t->rat);
        out.emplace_back(v_nat(0, s), Rat(1) - t->rat);
      } else {
        if (t->args.empty()) throw EvalError("empty uniform distribution");
        Rat each(1, static_cast<long>(t->args.size()));
        for (const auto& u : t->args) out.emplace_back(eval(cx, env, u), each);
      }
      return v_dist(make_dist(std::move(out)), s);
    }
    case TmKind::PrimOp:
      return eval_primop(cx, env, t);
  }
  throw EvalError("unhandled term form");
}

ValuePtr eval_closed(EvalCtx& cx, const TermPtr& t, int stage) {
  Env e;
  e.stage = stage;
  return eval(cx, e, t);
}

ValuePtr apply_value(EvalCtx& cx, const ValuePtr& f, const ValuePtr& arg) {
  if (f->k != VKind::Clos) throw EvalError("application of a non-function value");
  return eval(cx, f->env.with_gamma(f->param, arg, f->param_ty), f->body);
}

ValuePtr restrict_value(const ValuePtr& v, int stage) {
  if (stage == v->stage) return v;
  if (stage > v->stage) throw EvalError("cannot move a value above its stage");
  switch (v->k) {
    case VKind::Star:
      return v_star(stage);
    case VKind::Nat:
      return v_nat(v->nat, stage);
    case VKind::Int:
      return v_int(v->int_, stage);
    case VKind::RatV:
      return v_rat(v->rat, stage);
    case VKind::Enum:
      return v_enum(v->enum_ctor, v->enum_type, stage);
    case VKind::Pair:
      return v_pair(restrict_value(v->a, stage), restrict_value(v->b, stage), stage);
    case VKind::Inl:
      return v_inl(restrict_value(v->a, stage), stage);
    case VKind::Inr:
      return v_inr(restrict_value(v->a, stage), stage);
    case VKind::Stream: {
      auto elems = stream_elems(v);
      elems.resize(stage + 1);
      for (int i = 0; i <= stage; ++i) elems[i] = restrict_value(elems[i], stage - i);
      return stream_of_elems(elems, stage);
    }
    case VKind::Later:
      return stage == 0 ? v_star(0) : v_later(restrict_value(v->a, stage - 1), stage);
    case VKind::Clos:
      return v_clos(restrict_env(v->env, stage), v->param, v->param_ty, v->body);
    case VKind::BoxV:
      return v_box(v->box, stage);
    case VKind::Dist: {
      std::vector<std::pair<ValuePtr, Rat>> out;
      for (const auto& [w, p] : v->dist.support) out.emplace_back(restrict_value(w, stage), p);
      return v_dist(make_dist(std::move(out)), stage);
    }
  }
  throw EvalError("unhandled value form");
}

Env restrict_env(const Env& env, int stage) {
  Env e;
  e.stage = stage;
  for (const auto& [k, en] : env.m) {
    if (en.is_delta) {
      e.m.emplace(k, en);
    } else {
      EnvEntry n;
      n.v = restrict_value(en.v, stage);
      n.ty = en.ty;
      e.m.emplace(k, std::move(n));
    }
  }
  return e;
}

FiniteDist dist_of(EvalCtx& cx, const TermPtr& t, int stage) {
  auto v = eval_closed(cx, t, stage);
  if (v->k != VKind::Dist) throw EvalError("term did not evaluate to a distribution");
  return v->dist;
}

}  // namespace pglc
