#include "pglc/ast.hpp"

namespace pglc {

namespace {
TypePtr mk_ty(TyKind k, std::string name = "", TypePtr a = nullptr, TypePtr b = nullptr) {
  auto t = std::make_shared<Type>();
  t->k = k;
  t->name = std::move(name);
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}

std::shared_ptr<Term> mk_tm(TmKind k, Span sp) {
  auto t = std::make_shared<Term>();
  t->k = k;
  t->sp = sp;
  return t;
}

std::shared_ptr<Formula> mk_fm(FmKind k, Span sp) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  f->sp = sp;
  return f;
}
}  // namespace

TypePtr ty_nat() {
  static TypePtr t = mk_ty(TyKind::Nat);
  return t;
}
TypePtr ty_int() {
  static TypePtr t = mk_ty(TyKind::Int);
  return t;
}
TypePtr ty_rat() {
  static TypePtr t = mk_ty(TyKind::Rat);
  return t;
}
TypePtr ty_base(const std::string& name) { return mk_ty(TyKind::Base, name); }
TypePtr ty_var(const std::string& name) { return mk_ty(TyKind::TyVar, name); }
TypePtr ty_arrow(TypePtr a, TypePtr b) { return mk_ty(TyKind::Arrow, "", std::move(a), std::move(b)); }
TypePtr ty_prod(TypePtr a, TypePtr b) { return mk_ty(TyKind::Prod, "", std::move(a), std::move(b)); }
TypePtr ty_sum(TypePtr a, TypePtr b) { return mk_ty(TyKind::Sum, "", std::move(a), std::move(b)); }
TypePtr ty_stream(TypePtr a) { return mk_ty(TyKind::Stream, "", std::move(a)); }
TypePtr ty_later(TypePtr a) { return mk_ty(TyKind::Later, "", std::move(a)); }
TypePtr ty_box(TypePtr a) { return mk_ty(TyKind::Box, "", std::move(a)); }
TypePtr ty_dist(TypePtr a) { return mk_ty(TyKind::Dist, "", std::move(a)); }

bool type_eq(const TypePtr& x, const TypePtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->k != y->k) return false;
  switch (x->k) {
    case TyKind::Nat:
    case TyKind::Int:
    case TyKind::Rat:
      return true;
    case TyKind::Base:
    case TyKind::TyVar:
      return x->name == y->name;
    default:
      return type_eq(x->a, y->a) && type_eq(x->b, y->b);
  }
}

TypePtr type_subst(const TypePtr& t, const std::string& var, const TypePtr& rep) {
  if (!t) return t;
  switch (t->k) {
    case TyKind::TyVar:
      return t->name == var ? rep : t;
    case TyKind::Nat:
    case TyKind::Int:
    case TyKind::Rat:
    case TyKind::Base:
      return t;
    default: {
      TypePtr a = type_subst(t->a, var, rep);
      TypePtr b = type_subst(t->b, var, rep);
      if (a == t->a && b == t->b) return t;
      auto n = std::make_shared<Type>(*t);
      n->a = a;
      n->b = b;
      return n;
    }
  }
}

bool type_mentions_var(const TypePtr& t) {
  if (!t) return false;
  if (t->k == TyKind::TyVar) return true;
  return type_mentions_var(t->a) || type_mentions_var(t->b);
}

TermPtr tm_var(const std::string& n, Span sp) {
  auto t = mk_tm(TmKind::Var, sp);
  t->name = n;
  return t;
}
TermPtr tm_inst(const std::string& n, TypePtr targ, Span sp) {
  auto t = mk_tm(TmKind::Inst, sp);
  t->name = n;
  t->targ = std::move(targ);
  return t;
}
TermPtr tm_nat(unsigned long long v, Span sp) {
  auto t = mk_tm(TmKind::NatLit, sp);
  t->nat = v;
  return t;
}
TermPtr tm_int(long long v, Span sp) {
  auto t = mk_tm(TmKind::IntLit, sp);
  t->int_ = v;
  return t;
}
TermPtr tm_rat(const Rat& v, Span sp) {
  auto t = mk_tm(TmKind::RatLit, sp);
  t->rat = v;
  return t;
}
TermPtr tm_enum(const std::string& ctor, const std::string& ty, Span sp) {
  auto t = mk_tm(TmKind::EnumLit, sp);
  t->name = ctor;
  t->enum_type = ty;
  return t;
}
TermPtr tm_succ(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Succ, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_lam(const std::string& x, TypePtr ann, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::Lam, sp);
  t->x = x;
  t->ann = std::move(ann);
  t->a = std::move(body);
  return t;
}
TermPtr tm_app(TermPtr f, TermPtr a, Span sp) {
  auto t = mk_tm(TmKind::App, sp);
  t->a = std::move(f);
  t->b = std::move(a);
  return t;
}
TermPtr tm_fix(const std::string& x, TypePtr ann, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::Fix, sp);
  t->x = x;
  t->ann = std::move(ann);
  t->a = std::move(body);
  return t;
}
TermPtr tm_pair(TermPtr a, TermPtr b, Span sp) {
  auto t = mk_tm(TmKind::Pair, sp);
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
TermPtr tm_fst(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Fst, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_snd(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Snd, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_inl(TermPtr x, TypePtr ann, Span sp) {
  auto t = mk_tm(TmKind::Inl, sp);
  t->a = std::move(x);
  t->ann = std::move(ann);
  return t;
}
TermPtr tm_inr(TermPtr x, TypePtr ann, Span sp) {
  auto t = mk_tm(TmKind::Inr, sp);
  t->a = std::move(x);
  t->ann = std::move(ann);
  return t;
}
TermPtr tm_case_sum(TermPtr s, const std::string& x, TermPtr l, const std::string& y, TermPtr r,
                    Span sp) {
  auto t = mk_tm(TmKind::CaseSum, sp);
  t->a = std::move(s);
  t->x = x;
  t->b = std::move(l);
  t->y = y;
  t->c = std::move(r);
  return t;
}
TermPtr tm_case_nat(TermPtr s, TermPtr z, const std::string& y, TermPtr succ, Span sp) {
  auto t = mk_tm(TmKind::CaseNat, sp);
  t->a = std::move(s);
  t->b = std::move(z);
  t->y = y;
  t->c = std::move(succ);
  return t;
}
TermPtr tm_cons(TermPtr h, TermPtr tl, Span sp) {
  auto t = mk_tm(TmKind::Cons, sp);
  t->a = std::move(h);
  t->b = std::move(tl);
  return t;
}
TermPtr tm_head(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Head, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_tail(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Tail, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_next(DSubst ds, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::Next, sp);
  t->ds = std::move(ds);
  t->a = std::move(body);
  return t;
}
TermPtr tm_prev(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::Prev, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_box(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::BoxT, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_let_box(const std::string& x, TermPtr u, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::LetBox, sp);
  t->x = x;
  t->a = std::move(u);
  t->b = std::move(body);
  return t;
}
TermPtr tm_let_const(const std::string& x, TermPtr u, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::LetConst, sp);
  t->x = x;
  t->a = std::move(u);
  t->b = std::move(body);
  return t;
}
TermPtr tm_munit(TermPtr x, Span sp) {
  auto t = mk_tm(TmKind::MUnit, sp);
  t->a = std::move(x);
  return t;
}
TermPtr tm_mlet(const std::string& x, TermPtr d, TermPtr body, Span sp) {
  auto t = mk_tm(TmKind::MLet, sp);
  t->x = x;
  t->a = std::move(d);
  t->b = std::move(body);
  return t;
}
TermPtr tm_unif(std::vector<TermPtr> lits, Span sp) {
  auto t = mk_tm(TmKind::PrimDist, sp);
  t->dk = DistKind::Unif;
  t->args = std::move(lits);
  return t;
}
TermPtr tm_bern(const Rat& p, Span sp) {
  auto t = mk_tm(TmKind::PrimDist, sp);
  t->dk = DistKind::Bern;
  t->rat = p;
  return t;
}
TermPtr tm_primop(const std::string& op, std::vector<TermPtr> args, Span sp) {
  auto t = mk_tm(TmKind::PrimOp, sp);
  t->name = op;
  t->args = std::move(args);
  return t;
}

FormulaPtr fm_top(Span sp) { return mk_fm(FmKind::Top, sp); }
FormulaPtr fm_bot(Span sp) { return mk_fm(FmKind::Bot, sp); }
FormulaPtr fm_and(FormulaPtr a, FormulaPtr b, Span sp) {
  auto f = mk_fm(FmKind::And, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaPtr fm_or(FormulaPtr a, FormulaPtr b, Span sp) {
  auto f = mk_fm(FmKind::Or, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaPtr fm_not(FormulaPtr a, Span sp) {
  auto f = mk_fm(FmKind::Not, sp);
  f->f1 = std::move(a);
  return f;
}
FormulaPtr fm_implies(FormulaPtr a, FormulaPtr b, Span sp) {
  auto f = mk_fm(FmKind::Implies, sp);
  f->f1 = std::move(a);
  f->f2 = std::move(b);
  return f;
}
FormulaPtr fm_forall(const std::string& x, TypePtr ty, std::optional<QBounds> bounds,
                     FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::Forall, sp);
  f->x1 = x;
  f->ty = std::move(ty);
  f->bounds = std::move(bounds);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_exists(const std::string& x, TypePtr ty, std::optional<QBounds> bounds,
                     FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::Exists, sp);
  f->x1 = x;
  f->ty = std::move(ty);
  f->bounds = std::move(bounds);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_eq(TermPtr a, TermPtr b, Span sp) {
  auto f = mk_fm(FmKind::Eq, sp);
  f->t1 = std::move(a);
  f->t2 = std::move(b);
  return f;
}
FormulaPtr fm_leq(TermPtr a, TermPtr b, Span sp) {
  auto f = mk_fm(FmKind::Leq, sp);
  f->t1 = std::move(a);
  f->t2 = std::move(b);
  return f;
}
FormulaPtr fm_later(DSubst ds, FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::LaterF, sp);
  f->ds = std::move(ds);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_boxf(FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::BoxF, sp);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_dia_rel(const std::string& x1, TermPtr t1, const std::string& x2, TermPtr t2,
                      FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::DiamondRel, sp);
  f->x1 = x1;
  f->x2 = x2;
  f->t1 = std::move(t1);
  f->t2 = std::move(t2);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_dia_un(const std::string& x1, TermPtr t1, FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::DiamondUn, sp);
  f->x1 = x1;
  f->t1 = std::move(t1);
  f->f1 = std::move(body);
  return f;
}
FormulaPtr fm_all_un(TermPtr s, const std::string& x, FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::AllStream, sp);
  f->t1 = std::move(s);
  f->x1 = x;
  f->f1 = std::move(body);
  f->m = 1;
  f->n = 0;
  return f;
}
FormulaPtr fm_all_rel(int m, int n, TermPtr s1, TermPtr s2, const std::string& x1,
                      const std::string& x2, FormulaPtr body, Span sp) {
  auto f = mk_fm(FmKind::AllStream, sp);
  f->t1 = std::move(s1);
  f->t2 = std::move(s2);
  f->x1 = x1;
  f->x2 = x2;
  f->f1 = std::move(body);
  f->m = m;
  f->n = n;
  return f;
}
FormulaPtr fm_pred_app(const std::string& name, std::vector<TermPtr> args, Span sp) {
  auto f = mk_fm(FmKind::PredApp, sp);
  f->pred = name;
  f->args = std::move(args);
  return f;
}

}  // namespace pglc
