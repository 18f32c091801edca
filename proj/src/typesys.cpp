#include "pglc/typesys.hpp"

#include <set>

#include "pglc/pretty.hpp"

namespace pglc {

namespace {

[[noreturn]] void err(const std::string& m, Span sp) { throw TypeError(m, sp); }

int numeric_rank(const TypePtr& t) {
  switch (t->k) {
    case TyKind::Nat: return 0;
    case TyKind::Int: return 1;
    case TyKind::Rat: return 2;
    default: return -1;
  }
}

TypePtr of_rank(int r) { return r == 0 ? ty_nat() : r == 1 ? ty_int() : ty_rat(); }

TypePtr join_types(const TypePtr& a, const TypePtr& b, Span sp) {
  if (type_eq(a, b)) return a;
  int ra = numeric_rank(a), rb = numeric_rank(b);
  if (ra >= 0 && rb >= 0) return of_rank(ra > rb ? ra : rb);
  err("incompatible types " + pp_type(a) + " and " + pp_type(b), sp);
}

void validate_type(const Program* prog, const TypePtr& t, Span sp) {
  switch (t->k) {
    case TyKind::Nat:
    case TyKind::Int:
    case TyKind::Rat:
    case TyKind::TyVar:
      return;
    case TyKind::Base: {
      const Decl* d = prog ? prog->find(t->name) : nullptr;
      if (!d || d->k != DeclKind::Enum) err("unknown base type " + t->name, sp);
      return;
    }
    case TyKind::Arrow:
    case TyKind::Prod:
    case TyKind::Sum:
      validate_type(prog, t->a, sp);
      validate_type(prog, t->b, sp);
      return;
    case TyKind::Stream:
    case TyKind::Later:
    case TyKind::Box:
      validate_type(prog, t->a, sp);
      return;
    case TyKind::Dist:
      validate_type(prog, t->a, sp);
      if (!is_discrete(t->a))
        err("distributions need a discrete type, got " + pp_type(t->a), sp);
      return;
  }
}

}  // namespace

bool is_discrete(const TypePtr& t) {
  switch (t->k) {
    case TyKind::Nat:
    case TyKind::Int:
    case TyKind::Rat:
    case TyKind::Base:
    case TyKind::TyVar:
      return true;
    case TyKind::Prod:
    case TyKind::Sum:
      return is_discrete(t->a) && is_discrete(t->b);
    case TyKind::Stream:
    case TyKind::Later:
      return is_discrete(t->a);
    default:
      return false;
  }
}

bool is_constant(const TypePtr& t) {
  switch (t->k) {
    case TyKind::Nat:
    case TyKind::Int:
    case TyKind::Rat:
    case TyKind::Base:
      return true;
    case TyKind::Prod:
    case TyKind::Sum:
    case TyKind::Arrow:
      return is_constant(t->a) && is_constant(t->b);
    case TyKind::Box:
      return true;
    default:
      return false;
  }
}

namespace {

TypePtr synth_impl(const TypeCtx& ctx, const TermPtr& t);

TypePtr do_synth(const TypeCtx& ctx, const TermPtr& t) {
  TypePtr r = synth_impl(ctx, t);
  t->ty = r;
  return r;
}

void do_check(const TypeCtx& ctx, const TermPtr& t, const TypePtr& target);

// Delayed substitution bindings always synthesize; each must be a later.
TypeCtx bind_delayed(const TypeCtx& ctx, const DSubst& ds, Span sp) {
  TypeCtx inner = ctx;
  ds.var_types.clear();
  for (size_t i = 0; i < ds.size(); ++i) {
    TypePtr bt = do_synth(ctx, ds.terms[i]);
    if (bt->k != TyKind::Later)
      err("delayed binding for " + ds.vars[i] + " needs a later type, got " +
              pp_type(bt),
          sp);
    ds.var_types.push_back(bt->a);
    inner.gamma[ds.vars[i]] = bt->a;
  }
  return inner;
}

TypePtr synth_primop(const TypeCtx& ctx, const TermPtr& t) {
  const std::string& op = t->name;
  Span sp = t->sp;
  if (op == "div") {
    // operands of any numeric type; the quotient lives in the rationals
    TypePtr a = do_synth(ctx, t->args[0]);
    TypePtr b = do_synth(ctx, t->args[1]);
    if (numeric_rank(a) < 0 || numeric_rank(b) < 0)
      err("division needs numeric operands", sp);
    return ty_rat();
  }
  if (op == "add" || op == "mul" || op == "sub") {
    TypePtr a = do_synth(ctx, t->args[0]);
    TypePtr b = do_synth(ctx, t->args[1]);
    TypePtr j = join_types(a, b, sp);
    int r = numeric_rank(j);
    if (r < 0) err("arithmetic needs numeric operands", sp);
    if (op == "sub" && r < 1) j = ty_int();  // no truncation on naturals
    do_check(ctx, t->args[0], j);
    do_check(ctx, t->args[1], j);
    return j;
  }
  if (op == "neg") {
    TypePtr a = do_synth(ctx, t->args[0]);
    int r = numeric_rank(a);
    if (r < 0) err("negation needs a numeric operand", sp);
    TypePtr j = r < 1 ? ty_int() : a;
    do_check(ctx, t->args[0], j);
    return j;
  }
  if (op == "xor") {
    do_check(ctx, t->args[0], ty_nat());
    do_check(ctx, t->args[1], ty_nat());
    return ty_nat();
  }
  if (op == "int") {
    do_check(ctx, t->args[0], ty_nat());
    return ty_int();
  }
  if (op == "swap") {
    TypePtr a = do_synth(ctx, t->args[0]);
    if (a->k != TyKind::Later || a->a->k != TyKind::Dist)
      err("swap needs a delayed distribution, got " + pp_type(a), sp);
    return ty_dist(ty_later(a->a->a));
  }
  err("unknown primitive " + op, sp);
}

TypePtr synth_unif(const TypeCtx& ctx, const TermPtr& t) {
  TypePtr j;
  for (auto& a : t->args) {
    switch (a->k) {
      case TmKind::NatLit:
      case TmKind::IntLit:
      case TmKind::RatLit:
      case TmKind::EnumLit:
        break;
      default:
        err("uniform support must be literal outcomes", a->sp);
    }
    TypePtr e = do_synth(ctx, a);
    j = j ? join_types(j, e, t->sp) : e;
  }
  for (auto& a : t->args) do_check(ctx, a, j);
  return ty_dist(j);
}

TypePtr synth_impl(const TypeCtx& ctx, const TermPtr& t) {
  Span sp = t->sp;
  switch (t->k) {
    case TmKind::Var: {
      auto g = ctx.gamma.find(t->name);
      if (g != ctx.gamma.end()) return g->second;
      auto d = ctx.delta.find(t->name);
      if (d != ctx.delta.end()) return d->second;
      if (ctx.prog) {
        const Decl* def = ctx.prog->find(t->name);
        if (def && def->k == DeclKind::Def) {
          if (!def->tyvars.empty())
            err(t->name + " is schematic; instantiate it with @", sp);
          return def->declared_ty;
        }
      }
      err("unbound variable " + t->name, sp);
    }
    case TmKind::Inst: {
      const Decl* def = ctx.prog ? ctx.prog->find(t->name) : nullptr;
      if (!def || def->k != DeclKind::Def)
        err("unknown definition " + t->name, sp);
      if (def->tyvars.size() != 1)
        err(t->name + " does not take one type argument", sp);
      validate_type(ctx.prog, t->targ, sp);
      TypePtr r = type_subst(def->declared_ty, def->tyvars[0], t->targ);
      validate_type(ctx.prog, r, sp);
      return r;
    }
    case TmKind::NatLit: return ty_nat();
    case TmKind::IntLit: return ty_int();
    case TmKind::RatLit: return ty_rat();
    case TmKind::EnumLit: return ty_base(t->enum_type);
    case TmKind::Succ:
      do_check(ctx, t->a, ty_nat());
      return ty_nat();
    case TmKind::Lam: {
      if (!t->ann) err("cannot infer unannotated lambda", sp);
      validate_type(ctx.prog, t->ann, sp);
      t->binder_ty = t->ann;
      TypePtr b = do_synth(ctx.with_gamma(t->x, t->ann), t->a);
      return ty_arrow(t->ann, b);
    }
    case TmKind::App: {
      TypePtr f = do_synth(ctx, t->a);
      if (f->k != TyKind::Arrow)
        err("application of a non-function of type " + pp_type(f), sp);
      do_check(ctx, t->b, f->a);
      return f->b;
    }
    case TmKind::Fix: {
      if (!t->ann) err("cannot infer unannotated fix", sp);
      validate_type(ctx.prog, t->ann, sp);
      if (t->ann->k != TyKind::Later)
        err("fix binder annotation must be a later type", sp);
      t->binder_ty = t->ann;
      do_check(ctx.with_gamma(t->x, t->ann), t->a, t->ann->a);
      return t->ann->a;
    }
    case TmKind::Pair: {
      TypePtr a = do_synth(ctx, t->a);
      TypePtr b = do_synth(ctx, t->b);
      return ty_prod(a, b);
    }
    case TmKind::Fst: {
      TypePtr p = do_synth(ctx, t->a);
      if (p->k != TyKind::Prod) err("projection from a non-pair", sp);
      return p->a;
    }
    case TmKind::Snd: {
      TypePtr p = do_synth(ctx, t->a);
      if (p->k != TyKind::Prod) err("projection from a non-pair", sp);
      return p->b;
    }
    case TmKind::Inl:
    case TmKind::Inr: {
      if (!t->ann) err("cannot infer injection without a sum annotation", sp);
      validate_type(ctx.prog, t->ann, sp);
      if (t->ann->k != TyKind::Sum) err("injection annotation must be a sum", sp);
      do_check(ctx, t->a, t->k == TmKind::Inl ? t->ann->a : t->ann->b);
      return t->ann;
    }
    case TmKind::CaseSum: {
      TypePtr s = do_synth(ctx, t->a);
      if (s->k != TyKind::Sum) err("case scrutinee must have a sum type", sp);
      t->binder_ty = s->a;
      t->binder_ty2 = s->b;
      TypePtr l = do_synth(ctx.with_gamma(t->x, s->a), t->b);
      do_check(ctx.with_gamma(t->y, s->b), t->c, l);
      return l;
    }
    case TmKind::CaseNat: {
      do_check(ctx, t->a, ty_nat());
      t->binder_ty = ty_nat();
      TypePtr z = do_synth(ctx, t->b);
      do_check(ctx.with_gamma(t->y, ty_nat()), t->c, z);
      return z;
    }
    case TmKind::Cons: {
      TypePtr h = do_synth(ctx, t->a);
      do_check(ctx, t->b, ty_later(ty_stream(h)));
      return ty_stream(h);
    }
    case TmKind::Head: {
      TypePtr s = do_synth(ctx, t->a);
      if (s->k != TyKind::Stream) err("hd needs a stream", sp);
      return s->a;
    }
    case TmKind::Tail: {
      TypePtr s = do_synth(ctx, t->a);
      if (s->k != TyKind::Stream) err("tl needs a stream", sp);
      return ty_later(s);
    }
    case TmKind::Next: {
      TypeCtx inner = bind_delayed(ctx, t->ds, sp);
      return ty_later(do_synth(inner, t->a));
    }
    case TmKind::Prev: {
      TypePtr a = do_synth(ctx.gamma_cleared(), t->a);
      if (a->k != TyKind::Later) err("prev needs a later type", sp);
      return a->a;
    }
    case TmKind::BoxT:
      return ty_box(do_synth(ctx.gamma_cleared(), t->a));
    case TmKind::LetBox: {
      TypePtr u = do_synth(ctx, t->a);
      if (u->k != TyKind::Box) err("let box needs a boxed right-hand side", sp);
      t->binder_ty = u->a;
      return do_synth(ctx.with_delta(t->x, u->a), t->b);
    }
    case TmKind::LetConst: {
      TypePtr u = do_synth(ctx, t->a);
      if (!is_constant(u))
        err("let const needs a constant type, got " + pp_type(u), sp);
      t->binder_ty = u;
      return do_synth(ctx.with_delta(t->x, u), t->b);
    }
    case TmKind::MUnit: {
      TypePtr a = do_synth(ctx, t->a);
      if (!is_discrete(a))
        err("return needs a discrete type, got " + pp_type(a), sp);
      return ty_dist(a);
    }
    case TmKind::MLet: {
      TypePtr d = do_synth(ctx, t->a);
      if (d->k != TyKind::Dist) err("mlet needs a distribution", sp);
      t->binder_ty = d->a;
      TypePtr b = do_synth(ctx.with_gamma(t->x, d->a), t->b);
      if (b->k != TyKind::Dist) err("mlet body must be a distribution", sp);
      return b;
    }
    case TmKind::PrimDist: {
      if (t->dk == DistKind::Bern) {
        if (t->rat < Rat(0) || Rat(1) < t->rat)
          err("probability out of range", sp);
        return ty_dist(ty_nat());
      }
      return synth_unif(ctx, t);
    }
    case TmKind::PrimOp:
      return synth_primop(ctx, t);
  }
  err("unreachable term", sp);
}

void check_impl(const TypeCtx& ctx, const TermPtr& t, const TypePtr& target) {
  Span sp = t->sp;
  switch (t->k) {
    case TmKind::NatLit:
      if (numeric_rank(target) < 0)
        err("numeric literal against " + pp_type(target), sp);
      return;
    case TmKind::IntLit:
      if (numeric_rank(target) < 1)
        err("integer literal against " + pp_type(target), sp);
      return;
    case TmKind::RatLit:
      if (numeric_rank(target) < 2)
        err("rational literal against " + pp_type(target), sp);
      return;
    case TmKind::Lam: {
      if (target->k != TyKind::Arrow)
        err("lambda against non-function type " + pp_type(target), sp);
      if (t->ann && !type_eq(t->ann, target->a))
        err("binder annotation " + pp_type(t->ann) + " does not match " +
                pp_type(target->a),
            sp);
      t->binder_ty = target->a;
      do_check(ctx.with_gamma(t->x, target->a), t->a, target->b);
      return;
    }
    case TmKind::Fix: {
      TypePtr later = ty_later(target);
      if (t->ann && !type_eq(t->ann, later))
        err("fix annotation " + pp_type(t->ann) + " does not match " +
                pp_type(later),
            sp);
      t->binder_ty = later;
      do_check(ctx.with_gamma(t->x, later), t->a, target);
      return;
    }
    case TmKind::Pair: {
      if (target->k != TyKind::Prod)
        err("pair against non-product type " + pp_type(target), sp);
      do_check(ctx, t->a, target->a);
      do_check(ctx, t->b, target->b);
      return;
    }
    case TmKind::Inl:
    case TmKind::Inr: {
      if (target->k != TyKind::Sum)
        err("injection against non-sum type " + pp_type(target), sp);
      if (t->ann && !type_eq(t->ann, target))
        err("injection annotation does not match target sum", sp);
      do_check(ctx, t->a, t->k == TmKind::Inl ? target->a : target->b);
      return;
    }
    case TmKind::CaseSum: {
      TypePtr s = do_synth(ctx, t->a);
      if (s->k != TyKind::Sum) err("case scrutinee must have a sum type", sp);
      t->binder_ty = s->a;
      t->binder_ty2 = s->b;
      do_check(ctx.with_gamma(t->x, s->a), t->b, target);
      do_check(ctx.with_gamma(t->y, s->b), t->c, target);
      return;
    }
    case TmKind::CaseNat: {
      do_check(ctx, t->a, ty_nat());
      t->binder_ty = ty_nat();
      do_check(ctx, t->b, target);
      do_check(ctx.with_gamma(t->y, ty_nat()), t->c, target);
      return;
    }
    case TmKind::Cons: {
      if (target->k != TyKind::Stream)
        err("cons against non-stream type " + pp_type(target), sp);
      do_check(ctx, t->a, target->a);
      do_check(ctx, t->b, ty_later(target));
      return;
    }
    case TmKind::Next: {
      if (target->k != TyKind::Later)
        err("next against non-later type " + pp_type(target), sp);
      TypeCtx inner = bind_delayed(ctx, t->ds, sp);
      do_check(inner, t->a, target->a);
      return;
    }
    case TmKind::BoxT: {
      if (target->k != TyKind::Box)
        err("box against non-boxed type " + pp_type(target), sp);
      do_check(ctx.gamma_cleared(), t->a, target->a);
      return;
    }
    case TmKind::Prev: {
      do_check(ctx.gamma_cleared(), t->a, ty_later(target));
      return;
    }
    case TmKind::LetBox: {
      TypePtr u = do_synth(ctx, t->a);
      if (u->k != TyKind::Box) err("let box needs a boxed right-hand side", sp);
      t->binder_ty = u->a;
      do_check(ctx.with_delta(t->x, u->a), t->b, target);
      return;
    }
    case TmKind::LetConst: {
      TypePtr u = do_synth(ctx, t->a);
      if (!is_constant(u))
        err("let const needs a constant type, got " + pp_type(u), sp);
      t->binder_ty = u;
      do_check(ctx.with_delta(t->x, u), t->b, target);
      return;
    }
    case TmKind::MUnit: {
      if (target->k != TyKind::Dist)
        err("return against non-distribution type " + pp_type(target), sp);
      if (!is_discrete(target->a))
        err("return needs a discrete type, got " + pp_type(target->a), sp);
      do_check(ctx, t->a, target->a);
      return;
    }
    case TmKind::MLet: {
      if (target->k != TyKind::Dist)
        err("mlet against non-distribution type " + pp_type(target), sp);
      TypePtr d = do_synth(ctx, t->a);
      if (d->k != TyKind::Dist) err("mlet needs a distribution", sp);
      t->binder_ty = d->a;
      do_check(ctx.with_gamma(t->x, d->a), t->b, target);
      return;
    }
    case TmKind::PrimDist: {
      if (target->k != TyKind::Dist)
        err("distribution against non-distribution type " + pp_type(target), sp);
      if (t->dk == DistKind::Bern) {
        if (t->rat < Rat(0) || Rat(1) < t->rat)
          err("probability out of range", sp);
        if (numeric_rank(target->a) < 0)
          err("bernoulli outcomes are numeric", sp);
        return;
      }
      for (auto& a : t->args) do_check(ctx, a, target->a);
      return;
    }
    case TmKind::PrimOp: {
      const std::string& op = t->name;
      if (op == "add" || op == "mul") {
        if (numeric_rank(target) < 0) err("arithmetic against " + pp_type(target), sp);
        do_check(ctx, t->args[0], target);
        do_check(ctx, t->args[1], target);
        return;
      }
      if (op == "sub") {
        if (numeric_rank(target) < 1) err("subtraction against " + pp_type(target), sp);
        do_check(ctx, t->args[0], target);
        do_check(ctx, t->args[1], target);
        return;
      }
      if (op == "neg") {
        if (numeric_rank(target) < 1) err("negation against " + pp_type(target), sp);
        do_check(ctx, t->args[0], target);
        return;
      }
      break;  // div/xor/int/swap: fall through to synthesis
    }
    default:
      break;
  }
  TypePtr got = do_synth(ctx, t);
  if (!type_eq(got, target))
    err("expected " + pp_type(target) + ", got " + pp_type(got), sp);
}

void do_check(const TypeCtx& ctx, const TermPtr& t, const TypePtr& target) {
  check_impl(ctx, t, target);
  t->ty = target;
}

}  // namespace

TypePtr synth(const TypeCtx& ctx, const TermPtr& t) { return do_synth(ctx, t); }

void check(const TypeCtx& ctx, const TermPtr& t, const TypePtr& target) {
  do_check(ctx, t, target);
}

void typecheck_formula(const TypeCtx& ctx, const FormulaPtr& f) {
  Span sp = f->sp;
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return;
    case FmKind::And:
    case FmKind::Or:
    case FmKind::Implies:
      typecheck_formula(ctx, f->f1);
      typecheck_formula(ctx, f->f2);
      return;
    case FmKind::Not:
      typecheck_formula(ctx, f->f1);
      return;
    case FmKind::Forall:
    case FmKind::Exists: {
      validate_type(ctx.prog, f->ty, sp);
      if (f->bounds)
        for (auto& v : f->bounds->values) check(ctx, v, f->ty);
      typecheck_formula(ctx.with_gamma(f->x1, f->ty), f->f1);
      return;
    }
    case FmKind::Eq:
    case FmKind::Leq: {
      TypePtr a;
      bool ok1 = true;
      try {
        a = synth(ctx, f->t1);
      } catch (const TypeError&) {
        ok1 = false;
      }
      TypePtr r;
      if (ok1) {
        TypePtr b;
        bool ok2 = true;
        try {
          b = synth(ctx, f->t2);
        } catch (const TypeError&) {
          ok2 = false;
        }
        if (ok2) {
          if (type_eq(a, b)) {
            r = a;
          } else {
            r = join_types(a, b, sp);
            check(ctx, f->t1, r);
            check(ctx, f->t2, r);
          }
        } else {
          check(ctx, f->t2, a);
          r = a;
        }
      } else {
        TypePtr b = synth(ctx, f->t2);
        check(ctx, f->t1, b);
        r = b;
      }
      if (f->k == FmKind::Leq && numeric_rank(r) < 0)
        err("ordering needs a numeric type, got " + pp_type(r), sp);
      f->rel_ty = r;
      return;
    }
    case FmKind::LaterF: {
      TypeCtx inner = bind_delayed(ctx, f->ds, sp);
      typecheck_formula(inner, f->f1);
      return;
    }
    case FmKind::BoxF:
      typecheck_formula(ctx.gamma_cleared(), f->f1);
      return;
    case FmKind::DiamondRel: {
      TypePtr d1 = synth(ctx, f->t1);
      TypePtr d2 = synth(ctx, f->t2);
      if (d1->k != TyKind::Dist || d2->k != TyKind::Dist)
        err("dia binds results of distributions", sp);
      TypeCtx inner = ctx.with_gamma(f->x1, d1->a).with_gamma(f->x2, d2->a);
      typecheck_formula(inner, f->f1);
      return;
    }
    case FmKind::DiamondUn: {
      TypePtr d1 = synth(ctx, f->t1);
      if (d1->k != TyKind::Dist) err("dia binds the result of a distribution", sp);
      typecheck_formula(ctx.with_gamma(f->x1, d1->a), f->f1);
      return;
    }
    case FmKind::AllStream: {
      TypePtr s1 = synth(ctx, f->t1);
      if (s1->k != TyKind::Stream) err("prefix quantifier needs a stream", sp);
      TypeCtx inner = ctx.with_gamma(f->x1, s1->a);
      if (f->t2) {
        if (f->m < 1 || f->n < 1) err("step widths must be positive", sp);
        TypePtr s2 = synth(ctx, f->t2);
        if (s2->k != TyKind::Stream) err("prefix quantifier needs a stream", sp);
        inner = inner.with_gamma(f->x2, s2->a);
      }
      typecheck_formula(inner, f->f1);
      return;
    }
    case FmKind::PredApp:
      for (auto& a : f->args) synth(ctx, a);
      return;
  }
}

namespace {

bool constant_shape(const FormulaPtr& f) {
  switch (f->k) {
    case FmKind::Top:
    case FmKind::Bot:
      return true;
    case FmKind::And:
    case FmKind::Or:
    case FmKind::Implies:
      return constant_shape(f->f1) && constant_shape(f->f2);
    case FmKind::Not:
      return constant_shape(f->f1);
    case FmKind::Forall:
    case FmKind::Exists:
      return is_constant(f->ty) && constant_shape(f->f1);
    case FmKind::Eq:
    case FmKind::Leq:
      return f->rel_ty && is_constant(f->rel_ty);
    case FmKind::BoxF:
      return true;
    default:
      return false;
  }
}

}  // namespace

bool formula_constant(const TypeCtx& ctx, const FormulaPtr& f) {
  try {
    typecheck_formula(ctx.gamma_cleared(), f);
  } catch (const TypeError&) {
    return false;
  }
  return constant_shape(f);
}

void typecheck_program(const Program& prog) {
  std::set<std::string> names;
  std::set<std::string> ctors;
  for (const auto& d : prog.decls) {
    if (!names.insert(d.name).second)
      throw TypeError("duplicate declaration " + d.name, d.sp);
    if (d.k == DeclKind::Enum)
      for (auto& c : d.ctors)
        if (!ctors.insert(c).second)
          throw TypeError("duplicate constructor " + c, d.sp);
  }
  TypeCtx ctx;
  ctx.prog = &prog;
  for (const auto& d : prog.decls) {
    switch (d.k) {
      case DeclKind::Def:
        validate_type(&prog, d.declared_ty, d.sp);
        check(ctx, d.body, d.declared_ty);
        break;
      case DeclKind::Axiom:
      case DeclKind::FormulaDecl:
        if (d.formula) typecheck_formula(ctx, d.formula);
        break;
      case DeclKind::Enum:
        break;
    }
  }
}

}  // namespace pglc
