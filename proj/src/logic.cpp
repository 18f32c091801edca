#include "pglc/logic.hpp"

#include <algorithm>

#include "pglc/coupling.hpp"
#include "pglc/pretty.hpp"
#include "pglc/typesys.hpp"

namespace pglc {

namespace {

constexpr size_t kDomainLimit = 10000;

bool is_num(const ValuePtr& v) {
  return v->k == VKind::Nat || v->k == VKind::Int || v->k == VKind::RatV;
}

Rat rat_of(const ValuePtr& v) {
  switch (v->k) {
    case VKind::Nat:
      return Rat(static_cast<long long>(v->nat));
    case VKind::Int:
      return Rat(v->int_);
    default:
      return v->rat;
  }
}

struct Checker {
  EvalCtx& cx;
  bool bounded = false;

  ValuePtr ev(const Env& env, const TermPtr& t) { return eval(cx, env, t); }

  // Finite domain of a quantifier at stage j. Explicit bounds win; otherwise
  // the type must be built from enumerable pieces.
  std::vector<ValuePtr> domain(const TypePtr& ty, const std::optional<QBounds>& bs, int j) {
    std::vector<ValuePtr> out;
    if (bs) {
      for (const auto& t : bs->values) out.push_back(eval_closed(cx, t, j));
      return out;
    }
    switch (ty->k) {
      case TyKind::Base: {
        const Decl* d = cx.prog ? cx.prog->find(ty->name) : nullptr;
        if (!d || d->k != DeclKind::Enum) throw CheckError("unknown enum type " + ty->name);
        for (const auto& c : d->ctors) out.push_back(v_enum(c, ty->name, j));
        return out;
      }
      case TyKind::Prod: {
        for (const auto& a : domain(ty->a, std::nullopt, j))
          for (const auto& b : domain(ty->b, std::nullopt, j)) {
            out.push_back(v_pair(a, b, j));
            if (out.size() > kDomainLimit) throw CheckError("quantifier domain too large");
          }
        return out;
      }
      case TyKind::Sum: {
        for (const auto& a : domain(ty->a, std::nullopt, j)) out.push_back(v_inl(a, j));
        for (const auto& b : domain(ty->b, std::nullopt, j)) out.push_back(v_inr(b, j));
        return out;
      }
      case TyKind::Later: {
        if (j == 0) return {v_star(0)};
        for (const auto& a : domain(ty->a, std::nullopt, j - 1)) out.push_back(v_later(a, j));
        return out;
      }
      case TyKind::Stream: {
        // A stage-j stream has j+1 element slots, slot k living at stage j-k.
        std::vector<std::vector<ValuePtr>> acc{{}};
        for (int k = 0; k <= j; ++k) {
          auto slot = domain(ty->a, std::nullopt, j - k);
          std::vector<std::vector<ValuePtr>> next;
          for (const auto& pre : acc)
            for (const auto& e : slot) {
              next.push_back(pre);
              next.back().push_back(e);
              if (next.size() > kDomainLimit) throw CheckError("quantifier domain too large");
            }
          acc = std::move(next);
        }
        for (const auto& elems : acc) out.push_back(stream_of_elems(elems, j));
        return out;
      }
      default:
        throw CheckError("quantifier over " + pp_type(ty) + " needs explicit bounds");
    }
  }

  // Can the box clause settle for a single stage? Only when the body is a
  // constant formula over typed bindings; anything unclear counts as
  // non-constant and falls back to the bounded check.
  bool constant_body(const Env& env, const FormulaPtr& g) {
    TypeCtx tc;
    tc.prog = cx.prog;
    auto fv = free_vars_formula(g);
    for (const auto& [x, e] : env.m) {
      if (!fv.count(x)) continue;
      if (!e.ty) return false;
      if (e.is_delta)
        tc.delta[x] = e.ty;
      else
        tc.gamma[x] = e.ty;
    }
    try {
      return formula_constant(tc, g);
    } catch (const std::exception&) {
      return false;
    }
  }

  bool chk(const Env& env, const FormulaPtr& f, int i) {
    switch (f->k) {
      case FmKind::Top:
        return true;
      case FmKind::Bot:
        return false;
      case FmKind::And:
        return chk(env, f->f1, i) && chk(env, f->f2, i);
      case FmKind::Or:
        return chk(env, f->f1, i) || chk(env, f->f2, i);
      case FmKind::Implies:
        for (int j = i; j >= 0; --j) {
          Env ej = restrict_env(env, j);
          if (chk(ej, f->f1, j) && !chk(ej, f->f2, j)) return false;
        }
        return true;
      case FmKind::Not:
        for (int j = i; j >= 0; --j)
          if (chk(restrict_env(env, j), f->f1, j)) return false;
        return true;
      case FmKind::Forall:
        for (int j = i; j >= 0; --j) {
          Env ej = restrict_env(env, j);
          for (const auto& v : domain(f->ty, f->bounds, j))
            if (!chk(ej.with_gamma(f->x1, v, f->ty), f->f1, j)) return false;
        }
        return true;
      case FmKind::Exists:
        for (const auto& v : domain(f->ty, f->bounds, i))
          if (chk(env.with_gamma(f->x1, v, f->ty), f->f1, i)) return true;
        return false;
      case FmKind::LaterF: {
        if (i == 0) return true;
        Env inner = restrict_env(env, i - 1);
        for (size_t k = 0; k < f->ds.size(); ++k) {
          ValuePtr v = ev(env, f->ds.terms[k]);
          if (v->k != VKind::Later)
            throw CheckError("later binding for " + f->ds.vars[k] +
                             " did not evaluate to a delayed value");
          TypePtr bt = k < f->ds.var_types.size() ? f->ds.var_types[k] : nullptr;
          inner = inner.with_gamma(f->ds.vars[k], v->a, bt);
        }
        return chk(inner, f->f1, i - 1);
      }
      case FmKind::BoxF:
        if (constant_body(env, f->f1)) return chk(env, f->f1, i);
        bounded = true;
        for (int j = i; j >= 0; --j)
          if (!chk(restrict_env(env, j), f->f1, j)) return false;
        return true;
      case FmKind::Eq:
      case FmKind::Leq: {
        ValuePtr a = ev(env, f->t1);
        ValuePtr b = ev(env, f->t2);
        // Numerics compare by value so an unannotated literal can meet an
        // Int- or Rat-typed operand; everything else is structural.
        if (is_num(a) && is_num(b))
          return f->k == FmKind::Eq ? rat_of(a) == rat_of(b) : rat_of(a) <= rat_of(b);
        if (f->k == FmKind::Eq) return value_eq(a, b);
        throw CheckError("order atom needs numeric operands");
      }
      case FmKind::DiamondRel: {
        ValuePtr d1 = ev(env, f->t1);
        ValuePtr d2 = ev(env, f->t2);
        if (d1->k != VKind::Dist || d2->k != VKind::Dist)
          throw CheckError("distribution modality needs distribution operands");
        RelationSpec R;
        R.name = "formula body";
        R.holds = [this, env, f, i](const ValuePtr& x, const ValuePtr& y) {
          return chk(env.with_gamma(f->x1, x, nullptr).with_gamma(f->x2, y, nullptr), f->f1, i);
        };
        return lift_check_rel(d1->dist, d2->dist, R);
      }
      case FmKind::DiamondUn: {
        ValuePtr d = ev(env, f->t1);
        if (d->k != VKind::Dist)
          throw CheckError("distribution modality needs a distribution operand");
        return lift_check_un(d->dist, [this, &env, f, i](const ValuePtr& x) {
          return chk(env.with_gamma(f->x1, x, nullptr), f->f1, i);
        });
      }
      case FmKind::AllStream: {
        ValuePtr l = ev(env, f->t1);
        if (l->k != VKind::Stream) throw CheckError("stream predicate needs a stream operand");
        auto le = stream_elems(l);
        if (!f->t2) {
          return all_prefix_un(le, i, [&](const ValuePtr& v, int st) {
            Env e2 = restrict_env(env, st).with_gamma(f->x1, restrict_value(v, st), nullptr);
            return chk(e2, f->f1, st);
          });
        }
        ValuePtr r = ev(env, f->t2);
        if (r->k != VKind::Stream) throw CheckError("stream predicate needs a stream operand");
        auto re = stream_elems(r);
        return all_prefix_rel(le, re, f->m, f->n, i,
                              [&](const ValuePtr& lv, const ValuePtr& rv, int st) {
                                Env e2 = restrict_env(env, st)
                                             .with_gamma(f->x1, restrict_value(lv, st), nullptr)
                                             .with_gamma(f->x2, restrict_value(rv, st), nullptr);
                                return chk(e2, f->f1, st);
                              });
      }
      case FmKind::PredApp:
        throw CheckError("uninterpreted predicate " + f->pred +
                         " cannot be checked semantically");
    }
    throw CheckError("unhandled formula kind");
  }
};

}  // namespace

CheckResult check_formula(EvalCtx& cx, const Env& env, const FormulaPtr& f, int stage) {
  if (env.stage < stage)
    throw CheckError("environment stage " + std::to_string(env.stage) +
                     " below assertion stage " + std::to_string(stage));
  Checker c{cx};
  CheckResult r;
  r.ok = c.chk(env.stage == stage ? env : restrict_env(env, stage), f, stage);
  r.bounded = c.bounded;
  return r;
}

CheckResult check_closed(EvalCtx& cx, const FormulaPtr& f, int stage) {
  Env e;
  e.stage = stage;
  return check_formula(cx, e, f, stage);
}

bool all_prefix_un(const std::vector<ValuePtr>& elems, int stage,
                   const std::function<bool(const ValuePtr&, int)>& phi) {
  size_t idx = 0;
  for (int st = stage; st >= 0 && idx < elems.size(); --st, ++idx)
    if (!phi(elems[idx], st)) return false;
  return true;
}

bool all_prefix_rel(const std::vector<ValuePtr>& left, const std::vector<ValuePtr>& right, int m,
                    int n, int stage,
                    const std::function<bool(const ValuePtr&, const ValuePtr&, int)>& phi) {
  if (m < 1 || n < 1) throw CheckError("stream predicate step widths must be positive");
  int step = std::max(m, n);
  size_t li = 0, ri = 0;
  for (int st = stage; st >= 0 && li < left.size() && ri < right.size();
       st -= step, li += m, ri += n)
    if (!phi(left[li], right[ri], st)) return false;
  return true;
}

}  // namespace pglc
