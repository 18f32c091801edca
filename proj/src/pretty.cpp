#include "pglc/pretty.hpp"

#include <sstream>

namespace pglc {

namespace {

std::string paren_if(bool b, const std::string& s) {
  return b ? "(" + s + ")" : s;
}

std::string ty_s(const TypePtr& t, int ctx) {
  switch (t->k) {
    case TyKind::Nat: return "Nat";
    case TyKind::Int: return "Int";
    case TyKind::Rat: return "Rat";
    case TyKind::Base:
    case TyKind::TyVar: return t->name;
    case TyKind::Arrow:
      return paren_if(ctx > 0, ty_s(t->a, 1) + " -> " + ty_s(t->b, 0));
    case TyKind::Sum:
      return paren_if(ctx > 1, ty_s(t->a, 1) + " + " + ty_s(t->b, 2));
    case TyKind::Prod:
      return paren_if(ctx > 2, ty_s(t->a, 2) + " * " + ty_s(t->b, 3));
    case TyKind::Stream: return paren_if(ctx > 3, "Str " + ty_s(t->a, 3));
    case TyKind::Dist: return paren_if(ctx > 3, "Dist " + ty_s(t->a, 3));
    case TyKind::Later: return paren_if(ctx > 3, "|> " + ty_s(t->a, 3));
    case TyKind::Box: return paren_if(ctx > 3, "[] " + ty_s(t->a, 3));
  }
  return "?";
}

std::string tm_s(const TermPtr& t, int ctx);

std::string ds_s(const DSubst& ds) {
  std::string s = "[";
  for (size_t i = 0; i < ds.size(); ++i) {
    if (i) s += ", ";
    s += ds.vars[i] + " <- " + tm_s(ds.terms[i], 0);
  }
  return s + "]";
}

std::string unary_s(const char* kw, const TermPtr& arg, int ctx) {
  return paren_if(ctx > 6, std::string(kw) + " " + tm_s(arg, 7));
}

std::string tm_s(const TermPtr& t, int ctx) {
  switch (t->k) {
    case TmKind::Var: return t->name;
    case TmKind::Inst: return t->name + "@" + ty_s(t->targ, 4);
    case TmKind::NatLit: return std::to_string(t->nat);
    case TmKind::IntLit: {
      std::string s = std::to_string(t->int_);
      return paren_if(t->int_ < 0 && ctx > 4, s);
    }
    case TmKind::RatLit: return paren_if(ctx > 4, t->rat.str());
    case TmKind::EnumLit: return t->name;
    case TmKind::Succ: return unary_s("S", t->a, ctx);
    case TmKind::Lam:
      return paren_if(ctx > 0, "\\" + t->x +
                                   (t->ann ? " : " + ty_s(t->ann, 0) : "") + ". " +
                                   tm_s(t->a, 0));
    case TmKind::Fix:
      return paren_if(ctx > 0, "fix " + t->x +
                                   (t->ann ? " : " + ty_s(t->ann, 0) : "") + ". " +
                                   tm_s(t->a, 0));
    case TmKind::App:
      return paren_if(ctx > 5, tm_s(t->a, 5) + " " + tm_s(t->b, 7));
    case TmKind::Pair: {
      // Right-nested pairs render as flat tuples; the parser builds the same
      // nesting back, so the two shapes are one surface form.
      std::string first = tm_s(t->a, 0);
      // "<-" would lex as the binding arrow
      std::string s = (first[0] == '-' ? "< " : "<") + first;
      TermPtr rest = t->b;
      while (rest->k == TmKind::Pair) {
        s += ", " + tm_s(rest->a, 0);
        rest = rest->b;
      }
      return s + ", " + tm_s(rest, 0) + ">";
    }
    case TmKind::Fst: return unary_s("fst", t->a, ctx);
    case TmKind::Snd: return unary_s("snd", t->a, ctx);
    case TmKind::Inl: return unary_s("inl", t->a, ctx);
    case TmKind::Inr: return unary_s("inr", t->a, ctx);
    case TmKind::CaseSum:
      return paren_if(ctx > 0, "case " + tm_s(t->a, 0) + " of inl " + t->x +
                                   " => " + tm_s(t->b, 0) + " | inr " + t->y +
                                   " => " + tm_s(t->c, 0));
    case TmKind::CaseNat:
      return paren_if(ctx > 0, "case " + tm_s(t->a, 0) + " of 0 => " +
                                   tm_s(t->b, 0) + " | S " + t->y + " => " +
                                   tm_s(t->c, 0));
    case TmKind::Cons:
      return paren_if(ctx > 2, tm_s(t->a, 3) + " :: " + tm_s(t->b, 2));
    case TmKind::Head: return unary_s("hd", t->a, ctx);
    case TmKind::Tail: return unary_s("tl", t->a, ctx);
    case TmKind::Next: {
      std::string s = "next ";
      if (t->ds.size() > 0) s += ds_s(t->ds) + " ";
      return paren_if(ctx > 6, s + tm_s(t->a, 7));
    }
    case TmKind::Prev: return unary_s("prev", t->a, ctx);
    case TmKind::BoxT: return unary_s("box", t->a, ctx);
    case TmKind::LetBox:
      return paren_if(ctx > 0, "let box " + t->x + " = " + tm_s(t->a, 0) +
                                   " in " + tm_s(t->b, 0));
    case TmKind::LetConst:
      return paren_if(ctx > 0, "let const " + t->x + " = " + tm_s(t->a, 0) +
                                   " in " + tm_s(t->b, 0));
    case TmKind::MUnit: return unary_s("return", t->a, ctx);
    case TmKind::MLet:
      return paren_if(ctx > 0, "mlet " + t->x + " = " + tm_s(t->a, 0) + " in " +
                                   tm_s(t->b, 0));
    case TmKind::PrimDist: {
      if (t->dk == DistKind::Bern)
        return paren_if(ctx > 6, "bern " + t->rat.str());
      std::string s = "unif {";
      for (size_t i = 0; i < t->args.size(); ++i) {
        if (i) s += ", ";
        s += tm_s(t->args[i], 0);
      }
      return paren_if(ctx > 6, s + "}");
    }
    case TmKind::PrimOp: {
      const std::string& op = t->name;
      if (op == "add" || op == "sub")
        return paren_if(ctx > 3, tm_s(t->args[0], 3) +
                                     (op == "add" ? " + " : " - ") +
                                     tm_s(t->args[1], 4));
      if (op == "mul" || op == "div")
        return paren_if(ctx > 4, tm_s(t->args[0], 4) +
                                     (op == "mul" ? " * " : " / ") +
                                     tm_s(t->args[1], 5));
      if (op == "xor")
        return paren_if(ctx > 6, "xor " + tm_s(t->args[0], 7) + " " +
                                     tm_s(t->args[1], 7));
      return unary_s(op.c_str(), t->args[0], ctx);
    }
  }
  return "?";
}

std::string fm_s(const FormulaPtr& f, int ctx);

std::string qb_s(const QBounds& qb) {
  std::string s = "{";
  for (size_t i = 0; i < qb.values.size(); ++i) {
    if (i) s += ", ";
    s += tm_s(qb.values[i], 0);
  }
  return s + "}";
}

std::string fm_s(const FormulaPtr& f, int ctx) {
  switch (f->k) {
    case FmKind::Top: return "true";
    case FmKind::Bot: return "false";
    case FmKind::And:
      return paren_if(ctx > 2, fm_s(f->f1, 2) + " /\\ " + fm_s(f->f2, 3));
    case FmKind::Or:
      return paren_if(ctx > 1, fm_s(f->f1, 1) + " \\/ " + fm_s(f->f2, 2));
    case FmKind::Not: return paren_if(ctx > 3, "not " + fm_s(f->f1, 3));
    case FmKind::Implies:
      return paren_if(ctx > 0, fm_s(f->f1, 1) + " => " + fm_s(f->f2, 0));
    case FmKind::Forall:
    case FmKind::Exists: {
      std::string s = (f->k == FmKind::Forall ? "forall " : "exists ") + f->x1 +
                      " : " + ty_s(f->ty, 0);
      if (f->bounds) s += " in " + qb_s(*f->bounds);
      s += ". " + fm_s(f->f1, 0);
      return paren_if(ctx > 0, s);
    }
    case FmKind::Eq:
      return paren_if(ctx > 3, tm_s(f->t1, 0) + " = " + tm_s(f->t2, 0));
    case FmKind::Leq:
      return paren_if(ctx > 3, tm_s(f->t1, 0) + " <= " + tm_s(f->t2, 0));
    case FmKind::LaterF: {
      std::string s = "|> ";
      if (f->ds.size() > 0) s += ds_s(f->ds) + " ";
      return paren_if(ctx > 3, s + fm_s(f->f1, 3));
    }
    case FmKind::BoxF: return paren_if(ctx > 3, "[] " + fm_s(f->f1, 3));
    case FmKind::DiamondRel:
      return paren_if(ctx > 3, "dia [" + f->x1 + " <- " + tm_s(f->t1, 0) + ", " +
                                   f->x2 + " <- " + tm_s(f->t2, 0) + "] " +
                                   fm_s(f->f1, 3));
    case FmKind::DiamondUn:
      return paren_if(ctx > 3, "dia [" + f->x1 + " <- " + tm_s(f->t1, 0) + "] " +
                                   fm_s(f->f1, 3));
    case FmKind::AllStream: {
      std::string s;
      if (!f->t2) {
        s = "all " + f->x1 + " <- " + tm_s(f->t1, 0);
      } else if (f->m == 1 && f->n == 1) {
        s = "all2 " + f->x1 + " <- " + tm_s(f->t1, 0) + ", " + f->x2 + " <- " +
            tm_s(f->t2, 0);
      } else {
        s = "all[" + std::to_string(f->m) + "," + std::to_string(f->n) + "] " +
            f->x1 + " <- " + tm_s(f->t1, 0) + ", " + f->x2 + " <- " +
            tm_s(f->t2, 0);
      }
      return paren_if(ctx > 0, s + ". " + fm_s(f->f1, 0));
    }
    case FmKind::PredApp: {
      std::string s = f->pred + "(";
      for (size_t i = 0; i < f->args.size(); ++i) {
        if (i) s += ", ";
        s += tm_s(f->args[i], 0);
      }
      return s + ")";
    }
  }
  return "?";
}

}  // namespace

std::string pp_type(const TypePtr& t) { return ty_s(t, 0); }
std::string pp_term(const TermPtr& t) { return tm_s(t, 0); }
std::string pp_formula(const FormulaPtr& f) { return fm_s(f, 0); }

std::string pp_decl(const Decl& d) {
  std::ostringstream os;
  switch (d.k) {
    case DeclKind::Def: {
      os << "def " << d.name;
      if (!d.tyvars.empty()) {
        os << " [";
        for (size_t i = 0; i < d.tyvars.size(); ++i)
          os << (i ? ", " : "") << d.tyvars[i];
        os << "]";
      }
      os << " : " << pp_type(d.declared_ty) << " = " << pp_term(d.body);
      break;
    }
    case DeclKind::Axiom: {
      os << "axiom " << d.name;
      if (!d.tyvars.empty() || !d.fmetas.empty()) {
        os << " [";
        bool first = true;
        for (auto& v : d.tyvars) {
          os << (first ? "" : ", ") << v;
          first = false;
        }
        for (auto& [n, ar] : d.fmetas) {
          os << (first ? "" : ", ") << n << "/" << ar;
          first = false;
        }
        os << "]";
      }
      os << " : " << pp_formula(d.formula);
      break;
    }
    case DeclKind::FormulaDecl:
      os << "-- formula " << d.name;
      break;
    case DeclKind::Enum: {
      os << "enum " << d.name << " = ";
      for (size_t i = 0; i < d.ctors.size(); ++i)
        os << (i ? " | " : "") << d.ctors[i];
      break;
    }
  }
  return os.str();
}

std::string pp_program(const Program& p) {
  std::string s;
  for (auto& d : p.decls) {
    if (!s.empty()) s += "\n\n";
    s += pp_decl(d);
  }
  s += "\n";
  return s;
}

}  // namespace pglc
