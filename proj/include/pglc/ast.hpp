#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pglc/rational.hpp"

namespace pglc {

struct Span {
  int line = 0;
  int col = 0;
};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct Type;
using TypePtr = std::shared_ptr<const Type>;

enum class TyKind {
  Nat,
  Int,
  Rat,
  Base,    // user-declared enum base type
  TyVar,   // schematic type variable (template declarations)
  Arrow,
  Prod,
  Sum,
  Stream,
  Later,
  Box,
  Dist,
};

struct Type {
  TyKind k;
  std::string name;  // Base / TyVar
  TypePtr a;         // Arrow domain, Prod/Sum left, element type of Stream/Later/Box/Dist
  TypePtr b;         // Arrow codomain, Prod/Sum right
};

TypePtr ty_nat();
TypePtr ty_int();
TypePtr ty_rat();
TypePtr ty_base(const std::string& name);
TypePtr ty_var(const std::string& name);
TypePtr ty_arrow(TypePtr a, TypePtr b);
TypePtr ty_prod(TypePtr a, TypePtr b);
TypePtr ty_sum(TypePtr a, TypePtr b);
TypePtr ty_stream(TypePtr a);
TypePtr ty_later(TypePtr a);
TypePtr ty_box(TypePtr a);
TypePtr ty_dist(TypePtr a);

bool type_eq(const TypePtr& x, const TypePtr& y);
// Substitutes schematic type variables by name.
TypePtr type_subst(const TypePtr& t, const std::string& var, const TypePtr& rep);
bool type_mentions_var(const TypePtr& t);

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Delayed substitution: ordered bindings x_i <- t_i where t_i : |>A_i.
// Binder types are filled in by the typechecker.
struct DSubst {
  std::vector<std::string> vars;
  std::vector<TermPtr> terms;
  mutable std::vector<TypePtr> var_types;  // type of each x_i (element type)
  size_t size() const { return vars.size(); }
};

enum class TmKind {
  Var,
  Inst,     // schematic reference name@Type, eliminated by elaboration
  NatLit,
  IntLit,
  RatLit,
  EnumLit,  // enum constant: name + enum type name
  Succ,
  Lam,
  App,
  Fix,
  Pair,
  Fst,
  Snd,
  Inl,
  Inr,
  CaseSum,
  CaseNat,
  Cons,
  Head,
  Tail,
  Next,     // next [x1 <- t1, ...] body
  Prev,
  BoxT,
  LetBox,
  LetConst,
  MUnit,
  MLet,
  PrimDist,
  PrimOp,   // add sub mul div neg xor int swap
};

enum class DistKind { Unif, Bern };

struct Term {
  TmKind k;
  Span sp;

  std::string name;              // Var, Inst, EnumLit ctor, PrimOp op name, binder name
  unsigned long long nat = 0;    // NatLit
  long long int_ = 0;            // IntLit
  Rat rat;                       // RatLit, Bern parameter

  TermPtr a, b, c;               // subterms (see helpers below for layout)
  DSubst ds;                     // Next bindings
  std::vector<TermPtr> args;     // PrimOp arguments, Unif support literals

  std::string x, y;              // binder names (Lam/Fix/MLet/LetBox/LetConst x; CaseSum x,y; CaseNat y)
  TypePtr ann;                   // Lam/Fix binder annotation. Inl/Inr: full sum type.
  TypePtr targ;                  // Inst type argument
  DistKind dk = DistKind::Unif;  // PrimDist

  std::string enum_type;         // EnumLit

  // Filled by the typechecker.
  mutable TypePtr ty;            // type of the whole term
  mutable TypePtr binder_ty;     // MLet/LetBox/LetConst/CaseNat-succ binder; CaseSum via branch anns
  mutable TypePtr binder_ty2;    // CaseSum right binder
};

// Node layout conventions:
//   Lam    x ann a=body
//   App    a=fun b=arg
//   Fix    x ann a=body
//   Pair   a b
//   Fst/Snd/Succ/Head/Tail/Prev/BoxT/MUnit  a
//   Inl/Inr a, ann = sum type when given
//   CaseSum a=scrut x b=left-branch y c=right-branch
//   CaseNat a=scrut b=zero-branch y c=succ-branch
//   Cons   a=head b=tail
//   Next   ds a=body
//   LetBox/LetConst x a=bound b=body
//   MLet   x a=bound b=body
//   PrimDist dk: Unif args=literals; Bern rat
//   PrimOp name args

TermPtr tm_var(const std::string& n, Span sp = {});
TermPtr tm_inst(const std::string& n, TypePtr targ, Span sp = {});
TermPtr tm_nat(unsigned long long v, Span sp = {});
TermPtr tm_int(long long v, Span sp = {});
TermPtr tm_rat(const Rat& v, Span sp = {});
TermPtr tm_enum(const std::string& ctor, const std::string& ty, Span sp = {});
TermPtr tm_succ(TermPtr t, Span sp = {});
TermPtr tm_lam(const std::string& x, TypePtr ann, TermPtr body, Span sp = {});
TermPtr tm_app(TermPtr f, TermPtr a, Span sp = {});
TermPtr tm_fix(const std::string& x, TypePtr ann, TermPtr body, Span sp = {});
TermPtr tm_pair(TermPtr a, TermPtr b, Span sp = {});
TermPtr tm_fst(TermPtr t, Span sp = {});
TermPtr tm_snd(TermPtr t, Span sp = {});
TermPtr tm_inl(TermPtr t, TypePtr ann, Span sp = {});
TermPtr tm_inr(TermPtr t, TypePtr ann, Span sp = {});
TermPtr tm_case_sum(TermPtr s, const std::string& x, TermPtr l, const std::string& y, TermPtr r,
                    Span sp = {});
TermPtr tm_case_nat(TermPtr s, TermPtr z, const std::string& y, TermPtr succ, Span sp = {});
TermPtr tm_cons(TermPtr h, TermPtr t, Span sp = {});
TermPtr tm_head(TermPtr t, Span sp = {});
TermPtr tm_tail(TermPtr t, Span sp = {});
TermPtr tm_next(DSubst ds, TermPtr body, Span sp = {});
TermPtr tm_prev(TermPtr t, Span sp = {});
TermPtr tm_box(TermPtr t, Span sp = {});
TermPtr tm_let_box(const std::string& x, TermPtr u, TermPtr body, Span sp = {});
TermPtr tm_let_const(const std::string& x, TermPtr u, TermPtr body, Span sp = {});
TermPtr tm_munit(TermPtr t, Span sp = {});
TermPtr tm_mlet(const std::string& x, TermPtr d, TermPtr body, Span sp = {});
TermPtr tm_unif(std::vector<TermPtr> lits, Span sp = {});
TermPtr tm_bern(const Rat& p, Span sp = {});
TermPtr tm_primop(const std::string& op, std::vector<TermPtr> args, Span sp = {});

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class FmKind {
  Top,
  Bot,
  And,
  Or,
  Not,
  Implies,
  Forall,
  Exists,
  Eq,
  Leq,
  LaterF,      // later [x <- t, ...] phi
  BoxF,        // [] phi
  DiamondRel,  // dia [x1 <- t1, x2 <- t2] phi
  DiamondUn,   // dia [x <- t] phi
  AllStream,   // All / All2 / All[m,n] over stream prefixes
  PredApp,     // formula metavariable application (axiom schemas)
};

// Explicit finite quantifier domain: list of literal terms.
struct QBounds {
  std::vector<TermPtr> values;
};

struct Formula {
  FmKind k;
  Span sp;

  FormulaPtr f1, f2;      // And/Or/Implies children, Not/Forall/.../AllStream body in f1
  TermPtr t1, t2;         // Eq/Leq sides, Diamond bound terms, AllStream stream args
  std::string x1, x2;     // binder names (Forall/Exists x1; Diamond/AllStream x1 x2)
  TypePtr ty;             // Forall/Exists annotation
  std::optional<QBounds> bounds;  // Forall/Exists finite domain
  DSubst ds;              // LaterF bindings
  int m = 1, n = 1;       // AllStream step widths (unary All: t2 == nullptr, m tracks nothing)
  std::string pred;       // PredApp metavariable name
  std::vector<TermPtr> args;  // PredApp arguments

  // Filled by the typechecker: the common type of Eq/Leq sides.
  mutable TypePtr rel_ty;
};

FormulaPtr fm_top(Span sp = {});
FormulaPtr fm_bot(Span sp = {});
FormulaPtr fm_and(FormulaPtr a, FormulaPtr b, Span sp = {});
FormulaPtr fm_or(FormulaPtr a, FormulaPtr b, Span sp = {});
FormulaPtr fm_not(FormulaPtr a, Span sp = {});
FormulaPtr fm_implies(FormulaPtr a, FormulaPtr b, Span sp = {});
FormulaPtr fm_forall(const std::string& x, TypePtr ty, std::optional<QBounds> bounds,
                     FormulaPtr body, Span sp = {});
FormulaPtr fm_exists(const std::string& x, TypePtr ty, std::optional<QBounds> bounds,
                     FormulaPtr body, Span sp = {});
FormulaPtr fm_eq(TermPtr a, TermPtr b, Span sp = {});
FormulaPtr fm_leq(TermPtr a, TermPtr b, Span sp = {});
FormulaPtr fm_later(DSubst ds, FormulaPtr body, Span sp = {});
FormulaPtr fm_boxf(FormulaPtr body, Span sp = {});
FormulaPtr fm_dia_rel(const std::string& x1, TermPtr t1, const std::string& x2, TermPtr t2,
                      FormulaPtr body, Span sp = {});
FormulaPtr fm_dia_un(const std::string& x1, TermPtr t1, FormulaPtr body, Span sp = {});
FormulaPtr fm_all_un(TermPtr s, const std::string& x, FormulaPtr body, Span sp = {});
FormulaPtr fm_all_rel(int m, int n, TermPtr s1, TermPtr s2, const std::string& x1,
                      const std::string& x2, FormulaPtr body, Span sp = {});
FormulaPtr fm_pred_app(const std::string& name, std::vector<TermPtr> args, Span sp = {});

// ---------------------------------------------------------------------------
// Declarations and programs
// ---------------------------------------------------------------------------

enum class DeclKind { Def, Axiom, FormulaDecl, Enum };

struct Decl {
  DeclKind k;
  Span sp;
  std::string name;
  std::vector<std::string> tyvars;  // schematic type parameters, e.g. def markov [C]
  // Axiom formula metavariables: name -> arity.
  std::vector<std::pair<std::string, int>> fmetas;
  TypePtr declared_ty;  // Def (optional)
  TermPtr body;         // Def
  FormulaPtr formula;   // Axiom / FormulaDecl
  std::vector<std::string> ctors;  // Enum
  bool from_prelude = false;
};

struct Program {
  std::vector<Decl> decls;

  const Decl* find(const std::string& name) const {
    for (const auto& d : decls)
      if (d.name == name) return &d;
    return nullptr;
  }
};

}  // namespace pglc
