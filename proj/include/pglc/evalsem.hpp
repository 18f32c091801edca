#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "pglc/ast.hpp"
#include "pglc/value.hpp"

namespace pglc {

// ---------------------------------------------------------------------------
// Syntactic operations
// ---------------------------------------------------------------------------

std::set<std::string> free_vars(const TermPtr& t);
std::set<std::string> free_vars_formula(const FormulaPtr& f);

// Capture-avoiding simultaneous substitution. Binders are renamed on demand.
TermPtr subst_many(const TermPtr& t, const std::map<std::string, TermPtr>& sub);
TermPtr subst_term(const TermPtr& t, const std::string& x, const TermPtr& s);
FormulaPtr subst_formula_many(const FormulaPtr& f, const std::map<std::string, TermPtr>& sub);
FormulaPtr subst_formula(const FormulaPtr& f, const std::string& x, const TermPtr& s);

// Replaces every application P(a1, .., ak) of the formula metavariable by
// body[params := args]. Used to instantiate axiom schemas.
FormulaPtr subst_pred_formula(const FormulaPtr& f, const std::string& pred,
                              const std::vector<std::string>& params, const FormulaPtr& body);

// Equality up to renaming of bound variables. Binder annotations are ignored;
// instantiation type arguments are compared.
bool alpha_eq_term(const TermPtr& a, const TermPtr& b);
bool alpha_eq_formula(const FormulaPtr& a, const FormulaPtr& b);

// Deep copy with schematic type variables replaced in every annotation.
TermPtr clone_subst_types(const TermPtr& t, const std::map<std::string, TypePtr>& su);

// Expands every name@T reference into a dedicated monomorphic copy of the
// schematic declaration, appended to the program. Run before typechecking.
void elaborate_program(Program& prog);

// Same expansion for a term or formula that lives outside the program (proof
// scripts). Missing instances are appended to the program, which must be
// re-typechecked by the caller if anything new appears.
TermPtr elaborate_term_in(Program& prog, const TermPtr& t);
FormulaPtr elaborate_formula_in(Program& prog, const FormulaPtr& f);

// ---------------------------------------------------------------------------
// Equational normalization
// ---------------------------------------------------------------------------

// Reduces by the definitional equations: beta, projections, case commuting
// with constructors, head/tail of cons, prev of next, box/const unfolding,
// the monad unit and associativity laws, delayed-substitution laws (dropping
// unused bindings, inlining bindings of the shape x <- next u, collapsing
// next [x <- t] x, canonical binding order), and literal arithmetic.
//
// Recursive definitions are only unrolled when the budget says so: `unfold`
// grants that many fix unrollings, consumed outermost-leftmost; `eta` expands
// the term root into hd/tail form that many times. Top-level definition names
// are always inlined when a program is supplied.
struct NormOpts {
  int unfold = 0;
  int eta = 0;
  long long fuel = 1000000;
};

TermPtr normalize(const TermPtr& t, const Program* prog = nullptr, NormOpts opts = {});

// Term-level normalization inside a formula, plus: equations at a later type
// become later-formulas over fresh variables, later distributes over
// conjunction, and a later-formula over truth collapses.
FormulaPtr normalize_formula(const FormulaPtr& f, const Program* prog = nullptr,
                             NormOpts opts = {});

// Equality decision for the equational theory: normalizes each side with its
// own hint budget, then compares up to alpha renaming.
bool equiv(const TermPtr& a, const TermPtr& b, const Program* prog = nullptr, NormOpts left = {},
           NormOpts right = {});

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalCtx {
  const Program* prog = nullptr;
  long long fuel = 1000000;
};

// Evaluates a typechecked term at the stage carried by the environment.
// Ordinary variables hold a value for that stage; boxed variables hold a
// value for every stage at once.
ValuePtr eval(EvalCtx& cx, const Env& env, const TermPtr& t);
ValuePtr eval_closed(EvalCtx& cx, const TermPtr& t, int stage);
ValuePtr apply_value(EvalCtx& cx, const ValuePtr& f, const ValuePtr& arg);

// Moves a value down to an earlier stage: stream prefixes are truncated,
// later-values unwrap one level per step down to the unit at stage zero, and
// distribution supports are restricted pointwise with masses merged.
ValuePtr restrict_value(const ValuePtr& v, int stage);
Env restrict_env(const Env& env, int stage);

// Evaluates and expects a distribution.
FiniteDist dist_of(EvalCtx& cx, const TermPtr& t, int stage);

}  // namespace pglc
