#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "pglc/ast.hpp"
#include "pglc/lexer.hpp"

namespace pglc {

struct TypeError : std::runtime_error {
  Span sp;
  TypeError(const std::string& m, Span s)
      : std::runtime_error(m + " at line " + std::to_string(s.line) + ":" +
                           std::to_string(s.col)),
        sp(s) {}
};

// Dual typing context: delta holds constant assumptions that survive box/prev,
// gamma holds ordinary assumptions that are dropped there. Top-level
// definitions stay visible everywhere because they are closed terms.
struct TypeCtx {
  const Program* prog = nullptr;
  std::map<std::string, TypePtr> delta;
  std::map<std::string, TypePtr> gamma;

  TypeCtx with_gamma(const std::string& x, TypePtr t) const {
    TypeCtx c = *this;
    c.gamma[x] = std::move(t);
    return c;
  }
  TypeCtx with_delta(const std::string& x, TypePtr t) const {
    TypeCtx c = *this;
    c.delta[x] = std::move(t);
    return c;
  }
  TypeCtx gamma_cleared() const {
    TypeCtx c = *this;
    c.gamma.clear();
    return c;
  }
};

// Distributions may only form over discrete types: numerics, enums, and
// products/sums/streams/later of discrete types. Schematic variables count as
// discrete; instances are rechecked after expansion.
bool is_discrete(const TypePtr& t);

// Constant types denote stage-independent data: numerics, enums,
// products/sums/arrows of constant types, and any boxed type.
bool is_constant(const TypePtr& t);

TypePtr synth(const TypeCtx& ctx, const TermPtr& t);
void check(const TypeCtx& ctx, const TermPtr& t, const TypePtr& target);

// Well-formedness of a formula; fills Eq/Leq rel_ty annotations.
void typecheck_formula(const TypeCtx& ctx, const FormulaPtr& f);

// A formula is constant when it typechecks with gamma cleared, quantifies only
// over constant types, and mentions step-indexed connectives (later, stream
// prefix quantifiers, distribution modalities, equality at non-constant types)
// only under the box connective.
bool formula_constant(const TypeCtx& ctx, const FormulaPtr& f);

// Checks every definition against its declared type and every axiom formula
// for well-formedness. Fills type annotations in place.
void typecheck_program(const Program& prog);

}  // namespace pglc
