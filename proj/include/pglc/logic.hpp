#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pglc/ast.hpp"
#include "pglc/evalsem.hpp"
#include "pglc/value.hpp"

namespace pglc {

struct CheckError : std::runtime_error {
  explicit CheckError(const std::string& m) : std::runtime_error(m) {}
};

// Verdict of a stage-indexed semantic check. `bounded` is set when some box
// connective over a non-constant body could only be verified up to the
// assertion stage; such a verdict is evidence up to that stage rather than
// full validity.
struct CheckResult {
  bool ok = false;
  bool bounded = false;
};

// Checks a formula against concrete stage values, clause by clause:
//   - implication, negation and forall re-check at every stage j <= stage
//     with the environment restricted to j;
//   - exists picks its witness at the assertion stage;
//   - later evaluates its bindings, strips one delay from each, and descends
//     one stage (vacuously true at stage 0);
//   - box checks every stage up to the assertion stage and taints the result
//     as bounded unless the body is a constant formula;
//   - the distribution modalities evaluate their terms to distributions and
//     delegate to the coupling decision procedures;
//   - stream predicates walk the stage-length prefix;
//   - quantifiers need a finite domain, from the type shape (enums, sums,
//     products, delayed/stream layers over those) or an explicit bounds
//     annotation.
// Equality atoms compare values structurally; order atoms need numeric
// operands. Uninterpreted predicate applications are an error here; they
// only make sense under the proof rules.
CheckResult check_formula(EvalCtx& cx, const Env& env, const FormulaPtr& f, int stage);

// Convenience wrapper for formulas with no free variables beyond top-level
// definitions.
CheckResult check_closed(EvalCtx& cx, const FormulaPtr& f, int stage);

// Pointwise predicate over a stream prefix: element k is checked at stage
// (stage - k); true once the prefix or the stage budget is exhausted.
bool all_prefix_un(const std::vector<ValuePtr>& elems, int stage,
                   const std::function<bool(const ValuePtr&, int)>& phi);

// Stepping variant relating element m*k of the left prefix with element n*k
// of the right; each step descends max(m, n) stages; vacuously true once
// either prefix (or the stage budget) is exhausted.
bool all_prefix_rel(const std::vector<ValuePtr>& left, const std::vector<ValuePtr>& right, int m,
                    int n, int stage,
                    const std::function<bool(const ValuePtr&, const ValuePtr&, int)>& phi);

}  // namespace pglc
