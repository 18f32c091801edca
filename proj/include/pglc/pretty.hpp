#pragma once

#include <string>

#include "pglc/ast.hpp"

namespace pglc {

// Precedence-aware printers. Output reparses to the same tree, and printing is
// idempotent: pp(parse(pp(x))) == pp(x).
std::string pp_type(const TypePtr& t);
std::string pp_term(const TermPtr& t);
std::string pp_formula(const FormulaPtr& f);
std::string pp_decl(const Decl& d);
std::string pp_program(const Program& p);

}  // namespace pglc
