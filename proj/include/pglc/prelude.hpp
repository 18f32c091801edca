#pragma once

#include <memory>
#include <string>

#include "pglc/ast.hpp"

namespace pglc {

// Built-in declarations available to every program: the markov chain
// constructor, the boxed constant stream of ones, and the introduction
// axioms for the pointwise stream predicates (one-sided, paired, and the
// two-against-one stepping variant).
const char* prelude_source();

// Parses the built-in declarations followed by the user program text,
// expands schematic instantiations, and typechecks the merged program.
// Built-in declarations are flagged from_prelude so reports can tell them
// apart from user code.
std::shared_ptr<Program> load_program(const std::string& user_source);

}  // namespace pglc
