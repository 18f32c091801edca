#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "pglc/ast.hpp"
#include "pglc/lexer.hpp"

namespace pglc {

// Recursive-descent parser for the surface language: types, terms, formulas
// and whole programs. A single instance carries the lexical context needed by
// context-sensitive atoms (enum constructors, schematic type variables, and
// formula metavariables inside axiom declarations). Proof scripts reuse this
// class for their embedded terms/types/formulas.
class Parser {
 public:
  explicit Parser(const std::string& src);

  TypePtr parse_type();
  TermPtr parse_term();
  FormulaPtr parse_formula();
  std::shared_ptr<Program> parse_program();

  // Context that changes what an identifier means.
  std::set<std::string> tyvars;
  std::map<std::string, int> fmetas;            // metavariable -> arity
  std::map<std::string, std::string> enum_ctors;  // ctor -> enum type name

  // Token-level access, shared with the proof-script parser.
  const Token& cur() const { return toks_[p_]; }
  const Token& peek(size_t off = 0) const {
    size_t i = p_ + off;
    return toks_[i < toks_.size() ? i : toks_.size() - 1];
  }
  bool at(Tok k) const { return cur().k == k; }
  bool at_kw(const std::string& s) const {
    return cur().k == Tok::Ident && cur().text == s;
  }
  Token eat() { return toks_[p_ < toks_.size() - 1 ? p_++ : p_]; }
  bool accept(Tok k);
  bool accept_kw(const std::string& s);
  Token expect(Tok k, const std::string& what);
  void expect_kw(const std::string& s);
  bool at_eof() const { return at(Tok::Eof); }
  size_t pos() const { return p_; }
  void rewind(size_t p) { p_ = p; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().sp); }

  // Identifier that is not a reserved word.
  std::string ident(const std::string& what);
  static bool reserved(const std::string& s);

  // [x <- t, y <- u] binding list (shared by next, later, dia).
  DSubst parse_bindings();

 private:
  std::vector<Token> toks_;
  size_t p_ = 0;
  int fresh_ = 0;

  TypePtr type_arrow();
  TypePtr type_sum();
  TypePtr type_prod();
  TypePtr type_prefix();
  TypePtr type_atom();

  TermPtr term_lamlike();
  TermPtr term_ap();
  TermPtr term_cons();
  TermPtr term_add();
  TermPtr term_mul();
  TermPtr term_app();
  bool starts_app_atom() const;
  TermPtr term_app_atom();
  TermPtr term_atom();
  Rat literal_fraction();

  FormulaPtr fm_implies_lvl();
  FormulaPtr fm_or_lvl();
  FormulaPtr fm_and_lvl();
  FormulaPtr fm_unit();
  FormulaPtr fm_relation();
  std::optional<QBounds> parse_qbounds(const TypePtr& ty);

  Decl parse_decl();
};

TypePtr parse_type_text(const std::string& src);
TermPtr parse_term_text(const std::string& src);
FormulaPtr parse_formula_text(const std::string& src);
std::shared_ptr<Program> parse_program_text(const std::string& src);

}  // namespace pglc
