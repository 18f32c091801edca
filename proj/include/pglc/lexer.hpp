#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pglc/ast.hpp"

namespace pglc {

struct ParseError : std::runtime_error {
  Span sp;
  ParseError(const std::string& m, Span s)
      : std::runtime_error(m + " at line " + std::to_string(s.line) + ":" +
                           std::to_string(s.col)),
        sp(s) {}
};

enum class Tok {
  Ident,
  Number,   // unsigned decimal digits
  String,   // "..." (proof scripts)
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Lt, Gt,            // tuple brackets < >
  Comma, Semi, Colon, Dot, Backslash,
  Plus, Minus, Star, Slash, Eq,
  ColonColon,        // ::
  LArrow,            // <-
  SampleArrow,       // <~
  Arrow,             // ->
  FatArrow,          // =>
  Leq,               // <=
  Ap,                // <*>
  LaterTy,           // |>
  BoxTy,             // []
  At,                // @
  DotDot,            // ..
  AndAnd,            // slash-backslash conjunction
  OrOr,              // backslash-slash disjunction
  Bar,               // |  (case branches, enum constructors)
  Tilde,             // ~  (negation shorthand in formulas)
  Eof,
};

struct Token {
  Tok k;
  std::string text;
  unsigned long long num = 0;
  Span sp;
};

std::vector<Token> lex(const std::string& src);

}  // namespace pglc
