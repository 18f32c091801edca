#include "pglc/lexer.hpp"

#include <cctype>

namespace pglc {

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto peek = [&](size_t off = 0) -> char {
    return i + off < src.size() ? src[i + off] : '\0';
  };
  auto advance = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  auto push = [&](Tok k, const std::string& text, Span sp) {
    Token t;
    t.k = k;
    t.text = text;
    t.sp = sp;
    out.push_back(std::move(t));
  };

  while (i < src.size()) {
    char c = peek();
    Span sp{line, col};
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance();
      continue;
    }
    if (c == '-' && peek(1) == '-') {
      while (i < src.size() && peek() != '\n') advance();
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        digits += peek();
        advance();
      }
      Token t;
      t.k = Tok::Number;
      t.text = digits;
      t.num = std::stoull(digits);
      t.sp = sp;
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
             peek() == '\'') {
        id += peek();
        advance();
      }
      push(Tok::Ident, id, sp);
      continue;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (i < src.size() && peek() != '"') {
        s += peek();
        advance();
      }
      if (i >= src.size()) throw ParseError("unterminated string", sp);
      advance();
      push(Tok::String, s, sp);
      continue;
    }
    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (c == '<' && peek(1) == '*' && peek(2) == '>') {
      advance(); advance(); advance();
      push(Tok::Ap, "<*>", sp);
      continue;
    }
    if (two('<', '-')) { advance(); advance(); push(Tok::LArrow, "<-", sp); continue; }
    if (two('<', '~')) { advance(); advance(); push(Tok::SampleArrow, "<~", sp); continue; }
    if (two('<', '=')) { advance(); advance(); push(Tok::Leq, "<=", sp); continue; }
    if (two('-', '>')) { advance(); advance(); push(Tok::Arrow, "->", sp); continue; }
    if (two('=', '>')) { advance(); advance(); push(Tok::FatArrow, "=>", sp); continue; }
    if (two(':', ':')) { advance(); advance(); push(Tok::ColonColon, "::", sp); continue; }
    if (two('|', '>')) { advance(); advance(); push(Tok::LaterTy, "|>", sp); continue; }
    if (two('[', ']')) { advance(); advance(); push(Tok::BoxTy, "[]", sp); continue; }
    if (two('.', '.')) { advance(); advance(); push(Tok::DotDot, "..", sp); continue; }
    if (two('/', '\\')) { advance(); advance(); push(Tok::AndAnd, "/\\", sp); continue; }
    if (two('\\', '/')) { advance(); advance(); push(Tok::OrOr, "\\/", sp); continue; }
    switch (c) {
      case '(': advance(); push(Tok::LParen, "(", sp); continue;
      case ')': advance(); push(Tok::RParen, ")", sp); continue;
      case '{': advance(); push(Tok::LBrace, "{", sp); continue;
      case '}': advance(); push(Tok::RBrace, "}", sp); continue;
      case '[': advance(); push(Tok::LBracket, "[", sp); continue;
      case ']': advance(); push(Tok::RBracket, "]", sp); continue;
      case '<': advance(); push(Tok::Lt, "<", sp); continue;
      case '>': advance(); push(Tok::Gt, ">", sp); continue;
      case ',': advance(); push(Tok::Comma, ",", sp); continue;
      case ';': advance(); push(Tok::Semi, ";", sp); continue;
      case ':': advance(); push(Tok::Colon, ":", sp); continue;
      case '.': advance(); push(Tok::Dot, ".", sp); continue;
      case '\\': advance(); push(Tok::Backslash, "\\", sp); continue;
      case '+': advance(); push(Tok::Plus, "+", sp); continue;
      case '-': advance(); push(Tok::Minus, "-", sp); continue;
      case '*': advance(); push(Tok::Star, "*", sp); continue;
      case '/': advance(); push(Tok::Slash, "/", sp); continue;
      case '=': advance(); push(Tok::Eq, "=", sp); continue;
      case '@': advance(); push(Tok::At, "@", sp); continue;
      case '|': advance(); push(Tok::Bar, "|", sp); continue;
      case '~': advance(); push(Tok::Tilde, "~", sp); continue;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", sp);
    }
  }
  push(Tok::Eof, "", Span{line, col});
  return out;
}

}  // namespace pglc
