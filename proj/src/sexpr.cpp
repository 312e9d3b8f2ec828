#include "horncat/sexpr.hpp"

namespace horncat {

SExpr SExpr::mk_atom(std::string a, int line, int col) {
  SExpr e;
  e.kind = Kind::Atom;
  e.atom = std::move(a);
  e.line = line;
  e.col = col;
  return e;
}

SExpr SExpr::mk_list(std::vector<SExpr> items, int line, int col) {
  SExpr e;
  e.kind = Kind::List;
  e.items = std::move(items);
  e.line = line;
  e.col = col;
  return e;
}

std::string SExpr::loc() const {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

bool SExpr::operator==(const SExpr& o) const {
  if (kind != o.kind) return false;
  if (kind == Kind::Atom) return atom == o.atom;
  return items == o.items;
}

namespace {

struct Lexer {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg, int l, int c) const {
    throw Error("parse error at line " + std::to_string(l) + ", column " +
                std::to_string(c) + ": " + msg);
  }

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }

  void skip_trivia() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == ';') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  static bool atom_char(char c) {
    return c != '(' && c != ')' && c != ';' && c != ' ' && c != '\t' &&
           c != '\r' && c != '\n';
  }

  SExpr read() {
    skip_trivia();
    if (pos >= text.size()) fail("unexpected end of input", line, col);
    int l = line, c = col;
    char ch = text[pos];
    if (ch == ')') fail("unexpected ')'", l, c);
    if (ch == '(') {
      advance();
      std::vector<SExpr> items;
      for (;;) {
        skip_trivia();
        if (pos >= text.size())
          fail("unclosed '(' opened here", l, c);
        if (text[pos] == ')') {
          advance();
          return SExpr::mk_list(std::move(items), l, c);
        }
        items.push_back(read());
      }
    }
    std::string a;
    while (pos < text.size() && atom_char(text[pos])) {
      a += text[pos];
      advance();
    }
    return SExpr::mk_atom(std::move(a), l, c);
  }
};

}  // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) {
  Lexer lx(text);
  std::vector<SExpr> out;
  for (;;) {
    lx.skip_trivia();
    if (lx.pos >= text.size()) return out;
    out.push_back(lx.read());
  }
}

std::string sexpr_to_string(const SExpr& e) {
  if (e.is_atom()) return e.atom;
  std::string s = "(";
  for (size_t i = 0; i < e.items.size(); ++i) {
    if (i) s += " ";
    s += sexpr_to_string(e.items[i]);
  }
  return s + ")";
}

}  // namespace horncat
