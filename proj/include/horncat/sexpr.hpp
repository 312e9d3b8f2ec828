#ifndef HORNCAT_SEXPR_HPP
#define HORNCAT_SEXPR_HPP

#include <string>
#include <vector>

#include "horncat/ir.hpp"

namespace horncat {

struct SExpr {
  enum class Kind { Atom, List };

  Kind kind = Kind::List;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1, col = 1;

  static SExpr mk_atom(std::string a, int line = 1, int col = 1);
  static SExpr mk_list(std::vector<SExpr> items, int line = 1, int col = 1);

  bool is_atom() const { return kind == Kind::Atom; }
  bool is_atom(const std::string& a) const { return is_atom() && atom == a; }
  bool is_list() const { return kind == Kind::List; }
  size_t size() const { return items.size(); }
  const SExpr& operator[](size_t i) const { return items[i]; }

  std::string loc() const;  // "line L, column C"

  // Structural equality; source locations are ignored.
  bool operator==(const SExpr& o) const;
};

// Top-level forms of a script. Comments run from ';' to end of line.
// Throws Error with line/column on unbalanced parentheses or stray tokens.
std::vector<SExpr> parse_sexprs(const std::string& text);

std::string sexpr_to_string(const SExpr& e);

}  // namespace horncat

#endif
