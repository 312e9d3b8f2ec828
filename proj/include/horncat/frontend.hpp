#ifndef HORNCAT_FRONTEND_HPP
#define HORNCAT_FRONTEND_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "horncat/ir.hpp"
#include "horncat/sexpr.hpp"

namespace horncat {

// A validated script command. Assert and define-fun-rec payloads stay as
// s-expressions; they are translated by clausify.
struct Command {
  enum class Kind { DeclareDatatypes, DeclareFun, DefineFunRec, Assert, CheckSat };

  struct CtorDecl {
    std::string name;
    std::vector<std::pair<std::string, std::string>> sels;  // (selector, sort)
    bool operator==(const CtorDecl&) const = default;
  };
  struct DatatypeDecl {
    std::string sort;
    std::vector<CtorDecl> ctors;
    bool operator==(const DatatypeDecl&) const = default;
  };

  Kind kind = Kind::CheckSat;
  std::vector<DatatypeDecl> datatypes;                   // DeclareDatatypes
  std::string name;                                      // DeclareFun / DefineFunRec
  std::vector<std::string> arg_sorts;                    // DeclareFun
  std::string result_sort;                               // DeclareFun
  std::vector<std::pair<std::string, std::string>> params;  // DefineFunRec
  SExpr payload;                                         // DefineFunRec body / Assert formula

  bool operator==(const Command&) const = default;
};

struct Script {
  std::vector<Command> commands;

  bool operator==(const Script&) const = default;
};

// Accepted commands: declare-datatypes/declare-datatype, declare-fun,
// define-fun-rec (Bool result), assert, check-sat (exactly one, last).
// Symbols must be declared before use and may not be redeclared.
Script parse_script(const std::string& text);

std::string print_script(const Script& script);

// Translate a script to clauses: one predicate per define-fun-rec, one
// definite clause per reachable match branch (pattern bindings as equalities,
// fall-through guards as negated match conditions of earlier branches), and
// one clause per assert. Existentials in positive body positions become
// clause universals; (assert (not (exists ...))) becomes query clauses,
// with an inner forall block turning into clause existentials.
ChcSystem clausify(const Script& script);

struct SkolemInfo {
  std::vector<std::string> arg_sorts;
  std::string result_sort;
  int clause_index = 0;

  bool operator==(const SkolemInfo&) const = default;
};
using SkolemRecord = std::map<std::string, SkolemInfo>;

// Replace each existential variable v (universals u1..uk in scope) by the
// term f_v(u1,...,uk) for a fresh uninterpreted function f_v. Systems without
// existentials come back unchanged with an empty record.
std::pair<ChcSystem, SkolemRecord> skolemize_existentials(const ChcSystem& sys);

// parse_script + clausify + skolemize_existentials.
ChcSystem load_system(const std::string& text, SkolemRecord* record = nullptr);

}  // namespace horncat

#endif
