#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "horncat/ir.hpp"
#include "horncat/model.hpp"

namespace horncat {

// (constructor name, argument states) -> result state
using TransitionMap = std::map<std::pair<std::string, std::vector<int>>, int>;

// Deterministic bottom-up tree automaton recognizing an n-ary relation on
// ground constructor terms. States are the elements of a finite model's
// domains; the transition table is shared between all automata built from
// one model; each predicate contributes its own final-tuple set. The
// automaton carries its ranked alphabet so acceptance and (de)serialization
// need no external signature.
struct TreeAutomaton {
  std::string pred;
  std::vector<std::string> arg_sorts;
  std::map<std::string, int> states;  // sort -> number of states
  // ctor -> (argument sorts, result sort)
  std::map<std::string, std::pair<std::vector<std::string>, std::string>>
      alphabet;
  std::shared_ptr<const TransitionMap> transitions;
  std::set<std::vector<int>> finals;
};

bool operator==(const TreeAutomaton& a, const TreeAutomaton& b);

// One automaton per predicate: states and transitions are read off the model
// tables (constructors only; Skolem functions are not tree constructors),
// finals = the predicate's table. Generated relations (diseq) are skipped
// unless include_generated. Errors on a partial constructor table.
std::map<std::string, TreeAutomaton> build_automata(
    const FiniteModel& model, const Signature& sig,
    bool include_generated = false);

// Bottom-up evaluation of every component followed by a final-set lookup.
// Components must be ground constructor terms of the automaton's argument
// sorts (anything else is an Error). A missing transition rejects; built
// automata are complete, so that only matters for hand-written ones.
bool accepts(const TreeAutomaton& a, const std::vector<Term>& tuple);

// All accepted tuples with every component of height <= max_height, in
// ground-term enumeration order (last component varies fastest).
std::vector<std::vector<Term>> enumerate_accepted(const Signature& sig,
                                                  const TreeAutomaton& a,
                                                  int max_height);

// Cross-check that acceptance coincides with evaluating the same terms
// through the model tables and testing membership in the predicate table.
// The term-side interpreter shares no code with accepts. The tuple walk is
// capped per predicate; the height actually covered is reported.
struct Theorem1Report {
  std::optional<std::pair<std::string, std::vector<Term>>> mismatch;
  std::map<std::string, int> effective_height;
  bool ok() const { return !mismatch.has_value(); }
};
Theorem1Report theorem1_check(
    const FiniteModel& model,
    const std::map<std::string, TreeAutomaton>& automata,
    const Signature& sig, int max_height, std::size_t tuple_cap = 20000);

// Height-bounded check that the relations the automata recognize satisfy a
// clause system over ground terms: predicate atoms by running the argument
// terms to states and testing the final set, equality by syntactic
// identity, disequality by syntactic difference, testers by the root
// symbol, selectors by actual selection. An assignment whose instance runs
// into a misapplied selector is vacuous. Skolem witness functions are part
// of the term language here; their applications are run to states through
// the model's function tables, so the model that produced the automata must
// be passed whenever the system mentions them. Existential variables are
// read as ground-term witnesses under the same height bound. Errors when a
// predicate lacks an automaton.
struct HerbrandCheckReport {
  int height = 0;
  struct ClauseResult {
    bool ok = true;
    std::map<std::string, Term> failing;  // first violating assignment
  };
  std::vector<ClauseResult> clauses;
  bool all_ok() const;
};
HerbrandCheckReport check_herbrand_model(
    const ChcSystem& original,
    const std::map<std::string, TreeAutomaton>& automata, int max_height,
    const FiniteModel* model = nullptr);

// Text form:
//   automaton even : Nat
//   S(s0) -> s1
//   S(s1) -> s0
//   Z -> s0
//   final: (s0)
// States print as s<i>, prefixed with their sort (Nat_s0) when the table
// spans more than one sort. Nullary constructors drop the parentheses.
// Whitespace-insensitive; '#' starts a comment. Duplicate left-hand sides
// are a determinism error.
std::string serialize_automaton(const TreeAutomaton& a);
TreeAutomaton parse_automaton(const std::string& text);

}  // namespace horncat
