#ifndef HORNCAT_PREPROCESS_HPP
#define HORNCAT_PREPROCESS_HPP

#include <string>
#include <utility>
#include <vector>

#include "horncat/ir.hpp"

namespace horncat {

// Statistics for one rewriting pass, and for a whole pipeline run.
struct PassReport {
  struct Pass {
    std::string name;
    size_t clauses_in = 0;
    size_t clauses_out = 0;
    size_t clauses_dropped = 0;  // vacuous clauses (unsatisfiable bodies)
    size_t substitutions = 0;    // variables bound while solving equalities
    std::vector<std::string> generated_preds;
    std::vector<std::string> notes;
  };
  std::vector<Pass> passes;

  std::string to_string() const;
};

// Pushes negations down to literals: double negations cancel, De Morgan on
// and/or, negated equalities become disequalities, and a negated tester
// becomes the disjunction of the other testers of its sort. Output formulas
// contain no Not nodes; predicate atoms may carry a negative polarity flag.
ChcSystem to_nnf(const ChcSystem& sys);

// Replaces every tester literal by an atom over a generated relation and
// flattens every selector application sel(t) to a fresh variable constrained
// by a generated relation atom. Defining clauses for the generated relations
// (in equality form, e.g. x = cons(a1,a2) -> car_rel(x,a1)) are appended.
// Clauses that mention a tester or selector must be flat conjunctions of
// positive-tester literals (run to_nnf and split_dnf first): the generated
// relation atoms join the body conjunction, which would be unsound inside
// a disjunctive body.
std::pair<ChcSystem, PassReport::Pass> eliminate_testers_selectors(
    const ChcSystem& sys);

// Splits each clause whose body is not a pure conjunction of literals into
// one clause per disjunct of the body's disjunctive normal form. Requires
// NNF input. Clauses with unsatisfiable bodies disappear.
ChcSystem split_dnf(const ChcSystem& sys);

// Solves the equality literals of each clause by syntactic unification over
// constructor terms (occurs check on) and applies the most general unifier
// to the whole clause. Clauses whose equalities have no Herbrand solution
// (constructor clash or occurs-check failure) are dropped as vacuous.
// Requires bodies that are conjunctions of literals.
std::pair<ChcSystem, PassReport::Pass> eliminate_equalities(
    const ChcSystem& sys);

// Replaces every disequality literal t != u of sort S by an atom
// diseq_S(t, u) and appends the defining rules for every sort reachable
// from a disequality occurrence through constructor arguments:
//   (a) true -> diseq_S(c(a...), c'(b...)) for distinct constructors c, c'
//   (b) diseq_T(x, y) -> diseq_S(c(..., x, ...), c(..., y, ...)) per
//       constructor c and argument position, with fresh independent
//       variables in the untouched positions of each side.
std::pair<ChcSystem, PassReport::Pass> encode_disequalities(
    const ChcSystem& sys);

// Runs the full rewriting pipeline:
//   to_nnf -> split_dnf -> eliminate_testers_selectors
//   -> eliminate_equalities -> encode_disequalities
// The result contains no equality, disequality, tester, or selector forms;
// every clause body is a conjunction of positive predicate atoms. Requires
// a well-sorted, Skolemized system (no clause-level existential variables).
std::pair<ChcSystem, PassReport> run_pipeline(const ChcSystem& sys);

// Renders a system back to a script in the input grammar. The result parses
// and clausifies to the same clauses (up to clause notes).
std::string emit_smt2(const ChcSystem& sys);

}  // namespace horncat

#endif
