#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "horncat/ir.hpp"

namespace horncat {

// Budget for the chase. max_steps counts candidate premises and head
// instantiations examined; hitting it stops the run with a partial result,
// at the same point every time for a given system, height, and cap.
// time_limit is a wall-clock slice checked every few thousand steps; where
// it lands varies run to run, so callers must not read anything but the
// status out of a timed-out run. Zero means unlimited for both.
struct ChainLimits {
  uint64_t max_steps = 0;
  std::chrono::milliseconds time_limit{0};
};

// Ground facts derived by height-bounded forward chaining, in derivation
// order, each carrying the clause instance that produced it. A fact is kept
// only when every argument stays within the height bound, so the base is
// finite, saturation always terminates, and the facts at height h are a
// subset of the facts at height h+1.
struct FactBase {
  struct Entry {
    std::string pred;
    std::vector<Term> args;
    std::size_t clause_index = 0;       // clause that fired
    Substitution assignment;            // ground value for every clause var
    std::vector<std::size_t> premises;  // fact index per body atom, in order

    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> facts;
  std::map<std::string, std::map<std::vector<Term>, std::size_t>> index;
  bool saturated = true;  // false when the step cap stopped the chase early
  uint64_t steps = 0;

  bool contains(const std::string& pred, const std::vector<Term>& args) const;
  std::set<std::vector<Term>> tuples(const std::string& pred) const;
};

// Least model of the definite clauses with every variable ranging over
// ground constructor terms of height <= max_height; query clauses are
// ignored here. Deterministic: rounds fire clauses in index order, matches
// enumerate in fact order, free head variables in term enumeration order.
// Requires a pipelined system: no existential variables, bodies made of
// positive predicate atoms, no selector applications.
FactBase least_model_facts(const ChcSystem& sys, int max_height,
                           const ChainLimits& limits = {});

// Justification tree rooted at FALSE, flattened: the leading steps are the
// facts the query instance transitively uses, in derivation order; the last
// step records the query clause instance and has an empty pred. Premise
// indices point into steps.
struct Derivation {
  std::vector<FactBase::Entry> steps;

  // Longest premise chain below the FALSE step; base facts count zero.
  int depth() const;

  bool operator==(const Derivation&) const = default;
};

// One line per step, 1-based step numbers, clause indices as positions in
// the system the derivation was built from:
//   [1] diseq_Nat(Z, S(Z)) by clause 1 with {x:=Z} using []
//   [2] FALSE by clause 0 with {x:=Z} using [1]
std::string render_derivation(const Derivation& d);

enum class RefuteStatus { Refuted, NotRefutedAtThisBound, OutOfSteps };

struct RefuteResult {
  RefuteStatus status = RefuteStatus::NotRefutedAtThisBound;
  std::optional<Derivation> derivation;  // set exactly when Refuted
  uint64_t steps = 0;
};

// Saturates the definite clauses at the height bound, then searches the
// query clauses in index order for an instance whose premises are all
// derived. Refuted comes with a derivation that replays against the clause
// set and soundly means the system has no model. NotRefutedAtThisBound
// claims nothing beyond this height.
RefuteResult bounded_refute(const ChcSystem& sys, int max_height,
                            const ChainLimits& limits = {});

}  // namespace horncat
