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

// Domain sizes per sort; a sort of size k has elements {0..k-1}.
using CardinalityVector = std::map<std::string, int>;

int total_cardinality(const CardinalityVector& card);

struct SearchBudget {
  int max_total = 8;                        // cap on the sum of domain sizes
  std::chrono::milliseconds time_limit{0};  // zero means no limit
  uint64_t seed = 0;     // permutes value order per cell; 0 keeps 0-first
  bool symmetry = false; // pin the first nullary constructor of each sort to 0
};

// Finite first-order model. Function tables are total maps from argument
// tuples to elements; predicate tables are the sets of satisfying tuples.
struct FiniteModel {
  std::map<std::string, int> domains;                            // sort -> size
  std::map<std::string, std::map<std::vector<int>, int>> funcs;  // ctor+func
  std::map<std::string, std::set<std::vector<int>>> preds;

  bool operator==(const FiniteModel&) const = default;
};

// Every cardinality vector over the declared sorts with each size >= 1 and
// total <= budget.max_total, ordered by total ascending, ties broken
// lexicographically in sort declaration order. Exhaustive, duplicate-free.
std::vector<CardinalityVector> cardinality_schedule(const Signature& sig,
                                                    const SearchBudget& budget);

enum class SearchStatus { Model, NoModelAtThisSize, TimedOut };

struct SearchResult {
  SearchStatus status = SearchStatus::NoModelAtThisSize;
  std::optional<FiniteModel> model;
  uint64_t nodes = 0;  // value assignments explored, for logging
};

// Complete backtracking search for a model at exactly this cardinality.
// Requires a preprocessed system (bodies are positive predicate atoms, no
// clause-level existentials). Because such systems are Horn, for any fixed
// function tables the predicates have a least interpretation, computed here
// by forward chaining; the search therefore branches only on function-table
// cells and NoModelAtThisSize is a proof of non-existence at this size.
// Conflicts found against partially assigned tables are sound prunes: facts
// derivable from a partial table stay derivable in every extension.
SearchResult find_model(const ChcSystem& sys, const CardinalityVector& card,
                        const SearchBudget& budget);

struct CounterInstance {
  size_t clause_index = 0;
  std::map<std::string, int> assignment;
};

// Independent checker: enumerates every assignment of every clause against
// the model tables directly (no shared machinery with find_model). Returns
// the first violation - clause index ascending, assignments in odometer
// order over the variable map - or nullopt when the model satisfies the
// system. Clauses with existential variables are checked as
// "for all universals some existential assignment satisfies the clause".
// Throws Error when the model does not cover the system's signature.
std::optional<CounterInstance> verify_model(const ChcSystem& sys,
                                            const FiniteModel& model);

// Text form, one line per symbol in declaration order:
//   sort Nat = {0,1}
//   fun Z: ()->0
//   fun S: 0->1, 1->0
//   pred even = {(0)}
// Lines starting with # are comments. parse_model accepts exactly this
// shape modulo whitespace.
std::string render_model(const FiniteModel& model, const Signature& sig);
FiniteModel parse_model(const std::string& text);

}  // namespace horncat
