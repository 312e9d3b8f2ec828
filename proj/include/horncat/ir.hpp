#ifndef HORNCAT_IR_HPP
#define HORNCAT_IR_HPP

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace horncat {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an internal cross-check (model verification, derivation replay,
// automaton consistency) fails after a search claimed success. Never rendered
// as a verdict.
struct InternalError : Error {
  explicit InternalError(const std::string& msg)
      : Error("internal error (please report): " + msg) {}
};

// ---------------------------------------------------------------------------
// Signature

struct CtorInfo {
  std::string name;
  std::vector<std::string> arg_sorts;
  std::string result_sort;
  std::vector<std::string> selectors;  // parallel to arg_sorts

  bool operator==(const CtorInfo&) const = default;
};

struct PredInfo {
  std::string name;
  std::vector<std::string> arg_sorts;
  bool generated = false;  // diseq/selector/tester relation added by preprocessing

  bool operator==(const PredInfo&) const = default;
};

// Uninterpreted non-constructor function (Skolem functions and re-parsed
// declare-fun with non-Bool result). Participates in model search, excluded
// from the Herbrand universe and from automata.
struct FuncInfo {
  std::string name;
  std::vector<std::string> arg_sorts;
  std::string result_sort;

  bool operator==(const FuncInfo&) const = default;
};

struct SelectorInfo {
  std::string ctor;
  int index = 0;
  std::string arg_sort;
  std::string adt_sort;
};

class Signature {
 public:
  std::vector<std::string> sorts;  // declaration order
  std::vector<CtorInfo> ctors;     // declaration order, across all sorts
  std::vector<PredInfo> preds;     // declaration order
  std::vector<FuncInfo> funcs;     // declaration order

  bool has_sort(const std::string& s) const;
  int sort_index(const std::string& s) const;  // -1 if absent

  const CtorInfo* ctor(const std::string& name) const;
  const PredInfo* pred(const std::string& name) const;
  const FuncInfo* func(const std::string& name) const;
  PredInfo* pred(const std::string& name);

  // Constructors of a sort, in declaration order.
  std::vector<const CtorInfo*> ctors_of(const std::string& sort) const;

  // Selector name -> what it selects. Nullopt when not a selector.
  std::optional<SelectorInfo> selector(const std::string& name) const;

  bool name_taken(const std::string& name) const;
  std::string fresh_global(const std::string& base) const;

  bool operator==(const Signature&) const = default;
};

// ---------------------------------------------------------------------------
// Terms

struct Term {
  enum class Kind { Var, App, Sel };

  Kind kind = Kind::Var;
  std::string name;        // variable name, constructor/function name, selector name
  std::vector<Term> args;  // App/Sel only

  static Term var(std::string n);
  static Term app(std::string f, std::vector<Term> as = {});
  static Term sel(std::string s, Term arg);

  bool operator==(const Term& o) const;
  std::strong_ordering operator<=>(const Term& o) const;

  bool is_ground() const;
  void collect_vars(std::vector<std::string>& out) const;
};

std::string term_to_string(const Term& t);

// Height of a ground term: nullary constructor 1, otherwise 1 + max over args.
int term_height(const Term& t);

// Sort of a term given variable sorts. Throws Error on ill-sorted input.
std::string sort_of_term(const Signature& sig,
                         const std::map<std::string, std::string>& var_sorts,
                         const Term& t);

using Substitution = std::map<std::string, Term>;

Term apply_subst(const Term& t, const Substitution& s);

// ---------------------------------------------------------------------------
// Literals, constraint formulas, clauses

struct Literal {
  enum class Kind { Atom, Eq, Neq, Tester };

  Kind kind = Kind::Atom;
  bool positive = true;    // polarity inside NNF; pipeline output is all-positive
  std::string name;        // predicate (Atom) or constructor (Tester); empty for Eq/Neq
  std::vector<Term> args;  // Atom arguments; Eq/Neq: {lhs, rhs}; Tester: {term}

  static Literal atom(std::string pred, std::vector<Term> args);
  static Literal eq(Term l, Term r);
  static Literal neq(Term l, Term r);
  static Literal tester(std::string ctor, Term t);

  bool operator==(const Literal& o) const;
};

std::string literal_to_string(const Literal& l);

// Body constraints are boolean combinations until the pipeline flattens them.
struct Formula {
  enum class Kind { Lit, And, Or, Not, True, False };

  Kind kind = Kind::True;
  Literal atom;                // Kind::Lit
  std::vector<Formula> kids;   // And/Or/Not

  static Formula lit(Literal l);
  static Formula conj(std::vector<Formula> ks);
  static Formula disj(std::vector<Formula> ks);
  static Formula neg(Formula k);
  static Formula truth();
  static Formula falsity();

  bool operator==(const Formula& o) const;
};

std::string formula_to_string(const Formula& f);

Literal apply_subst(const Literal& l, const Substitution& s);
Formula apply_subst(const Formula& f, const Substitution& s);

struct Clause {
  std::map<std::string, std::string> vars;    // universals: name -> sort
  std::map<std::string, std::string> exvars;  // existentials: name -> sort
  std::vector<Formula> body;                  // conjunction
  std::optional<Literal> head;                // nullopt = false; otherwise an Atom
  std::string note;                           // provenance within passes

  bool is_query() const { return !head.has_value(); }

  // All body formulas are positive predicate atoms (post-pipeline shape).
  bool body_is_atoms() const;
  std::vector<Literal> body_atoms() const;  // throws unless body_is_atoms()

  bool operator==(const Clause&) const = default;
};

std::string clause_to_string(const Clause& c);

struct ChcSystem {
  Signature sig;
  std::vector<Clause> clauses;

  bool operator==(const ChcSystem&) const = default;
};

// ---------------------------------------------------------------------------
// Core operations

// Structural well-formedness diagnostics; empty result means the system is
// well-sorted. Running it twice yields the same diagnostics.
std::vector<std::string> check_well_sorted(const ChcSystem& sys);

// All ground constructor terms of the sort with height <= max_height,
// height-major, then constructor declaration order, then argument tuples
// lexicographically. Deterministic; uninterpreted functions never appear.
std::vector<Term> enumerate_ground_terms(const Signature& sig,
                                         const std::string& sort,
                                         int max_height);

// Count of the same set, without materializing it.
long long count_ground_terms(const Signature& sig, const std::string& sort,
                             int max_height);

// Drop variables (universal and existential) that occur nowhere in the
// clause body or head. Sound because every sort is inhabited.
void prune_unused_vars(Clause& c);

// Canonical alpha-renamed dump; equal strings mean alpha-equivalent clauses.
std::string alpha_normal_form(const Clause& c);

}  // namespace horncat

#endif
