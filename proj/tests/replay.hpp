// Independent replay of chained justifications: walks the recorded clause
// instances with nothing but the core term operations, so it shares no logic
// with the forward chainer it checks.
#pragma once

#include <string>
#include <vector>

#include "horncat/ir.hpp"
#include "horncat/refuter.hpp"

namespace horncat::testsupport {

// Returns "" when every step replays, else a description of the first
// failure. A step replays when its assignment is ground, exactly covers the
// clause's variables, stays within the height bound, and is sort-correct;
// the substituted body atoms equal the referenced earlier steps in order;
// and the substituted head equals the recorded fact (steps with an empty
// pred must sit on query clauses, and only the last step may be one when
// expect_false is set).
inline std::string replay_steps(const ChcSystem& sys,
                                const std::vector<FactBase::Entry>& steps,
                                int max_height, bool expect_false) {
  auto at = [](std::size_t i) { return "step " + std::to_string(i + 1); };
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const FactBase::Entry& s = steps[i];
    if (s.clause_index >= sys.clauses.size())
      return at(i) + ": clause index out of range";
    const Clause& c = sys.clauses[s.clause_index];

    if (s.assignment.size() != c.vars.size())
      return at(i) + ": assignment does not cover the clause variables";
    for (const auto& [v, sort] : c.vars) {
      auto it = s.assignment.find(v);
      if (it == s.assignment.end()) return at(i) + ": no value for " + v;
      if (!it->second.is_ground())
        return at(i) + ": value for " + v + " is not ground";
      if (term_height(it->second) > max_height)
        return at(i) + ": value for " + v + " exceeds the height bound";
      if (sort_of_term(sys.sig, {}, it->second) != sort)
        return at(i) + ": value for " + v + " has the wrong sort";
    }

    std::vector<Literal> atoms = c.body_atoms();
    if (atoms.size() != s.premises.size())
      return at(i) + ": premise count differs from the body atom count";
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      std::size_t p = s.premises[k];
      if (p >= i) return at(i) + ": premise does not precede the step";
      Literal g = apply_subst(atoms[k], s.assignment);
      if (steps[p].pred != g.name || steps[p].args != g.args)
        return at(i) + ": premise " + std::to_string(p + 1) +
               " is not the substituted body atom " + std::to_string(k);
    }

    if (s.pred.empty()) {
      if (!c.is_query()) return at(i) + ": FALSE step on a definite clause";
      if (!(expect_false && i + 1 == steps.size()))
        return at(i) + ": unexpected FALSE step";
    } else {
      if (!c.head) return at(i) + ": fact step on a query clause";
      Literal h = apply_subst(*c.head, s.assignment);
      if (h.name != s.pred || h.args != s.args)
        return at(i) + ": head instance differs from the recorded fact";
      for (const Term& a : s.args)
        if (term_height(a) > max_height)
          return at(i) + ": fact argument exceeds the height bound";
    }
  }
  if (expect_false && (steps.empty() || !steps.back().pred.empty()))
    return "derivation does not end in FALSE";
  return "";
}

inline std::string replay_factbase(const ChcSystem& sys, const FactBase& fb,
                                   int max_height) {
  return replay_steps(sys, fb.facts, max_height, false);
}

inline std::string replay_derivation(const ChcSystem& sys, const Derivation& d,
                                     int max_height) {
  return replay_steps(sys, d.steps, max_height, true);
}

}  // namespace horncat::testsupport
