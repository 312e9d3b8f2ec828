#include "horncat/refuter.hpp"

#include <algorithm>

namespace horncat {

namespace {

// Matches a clause term against a ground term, extending sigma. Variables
// already bound must agree; fresh ones bind to the ground subterm.
bool match_term(const Term& pat, const Term& g, Substitution& sigma) {
  switch (pat.kind) {
    case Term::Kind::Var: {
      auto it = sigma.find(pat.name);
      if (it != sigma.end()) return it->second == g;
      sigma.emplace(pat.name, g);
      return true;
    }
    case Term::Kind::Sel:
      return false;  // rejected during clause preparation
    case Term::Kind::App: {
      if (g.kind != Term::Kind::App || g.name != pat.name ||
          g.args.size() != pat.args.size())
        return false;
      for (std::size_t i = 0; i < pat.args.size(); ++i)
        if (!match_term(pat.args[i], g.args[i], sigma)) return false;
      return true;
    }
  }
  return false;
}

// Deepest occurrence of each variable below the root of t.
void var_depths(const Term& t, int depth, std::map<std::string, int>& out) {
  if (t.kind == Term::Kind::Var) {
    auto [it, fresh] = out.emplace(t.name, depth);
    if (!fresh) it->second = std::max(it->second, depth);
    return;
  }
  for (const auto& a : t.args) var_depths(a, depth + 1, out);
}

// Height of t with every variable counted as a height-1 leaf: a lower bound
// on the height of any ground instance.
int min_instance_height(const Term& t) {
  if (t.kind == Term::Kind::Var) return 1;
  int h = 0;
  for (const auto& a : t.args) h = std::max(h, min_instance_height(a));
  return 1 + h;
}

bool has_selector(const Term& t) {
  if (t.kind == Term::Kind::Sel) return true;
  return std::any_of(t.args.begin(), t.args.end(),
                     [](const Term& a) { return has_selector(a); });
}

struct PreppedClause {
  std::size_t index = 0;
  const Clause* clause = nullptr;
  std::vector<Literal> atoms;          // body atoms in clause order
  std::vector<std::string> enum_vars;  // unmatched vars occurring in the head
  std::vector<const std::vector<Term>*> enum_pools;  // capped per occurrence
  std::vector<std::string> rep_vars;  // vars occurring nowhere: one value
  std::vector<Term> rep_values;
  bool fireable = true;  // false when no instance fits under the bound
};

struct Chainer {
  const ChcSystem& sys;
  const int H;
  const uint64_t limit;
  const bool timed;
  const std::chrono::steady_clock::time_point deadline;
  FactBase fb;
  bool out_of_steps = false;

  // query search state: when set, complete instances are recorded instead of
  // inserted as facts, and the search stops at the first one
  bool query_mode = false;
  bool stop = false;
  std::optional<std::pair<Substitution, std::vector<std::size_t>>> hit;

  // Pools keyed by (sort, height cap) so a variable that can only take
  // shallow values never forces materializing the full height-H term set of
  // a branching sort.
  std::map<std::pair<std::string, int>, std::vector<Term>> pools_;

  Chainer(const ChcSystem& s, int h, const ChainLimits& lim)
      : sys(s),
        H(h),
        limit(lim.max_steps),
        timed(lim.time_limit.count() > 0),
        deadline(std::chrono::steady_clock::now() + lim.time_limit) {}

  bool tick() {
    ++fb.steps;
    if (limit != 0 && fb.steps > limit) {
      out_of_steps = true;
      return false;
    }
    if (timed && (fb.steps & 4095) == 0 &&
        std::chrono::steady_clock::now() >= deadline) {
      out_of_steps = true;
      return false;
    }
    return true;
  }

  const std::vector<Term>& pool_at(const std::string& sort, int cap) {
    cap = std::min(cap, H);
    auto it = pools_.find({sort, cap});
    if (it == pools_.end())
      it = pools_
               .emplace(std::pair{sort, cap},
                        enumerate_ground_terms(sys.sig, sort, cap))
               .first;
    return it->second;
  }

  // Smallest ground term of the sort within the bound, for variables whose
  // value cannot matter. Null when the sort is uninhabited at this height.
  const Term* representative(const std::string& sort) {
    for (int cap = 1; cap <= H; ++cap) {
      if (count_ground_terms(sys.sig, sort, cap) == 0) continue;
      return &pool_at(sort, cap).front();
    }
    return nullptr;
  }

  PreppedClause prep(std::size_t ci) {
    const Clause& c = sys.clauses[ci];
    PreppedClause pc;
    pc.index = ci;
    pc.clause = &c;
    if (!c.exvars.empty())
      throw Error("refuter requires a Skolemized system: clause " +
                  std::to_string(ci) + " has existential variables");
    if (!c.body_is_atoms())
      throw Error("refuter requires a constraint-free system: clause " +
                  std::to_string(ci) + " has non-atom body constraints");
    if (c.head && c.head->kind != Literal::Kind::Atom)
      throw Error("refuter requires a predicate atom head: clause " +
                  std::to_string(ci));
    pc.atoms = c.body_atoms();

    std::vector<std::string> seen;
    std::set<std::string> in_atoms, in_head;
    for (const auto& a : pc.atoms)
      for (const auto& arg : a.args) {
        if (has_selector(arg))
          throw Error("refuter requires selector-free atoms: clause " +
                      std::to_string(ci));
        if (min_instance_height(arg) > H) pc.fireable = false;
        seen.clear();
        arg.collect_vars(seen);
        in_atoms.insert(seen.begin(), seen.end());
      }
    std::map<std::string, int> depths;
    if (c.head)
      for (const auto& arg : c.head->args) {
        if (has_selector(arg))
          throw Error("refuter requires selector-free atoms: clause " +
                      std::to_string(ci));
        if (min_instance_height(arg) > H) pc.fireable = false;
        seen.clear();
        arg.collect_vars(seen);
        in_head.insert(seen.begin(), seen.end());
        var_depths(arg, 0, depths);
      }

    for (const auto& [v, sort] : c.vars) {
      if (in_atoms.count(v)) continue;  // bound by matching body atoms
      if (in_head.count(v)) {
        int cap = H - depths.at(v);
        const std::vector<Term>* p = cap >= 1 ? &pool_at(sort, cap) : nullptr;
        if (!p || p->empty()) {
          pc.fireable = false;
          break;
        }
        pc.enum_vars.push_back(v);
        pc.enum_pools.push_back(p);
      } else {
        const Term* r = representative(sort);
        if (!r) {
          pc.fireable = false;  // sort uninhabited within the bound
          break;
        }
        pc.rep_vars.push_back(v);
        pc.rep_values.push_back(*r);
      }
    }
    return pc;
  }

  // Enumerates the unmatched variables and hands each complete assignment to
  // the current sink (fact insertion, or query hit capture).
  void emit(const PreppedClause& pc, const Substitution& matched,
            const std::vector<std::size_t>& premises) {
    std::vector<std::size_t> idx(pc.enum_vars.size(), 0);
    while (true) {
      if (!tick()) return;
      Substitution full = matched;
      for (std::size_t i = 0; i < pc.enum_vars.size(); ++i)
        full[pc.enum_vars[i]] = (*pc.enum_pools[i])[idx[i]];
      for (std::size_t i = 0; i < pc.rep_vars.size(); ++i)
        full[pc.rep_vars[i]] = pc.rep_values[i];
      deliver(pc, std::move(full), premises);
      if (out_of_steps || stop) return;

      int i = static_cast<int>(idx.size()) - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] + 1 ==
                           pc.enum_pools[static_cast<std::size_t>(i)]->size())
        idx[i--] = 0;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
    }
  }

  void deliver(const PreppedClause& pc, Substitution full,
               const std::vector<std::size_t>& premises) {
    if (query_mode) {
      hit = {std::move(full), premises};
      stop = true;
      return;
    }
    const Literal& h = *pc.clause->head;
    std::vector<Term> args;
    args.reserve(h.args.size());
    for (const auto& a : h.args) {
      Term g = apply_subst(a, full);
      if (!g.is_ground())
        throw Error("refuter: unbound variable in head of clause " +
                    std::to_string(pc.index));
      if (term_height(g) > H) return;  // outside the bound: not retained
      args.push_back(std::move(g));
    }
    auto& by_pred = fb.index[h.name];
    auto [it, fresh] = by_pred.emplace(args, fb.facts.size());
    if (!fresh) return;
    fb.facts.push_back(
        {h.name, std::move(args), pc.index, std::move(full), premises});
  }

  // Matches body atoms left to right against facts with index < visible_end.
  // When require_new is set, complete matches must take at least one premise
  // at index >= new_start (the previous round's additions).
  void match_atoms(const PreppedClause& pc, std::size_t k,
                   const Substitution& sigma,
                   std::vector<std::size_t>& premises, std::size_t visible_end,
                   std::size_t new_start, bool require_new) {
    if (out_of_steps || stop) return;
    if (k == pc.atoms.size()) {
      if (require_new &&
          std::none_of(premises.begin(), premises.end(),
                       [&](std::size_t p) { return p >= new_start; }))
        return;
      emit(pc, sigma, premises);
      return;
    }
    const Literal& a = pc.atoms[k];
    auto it = fb.index.find(a.name);
    if (it == fb.index.end()) return;
    for (const auto& [fargs, fidx] : it->second) {
      if (out_of_steps || stop) return;
      if (fidx >= visible_end) continue;
      if (!tick()) return;
      if (fargs.size() != a.args.size()) continue;
      Substitution s2 = sigma;
      bool ok = true;
      for (std::size_t i = 0; i < a.args.size() && ok; ++i)
        ok = match_term(a.args[i], fargs[i], s2);
      if (!ok) continue;
      premises.push_back(fidx);
      match_atoms(pc, k + 1, s2, premises, visible_end, new_start,
                  require_new);
      premises.pop_back();
    }
  }

  // Semi-naive saturation: round 0 fires the fact clauses, later rounds only
  // fire instances with at least one premise from the previous round.
  void saturate(const std::vector<PreppedClause>& defs) {
    std::vector<std::size_t> none;
    for (const auto& pc : defs) {
      if (!pc.fireable || !pc.atoms.empty()) continue;
      emit(pc, {}, none);
      if (out_of_steps) return;
    }
    std::size_t prev_start = 0, prev_end = fb.facts.size();
    while (prev_start < prev_end) {
      for (const auto& pc : defs) {
        if (!pc.fireable || pc.atoms.empty()) continue;
        std::vector<std::size_t> premises;
        match_atoms(pc, 0, {}, premises, prev_end, prev_start, true);
        if (out_of_steps) return;
      }
      prev_start = prev_end;
      prev_end = fb.facts.size();
    }
  }

  // First query instance in match enumeration order, if any.
  bool run_query(const PreppedClause& pc) {
    query_mode = true;
    stop = false;
    hit.reset();
    std::vector<std::size_t> premises;
    match_atoms(pc, 0, {}, premises, fb.facts.size(), 0, false);
    query_mode = false;
    return hit.has_value();
  }
};

Derivation build_derivation(const FactBase& fb, std::size_t query_index,
                            Substitution asg,
                            const std::vector<std::size_t>& premises) {
  std::set<std::size_t> used;
  std::vector<std::size_t> work(premises.begin(), premises.end());
  while (!work.empty()) {
    std::size_t i = work.back();
    work.pop_back();
    if (!used.insert(i).second) continue;
    const auto& ps = fb.facts[i].premises;
    work.insert(work.end(), ps.begin(), ps.end());
  }

  // ascending fact index is already a topological order
  std::map<std::size_t, std::size_t> renumber;
  Derivation d;
  for (std::size_t i : used) {
    renumber[i] = d.steps.size();
    FactBase::Entry e = fb.facts[i];
    for (auto& p : e.premises) p = renumber.at(p);
    d.steps.push_back(std::move(e));
  }
  FactBase::Entry last;
  last.clause_index = query_index;
  last.assignment = std::move(asg);
  for (std::size_t p : premises) last.premises.push_back(renumber.at(p));
  d.steps.push_back(std::move(last));
  return d;
}

}  // namespace

bool FactBase::contains(const std::string& pred,
                        const std::vector<Term>& args) const {
  auto it = index.find(pred);
  return it != index.end() && it->second.count(args) > 0;
}

std::set<std::vector<Term>> FactBase::tuples(const std::string& pred) const {
  std::set<std::vector<Term>> out;
  auto it = index.find(pred);
  if (it == index.end()) return out;
  for (const auto& [args, i] : it->second) out.insert(args);
  return out;
}

int Derivation::depth() const {
  std::vector<int> dep(steps.size(), 0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    int below = -1;
    for (std::size_t p : steps[i].premises)
      below = std::max(below, dep[p]);
    dep[i] = below + 1;
  }
  return steps.empty() ? 0 : dep.back();
}

std::string render_derivation(const Derivation& d) {
  std::string out;
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const auto& s = d.steps[i];
    out += "[" + std::to_string(i + 1) + "] ";
    if (s.pred.empty()) {
      out += "FALSE";
    } else {
      out += s.pred + "(";
      for (std::size_t j = 0; j < s.args.size(); ++j) {
        if (j) out += ", ";
        out += term_to_string(s.args[j]);
      }
      out += ")";
    }
    out += " by clause " + std::to_string(s.clause_index) + " with {";
    bool first = true;
    for (const auto& [v, t] : s.assignment) {
      if (!first) out += ", ";
      first = false;
      out += v + ":=" + term_to_string(t);
    }
    out += "} using [";
    first = true;
    for (std::size_t p : s.premises) {
      if (!first) out += ", ";
      first = false;
      out += std::to_string(p + 1);
    }
    out += "]\n";
  }
  return out;
}

FactBase least_model_facts(const ChcSystem& sys, int max_height,
                           const ChainLimits& limits) {
  if (max_height < 1) throw Error("refuter: max_height must be positive");
  Chainer ch(sys, max_height, limits);
  std::vector<PreppedClause> defs;
  for (std::size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    PreppedClause pc = ch.prep(ci);  // validates queries too
    if (!pc.clause->is_query()) defs.push_back(std::move(pc));
  }
  ch.saturate(defs);
  ch.fb.saturated = !ch.out_of_steps;
  return std::move(ch.fb);
}

RefuteResult bounded_refute(const ChcSystem& sys, int max_height,
                            const ChainLimits& limits) {
  if (max_height < 1) throw Error("refuter: max_height must be positive");
  Chainer ch(sys, max_height, limits);
  std::vector<PreppedClause> defs, queries;
  for (std::size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    PreppedClause pc = ch.prep(ci);
    (pc.clause->is_query() ? queries : defs).push_back(std::move(pc));
  }
  ch.saturate(defs);

  RefuteResult r;
  if (ch.out_of_steps) {
    r.status = RefuteStatus::OutOfSteps;
    r.steps = ch.fb.steps;
    return r;
  }
  for (const auto& pc : queries) {
    if (!pc.fireable) continue;
    bool found = ch.run_query(pc);
    if (ch.out_of_steps) {
      r.status = RefuteStatus::OutOfSteps;
      r.steps = ch.fb.steps;
      return r;
    }
    if (found) {
      r.status = RefuteStatus::Refuted;
      r.derivation = build_derivation(ch.fb, pc.index,
                                      std::move(ch.hit->first),
                                      ch.hit->second);
      r.steps = ch.fb.steps;
      return r;
    }
  }
  r.status = RefuteStatus::NotRefutedAtThisBound;
  r.steps = ch.fb.steps;
  return r;
}

}  // namespace horncat
