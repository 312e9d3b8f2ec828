#include "horncat/preprocess.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace horncat {

namespace {

constexpr size_t kMaxDisjuncts = 10000;

std::map<std::string, std::string> clause_scope(const Clause& cl) {
  auto m = cl.vars;
  m.insert(cl.exvars.begin(), cl.exvars.end());
  return m;
}

bool clause_has_exvars(const ChcSystem& sys) {
  return std::any_of(sys.clauses.begin(), sys.clauses.end(),
                     [](const Clause& c) { return !c.exvars.empty(); });
}

void require_skolemized(const ChcSystem& sys, const char* pass) {
  if (clause_has_exvars(sys))
    throw Error(std::string(pass) +
                ": clause-level existential variables present; "
                "Skolemize the system first");
}

}  // namespace

std::string PassReport::to_string() const {
  std::ostringstream os;
  for (const Pass& p : passes) {
    os << p.name << ": " << p.clauses_in << " -> " << p.clauses_out
       << " clauses";
    if (p.clauses_dropped) os << ", " << p.clauses_dropped << " dropped";
    if (p.substitutions) os << ", " << p.substitutions << " bindings";
    os << "\n";
    if (!p.generated_preds.empty()) {
      os << "  generated:";
      for (const auto& g : p.generated_preds) os << " " << g;
      os << "\n";
    }
    for (const auto& n : p.notes) os << "  note: " << n << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// NNF

namespace {

// Conjunction/disjunction with unit simplification, keeping operand order.
Formula mk_conj(std::vector<Formula> ks) {
  std::vector<Formula> out;
  for (auto& k : ks) {
    if (k.kind == Formula::Kind::True) continue;
    if (k.kind == Formula::Kind::False) return Formula::falsity();
    out.push_back(std::move(k));
  }
  if (out.empty()) return Formula::truth();
  if (out.size() == 1) return out[0];
  return Formula::conj(std::move(out));
}

Formula mk_disj(std::vector<Formula> ks) {
  std::vector<Formula> out;
  for (auto& k : ks) {
    if (k.kind == Formula::Kind::False) continue;
    if (k.kind == Formula::Kind::True) return Formula::truth();
    out.push_back(std::move(k));
  }
  if (out.empty()) return Formula::falsity();
  if (out.size() == 1) return out[0];
  return Formula::disj(std::move(out));
}

Formula negate_literal(const Signature& sig, const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Eq:
      return Formula::lit(Literal::neq(l.args[0], l.args[1]));
    case Literal::Kind::Neq:
      return Formula::lit(Literal::eq(l.args[0], l.args[1]));
    case Literal::Kind::Atom: {
      Literal out = l;
      out.positive = !out.positive;
      return Formula::lit(out);
    }
    case Literal::Kind::Tester: {
      if (!l.positive) {
        Literal out = l;
        out.positive = true;
        return Formula::lit(out);
      }
      const CtorInfo* c = sig.ctor(l.name);
      if (!c) throw Error("unknown constructor in tester: " + l.name);
      std::vector<Formula> others;
      for (const CtorInfo* o : sig.ctors_of(c->result_sort))
        if (o->name != l.name)
          others.push_back(Formula::lit(Literal::tester(o->name, l.args[0])));
      return mk_disj(std::move(others));
    }
  }
  throw InternalError("unhandled literal kind");
}

Formula nnf(const Signature& sig, const Formula& f, bool positive) {
  switch (f.kind) {
    case Formula::Kind::Lit: {
      const Literal& l = f.atom;
      // A tester negated by its polarity flag (the frontend writes guards
      // this way, without a Not node) expands like a negated tester node.
      if (l.kind == Literal::Kind::Tester && !l.positive) {
        Literal pos = l;
        pos.positive = true;
        return nnf(sig, Formula::neg(Formula::lit(pos)), positive);
      }
      return positive ? Formula::lit(l) : negate_literal(sig, l);
    }
    case Formula::Kind::True:
      return positive ? Formula::truth() : Formula::falsity();
    case Formula::Kind::False:
      return positive ? Formula::falsity() : Formula::truth();
    case Formula::Kind::Not:
      return nnf(sig, f.kids[0], !positive);
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::vector<Formula> ks;
      ks.reserve(f.kids.size());
      for (const auto& k : f.kids) ks.push_back(nnf(sig, k, positive));
      bool conj = (f.kind == Formula::Kind::And) == positive;
      return conj ? mk_conj(std::move(ks)) : mk_disj(std::move(ks));
    }
  }
  throw InternalError("unhandled formula kind");
}

}  // namespace

ChcSystem to_nnf(const ChcSystem& sys) {
  ChcSystem out = sys;
  for (Clause& cl : out.clauses) {
    std::vector<Formula> body;
    for (const Formula& f : cl.body) {
      Formula g = nnf(out.sig, f, true);
      if (g.kind == Formula::Kind::True) continue;
      body.push_back(std::move(g));
    }
    cl.body = std::move(body);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Testers and selectors

namespace {

struct Flattener {
  const Signature& sig;
  Clause& cl;
  // One fresh variable per distinct selector application in this clause.
  std::map<std::pair<std::string, Term>, std::string> memo;
  std::vector<Formula> atoms;  // generated relation atoms, definition order
  const std::map<std::string, std::string>& rel_names;
  std::set<std::string>& used_sels;

  std::string fresh_var(const std::string& sort) {
    for (char c = 'a';; ++c) {
      if (c > 'z') break;
      std::string n(1, c);
      if (!cl.vars.count(n) && !cl.exvars.count(n)) {
        cl.vars[n] = sort;
        return n;
      }
    }
    for (int i = 0;; ++i) {
      std::string n = "t" + std::to_string(i);
      if (!cl.vars.count(n) && !cl.exvars.count(n)) {
        cl.vars[n] = sort;
        return n;
      }
    }
  }

  Term flatten(const Term& t) {
    if (t.kind == Term::Kind::Var) return t;
    Term out = t;
    for (auto& a : out.args) a = flatten(a);
    if (out.kind != Term::Kind::Sel) return out;
    auto key = std::make_pair(out.name, out.args[0]);
    auto it = memo.find(key);
    if (it != memo.end()) return Term::var(it->second);
    auto info = sig.selector(out.name);
    if (!info) throw Error("unknown selector: " + out.name);
    used_sels.insert(out.name);
    std::string v = fresh_var(info->arg_sort);
    memo[key] = v;
    atoms.push_back(Formula::lit(
        Literal::atom(rel_names.at(out.name), {out.args[0], Term::var(v)})));
    return Term::var(v);
  }

  Formula rewrite_literal(const Literal& lit) {
    Literal l = lit;
    for (auto& a : l.args) a = flatten(a);
    if (l.kind == Literal::Kind::Tester)
      return Formula::lit(
          Literal::atom(rel_names.at("?" + l.name), {l.args[0]}));
    return Formula::lit(std::move(l));
  }
};

void collect_tester_selector_uses(const Formula& f,
                                  std::set<std::string>& sels,
                                  std::set<std::string>& testers) {
  if (f.kind == Formula::Kind::Lit) {
    const Literal& l = f.atom;
    if (l.kind == Literal::Kind::Tester && l.positive) testers.insert(l.name);
    std::vector<const Term*> stack;
    for (const auto& a : l.args) stack.push_back(&a);
    while (!stack.empty()) {
      const Term* t = stack.back();
      stack.pop_back();
      if (t->kind == Term::Kind::Sel) sels.insert(t->name);
      for (const auto& a : t->args) stack.push_back(&a);
    }
    return;
  }
  for (const auto& k : f.kids) collect_tester_selector_uses(k, sels, testers);
}

bool literal_mentions(const Literal& l) {
  if (l.kind == Literal::Kind::Tester) return true;
  std::vector<const Term*> stack;
  for (const auto& a : l.args) stack.push_back(&a);
  while (!stack.empty()) {
    const Term* t = stack.back();
    stack.pop_back();
    if (t->kind == Term::Kind::Sel) return true;
    for (const auto& a : t->args) stack.push_back(&a);
  }
  return false;
}

bool formula_mentions(const Formula& f) {
  if (f.kind == Formula::Kind::Lit) return literal_mentions(f.atom);
  for (const auto& k : f.kids)
    if (formula_mentions(k)) return true;
  return false;
}

}  // namespace

std::pair<ChcSystem, PassReport::Pass> eliminate_testers_selectors(
    const ChcSystem& sys) {
  PassReport::Pass report;
  report.name = "testers-selectors";
  report.clauses_in = sys.clauses.size();

  // Which selectors and testers actually occur.
  std::set<std::string> used_sels, used_testers;
  for (const Clause& cl : sys.clauses) {
    for (const Formula& f : cl.body)
      collect_tester_selector_uses(f, used_sels, used_testers);
    if (cl.head)
      collect_tester_selector_uses(Formula::lit(*cl.head), used_sels,
                                   used_testers);
  }

  ChcSystem out = sys;
  if (used_sels.empty() && used_testers.empty()) {
    report.clauses_out = out.clauses.size();
    return {std::move(out), std::move(report)};
  }

  // Register relation predicates, in signature declaration order. Tester
  // relations are keyed as "?<ctor>" to keep one name map for both kinds.
  std::map<std::string, std::string> rel_names;
  for (const CtorInfo& c : sys.sig.ctors) {
    if (used_testers.count(c.name)) {
      std::string n = out.sig.fresh_global("is_" + c.name);
      rel_names["?" + c.name] = n;
      out.sig.preds.push_back({n, {c.result_sort}, true});
      report.generated_preds.push_back(n);
    }
    for (size_t i = 0; i < c.selectors.size(); ++i) {
      if (!used_sels.count(c.selectors[i])) continue;
      std::string n = out.sig.fresh_global(c.selectors[i] + "_rel");
      rel_names[c.selectors[i]] = n;
      out.sig.preds.push_back({n, {c.result_sort, c.arg_sorts[i]}, true});
      report.generated_preds.push_back(n);
    }
  }

  // Rewrite the clauses. A selector relation atom constrains the whole body
  // conjunction, so clauses that mention testers or selectors must already
  // be flat literal conjunctions (to_nnf + split_dnf establish this).
  std::set<std::string> touched;
  for (size_t ci = 0; ci < out.clauses.size(); ++ci) {
    Clause& cl = out.clauses[ci];
    bool mentions = cl.head && literal_mentions(*cl.head);
    for (const Formula& f : cl.body) mentions = mentions || formula_mentions(f);
    if (!mentions) continue;
    for (const Formula& f : cl.body) {
      if (f.kind != Formula::Kind::Lit)
        throw Error("clause " + std::to_string(ci) +
                    " mixes testers or selectors with non-literal "
                    "constraints; normalize and split to DNF first");
      if (f.atom.kind == Literal::Kind::Tester && !f.atom.positive)
        throw Error("clause " + std::to_string(ci) +
                    " has a negated tester; normalize to NNF first");
    }
    Flattener fl{out.sig, cl, {}, {}, rel_names, touched};
    std::vector<Formula> body;
    for (const Formula& f : cl.body) body.push_back(fl.rewrite_literal(f.atom));
    if (cl.head) {
      Literal h = *cl.head;
      for (auto& a : h.args) a = fl.flatten(a);
      cl.head = std::move(h);
    }
    cl.body.clear();
    for (auto& a : fl.atoms) cl.body.push_back(std::move(a));
    for (auto& f : body) cl.body.push_back(std::move(f));
  }

  // Defining clauses, e.g. x = cons(a1,a2) -> car_rel(x,a1) and
  // x = cons(a1,a2) -> is_cons(x). Equality elimination turns them to facts.
  for (const CtorInfo& c : sys.sig.ctors) {
    auto make_base = [&] {
      Clause cl;
      cl.vars["x"] = c.result_sort;
      std::vector<Term> args;
      for (size_t i = 0; i < c.arg_sorts.size(); ++i) {
        std::string a = "a" + std::to_string(i + 1);
        cl.vars[a] = c.arg_sorts[i];
        args.push_back(Term::var(a));
      }
      cl.body.push_back(
          Formula::lit(Literal::eq(Term::var("x"), Term::app(c.name, args))));
      return cl;
    };
    if (used_testers.count(c.name)) {
      Clause cl = make_base();
      cl.head = Literal::atom(rel_names.at("?" + c.name), {Term::var("x")});
      cl.note = "tester relation " + c.name;
      out.clauses.push_back(std::move(cl));
    }
    for (size_t i = 0; i < c.selectors.size(); ++i) {
      if (!used_sels.count(c.selectors[i])) continue;
      Clause cl = make_base();
      cl.head = Literal::atom(
          rel_names.at(c.selectors[i]),
          {Term::var("x"), Term::var("a" + std::to_string(i + 1))});
      cl.note = "selector relation " + c.selectors[i];
      out.clauses.push_back(std::move(cl));
    }
  }

  report.clauses_out = out.clauses.size();
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// DNF split

namespace {

using Cube = std::vector<Literal>;

std::vector<Cube> dnf(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Lit:
      return {{f.atom}};
    case Formula::Kind::True:
      return {{}};
    case Formula::Kind::False:
      return {};
    case Formula::Kind::Or: {
      std::vector<Cube> out;
      for (const auto& k : f.kids) {
        auto sub = dnf(k);
        out.insert(out.end(), sub.begin(), sub.end());
        if (out.size() > kMaxDisjuncts)
          throw Error("clause constraint is too large to split into DNF");
      }
      return out;
    }
    case Formula::Kind::And: {
      std::vector<Cube> out = {{}};
      for (const auto& k : f.kids) {
        auto sub = dnf(k);
        std::vector<Cube> next;
        if (out.size() * sub.size() > kMaxDisjuncts)
          throw Error("clause constraint is too large to split into DNF");
        for (const auto& a : out)
          for (const auto& b : sub) {
            Cube c = a;
            c.insert(c.end(), b.begin(), b.end());
            next.push_back(std::move(c));
          }
        out = std::move(next);
      }
      return out;
    }
    case Formula::Kind::Not:
      throw InternalError("split_dnf requires NNF input");
  }
  throw InternalError("unhandled formula kind");
}

}  // namespace

ChcSystem split_dnf(const ChcSystem& sys) {
  ChcSystem out;
  out.sig = sys.sig;
  for (const Clause& cl : sys.clauses) {
    Formula whole = mk_conj(cl.body);
    for (const Cube& cube : dnf(whole)) {
      Clause c;
      c.vars = cl.vars;
      c.exvars = cl.exvars;
      c.head = cl.head;
      c.note = cl.note;
      for (const Literal& l : cube) c.body.push_back(Formula::lit(l));
      prune_unused_vars(c);
      out.clauses.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equality elimination

namespace {

struct Unifier {
  const Signature& sig;
  Substitution bind;

  const Term* walk(const Term* t) const {
    while (t->kind == Term::Kind::Var) {
      auto it = bind.find(t->name);
      if (it == bind.end()) break;
      t = &it->second;
    }
    return t;
  }

  Term resolve(const Term& t) const {
    const Term* w = walk(&t);
    Term out = *w;
    for (auto& a : out.args) a = resolve(a);
    return out;
  }

  bool occurs(const std::string& v, const Term& t) const {
    const Term* w = walk(&t);
    if (w->kind == Term::Kind::Var) return w->name == v;
    for (const auto& a : w->args)
      if (occurs(v, a)) return true;
    return false;
  }

  // Returns false when the pair has no Herbrand solution. Throws when the
  // pair involves uninterpreted functions or selectors in a way unification
  // cannot resolve; those forms cannot come from the supported input grammar.
  bool unify(const Term& a, const Term& b) {
    const Term* x = walk(&a);
    const Term* y = walk(&b);
    if (*x == *y) return true;
    if (x->kind == Term::Kind::Var) {
      if (occurs(x->name, *y)) return false;
      bind[x->name] = *y;
      return true;
    }
    if (y->kind == Term::Kind::Var) return unify(b, a);
    bool cx = x->kind == Term::Kind::App && sig.ctor(x->name) != nullptr;
    bool cy = y->kind == Term::Kind::App && sig.ctor(y->name) != nullptr;
    if (cx && cy) {
      if (x->name != y->name) return false;
      Term tx = *x, ty = *y;  // own them: binds may reallocate
      for (size_t i = 0; i < tx.args.size(); ++i)
        if (!unify(tx.args[i], ty.args[i])) return false;
      return true;
    }
    throw Error("cannot eliminate equality between " + term_to_string(*x) +
                " and " + term_to_string(*y) +
                ": uninterpreted function or selector application");
  }
};

}  // namespace

std::pair<ChcSystem, PassReport::Pass> eliminate_equalities(
    const ChcSystem& sys) {
  PassReport::Pass report;
  report.name = "equalities";
  report.clauses_in = sys.clauses.size();
  require_skolemized(sys, "eliminate_equalities");

  ChcSystem out;
  out.sig = sys.sig;
  for (const Clause& cl : sys.clauses) {
    bool pure = std::all_of(
        cl.body.begin(), cl.body.end(),
        [](const Formula& f) { return f.kind == Formula::Kind::Lit; });
    if (!pure) throw Error("eliminate_equalities requires conjunctive bodies");
    Unifier u{sys.sig, {}};
    bool ok = true;
    for (const Formula& f : cl.body) {
      const Literal& l = f.atom;
      if (l.kind != Literal::Kind::Eq) continue;
      if (!(ok = u.unify(l.args[0], l.args[1]))) break;
    }
    if (!ok) {
      report.clauses_dropped++;
      continue;
    }
    Substitution subst;
    for (const auto& [v, t] : u.bind) subst[v] = u.resolve(t);
    report.substitutions += subst.size();

    Clause c;
    c.vars = cl.vars;
    c.exvars = cl.exvars;
    c.note = cl.note;
    for (const Formula& f : cl.body) {
      if (f.atom.kind == Literal::Kind::Eq) continue;
      c.body.push_back(Formula::lit(apply_subst(f.atom, subst)));
    }
    if (cl.head) c.head = apply_subst(*cl.head, subst);
    prune_unused_vars(c);
    out.clauses.push_back(std::move(c));
  }
  report.clauses_out = out.clauses.size();
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Disequality encoding

namespace {

void reject_unsupported_diseq_term(const Signature& sig, const Term& t) {
  if (t.kind == Term::Kind::Sel)
    throw Error("disequality over a selector application is not supported: " +
                term_to_string(t));
  if (t.kind == Term::Kind::App && !sig.ctor(t.name))
    throw Error(
        "disequality over an uninterpreted function application is not "
        "supported: " +
        term_to_string(t));
  for (const auto& a : t.args) reject_unsupported_diseq_term(sig, a);
}

}  // namespace

std::pair<ChcSystem, PassReport::Pass> encode_disequalities(
    const ChcSystem& sys) {
  PassReport::Pass report;
  report.name = "disequalities";
  report.clauses_in = sys.clauses.size();

  // Find the sorts with disequality occurrences.
  std::set<std::string> need;
  for (const Clause& cl : sys.clauses) {
    for (const Formula& f : cl.body) {
      if (f.kind != Formula::Kind::Lit ||
          f.atom.kind != Literal::Kind::Neq)
        continue;
      const Literal& l = f.atom;
      reject_unsupported_diseq_term(sys.sig, l.args[0]);
      reject_unsupported_diseq_term(sys.sig, l.args[1]);
      need.insert(sort_of_term(sys.sig, clause_scope(cl), l.args[0]));
      if (l.args[0] == l.args[1])
        report.notes.push_back(
            "disequality between identical terms can never hold: " +
            literal_to_string(l));
    }
  }

  ChcSystem out = sys;
  if (need.empty()) {
    report.clauses_out = out.clauses.size();
    return {std::move(out), std::move(report)};
  }

  // Close under constructor argument sorts: the rules for a sort refer to
  // the rules of its component sorts.
  for (bool grew = true; grew;) {
    grew = false;
    for (const std::string& s : std::vector<std::string>(need.begin(),
                                                         need.end()))
      for (const CtorInfo* c : sys.sig.ctors_of(s))
        for (const std::string& a : c->arg_sorts)
          if (need.insert(a).second) grew = true;
  }

  // Register the predicates in sort declaration order.
  std::map<std::string, std::string> diseq_name;
  for (const std::string& s : sys.sig.sorts) {
    if (!need.count(s)) continue;
    std::string n = out.sig.fresh_global("diseq_" + s);
    diseq_name[s] = n;
    out.sig.preds.push_back({n, {s, s}, true});
    report.generated_preds.push_back(n);
  }

  // Rewrite disequality literals into atoms.
  for (Clause& cl : out.clauses) {
    for (Formula& f : cl.body) {
      if (f.kind != Formula::Kind::Lit ||
          f.atom.kind != Literal::Kind::Neq)
        continue;
      std::string s = sort_of_term(out.sig, clause_scope(cl), f.atom.args[0]);
      f = Formula::lit(Literal::atom(diseq_name.at(s),
                                     {f.atom.args[0], f.atom.args[1]}));
    }
  }

  // Append the defining rules.
  for (const std::string& s : sys.sig.sorts) {
    if (!need.count(s)) continue;
    auto ctors = sys.sig.ctors_of(s);
    auto args_for = [](const CtorInfo* c, const std::string& base, Clause& cl,
                       int skip = -1, Term fill = Term::var("")) {
      std::vector<Term> args;
      for (size_t i = 0; i < c->arg_sorts.size(); ++i) {
        if (static_cast<int>(i) == skip) {
          args.push_back(fill);
          continue;
        }
        std::string n = base + std::to_string(i + 1);
        cl.vars[n] = c->arg_sorts[i];
        args.push_back(Term::var(n));
      }
      return args;
    };
    for (const CtorInfo* c : ctors) {
      for (const CtorInfo* d : ctors) {
        if (c == d) continue;
        Clause cl;
        Term lhs = Term::app(c->name, args_for(c, "a", cl));
        Term rhs = Term::app(d->name, args_for(d, "b", cl));
        cl.head = Literal::atom(diseq_name.at(s), {lhs, rhs});
        cl.note = "diseq " + s;
        out.clauses.push_back(std::move(cl));
      }
    }
    for (const CtorInfo* c : ctors) {
      for (size_t i = 0; i < c->arg_sorts.size(); ++i) {
        const std::string& arg_sort = c->arg_sorts[i];
        Clause cl;
        cl.vars["x"] = arg_sort;
        cl.vars["y"] = arg_sort;
        Term lhs = Term::app(
            c->name, args_for(c, "a", cl, static_cast<int>(i), Term::var("x")));
        Term rhs = Term::app(
            c->name, args_for(c, "b", cl, static_cast<int>(i), Term::var("y")));
        cl.body.push_back(Formula::lit(Literal::atom(
            diseq_name.at(arg_sort), {Term::var("x"), Term::var("y")})));
        cl.head = Literal::atom(diseq_name.at(s), {lhs, rhs});
        cl.note = "diseq " + s;
        out.clauses.push_back(std::move(cl));
      }
    }
  }

  report.clauses_out = out.clauses.size();
  return {std::move(out), std::move(report)};
}

// ---------------------------------------------------------------------------
// Pipeline

std::pair<ChcSystem, PassReport> run_pipeline(const ChcSystem& sys) {
  {
    auto diags = check_well_sorted(sys);
    if (!diags.empty()) {
      std::string msg = "ill-sorted system:";
      for (const auto& d : diags) msg += "\n  " + d;
      throw Error(msg);
    }
  }
  require_skolemized(sys, "run_pipeline");

  PassReport report;
  auto plain = [&](const char* name, size_t in, size_t outc) {
    PassReport::Pass p;
    p.name = name;
    p.clauses_in = in;
    p.clauses_out = outc;
    report.passes.push_back(std::move(p));
  };

  ChcSystem a = to_nnf(sys);
  plain("nnf", sys.clauses.size(), a.clauses.size());

  // Split before flattening selectors: a selector relation atom constrains
  // the whole clause body, so it may only be attached to the one disjunct
  // that mentions it. Hoisting it above a disjunction would wrongly require
  // the selector's constructor in branches that never touch the selector.
  ChcSystem c = split_dnf(a);
  plain("dnf-split", a.clauses.size(), c.clauses.size());

  auto [b, pb] = eliminate_testers_selectors(c);
  report.passes.push_back(std::move(pb));

  auto [d, pd] = eliminate_equalities(b);
  report.passes.push_back(std::move(pd));

  auto [e, pe] = encode_disequalities(d);
  report.passes.push_back(std::move(pe));

  // The pipeline contract: conjunctive bodies of positive predicate atoms.
  for (size_t i = 0; i < e.clauses.size(); ++i) {
    const Clause& cl = e.clauses[i];
    for (const Formula& f : cl.body) {
      if (f.kind != Formula::Kind::Lit)
        throw InternalError("pipeline left a non-literal body form in clause " +
                            std::to_string(i));
      const Literal& l = f.atom;
      if (l.kind == Literal::Kind::Atom && !l.positive)
        throw Error("clause " + std::to_string(i) +
                    ": negative occurrence of predicate " + l.name +
                    " is outside the supported fragment");
      if (l.kind != Literal::Kind::Atom)
        throw InternalError("pipeline left a constraint literal in clause " +
                            std::to_string(i) + ": " + literal_to_string(l));
    }
  }
  {
    auto diags = check_well_sorted(e);
    if (!diags.empty())
      throw InternalError("pipeline produced an ill-sorted system: " +
                          diags[0]);
  }
  return {std::move(e), std::move(report)};
}

// ---------------------------------------------------------------------------
// Rendering back to the input grammar

namespace {

std::string term_sexpr(const Term& t) {
  if (t.kind == Term::Kind::Var) return t.name;
  if (t.args.empty()) return t.name;
  std::string s = "(" + t.name;
  for (const auto& a : t.args) s += " " + term_sexpr(a);
  return s + ")";
}

std::string literal_sexpr(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Eq:
      return "(= " + term_sexpr(l.args[0]) + " " + term_sexpr(l.args[1]) + ")";
    case Literal::Kind::Neq:
      return "(distinct " + term_sexpr(l.args[0]) + " " +
             term_sexpr(l.args[1]) + ")";
    case Literal::Kind::Tester:
      return "((_ is " + l.name + ") " + term_sexpr(l.args[0]) + ")";
    case Literal::Kind::Atom: {
      std::string s = l.name;
      if (!l.args.empty()) {
        s = "(" + l.name;
        for (const auto& a : l.args) s += " " + term_sexpr(a);
        s += ")";
      }
      return l.positive ? s : "(not " + s + ")";
    }
  }
  throw InternalError("unhandled literal kind");
}

std::string formula_sexpr(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Lit:
      return literal_sexpr(f.atom);
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Not:
      return "(not " + formula_sexpr(f.kids[0]) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      if (f.kids.empty())
        return f.kind == Formula::Kind::And ? "true" : "false";
      std::string s = f.kind == Formula::Kind::And ? "(and" : "(or";
      for (const auto& k : f.kids) s += " " + formula_sexpr(k);
      return s + ")";
    }
  }
  throw InternalError("unhandled formula kind");
}

std::string binder_sexpr(const std::map<std::string, std::string>& vs) {
  std::string s = "(";
  bool first = true;
  for (const auto& [n, sort] : vs) {
    if (!first) s += " ";
    first = false;
    s += "(" + n + " " + sort + ")";
  }
  return s + ")";
}

}  // namespace

std::string emit_smt2(const ChcSystem& sys) {
  std::ostringstream os;
  if (!sys.sig.sorts.empty()) {
    os << "(declare-datatypes (";
    for (size_t i = 0; i < sys.sig.sorts.size(); ++i)
      os << (i ? " " : "") << "(" << sys.sig.sorts[i] << " 0)";
    os << ")\n  (";
    for (size_t i = 0; i < sys.sig.sorts.size(); ++i) {
      if (i) os << "\n   ";
      os << "(";
      bool first = true;
      for (const CtorInfo* c : sys.sig.ctors_of(sys.sig.sorts[i])) {
        if (!first) os << " ";
        first = false;
        os << "(" << c->name;
        for (size_t j = 0; j < c->arg_sorts.size(); ++j)
          os << " (" << c->selectors[j] << " " << c->arg_sorts[j] << ")";
        os << ")";
      }
      os << ")";
    }
    os << "))\n";
  }
  for (const FuncInfo& f : sys.sig.funcs) {
    os << "(declare-fun " << f.name << " (";
    for (size_t i = 0; i < f.arg_sorts.size(); ++i)
      os << (i ? " " : "") << f.arg_sorts[i];
    os << ") " << f.result_sort << ")\n";
  }
  for (const PredInfo& p : sys.sig.preds) {
    os << "(declare-fun " << p.name << " (";
    for (size_t i = 0; i < p.arg_sorts.size(); ++i)
      os << (i ? " " : "") << p.arg_sorts[i];
    os << ") Bool)\n";
  }
  for (const Clause& cl : sys.clauses) {
    std::string body;
    if (cl.body.empty()) {
      body = "";
    } else if (cl.body.size() == 1) {
      body = formula_sexpr(cl.body[0]);
    } else {
      body = "(and";
      for (const Formula& f : cl.body) body += " " + formula_sexpr(f);
      body += ")";
    }
    std::string head =
        cl.head ? literal_sexpr(*cl.head) : std::string("false");
    std::string core =
        body.empty() ? head : "(=> " + body + " " + head + ")";
    if (!cl.exvars.empty()) {
      // Query with an alternating prefix, rendered in its source shape.
      if (cl.head)
        throw InternalError(
            "cannot render a clause with existential variables and a head");
      std::string inner = body.empty() ? "true" : body;
      core = "(forall " + binder_sexpr(cl.exvars) + " " + inner + ")";
      if (!cl.vars.empty())
        core = "(exists " + binder_sexpr(cl.vars) + " " + core + ")";
      os << "(assert (not " << core << "))\n";
      continue;
    }
    if (!cl.vars.empty())
      core = "(forall " + binder_sexpr(cl.vars) + " " + core + ")";
    os << "(assert " << core << ")\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

}  // namespace horncat
