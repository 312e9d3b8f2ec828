#include "horncat/automata.hpp"

#include <algorithm>
#include <cstddef>
#include <sstream>

namespace horncat {

namespace {

constexpr unsigned long long kMaxInstances = 1ull << 22;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

bool operator==(const TreeAutomaton& a, const TreeAutomaton& b) {
  bool same_trans =
      a.transitions == b.transitions ||
      (a.transitions && b.transitions && *a.transitions == *b.transitions);
  return same_trans && a.pred == b.pred && a.arg_sorts == b.arg_sorts &&
         a.states == b.states && a.alphabet == b.alphabet &&
         a.finals == b.finals;
}

std::map<std::string, TreeAutomaton> build_automata(const FiniteModel& model,
                                                    const Signature& sig,
                                                    bool include_generated) {
  auto trans = std::make_shared<TransitionMap>();
  std::map<std::string, std::pair<std::vector<std::string>, std::string>>
      alphabet;

  for (const auto& c : sig.ctors) {
    alphabet[c.name] = {c.arg_sorts, c.result_sort};
    std::vector<int> sizes;
    for (const auto& s : c.arg_sorts) {
      auto d = model.domains.find(s);
      if (d == model.domains.end())
        throw Error("model does not define sort " + s);
      sizes.push_back(d->second);
    }
    auto rd = model.domains.find(c.result_sort);
    if (rd == model.domains.end())
      throw Error("model does not define sort " + c.result_sort);
    auto ft = model.funcs.find(c.name);
    if (ft == model.funcs.end())
      throw Error("model does not define function " + c.name);

    std::vector<int> tup(c.arg_sorts.size(), 0);
    while (true) {
      auto e = ft->second.find(tup);
      if (e == ft->second.end())
        throw Error("model table for " + c.name + " is missing an entry");
      if (e->second < 0 || e->second >= rd->second)
        throw Error("model table for " + c.name +
                    " has an out-of-range result");
      (*trans)[{c.name, tup}] = e->second;
      int i = static_cast<int>(tup.size()) - 1;
      while (i >= 0 && tup[i] + 1 == sizes[i]) tup[i--] = 0;
      if (i < 0) break;
      ++tup[i];
    }
  }

  std::map<std::string, TreeAutomaton> out;
  for (const auto& p : sig.preds) {
    if (p.generated && !include_generated) continue;
    TreeAutomaton a;
    a.pred = p.name;
    a.arg_sorts = p.arg_sorts;
    a.states = model.domains;
    a.alphabet = alphabet;
    a.transitions = trans;
    auto pt = model.preds.find(p.name);
    if (pt != model.preds.end()) a.finals = pt->second;
    out[p.name] = std::move(a);
  }
  return out;
}

namespace {

// Bottom-up state of one ground constructor term; -1 when evaluation gets
// stuck on a missing transition.
int state_of(const TreeAutomaton& a, const Term& t) {
  if (t.kind != Term::Kind::App)
    throw Error("accepts requires ground constructor terms, got " +
                term_to_string(t));
  auto it = a.alphabet.find(t.name);
  if (it == a.alphabet.end())
    throw Error("accepts: unknown constructor " + t.name);
  if (it->second.first.size() != t.args.size())
    throw Error("accepts: arity mismatch for constructor " + t.name);
  std::vector<int> st;
  for (const auto& arg : t.args) {
    int s = state_of(a, arg);
    if (s < 0) return -1;
    st.push_back(s);
  }
  auto tr = a.transitions->find({t.name, st});
  return tr == a.transitions->end() ? -1 : tr->second;
}

}  // namespace

bool accepts(const TreeAutomaton& a, const std::vector<Term>& tuple) {
  if (!a.transitions) throw Error("automaton has no transition table");
  if (tuple.size() != a.arg_sorts.size())
    throw Error("accepts: tuple arity " + std::to_string(tuple.size()) +
                ", expected " + std::to_string(a.arg_sorts.size()));
  std::vector<int> st;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    const Term& t = tuple[i];
    if (t.kind != Term::Kind::App)
      throw Error("accepts requires ground constructor terms, got " +
                  term_to_string(t));
    auto it = a.alphabet.find(t.name);
    if (it == a.alphabet.end())
      throw Error("accepts: unknown constructor " + t.name);
    if (it->second.second != a.arg_sorts[i])
      throw Error("accepts: sort mismatch at position " + std::to_string(i) +
                  ": got " + it->second.second + ", expected " +
                  a.arg_sorts[i]);
    int s = state_of(a, t);
    if (s < 0) return false;
    st.push_back(s);
  }
  return a.finals.count(st) > 0;
}

std::vector<std::vector<Term>> enumerate_accepted(const Signature& sig,
                                                  const TreeAutomaton& a,
                                                  int max_height) {
  std::vector<std::vector<Term>> pools;
  for (const auto& s : a.arg_sorts)
    pools.push_back(enumerate_ground_terms(sig, s, max_height));
  std::vector<std::vector<Term>> out;
  if (pools.empty()) {
    if (accepts(a, {})) out.push_back({});
    return out;
  }
  for (const auto& p : pools)
    if (p.empty()) return out;

  std::vector<std::size_t> idx(pools.size(), 0);
  while (true) {
    std::vector<Term> tuple;
    for (std::size_t i = 0; i < pools.size(); ++i)
      tuple.push_back(pools[i][idx[i]]);
    if (accepts(a, tuple)) out.push_back(std::move(tuple));
    int i = static_cast<int>(pools.size()) - 1;
    while (i >= 0 && idx[i] + 1 == pools[i].size()) idx[i--] = 0;
    if (i < 0) break;
    ++idx[i];
  }
  return out;
}

Theorem1Report theorem1_check(
    const FiniteModel& model,
    const std::map<std::string, TreeAutomaton>& automata, const Signature& sig,
    int max_height, std::size_t tuple_cap) {
  Theorem1Report rep;

  // Term value through the model tables; deliberately does not touch the
  // transition map.
  auto eval_m = [&](auto&& self, const Term& t) -> int {
    if (t.kind != Term::Kind::App)
      throw Error("theorem1_check: not a ground constructor term: " +
                  term_to_string(t));
    auto ft = model.funcs.find(t.name);
    if (ft == model.funcs.end())
      throw Error("theorem1_check: model does not define " + t.name);
    std::vector<int> vals;
    for (const auto& a : t.args) vals.push_back(self(self, a));
    auto e = ft->second.find(vals);
    if (e == ft->second.end())
      throw Error("theorem1_check: model table for " + t.name +
                  " is missing an entry");
    return e->second;
  };

  for (const auto& [name, aut] : automata) {
    int h = max_height < 1 ? 1 : max_height;
    auto tuples_at = [&](int hh) -> unsigned long long {
      unsigned long long prod = 1;
      for (const auto& s : aut.arg_sorts) {
        long long c = count_ground_terms(sig, s, hh);
        if (c <= 0) return 0;
        auto uc = static_cast<unsigned long long>(c);
        if (prod > (tuple_cap + 1) / uc) return tuple_cap + 1;
        prod *= uc;
      }
      return prod;
    };
    while (h > 1 && tuples_at(h) > tuple_cap) --h;
    rep.effective_height[name] = h;

    auto table = model.preds.find(name);
    if (aut.arg_sorts.empty()) {
      bool in_model = table != model.preds.end() && table->second.count({});
      if (accepts(aut, {}) != in_model) {
        rep.mismatch = {name, {}};
        return rep;
      }
      continue;
    }
    std::vector<std::vector<Term>> pools;
    bool empty = false;
    for (const auto& s : aut.arg_sorts) {
      pools.push_back(enumerate_ground_terms(sig, s, h));
      if (pools.back().empty()) empty = true;
    }
    if (empty) continue;
    std::vector<std::size_t> idx(pools.size(), 0);
    while (true) {
      std::vector<Term> tuple;
      std::vector<int> vals;
      for (std::size_t i = 0; i < pools.size(); ++i) {
        tuple.push_back(pools[i][idx[i]]);
        vals.push_back(eval_m(eval_m, tuple.back()));
      }
      bool in_model = table != model.preds.end() && table->second.count(vals);
      if (accepts(aut, tuple) != in_model) {
        rep.mismatch = {name, tuple};
        return rep;
      }
      int i = static_cast<int>(pools.size()) - 1;
      while (i >= 0 && idx[i] + 1 == pools[i].size()) idx[i--] = 0;
      if (i < 0) break;
      ++idx[i];
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Herbrand check

namespace {

enum class TV { False, True, Undef };

TV tv_of(bool b) { return b ? TV::True : TV::False; }

TV tv_not(TV v) {
  if (v == TV::Undef) return TV::Undef;
  return v == TV::True ? TV::False : TV::True;
}

// Reduce a ground term: selectors select (a wrong-root argument makes the
// result undefined). Skolem witness applications stay in place; they are
// ground terms of the extended term language and only turn into states
// later, through the model tables.
std::optional<Term> reduce_ground(const Signature& sig, const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var:
      throw Error("herbrand check: unbound variable " + t.name);
    case Term::Kind::Sel: {
      auto arg = reduce_ground(sig, t.args[0]);
      if (!arg) return std::nullopt;
      auto info = sig.selector(t.name);
      if (!info) throw Error("herbrand check: unknown selector " + t.name);
      if (arg->name != info->ctor) return std::nullopt;
      return arg->args[static_cast<std::size_t>(info->index)];
    }
    case Term::Kind::App: {
      std::vector<Term> args;
      for (const auto& a : t.args) {
        auto r = reduce_ground(sig, a);
        if (!r) return std::nullopt;
        args.push_back(std::move(*r));
      }
      return Term::app(t.name, std::move(args));
    }
  }
  throw Error("herbrand check: unreachable term kind");
}

// State of a reduced ground term: constructors through the transition
// table, witness functions through the model tables. -1 when stuck.
int mixed_state(const TreeAutomaton& a, const FiniteModel* model,
                const Term& t) {
  if (t.kind != Term::Kind::App)
    throw Error("herbrand check: not a ground term: " + term_to_string(t));
  std::vector<int> st;
  for (const auto& arg : t.args) {
    int s = mixed_state(a, model, arg);
    if (s < 0) return -1;
    st.push_back(s);
  }
  if (a.alphabet.count(t.name)) {
    auto tr = a.transitions->find({t.name, st});
    return tr == a.transitions->end() ? -1 : tr->second;
  }
  if (!model)
    throw Error("herbrand check: cannot evaluate " + t.name +
                " without the model's function tables");
  auto ft = model->funcs.find(t.name);
  if (ft == model->funcs.end())
    throw Error("herbrand check: model does not define function " + t.name);
  auto e = ft->second.find(st);
  if (e == ft->second.end())
    throw Error("herbrand check: model table for " + t.name +
                " is missing an entry");
  return e->second;
}

TV eval_literal(const Signature& sig,
                const std::map<std::string, TreeAutomaton>& automata,
                const FiniteModel* model, const Literal& l) {
  TV raw = TV::Undef;
  switch (l.kind) {
    case Literal::Kind::Eq:
    case Literal::Kind::Neq: {
      auto a = reduce_ground(sig, l.args[0]);
      auto b = reduce_ground(sig, l.args[1]);
      if (!a || !b) return TV::Undef;
      bool eq = *a == *b;
      raw = tv_of(l.kind == Literal::Kind::Eq ? eq : !eq);
      break;
    }
    case Literal::Kind::Tester: {
      auto a = reduce_ground(sig, l.args[0]);
      if (!a) return TV::Undef;
      raw = tv_of(a->name == l.name);
      break;
    }
    case Literal::Kind::Atom: {
      const TreeAutomaton& aut = automata.at(l.name);
      std::vector<int> st;
      bool stuck = false;
      for (const auto& arg : l.args) {
        auto r = reduce_ground(sig, arg);
        if (!r) return TV::Undef;
        int s = mixed_state(aut, model, *r);
        if (s < 0) {
          stuck = true;
          break;
        }
        st.push_back(s);
      }
      raw = tv_of(!stuck && aut.finals.count(st) > 0);
      break;
    }
  }
  return l.positive ? raw : tv_not(raw);
}

TV eval_formula(const Signature& sig,
                const std::map<std::string, TreeAutomaton>& automata,
                const FiniteModel* model, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
      return TV::True;
    case Formula::Kind::False:
      return TV::False;
    case Formula::Kind::Lit:
      return eval_literal(sig, automata, model, f.atom);
    case Formula::Kind::Not:
      return tv_not(eval_formula(sig, automata, model, f.kids[0]));
    case Formula::Kind::And: {
      TV acc = TV::True;
      for (const auto& k : f.kids) {
        TV v = eval_formula(sig, automata, model, k);
        if (v == TV::False) return TV::False;
        if (v == TV::Undef) acc = TV::Undef;
      }
      return acc;
    }
    case Formula::Kind::Or: {
      TV acc = TV::False;
      for (const auto& k : f.kids) {
        TV v = eval_formula(sig, automata, model, k);
        if (v == TV::True) return TV::True;
        if (v == TV::Undef) acc = TV::Undef;
      }
      return acc;
    }
  }
  throw Error("herbrand check: unreachable formula kind");
}

enum class InstanceStatus { Holds, Violated, Vacuous };

InstanceStatus instance_status(
    const Signature& sig, const std::map<std::string, TreeAutomaton>& automata,
    const FiniteModel* model, const Clause& c, const Substitution& asg) {
  TV body = TV::True;
  for (const auto& f : c.body) {
    TV v = eval_formula(sig, automata, model, apply_subst(f, asg));
    if (v == TV::False) return InstanceStatus::Holds;
    if (v == TV::Undef) body = TV::Undef;
  }
  if (body == TV::Undef) return InstanceStatus::Vacuous;
  if (!c.head) return InstanceStatus::Violated;
  TV h = eval_literal(sig, automata, model, apply_subst(*c.head, asg));
  if (h == TV::Undef) return InstanceStatus::Vacuous;
  return h == TV::True ? InstanceStatus::Holds : InstanceStatus::Violated;
}

}  // namespace

bool HerbrandCheckReport::all_ok() const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [](const ClauseResult& r) { return r.ok; });
}

HerbrandCheckReport check_herbrand_model(
    const ChcSystem& original,
    const std::map<std::string, TreeAutomaton>& automata, int max_height,
    const FiniteModel* model) {
  const Signature& sig = original.sig;
  HerbrandCheckReport rep;
  rep.height = max_height;

  for (std::size_t ci = 0; ci < original.clauses.size(); ++ci) {
    const Clause& c = original.clauses[ci];
    auto check_atoms = [&](const Literal& l) {
      if (l.kind == Literal::Kind::Atom && !automata.count(l.name))
        throw Error("missing automaton for predicate " + l.name);
    };
    auto walk = [&](auto&& self, const Formula& f) -> void {
      if (f.kind == Formula::Kind::Lit) check_atoms(f.atom);
      for (const auto& k : f.kids) self(self, k);
    };
    for (const auto& f : c.body) walk(walk, f);
    if (c.head) check_atoms(*c.head);
  }

  std::map<std::string, std::vector<Term>> pool_cache;
  auto pool_for = [&](const std::string& sort) -> const std::vector<Term>& {
    auto it = pool_cache.find(sort);
    if (it == pool_cache.end())
      it = pool_cache
               .emplace(sort, enumerate_ground_terms(sig, sort, max_height))
               .first;
    return it->second;
  };

  for (std::size_t ci = 0; ci < original.clauses.size(); ++ci) {
    const Clause& c = original.clauses[ci];
    HerbrandCheckReport::ClauseResult res;

    std::vector<std::string> var_names;
    std::vector<const std::vector<Term>*> var_pools;
    unsigned long long outer = 1;
    for (const auto& [v, sort] : c.vars) {
      var_names.push_back(v);
      var_pools.push_back(&pool_for(sort));
      if (var_pools.back()->empty())
        throw Error("no ground terms of sort " + sort + " at height " +
                    std::to_string(max_height));
      outer *= var_pools.back()->size();
      if (outer > kMaxInstances)
        throw Error("clause " + std::to_string(ci) +
                    " has too many ground instances at height " +
                    std::to_string(max_height));
    }

    // Existential variables get witness slots ranging over ground terms at
    // the same height bound.
    std::vector<std::string> ex_names;
    std::vector<const std::vector<Term>*> ex_pools;
    unsigned long long inner = 1;
    for (const auto& [v, sort] : c.exvars) {
      ex_names.push_back(v);
      ex_pools.push_back(&pool_for(sort));
      if (ex_pools.back()->empty())
        throw Error("no ground terms of sort " + sort + " at height " +
                    std::to_string(max_height));
      inner *= ex_pools.back()->size();
      if (inner > kMaxInstances)
        throw Error("clause " + std::to_string(ci) +
                    " has too many witness candidates at height " +
                    std::to_string(max_height));
    }

    std::vector<std::size_t> idx(var_names.size(), 0);
    while (true) {
      Substitution asg;
      for (std::size_t i = 0; i < var_names.size(); ++i)
        asg[var_names[i]] = (*var_pools[i])[idx[i]];

      bool satisfied = false;
      std::vector<std::size_t> widx(ex_names.size(), 0);
      while (true) {
        Substitution full = asg;
        for (std::size_t i = 0; i < ex_names.size(); ++i)
          full[ex_names[i]] = (*ex_pools[i])[widx[i]];
        if (instance_status(sig, automata, model, c, full) !=
            InstanceStatus::Violated) {
          satisfied = true;
          break;
        }
        int i = static_cast<int>(widx.size()) - 1;
        while (i >= 0 && widx[static_cast<std::size_t>(i)] + 1 ==
                             ex_pools[static_cast<std::size_t>(i)]->size())
          widx[i--] = 0;
        if (i < 0) break;
        ++widx[static_cast<std::size_t>(i)];
      }
      if (!satisfied) {
        res.ok = false;
        for (const auto& [v, t] : asg) res.failing[v] = t;
        break;
      }

      int i = static_cast<int>(idx.size()) - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] + 1 ==
                           var_pools[static_cast<std::size_t>(i)]->size())
        idx[i--] = 0;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
    }

    rep.clauses.push_back(std::move(res));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string state_name(const TreeAutomaton& a, const std::string& sort,
                       int idx) {
  if (a.states.size() > 1) return sort + "_s" + std::to_string(idx);
  return "s" + std::to_string(idx);
}

struct AutomatonCursor {
  const std::string& s;
  std::size_t i = 0;
  int lineno = 1;

  explicit AutomatonCursor(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("automaton line " + std::to_string(lineno) + ": " + msg);
  }
  bool at_end() const { return i >= s.size(); }
  char peek() const { return s[i]; }
  void skip_ws() {
    while (!at_end()) {
      char ch = s[i];
      if (ch == '#') {
        while (!at_end() && s[i] != '\n') ++i;
      } else if (ch == '\n') {
        return;  // line boundaries are significant
      } else if (ch == ' ' || ch == '\t' || ch == '\r') {
        ++i;
      } else {
        return;
      }
    }
  }
  bool eat_newline() {
    skip_ws();
    if (!at_end() && s[i] == '\n') {
      ++i;
      ++lineno;
      return true;
    }
    return at_end();
  }
  bool line_done() {
    skip_ws();
    return at_end() || s[i] == '\n';
  }
  bool eat(char ch) {
    skip_ws();
    if (!at_end() && s[i] == ch) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char ch) {
    if (!eat(ch)) fail(std::string("expected '") + ch + "'");
  }
  std::string word() {
    skip_ws();
    std::size_t start = i;
    while (!at_end()) {
      char ch = s[i];
      if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '(' ||
          ch == ')' || ch == ',' || ch == ':' || ch == '#')
        break;
      ++i;
    }
    if (i == start) fail("expected a name");
    return s.substr(start, i - start);
  }
};

// "Nat_s3" -> {Nat, 3}; "s3" -> {"", 3}.
std::pair<std::string, int> split_state_token(AutomatonCursor& cur,
                                              const std::string& tok) {
  auto digits_from = [&](std::size_t pos) -> int {
    if (pos >= tok.size()) return -1;
    int v = 0;
    for (std::size_t j = pos; j < tok.size(); ++j) {
      if (tok[j] < '0' || tok[j] > '9') return -1;
      v = v * 10 + (tok[j] - '0');
    }
    return v;
  };
  auto us = tok.rfind("_s");
  if (us != std::string::npos && us > 0) {
    int v = digits_from(us + 2);
    if (v >= 0) return {tok.substr(0, us), v};
  }
  if (!tok.empty() && tok[0] == 's') {
    int v = digits_from(1);
    if (v >= 0) return {"", v};
  }
  cur.fail("bad state name '" + tok + "'");
}

}  // namespace

std::string serialize_automaton(const TreeAutomaton& a) {
  if (!a.transitions) throw Error("automaton has no transition table");
  std::ostringstream out;
  out << "automaton " << a.pred << " : " << join(a.arg_sorts, " x ") << "\n";
  for (const auto& [key, res] : *a.transitions) {
    const auto& [ctor, args] = key;
    auto sig_it = a.alphabet.find(ctor);
    if (sig_it == a.alphabet.end())
      throw Error("automaton transition uses unknown constructor " + ctor);
    const auto& arg_sorts = sig_it->second.first;
    if (arg_sorts.size() != args.size())
      throw Error("automaton transition arity mismatch for " + ctor);
    out << ctor;
    if (!args.empty()) {
      out << "(";
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out << ",";
        out << state_name(a, arg_sorts[i], args[i]);
      }
      out << ")";
    }
    out << " -> " << state_name(a, sig_it->second.second, res) << "\n";
  }
  out << "final:";
  bool first = true;
  for (const auto& tup : a.finals) {
    out << (first ? " " : ", ") << "(";
    first = false;
    for (std::size_t i = 0; i < tup.size(); ++i) {
      if (i) out << ",";
      out << state_name(a, a.arg_sorts[i], tup[i]);
    }
    out << ")";
  }
  out << "\n";
  return out.str();
}

TreeAutomaton parse_automaton(const std::string& text) {
  AutomatonCursor cur(text);
  TreeAutomaton a;
  auto trans = std::make_shared<TransitionMap>();

  // header
  while (cur.line_done()) {
    if (cur.at_end()) cur.fail("expected 'automaton' header");
    cur.eat_newline();
  }
  if (cur.word() != "automaton") cur.fail("expected 'automaton' header");
  a.pred = cur.word();
  cur.expect(':');
  while (!cur.line_done()) {
    a.arg_sorts.push_back(cur.word());
    if (cur.line_done()) break;
    std::string sep = cur.word();
    if (sep != "x") cur.fail("expected 'x' between sorts, got '" + sep + "'");
  }
  if (!cur.eat_newline()) cur.fail("trailing text after header");

  std::optional<std::string> unique_sort;
  if (!a.arg_sorts.empty() &&
      std::all_of(a.arg_sorts.begin(), a.arg_sorts.end(),
                  [&](const std::string& s) { return s == a.arg_sorts[0]; }))
    unique_sort = a.arg_sorts[0];

  auto note_state = [&](const std::string& sort, int idx) {
    auto it = a.states.find(sort);
    if (it == a.states.end())
      a.states[sort] = idx + 1;
    else
      it->second = std::max(it->second, idx + 1);
  };
  auto resolve = [&](const std::pair<std::string, int>& st) -> std::string {
    if (!st.first.empty()) return st.first;
    if (!unique_sort)
      cur.fail("state 's" + std::to_string(st.second) +
               "' needs a sort prefix");
    return *unique_sort;
  };

  bool saw_final = false;
  while (!cur.at_end()) {
    if (cur.line_done()) {
      cur.eat_newline();
      continue;
    }
    std::string head = cur.word();
    if (head == "final") {
      cur.expect(':');
      saw_final = true;
      bool expect_tuple = !cur.line_done();
      while (expect_tuple) {
        cur.expect('(');
        std::vector<int> tup;
        std::vector<std::string> tup_sorts;
        if (!cur.eat(')')) {
          while (true) {
            auto st = split_state_token(cur, cur.word());
            tup_sorts.push_back(st.first);
            tup.push_back(st.second);
            if (cur.eat(')')) break;
            cur.expect(',');
          }
        }
        if (tup.size() != a.arg_sorts.size())
          cur.fail("final tuple arity " + std::to_string(tup.size()) +
                   ", expected " + std::to_string(a.arg_sorts.size()));
        for (std::size_t i = 0; i < tup.size(); ++i) {
          if (!tup_sorts[i].empty() && tup_sorts[i] != a.arg_sorts[i])
            cur.fail("final tuple component " + std::to_string(i) +
                     " has sort " + tup_sorts[i] + ", expected " +
                     a.arg_sorts[i]);
          note_state(a.arg_sorts[i], tup[i]);
        }
        a.finals.insert(std::move(tup));
        expect_tuple = cur.eat(',');
      }
      if (!cur.eat_newline()) cur.fail("trailing text after final tuples");
      continue;
    }

    // transition line
    std::vector<std::pair<std::string, int>> args;
    if (cur.eat('(')) {
      if (!cur.eat(')')) {
        while (true) {
          args.push_back(split_state_token(cur, cur.word()));
          if (cur.eat(')')) break;
          cur.expect(',');
        }
      }
    }
    cur.expect('-');
    cur.expect('>');
    auto res = split_state_token(cur, cur.word());
    if (!cur.eat_newline()) cur.fail("trailing text after transition");

    std::vector<std::string> arg_sorts;
    std::vector<int> arg_states;
    for (const auto& st : args) {
      arg_sorts.push_back(resolve(st));
      arg_states.push_back(st.second);
      note_state(arg_sorts.back(), st.second);
    }
    std::string res_sort = resolve(res);
    note_state(res_sort, res.second);

    auto al = a.alphabet.find(head);
    if (al == a.alphabet.end()) {
      a.alphabet[head] = {arg_sorts, res_sort};
    } else if (al->second.first != arg_sorts || al->second.second != res_sort) {
      cur.fail("constructor " + head + " redeclared with a different shape");
    }
    auto key = std::make_pair(head, arg_states);
    if (trans->count(key))
      cur.fail("duplicate transition for " + head +
               ": the automaton must stay deterministic");
    (*trans)[key] = res.second;
  }

  if (!saw_final) throw Error("automaton text has no 'final:' line");
  a.transitions = std::move(trans);
  return a;
}

}  // namespace horncat
