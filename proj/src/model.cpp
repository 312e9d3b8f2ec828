#include "horncat/model.hpp"

#include <algorithm>
#include <sstream>

namespace horncat {

int total_cardinality(const CardinalityVector& card) {
  int t = 0;
  for (const auto& [s, k] : card) t += k;
  return t;
}

std::vector<CardinalityVector> cardinality_schedule(const Signature& sig,
                                                    const SearchBudget& budget) {
  std::vector<CardinalityVector> out;
  const int n = static_cast<int>(sig.sorts.size());
  if (n == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> cur(n, 1);
  auto rec = [&](auto&& self, int i, int remaining) -> void {
    if (i == n - 1) {
      cur[i] = remaining;
      CardinalityVector v;
      for (int j = 0; j < n; ++j) v[sig.sorts[j]] = cur[j];
      out.push_back(std::move(v));
      return;
    }
    for (int k = 1; k <= remaining - (n - 1 - i); ++k) {
      cur[i] = k;
      self(self, i + 1, remaining - k);
    }
  };
  for (int total = n; total <= budget.max_total; ++total) rec(rec, 0, total);
  return out;
}

// ---------------------------------------------------------------------------
// Model search

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct SymTable {
  std::string name;
  std::vector<int> arg_sizes;
  int result_size = 0;
  int base = 0;        // offset of this symbol's cells
  int cell_count = 0;  // product of arg_sizes
};

struct CompiledNode {
  int var = -1;  // index into the clause's variable list, or
  int sym = -1;  // index into syms
  std::vector<int> kids;
};

struct CompiledAtom {
  int pred = -1;
  std::vector<int> args;  // node ids
};

struct CompiledClause {
  std::vector<CompiledNode> nodes;
  std::vector<CompiledAtom> body;
  std::optional<CompiledAtom> head;
  std::vector<std::vector<int>> instances;  // every variable assignment
};

struct Searcher {
  std::vector<SymTable> syms;
  std::vector<CompiledClause> clauses;
  size_t pred_count = 0;

  std::vector<int> cells;                      // -1 = unassigned
  std::vector<std::vector<int>> value_order;   // per cell
  std::vector<size_t> assign_order;            // fewest candidates first
  std::vector<std::set<std::vector<int>>> facts;  // per pred, scratch
  uint64_t nodes = 0;
  std::chrono::steady_clock::time_point deadline{};
  bool has_deadline = false;
  bool timed_out = false;

  int eval(const CompiledClause& cc, int node, const std::vector<int>& asg) {
    const CompiledNode& nd = cc.nodes[node];
    if (nd.var >= 0) return asg[nd.var];
    const SymTable& st = syms[nd.sym];
    int idx = 0;
    for (size_t i = 0; i < nd.kids.size(); ++i) {
      int v = eval(cc, nd.kids[i], asg);
      if (v < 0) return -1;
      idx = idx * st.arg_sizes[i] + v;
    }
    return cells[st.base + idx];
  }

  bool eval_tuple(const CompiledClause& cc, const CompiledAtom& at,
                  const std::vector<int>& asg, std::vector<int>& out) {
    out.clear();
    for (int n : at.args) {
      int v = eval(cc, n, asg);
      if (v < 0) return false;
      out.push_back(v);
    }
    return true;
  }

  // Least predicate interpretation over the instances evaluable under the
  // current (possibly partial) tables, then the queries. True = violated.
  bool closure_conflict() {
    for (auto& f : facts) f.clear();
    std::vector<int> tup;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const CompiledClause& cc : clauses) {
        if (!cc.head) continue;
        for (const auto& asg : cc.instances) {
          bool fire = true;
          for (const auto& at : cc.body)
            if (!eval_tuple(cc, at, asg, tup) || !facts[at.pred].count(tup)) {
              fire = false;
              break;
            }
          if (!fire) continue;
          if (!eval_tuple(cc, *cc.head, asg, tup)) continue;
          if (facts[cc.head->pred].insert(tup).second) grew = true;
        }
      }
    }
    for (const CompiledClause& cc : clauses) {
      if (cc.head) continue;
      for (const auto& asg : cc.instances) {
        bool sat = true;
        for (const auto& at : cc.body)
          if (!eval_tuple(cc, at, asg, tup) || !facts[at.pred].count(tup)) {
            sat = false;
            break;
          }
        if (sat) return true;
      }
    }
    return false;
  }

  bool search(size_t depth) {
    if (depth == cells.size()) return !closure_conflict();
    size_t cell = assign_order[depth];
    for (int v : value_order[cell]) {
      ++nodes;
      if (has_deadline && (nodes & 0xFF) == 0 &&
          std::chrono::steady_clock::now() > deadline) {
        timed_out = true;
      }
      if (timed_out) break;
      cells[cell] = v;
      if (!closure_conflict() && search(cell + 1)) return true;
      if (timed_out) break;
    }
    cells[cell] = -1;
    return false;
  }
};

constexpr uint64_t kMaxInstances = 1ull << 22;

}  // namespace

SearchResult find_model(const ChcSystem& sys, const CardinalityVector& card,
                        const SearchBudget& budget) {
  for (const auto& s : sys.sig.sorts) {
    auto it = card.find(s);
    if (it == card.end() || it->second < 1)
      throw Error("cardinality vector must assign a positive size to sort " +
                  s);
  }

  Searcher S;

  std::map<std::string, int> sym_index;
  auto add_sym = [&](const std::string& name,
                     const std::vector<std::string>& arg_sorts,
                     const std::string& result_sort) {
    SymTable st;
    st.name = name;
    st.result_size = card.at(result_sort);
    st.cell_count = 1;
    for (const auto& a : arg_sorts) {
      st.arg_sizes.push_back(card.at(a));
      st.cell_count *= card.at(a);
    }
    st.base = static_cast<int>(S.cells.size());
    S.cells.resize(S.cells.size() + st.cell_count, -1);
    sym_index[name] = static_cast<int>(S.syms.size());
    S.syms.push_back(std::move(st));
  };
  for (const CtorInfo& c : sys.sig.ctors) add_sym(c.name, c.arg_sorts, c.result_sort);
  for (const FuncInfo& f : sys.sig.funcs) add_sym(f.name, f.arg_sorts, f.result_sort);

  std::map<std::string, int> pred_index;
  for (const PredInfo& p : sys.sig.preds)
    pred_index[p.name] = static_cast<int>(pred_index.size());
  S.pred_count = pred_index.size();
  S.facts.resize(S.pred_count);

  // Compile clauses to variable-indexed term dags and ground every one.
  for (size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    const Clause& cl = sys.clauses[ci];
    if (!cl.exvars.empty())
      throw Error("find_model requires a Skolemized system (clause " +
                  std::to_string(ci) + " has existential variables)");
    CompiledClause cc;
    std::map<std::string, int> var_ids;
    std::vector<int> var_sizes;
    for (const auto& [v, sort] : cl.vars) {
      var_ids[v] = static_cast<int>(var_ids.size());
      var_sizes.push_back(card.at(sort));
    }
    auto compile_term = [&](auto&& self, const Term& t) -> int {
      CompiledNode nd;
      if (t.kind == Term::Kind::Var) {
        nd.var = var_ids.at(t.name);
      } else if (t.kind == Term::Kind::App) {
        auto it = sym_index.find(t.name);
        if (it == sym_index.end())
          throw Error("find_model requires a preprocessed system; unknown "
                      "function symbol " + t.name);
        nd.sym = it->second;
        for (const auto& a : t.args) nd.kids.push_back(self(self, a));
      } else {
        throw Error("find_model requires a preprocessed system; clause " +
                    std::to_string(ci) + " contains a selector application");
      }
      cc.nodes.push_back(std::move(nd));
      return static_cast<int>(cc.nodes.size() - 1);
    };
    auto compile_atom = [&](const Literal& l) {
      CompiledAtom at;
      at.pred = pred_index.at(l.name);
      for (const auto& a : l.args) at.args.push_back(compile_term(compile_term, a));
      return at;
    };
    for (const Formula& f : cl.body) {
      if (f.kind != Formula::Kind::Lit || f.atom.kind != Literal::Kind::Atom ||
          !f.atom.positive)
        throw Error(
            "find_model requires a preprocessed system (clause " +
            std::to_string(ci) +
            " has a body constraint that is not a positive predicate atom)");
      cc.body.push_back(compile_atom(f.atom));
    }
    if (cl.head) cc.head = compile_atom(*cl.head);

    uint64_t count = 1;
    for (int s : var_sizes) {
      count *= static_cast<uint64_t>(s);
      if (count > kMaxInstances)
        throw Error("clause " + std::to_string(ci) +
                    " has too many ground instances at this cardinality");
    }
    std::vector<int> asg(var_sizes.size(), 0);
    for (uint64_t k = 0; k < count; ++k) {
      cc.instances.push_back(asg);
      for (size_t i = asg.size(); i-- > 0;) {
        if (++asg[i] < var_sizes[i]) break;
        asg[i] = 0;
      }
    }
    S.clauses.push_back(std::move(cc));
  }

  // Value order per cell: 0-first, optionally seed-permuted; with symmetry
  // breaking the first nullary constructor of each sort is pinned to 0
  // (relabeling any model of the sort maps it to one satisfying this).
  std::set<int> pinned;
  if (budget.symmetry) {
    std::set<std::string> seen;
    for (size_t i = 0; i < sys.sig.ctors.size(); ++i) {
      const CtorInfo& c = sys.sig.ctors[i];
      if (!c.arg_sorts.empty() || seen.count(c.result_sort)) continue;
      seen.insert(c.result_sort);
      pinned.insert(S.syms[sym_index.at(c.name)].base);
    }
  }
  S.value_order.resize(S.cells.size());
  for (const SymTable& st : S.syms) {
    for (int k = 0; k < st.cell_count; ++k) {
      int cell = st.base + k;
      std::vector<int>& order = S.value_order[cell];
      if (pinned.count(cell)) {
        order = {0};
        continue;
      }
      order.resize(st.result_size);
      for (int v = 0; v < st.result_size; ++v) order[v] = v;
      if (budget.seed != 0) {
        uint64_t h = splitmix64(budget.seed ^ (0x632be59bd9b4e019ULL *
                                               (uint64_t)(cell + 1)));
        for (int i = st.result_size - 1; i > 0; --i) {
          h = splitmix64(h);
          std::swap(order[i], order[h % (uint64_t)(i + 1)]);
        }
      }
    }
  }

  if (budget.time_limit.count() > 0) {
    S.has_deadline = true;
    S.deadline = std::chrono::steady_clock::now() + budget.time_limit;
  }

  SearchResult res;
  bool found = S.search(0);
  res.nodes = S.nodes;
  if (S.timed_out) {
    res.status = SearchStatus::TimedOut;
    return res;
  }
  if (!found) {
    res.status = SearchStatus::NoModelAtThisSize;
    return res;
  }

  // The last closure computed is the leaf's least model.
  FiniteModel m;
  for (const auto& s : sys.sig.sorts) m.domains[s] = card.at(s);
  for (const SymTable& st : S.syms) {
    auto& table = m.funcs[st.name];
    for (int k = 0; k < st.cell_count; ++k) {
      std::vector<int> tup(st.arg_sizes.size());
      int rest = k;
      for (size_t i = st.arg_sizes.size(); i-- > 0;) {
        tup[i] = rest % st.arg_sizes[i];
        rest /= st.arg_sizes[i];
      }
      table[tup] = S.cells[st.base + k];
    }
  }
  for (const PredInfo& p : sys.sig.preds)
    m.preds[p.name] = S.facts[pred_index.at(p.name)];
  res.status = SearchStatus::Model;
  res.model = std::move(m);
  return res;
}

// ---------------------------------------------------------------------------
// Independent verification (no shared machinery with the search above)

namespace {

int eval_elem(const FiniteModel& m, const Term& t,
              const std::map<std::string, int>& asg) {
  if (t.kind == Term::Kind::Var) {
    auto it = asg.find(t.name);
    if (it == asg.end())
      throw InternalError("unbound variable in model check: " + t.name);
    return it->second;
  }
  if (t.kind == Term::Kind::Sel)
    throw Error("cannot evaluate a selector application against a finite "
                "model; eliminate selectors first");
  std::vector<int> args;
  for (const auto& a : t.args) args.push_back(eval_elem(m, a, asg));
  auto ft = m.funcs.find(t.name);
  if (ft == m.funcs.end())
    throw Error("model does not define function " + t.name);
  auto e = ft->second.find(args);
  if (e == ft->second.end())
    throw Error("model table for " + t.name + " is missing an entry");
  return e->second;
}

bool eval_elem_literal(const FiniteModel& m, const Literal& l,
                       const std::map<std::string, int>& asg) {
  switch (l.kind) {
    case Literal::Kind::Eq:
      return eval_elem(m, l.args[0], asg) == eval_elem(m, l.args[1], asg);
    case Literal::Kind::Neq:
      return eval_elem(m, l.args[0], asg) != eval_elem(m, l.args[1], asg);
    case Literal::Kind::Tester:
      throw Error("cannot evaluate a tester against a finite model; "
                  "eliminate testers first");
    case Literal::Kind::Atom: {
      std::vector<int> args;
      for (const auto& a : l.args) args.push_back(eval_elem(m, a, asg));
      auto it = m.preds.find(l.name);
      bool in = it != m.preds.end() && it->second.count(args) > 0;
      return in == l.positive;
    }
  }
  throw InternalError("unhandled literal kind");
}

bool eval_elem_formula(const FiniteModel& m, const Formula& f,
                       const std::map<std::string, int>& asg) {
  switch (f.kind) {
    case Formula::Kind::Lit:
      return eval_elem_literal(m, f.atom, asg);
    case Formula::Kind::True:
      return true;
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Not:
      return !eval_elem_formula(m, f.kids[0], asg);
    case Formula::Kind::And:
      for (const auto& k : f.kids)
        if (!eval_elem_formula(m, k, asg)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f.kids)
        if (eval_elem_formula(m, k, asg)) return true;
      return false;
  }
  throw InternalError("unhandled formula kind");
}

bool instance_satisfied(const FiniteModel& m, const Clause& cl,
                        const std::map<std::string, int>& asg) {
  for (const Formula& f : cl.body)
    if (!eval_elem_formula(m, f, asg)) return true;  // body false
  if (!cl.head) return false;
  return eval_elem_literal(m, *cl.head, asg);
}

// Calls f on every assignment of the given variables (odometer order,
// last variable fastest); stops when f returns false.
template <typename F>
bool elem_assignments(const FiniteModel& m,
                      const std::map<std::string, std::string>& vars,
                      std::map<std::string, int>& asg, F f) {
  std::vector<std::string> names;
  std::vector<int> sizes;
  for (const auto& [n, sort] : vars) {
    auto it = m.domains.find(sort);
    if (it == m.domains.end())
      throw Error("model does not define sort " + sort);
    names.push_back(n);
    sizes.push_back(it->second);
  }
  std::vector<int> idx(names.size(), 0);
  for (bool done = false; !done;) {
    for (size_t i = 0; i < names.size(); ++i) asg[names[i]] = idx[i];
    if (!f()) return false;
    done = true;
    for (size_t i = idx.size(); i-- > 0;) {
      if (++idx[i] < sizes[i]) {
        done = false;
        break;
      }
      idx[i] = 0;
    }
  }
  return true;
}

}  // namespace

std::optional<CounterInstance> verify_model(const ChcSystem& sys,
                                            const FiniteModel& model) {
  // Structural coverage: every sort, and a total table for every function.
  for (const auto& s : sys.sig.sorts) {
    auto it = model.domains.find(s);
    if (it == model.domains.end() || it->second < 1)
      throw Error("model does not define sort " + s);
  }
  auto check_total = [&](const std::string& name,
                         const std::vector<std::string>& arg_sorts,
                         const std::string& result_sort) {
    auto it = model.funcs.find(name);
    if (it == model.funcs.end())
      throw Error("model does not define function " + name);
    uint64_t expect = 1;
    for (const auto& a : arg_sorts)
      expect *= static_cast<uint64_t>(model.domains.at(a));
    if (it->second.size() != expect)
      throw Error("model table for " + name + " is not total");
    for (const auto& [tup, r] : it->second) {
      for (size_t i = 0; i < tup.size(); ++i)
        if (tup[i] < 0 || tup[i] >= model.domains.at(arg_sorts[i]))
          throw Error("model table for " + name + " has an out-of-domain "
                      "argument");
      if (r < 0 || r >= model.domains.at(result_sort))
        throw Error("model table for " + name + " has an out-of-domain "
                    "result");
    }
  };
  for (const CtorInfo& c : sys.sig.ctors)
    check_total(c.name, c.arg_sorts, c.result_sort);
  for (const FuncInfo& f : sys.sig.funcs)
    check_total(f.name, f.arg_sorts, f.result_sort);

  for (size_t ci = 0; ci < sys.clauses.size(); ++ci) {
    const Clause& cl = sys.clauses[ci];
    std::optional<CounterInstance> hit;
    std::map<std::string, int> asg;
    elem_assignments(model, cl.vars, asg, [&] {
      if (cl.exvars.empty()) {
        if (instance_satisfied(model, cl, asg)) return true;
        hit = CounterInstance{ci, asg};
        return false;
      }
      // Some assignment of the existential block must satisfy the clause.
      bool witnessed = false;
      std::map<std::string, int> inner = asg;
      elem_assignments(model, cl.exvars, inner, [&] {
        if (instance_satisfied(model, cl, inner)) {
          witnessed = true;
          return false;
        }
        return true;
      });
      if (witnessed) return true;
      hit = CounterInstance{ci, asg};
      return false;
    });
    if (hit) return hit;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string fun_tuple(const std::vector<int>& tup) {
  if (tup.size() == 1) return std::to_string(tup[0]);
  std::string s = "(";
  for (size_t i = 0; i < tup.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(tup[i]);
  }
  return s + ")";
}

std::string pred_tuple(const std::vector<int>& tup) {
  std::string s = "(";
  for (size_t i = 0; i < tup.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(tup[i]);
  }
  return s + ")";
}

}  // namespace

std::string render_model(const FiniteModel& model, const Signature& sig) {
  std::ostringstream os;
  for (const auto& s : sig.sorts) {
    auto it = model.domains.find(s);
    if (it == model.domains.end())
      throw Error("model does not define sort " + s);
    os << "sort " << s << " = {";
    for (int e = 0; e < it->second; ++e) os << (e ? "," : "") << e;
    os << "}\n";
  }
  auto emit_fun = [&](const std::string& name) {
    auto it = model.funcs.find(name);
    if (it == model.funcs.end())
      throw Error("model does not define function " + name);
    os << "fun " << name << ":";
    bool first = true;
    for (const auto& [tup, r] : it->second) {
      os << (first ? " " : ", ") << fun_tuple(tup) << "->" << r;
      first = false;
    }
    os << "\n";
  };
  for (const CtorInfo& c : sig.ctors) emit_fun(c.name);
  for (const FuncInfo& f : sig.funcs) emit_fun(f.name);
  for (const PredInfo& p : sig.preds) {
    auto it = model.preds.find(p.name);
    os << "pred " << p.name << " = {";
    bool first = true;
    if (it != model.preds.end())
      for (const auto& tup : it->second) {
        os << (first ? "" : ", ") << pred_tuple(tup);
        first = false;
      }
    os << "}\n";
  }
  return os.str();
}

namespace {

struct LineCursor {
  const std::string& s;
  size_t i = 0;
  int lineno;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("model line " + std::to_string(lineno) + ": " + msg);
  }
  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  bool at_end() {
    skip_ws();
    return i >= s.size();
  }
  int number() {
    skip_ws();
    size_t start = i;
    while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) fail("expected a number");
    return std::stoi(s.substr(start, i - start));
  }
  std::string word() {
    skip_ws();
    size_t start = i;
    while (i < s.size() && !isspace(static_cast<unsigned char>(s[i])) &&
           s[i] != ':' && s[i] != '=')
      ++i;
    if (i == start) fail("expected a name");
    return s.substr(start, i - start);
  }
};

}  // namespace

FiniteModel parse_model(const std::string& text) {
  FiniteModel m;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    LineCursor c{line, 0, lineno};
    if (c.at_end() || line[c.i] == '#') continue;
    std::string kind = c.word();
    if (kind == "sort") {
      std::string name = c.word();
      if (m.domains.count(name)) c.fail("duplicate sort " + name);
      c.expect('=');
      c.expect('{');
      int expect = 0;
      if (!c.eat('}')) {
        do {
          int e = c.number();
          if (e != expect) c.fail("sort elements must be 0,1,2,...");
          ++expect;
        } while (c.eat(','));
        c.expect('}');
      }
      if (expect == 0) c.fail("sort " + name + " has an empty domain");
      if (!c.at_end()) c.fail("trailing text after sort domain");
      m.domains[name] = expect;
    } else if (kind == "fun") {
      std::string name = c.word();
      if (m.funcs.count(name)) c.fail("duplicate function " + name);
      c.expect(':');
      auto& table = m.funcs[name];
      do {
        std::vector<int> tup;
        if (c.eat('(')) {
          if (!c.eat(')')) {
            do tup.push_back(c.number());
            while (c.eat(','));
            c.expect(')');
          }
        } else {
          tup.push_back(c.number());
        }
        c.expect('-');
        c.expect('>');
        int r = c.number();
        if (table.count(tup)) c.fail("duplicate table entry for " + name);
        table[tup] = r;
      } while (c.eat(','));
      if (!c.at_end()) c.fail("trailing text after function table");
    } else if (kind == "pred") {
      std::string name = c.word();
      if (m.preds.count(name)) c.fail("duplicate predicate " + name);
      c.expect('=');
      c.expect('{');
      auto& set = m.preds[name];
      if (!c.eat('}')) {
        do {
          std::vector<int> tup;
          c.expect('(');
          if (!c.eat(')')) {
            do tup.push_back(c.number());
            while (c.eat(','));
            c.expect(')');
          }
          set.insert(std::move(tup));
        } while (c.eat(','));
        c.expect('}');
      }
      if (!c.at_end()) c.fail("trailing text after predicate table");
    } else {
      c.fail("expected 'sort', 'fun', or 'pred'");
    }
  }
  return m;
}

}  // namespace horncat
