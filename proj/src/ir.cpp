#include "horncat/ir.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace horncat {

// ---------------------------------------------------------------------------
// Signature

bool Signature::has_sort(const std::string& s) const {
  return sort_index(s) >= 0;
}

int Signature::sort_index(const std::string& s) const {
  for (size_t i = 0; i < sorts.size(); ++i)
    if (sorts[i] == s) return static_cast<int>(i);
  return -1;
}

const CtorInfo* Signature::ctor(const std::string& name) const {
  for (const auto& c : ctors)
    if (c.name == name) return &c;
  return nullptr;
}

const PredInfo* Signature::pred(const std::string& name) const {
  for (const auto& p : preds)
    if (p.name == name) return &p;
  return nullptr;
}

PredInfo* Signature::pred(const std::string& name) {
  for (auto& p : preds)
    if (p.name == name) return &p;
  return nullptr;
}

const FuncInfo* Signature::func(const std::string& name) const {
  for (const auto& f : funcs)
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<const CtorInfo*> Signature::ctors_of(const std::string& sort) const {
  std::vector<const CtorInfo*> out;
  for (const auto& c : ctors)
    if (c.result_sort == sort) out.push_back(&c);
  return out;
}

std::optional<SelectorInfo> Signature::selector(const std::string& name) const {
  if (name.empty()) return std::nullopt;
  for (const auto& c : ctors) {
    for (size_t i = 0; i < c.selectors.size(); ++i) {
      if (c.selectors[i] == name) {
        SelectorInfo s;
        s.ctor = c.name;
        s.index = static_cast<int>(i);
        s.arg_sort = c.arg_sorts[i];
        s.adt_sort = c.result_sort;
        return s;
      }
    }
  }
  return std::nullopt;
}

bool Signature::name_taken(const std::string& name) const {
  if (has_sort(name) || ctor(name) || pred(name) || func(name)) return true;
  return selector(name).has_value();
}

std::string Signature::fresh_global(const std::string& base) const {
  if (!name_taken(base)) return base;
  for (int i = 2;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!name_taken(cand)) return cand;
  }
}

// ---------------------------------------------------------------------------
// Terms

Term Term::var(std::string n) {
  Term t;
  t.kind = Kind::Var;
  t.name = std::move(n);
  return t;
}

Term Term::app(std::string f, std::vector<Term> as) {
  Term t;
  t.kind = Kind::App;
  t.name = std::move(f);
  t.args = std::move(as);
  return t;
}

Term Term::sel(std::string s, Term arg) {
  Term t;
  t.kind = Kind::Sel;
  t.name = std::move(s);
  t.args.push_back(std::move(arg));
  return t;
}

bool Term::operator==(const Term& o) const {
  return kind == o.kind && name == o.name && args == o.args;
}

std::strong_ordering Term::operator<=>(const Term& o) const {
  if (auto c = kind <=> o.kind; c != 0) return c;
  if (auto c = name <=> o.name; c != 0) return c;
  if (auto c = args.size() <=> o.args.size(); c != 0) return c;
  for (size_t i = 0; i < args.size(); ++i)
    if (auto c = args[i] <=> o.args[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

bool Term::is_ground() const {
  if (kind == Kind::Var) return false;
  for (const auto& a : args)
    if (!a.is_ground()) return false;
  return true;
}

void Term::collect_vars(std::vector<std::string>& out) const {
  if (kind == Kind::Var) {
    out.push_back(name);
    return;
  }
  for (const auto& a : args) a.collect_vars(out);
}

std::string term_to_string(const Term& t) {
  if (t.args.empty()) return t.name;
  std::string s = t.name + "(";
  for (size_t i = 0; i < t.args.size(); ++i) {
    if (i) s += ", ";
    s += term_to_string(t.args[i]);
  }
  return s + ")";
}

int term_height(const Term& t) {
  if (t.kind == Term::Kind::Var)
    throw Error("term_height: term is not ground: " + term_to_string(t));
  int h = 0;
  for (const auto& a : t.args) h = std::max(h, term_height(a));
  return 1 + h;
}

std::string sort_of_term(const Signature& sig,
                         const std::map<std::string, std::string>& var_sorts,
                         const Term& t) {
  switch (t.kind) {
    case Term::Kind::Var: {
      auto it = var_sorts.find(t.name);
      if (it == var_sorts.end())
        throw Error("unbound variable: " + t.name);
      return it->second;
    }
    case Term::Kind::Sel: {
      auto s = sig.selector(t.name);
      if (!s) throw Error("unknown selector: " + t.name);
      std::string arg = sort_of_term(sig, var_sorts, t.args[0]);
      if (arg != s->adt_sort)
        throw Error("selector " + t.name + " applied to sort " + arg);
      return s->arg_sort;
    }
    case Term::Kind::App: {
      std::vector<std::string> expect;
      std::string result;
      if (const CtorInfo* c = sig.ctor(t.name)) {
        expect = c->arg_sorts;
        result = c->result_sort;
      } else if (const FuncInfo* f = sig.func(t.name)) {
        expect = f->arg_sorts;
        result = f->result_sort;
      } else {
        throw Error("unknown function symbol: " + t.name);
      }
      if (expect.size() != t.args.size())
        throw Error("arity mismatch for " + t.name + ": expected " +
                    std::to_string(expect.size()) + ", got " +
                    std::to_string(t.args.size()));
      for (size_t i = 0; i < expect.size(); ++i) {
        std::string got = sort_of_term(sig, var_sorts, t.args[i]);
        if (got != expect[i])
          throw Error("argument " + std::to_string(i) + " of " + t.name +
                      " has sort " + got + ", expected " + expect[i]);
      }
      return result;
    }
  }
  throw Error("unreachable");
}

Term apply_subst(const Term& t, const Substitution& s) {
  if (t.kind == Term::Kind::Var) {
    auto it = s.find(t.name);
    return it == s.end() ? t : it->second;
  }
  Term out = t;
  for (auto& a : out.args) a = apply_subst(a, s);
  return out;
}

Literal apply_subst(const Literal& l, const Substitution& s) {
  Literal out = l;
  for (auto& a : out.args) a = apply_subst(a, s);
  return out;
}

Formula apply_subst(const Formula& f, const Substitution& s) {
  Formula out = f;
  if (out.kind == Formula::Kind::Lit) {
    out.atom = apply_subst(out.atom, s);
    return out;
  }
  for (auto& k : out.kids) k = apply_subst(k, s);
  return out;
}

// ---------------------------------------------------------------------------
// Literals and formulas

Literal Literal::atom(std::string pred, std::vector<Term> args) {
  Literal l;
  l.kind = Kind::Atom;
  l.name = std::move(pred);
  l.args = std::move(args);
  return l;
}

Literal Literal::eq(Term l_, Term r_) {
  Literal l;
  l.kind = Kind::Eq;
  l.args = {std::move(l_), std::move(r_)};
  return l;
}

Literal Literal::neq(Term l_, Term r_) {
  Literal l;
  l.kind = Kind::Neq;
  l.args = {std::move(l_), std::move(r_)};
  return l;
}

Literal Literal::tester(std::string ctor, Term t) {
  Literal l;
  l.kind = Kind::Tester;
  l.name = std::move(ctor);
  l.args = {std::move(t)};
  return l;
}

bool Literal::operator==(const Literal& o) const {
  return kind == o.kind && positive == o.positive && name == o.name &&
         args == o.args;
}

std::string literal_to_string(const Literal& l) {
  std::string s = l.positive ? "" : "not ";
  switch (l.kind) {
    case Literal::Kind::Atom: {
      s += l.name + "(";
      for (size_t i = 0; i < l.args.size(); ++i) {
        if (i) s += ", ";
        s += term_to_string(l.args[i]);
      }
      return s + ")";
    }
    case Literal::Kind::Eq:
      return s + term_to_string(l.args[0]) + " = " + term_to_string(l.args[1]);
    case Literal::Kind::Neq:
      return s + term_to_string(l.args[0]) + " != " + term_to_string(l.args[1]);
    case Literal::Kind::Tester:
      return s + "is_" + l.name + "(" + term_to_string(l.args[0]) + ")";
  }
  return s;
}

Formula Formula::lit(Literal l) {
  Formula f;
  f.kind = Kind::Lit;
  f.atom = std::move(l);
  return f;
}

Formula Formula::conj(std::vector<Formula> ks) {
  Formula f;
  f.kind = Kind::And;
  f.kids = std::move(ks);
  return f;
}

Formula Formula::disj(std::vector<Formula> ks) {
  Formula f;
  f.kind = Kind::Or;
  f.kids = std::move(ks);
  return f;
}

Formula Formula::neg(Formula k) {
  Formula f;
  f.kind = Kind::Not;
  f.kids.push_back(std::move(k));
  return f;
}

Formula Formula::truth() {
  Formula f;
  f.kind = Kind::True;
  return f;
}

Formula Formula::falsity() {
  Formula f;
  f.kind = Kind::False;
  return f;
}

bool Formula::operator==(const Formula& o) const {
  if (kind != o.kind) return false;
  if (kind == Kind::Lit) return atom == o.atom;
  return kids == o.kids;
}

std::string formula_to_string(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::True:
      return "true";
    case Formula::Kind::False:
      return "false";
    case Formula::Kind::Lit:
      return literal_to_string(f.atom);
    case Formula::Kind::Not:
      return "not (" + formula_to_string(f.kids[0]) + ")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string op = f.kind == Formula::Kind::And ? " and " : " or ";
      std::string s = "(";
      for (size_t i = 0; i < f.kids.size(); ++i) {
        if (i) s += op;
        s += formula_to_string(f.kids[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

bool Clause::body_is_atoms() const {
  for (const auto& f : body)
    if (f.kind != Formula::Kind::Lit || f.atom.kind != Literal::Kind::Atom ||
        !f.atom.positive)
      return false;
  return true;
}

std::vector<Literal> Clause::body_atoms() const {
  if (!body_is_atoms())
    throw Error("clause body is not a plain atom conjunction: " +
                clause_to_string(*this));
  std::vector<Literal> out;
  out.reserve(body.size());
  for (const auto& f : body) out.push_back(f.atom);
  return out;
}

std::string clause_to_string(const Clause& c) {
  std::ostringstream os;
  if (!c.vars.empty()) {
    os << "forall";
    for (const auto& [v, s] : c.vars) os << " " << v << ":" << s;
    os << ". ";
  }
  if (!c.exvars.empty()) {
    os << "exists";
    for (const auto& [v, s] : c.exvars) os << " " << v << ":" << s;
    os << ". ";
  }
  if (c.body.empty()) {
    os << "true";
  } else {
    for (size_t i = 0; i < c.body.size(); ++i) {
      if (i) os << " and ";
      os << formula_to_string(c.body[i]);
    }
  }
  os << " -> " << (c.head ? literal_to_string(*c.head) : "false");
  return os.str();
}

// ---------------------------------------------------------------------------
// check_well_sorted

namespace {

void check_formula_sorts(const Signature& sig,
                         const std::map<std::string, std::string>& vs,
                         const Formula& f, int clause_idx,
                         std::vector<std::string>& diags) {
  auto note = [&](const std::string& m) {
    diags.push_back("clause " + std::to_string(clause_idx) + ": " + m);
  };
  switch (f.kind) {
    case Formula::Kind::True:
    case Formula::Kind::False:
      return;
    case Formula::Kind::Not:
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& k : f.kids) check_formula_sorts(sig, vs, k, clause_idx, diags);
      return;
    case Formula::Kind::Lit:
      break;
  }
  const Literal& l = f.atom;
  try {
    switch (l.kind) {
      case Literal::Kind::Atom: {
        const PredInfo* p = sig.pred(l.name);
        if (!p) {
          note("unknown predicate: " + l.name);
          return;
        }
        if (p->arg_sorts.size() != l.args.size()) {
          note("arity mismatch for predicate " + l.name);
          return;
        }
        for (size_t i = 0; i < l.args.size(); ++i) {
          std::string got = sort_of_term(sig, vs, l.args[i]);
          if (got != p->arg_sorts[i])
            note("argument " + std::to_string(i) + " of " + l.name +
                 " has sort " + got + ", expected " + p->arg_sorts[i]);
        }
        return;
      }
      case Literal::Kind::Eq:
      case Literal::Kind::Neq: {
        std::string a = sort_of_term(sig, vs, l.args[0]);
        std::string b = sort_of_term(sig, vs, l.args[1]);
        if (a != b)
          note("sides of (dis)equality have different sorts: " + a + " vs " + b);
        return;
      }
      case Literal::Kind::Tester: {
        const CtorInfo* c = sig.ctor(l.name);
        if (!c) {
          note("tester for unknown constructor: " + l.name);
          return;
        }
        std::string got = sort_of_term(sig, vs, l.args[0]);
        if (got != c->result_sort)
          note("tester is_" + l.name + " applied to sort " + got);
        return;
      }
    }
  } catch (const Error& e) {
    note(e.what());
  }
}

}  // namespace

std::vector<std::string> check_well_sorted(const ChcSystem& sys) {
  std::vector<std::string> diags;
  const Signature& sig = sys.sig;

  std::set<std::string> seen_sorts;
  for (const auto& s : sig.sorts)
    if (!seen_sorts.insert(s).second)
      diags.push_back("duplicate sort declaration: " + s);

  // Disjoint symbol namespaces.
  std::map<std::string, std::string> owner;
  auto claim = [&](const std::string& name, const std::string& kind) {
    auto [it, fresh] = owner.emplace(name, kind);
    if (!fresh)
      diags.push_back("symbol " + name + " declared as both " + it->second +
                      " and " + kind);
  };
  for (const auto& c : sig.ctors) {
    claim(c.name, "constructor");
    if (!sig.has_sort(c.result_sort))
      diags.push_back("constructor " + c.name + " has undeclared result sort " +
                      c.result_sort);
    for (const auto& a : c.arg_sorts)
      if (!sig.has_sort(a))
        diags.push_back("constructor " + c.name + " has undeclared argument sort " + a);
    for (const auto& sel : c.selectors)
      if (!sel.empty()) claim(sel, "selector");
  }
  for (const auto& p : sig.preds) {
    claim(p.name, "predicate");
    for (const auto& a : p.arg_sorts)
      if (!sig.has_sort(a))
        diags.push_back("predicate " + p.name + " has undeclared argument sort " + a);
  }
  for (const auto& f : sig.funcs) {
    claim(f.name, "function");
    if (!sig.has_sort(f.result_sort))
      diags.push_back("function " + f.name + " has undeclared result sort " +
                      f.result_sort);
    for (const auto& a : f.arg_sorts)
      if (!sig.has_sort(a))
        diags.push_back("function " + f.name + " has undeclared argument sort " + a);
  }

  // Every sort has a constructor and a finite inhabitant.
  std::set<std::string> inhabited;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : sig.ctors) {
      if (inhabited.count(c.result_sort)) continue;
      bool ok = true;
      for (const auto& a : c.arg_sorts)
        if (!inhabited.count(a)) ok = false;
      if (ok) {
        inhabited.insert(c.result_sort);
        changed = true;
      }
    }
  }
  for (const auto& s : sig.sorts) {
    if (sig.ctors_of(s).empty())
      diags.push_back("sort " + s + " has no constructors");
    else if (!inhabited.count(s))
      diags.push_back("sort " + s + " has no finite ground term");
  }

  for (size_t i = 0; i < sys.clauses.size(); ++i) {
    const Clause& c = sys.clauses[i];
    std::map<std::string, std::string> vs = c.vars;
    for (const auto& [v, s] : c.exvars) {
      if (vs.count(v))
        diags.push_back("clause " + std::to_string(i) + ": variable " + v +
                        " bound both universally and existentially");
      vs[v] = s;
    }
    for (const auto& [v, s] : vs)
      if (!sig.has_sort(s))
        diags.push_back("clause " + std::to_string(i) + ": variable " + v +
                        " has undeclared sort " + s);
    for (const auto& f : c.body)
      check_formula_sorts(sig, vs, f, static_cast<int>(i), diags);
    if (c.head) {
      if (c.head->kind != Literal::Kind::Atom || !c.head->positive)
        diags.push_back("clause " + std::to_string(i) +
                        ": head is not a positive predicate atom");
      else
        check_formula_sorts(sig, vs, Formula::lit(*c.head), static_cast<int>(i),
                            diags);
    }
  }
  return diags;
}

// ---------------------------------------------------------------------------
// Ground term enumeration

namespace {

// table[s] holds terms of sort s up to the current height, height-major.
void build_layers(const Signature& sig, int max_height,
                  std::map<std::string, std::vector<Term>>& table) {
  for (const auto& s : sig.sorts) table[s] = {};
  for (int h = 1; h <= max_height; ++h) {
    std::map<std::string, std::vector<Term>> fresh;
    for (const auto& c : sig.ctors) {
      auto& out = fresh[c.result_sort];
      if (c.arg_sorts.empty()) {
        if (h == 1) out.push_back(Term::app(c.name));
        continue;
      }
      if (h == 1) continue;
      // Argument tuples over terms of height <= h-1 with max exactly h-1,
      // first argument most significant.
      std::vector<const std::vector<Term>*> pools;
      bool empty = false;
      for (const auto& a : c.arg_sorts) {
        pools.push_back(&table[a]);
        if (pools.back()->empty()) empty = true;
      }
      if (empty) continue;
      std::vector<size_t> idx(pools.size(), 0);
      for (bool done = false; !done;) {
        int maxh = 0;
        for (size_t i = 0; i < pools.size(); ++i)
          maxh = std::max(maxh, term_height((*pools[i])[idx[i]]));
        if (maxh == h - 1) {
          std::vector<Term> as;
          as.reserve(pools.size());
          for (size_t i = 0; i < pools.size(); ++i)
            as.push_back((*pools[i])[idx[i]]);
          out.push_back(Term::app(c.name, std::move(as)));
        }
        done = true;
        for (size_t i = pools.size(); i-- > 0;) {
          if (++idx[i] < pools[i]->size()) {
            done = false;
            break;
          }
          idx[i] = 0;
        }
      }
    }
    for (auto& [s, terms] : fresh)
      table[s].insert(table[s].end(), terms.begin(), terms.end());
  }
}

}  // namespace

std::vector<Term> enumerate_ground_terms(const Signature& sig,
                                         const std::string& sort,
                                         int max_height) {
  if (!sig.has_sort(sort)) throw Error("unknown sort: " + sort);
  if (max_height <= 0) return {};
  std::map<std::string, std::vector<Term>> table;
  build_layers(sig, max_height, table);
  return table[sort];
}

long long count_ground_terms(const Signature& sig, const std::string& sort,
                             int max_height) {
  if (!sig.has_sort(sort)) throw Error("unknown sort: " + sort);
  if (max_height <= 0) return 0;
  // counts[s][h] = number of terms of sort s with height exactly h+1.
  std::map<std::string, std::vector<long long>> exact, cum;
  for (const auto& s : sig.sorts) {
    exact[s] = {};
    cum[s] = {};
  }
  const long long kCap = 1LL << 58;
  for (int h = 1; h <= max_height; ++h) {
    for (const auto& s : sig.sorts) {
      long long total = 0;
      for (const CtorInfo* c : sig.ctors_of(s)) {
        if (c->arg_sorts.empty()) {
          if (h == 1) total += 1;
          continue;
        }
        if (h == 1) continue;
        // tuples with all args <= h-1 minus tuples with all args <= h-2
        long long all = 1, inner = 1;
        for (const auto& a : c->arg_sorts) {
          long long ca = cum[a].size() >= static_cast<size_t>(h - 1)
                             ? cum[a][h - 2]
                             : 0;
          long long cb = (h >= 3 && cum[a].size() >= static_cast<size_t>(h - 2))
                             ? cum[a][h - 3]
                             : 0;
          all = ca > 0 && all > kCap / ca ? kCap : all * ca;
          inner = cb > 0 && inner > kCap / cb ? kCap : inner * cb;
          if (ca == 0) all = 0;
          if (cb == 0) inner = 0;
        }
        long long diff = all >= kCap ? kCap : all - inner;
        total = std::min(kCap, total + diff);
      }
      exact[s].push_back(total);
      long long prev = h >= 2 ? cum[s][h - 2] : 0;
      cum[s].push_back(std::min(kCap, prev + total));
    }
  }
  return cum[sort][max_height - 1];
}

namespace {

void collect_formula_vars(const Formula& f, std::vector<std::string>& out) {
  if (f.kind == Formula::Kind::Lit) {
    for (const auto& a : f.atom.args) a.collect_vars(out);
    return;
  }
  for (const auto& k : f.kids) collect_formula_vars(k, out);
}

}  // namespace

void prune_unused_vars(Clause& c) {
  std::vector<std::string> used;
  for (const auto& f : c.body) collect_formula_vars(f, used);
  if (c.head)
    for (const auto& a : c.head->args) a.collect_vars(used);
  std::set<std::string> u(used.begin(), used.end());
  std::erase_if(c.vars, [&](const auto& kv) { return !u.count(kv.first); });
  std::erase_if(c.exvars, [&](const auto& kv) { return !u.count(kv.first); });
}

// ---------------------------------------------------------------------------
// Alpha-normal form

namespace {

void alpha_walk_term(const Term& t, std::map<std::string, std::string>& ren,
                     int& next) {
  if (t.kind == Term::Kind::Var) {
    if (!ren.count(t.name)) ren[t.name] = "v" + std::to_string(next++);
    return;
  }
  for (const auto& a : t.args) alpha_walk_term(a, ren, next);
}

void alpha_walk_formula(const Formula& f, std::map<std::string, std::string>& ren,
                        int& next) {
  if (f.kind == Formula::Kind::Lit) {
    for (const auto& a : f.atom.args) alpha_walk_term(a, ren, next);
    return;
  }
  for (const auto& k : f.kids) alpha_walk_formula(k, ren, next);
}

Term alpha_rename(const Term& t, const std::map<std::string, std::string>& ren) {
  if (t.kind == Term::Kind::Var) {
    auto it = ren.find(t.name);
    return Term::var(it == ren.end() ? t.name : it->second);
  }
  Term out = t;
  for (auto& a : out.args) a = alpha_rename(a, ren);
  return out;
}

Formula alpha_rename_f(const Formula& f,
                       const std::map<std::string, std::string>& ren) {
  Formula out = f;
  if (out.kind == Formula::Kind::Lit) {
    for (auto& a : out.atom.args) a = alpha_rename(a, ren);
    return out;
  }
  for (auto& k : out.kids) k = alpha_rename_f(k, ren);
  return out;
}

}  // namespace

std::string alpha_normal_form(const Clause& c) {
  std::map<std::string, std::string> ren;
  int next = 0;
  for (const auto& f : c.body) alpha_walk_formula(f, ren, next);
  if (c.head)
    for (const auto& a : c.head->args) alpha_walk_term(a, ren, next);

  Clause out;
  for (const auto& [v, s] : c.vars)
    if (ren.count(v)) out.vars[ren[v]] = s;
  for (const auto& [v, s] : c.exvars)
    if (ren.count(v)) out.exvars[ren[v]] = s;
  for (const auto& f : c.body) out.body.push_back(alpha_rename_f(f, ren));
  if (c.head) {
    Literal h = *c.head;
    for (auto& a : h.args) a = alpha_rename(a, ren);
    out.head = h;
  }
  return clause_to_string(out);
}

}  // namespace horncat
