#include "horncat/frontend.hpp"

#include <set>
#include <sstream>

namespace horncat {

namespace {

[[noreturn]] void fail_at(const SExpr& e, const std::string& msg) {
  throw Error(e.loc() + ": " + msg);
}

std::string atom_of(const SExpr& e, const std::string& what) {
  if (!e.is_atom()) fail_at(e, "expected " + what);
  return e.atom;
}

bool is_reserved(const std::string& n) {
  static const std::set<std::string> kw = {
      "Bool", "true",   "false",  "and",    "or",    "not",      "=>",
      "=",    "distinct", "forall", "exists", "match", "_",       "is",
      "assert", "check-sat", "declare-datatypes", "declare-fun"};
  return kw.count(n) > 0;
}

// ---------------------------------------------------------------------------
// parse_script

struct SymTab {
  std::set<std::string> sorts;
  std::map<std::string, size_t> ctors;
  std::set<std::string> sels;
  std::map<std::string, size_t> preds;
  std::map<std::string, size_t> funcs;

  bool taken(const std::string& n) const {
    return sorts.count(n) || ctors.count(n) || sels.count(n) ||
           preds.count(n) || funcs.count(n);
  }

  void declare(const SExpr& at, const std::string& n) const {
    if (is_reserved(n)) fail_at(at, "'" + n + "' is a reserved word");
    if (taken(n)) fail_at(at, "duplicate symbol: " + n);
  }

  void check_sort(const SExpr& at, const std::string& s) const {
    if (!sorts.count(s)) fail_at(at, "unknown sort: " + s);
  }
};

Command::DatatypeDecl parse_ctor_list(const SExpr& list, const std::string& sort,
                                      SymTab& tab) {
  Command::DatatypeDecl dt;
  dt.sort = sort;
  if (!list.is_list() || list.size() == 0)
    fail_at(list, "expected a non-empty constructor list");
  for (const auto& c : list.items) {
    if (!c.is_list() || c.size() == 0)
      fail_at(c, "expected a constructor declaration (name (selector Sort)...)");
    Command::CtorDecl cd;
    cd.name = atom_of(c[0], "constructor name");
    tab.declare(c[0], cd.name);
    tab.ctors[cd.name] = c.size() - 1;
    for (size_t i = 1; i < c.size(); ++i) {
      const SExpr& s = c[i];
      if (!s.is_list() || s.size() != 2)
        fail_at(s, "expected (selector Sort)");
      std::string sel = atom_of(s[0], "selector name");
      std::string ssort = atom_of(s[1], "sort name");
      tab.declare(s[0], sel);
      tab.sels.insert(sel);
      if (ssort == "Bool") fail_at(s[1], "Bool cannot be a constructor argument");
      tab.check_sort(s[1], ssort);
      cd.sels.emplace_back(sel, ssort);
    }
    dt.ctors.push_back(cd);
  }
  return dt;
}

}  // namespace

Script parse_script(const std::string& text) {
  std::vector<SExpr> top = parse_sexprs(text);
  Script script;
  SymTab tab;
  bool saw_check_sat = false;

  for (const SExpr& e : top) {
    if (saw_check_sat) fail_at(e, "command after check-sat");
    if (!e.is_list() || e.size() == 0 || !e[0].is_atom())
      fail_at(e, "expected a command");
    const std::string& head = e[0].atom;
    Command cmd;

    if (head == "declare-datatypes") {
      if (e.size() != 3) fail_at(e, "declare-datatypes takes 2 arguments");
      const SExpr& names = e[1];
      const SExpr& bodies = e[2];
      if (!names.is_list() || !bodies.is_list() ||
          names.size() != bodies.size() || names.size() == 0)
        fail_at(e, "declare-datatypes: sort list and constructor lists must "
                   "be non-empty and of equal length");
      std::vector<std::string> declared;
      for (const auto& n : names.items) {
        if (!n.is_list() || n.size() != 2)
          fail_at(n, "expected (SortName 0)");
        std::string sort = atom_of(n[0], "sort name");
        std::string arity = atom_of(n[1], "arity");
        if (arity != "0")
          fail_at(n[1], "polymorphic datatypes are not supported");
        tab.declare(n[0], sort);
        tab.sorts.insert(sort);
        declared.push_back(sort);
      }
      cmd.kind = Command::Kind::DeclareDatatypes;
      for (size_t i = 0; i < declared.size(); ++i)
        cmd.datatypes.push_back(parse_ctor_list(bodies[i], declared[i], tab));
    } else if (head == "declare-datatype") {
      if (e.size() != 3) fail_at(e, "declare-datatype takes 2 arguments");
      std::string sort = atom_of(e[1], "sort name");
      tab.declare(e[1], sort);
      tab.sorts.insert(sort);
      cmd.kind = Command::Kind::DeclareDatatypes;
      cmd.datatypes.push_back(parse_ctor_list(e[2], sort, tab));
    } else if (head == "declare-fun") {
      if (e.size() != 4) fail_at(e, "declare-fun takes 3 arguments");
      cmd.kind = Command::Kind::DeclareFun;
      cmd.name = atom_of(e[1], "function name");
      tab.declare(e[1], cmd.name);
      const SExpr& args = e[2];
      if (!args.is_list()) fail_at(args, "expected an argument sort list");
      for (const auto& a : args.items) {
        std::string s = atom_of(a, "sort name");
        if (s == "Bool") fail_at(a, "Bool arguments are not supported");
        tab.check_sort(a, s);
        cmd.arg_sorts.push_back(s);
      }
      cmd.result_sort = atom_of(e[3], "result sort");
      if (cmd.result_sort == "Bool") {
        tab.preds[cmd.name] = cmd.arg_sorts.size();
      } else {
        tab.check_sort(e[3], cmd.result_sort);
        tab.funcs[cmd.name] = cmd.arg_sorts.size();
      }
    } else if (head == "define-fun-rec") {
      if (e.size() != 5) fail_at(e, "define-fun-rec takes 4 arguments");
      cmd.kind = Command::Kind::DefineFunRec;
      cmd.name = atom_of(e[1], "function name");
      tab.declare(e[1], cmd.name);
      const SExpr& params = e[2];
      if (!params.is_list()) fail_at(params, "expected a parameter list");
      std::set<std::string> seen;
      for (const auto& p : params.items) {
        if (!p.is_list() || p.size() != 2) fail_at(p, "expected (name Sort)");
        std::string pn = atom_of(p[0], "parameter name");
        std::string ps = atom_of(p[1], "sort name");
        if (!seen.insert(pn).second) fail_at(p[0], "duplicate parameter: " + pn);
        if (tab.taken(pn) || is_reserved(pn))
          fail_at(p[0], "parameter name collides with a declared symbol: " + pn);
        tab.check_sort(p[1], ps);
        cmd.params.emplace_back(pn, ps);
      }
      if (!e[3].is_atom("Bool"))
        fail_at(e[3], "define-fun-rec must return Bool "
                      "(encode functions as relations)");
      cmd.payload = e[4];
      tab.preds[cmd.name] = cmd.params.size();
    } else if (head == "assert") {
      if (e.size() != 2) fail_at(e, "assert takes 1 argument");
      cmd.kind = Command::Kind::Assert;
      cmd.payload = e[1];
    } else if (head == "check-sat") {
      if (e.size() != 1) fail_at(e, "check-sat takes no arguments");
      cmd.kind = Command::Kind::CheckSat;
      saw_check_sat = true;
    } else {
      fail_at(e, "unsupported command: " + head);
    }
    script.commands.push_back(std::move(cmd));
  }

  if (!saw_check_sat) throw Error("no check-sat");
  return script;
}

std::string print_script(const Script& script) {
  std::ostringstream os;
  for (const Command& c : script.commands) {
    switch (c.kind) {
      case Command::Kind::DeclareDatatypes: {
        os << "(declare-datatypes (";
        for (size_t i = 0; i < c.datatypes.size(); ++i) {
          if (i) os << " ";
          os << "(" << c.datatypes[i].sort << " 0)";
        }
        os << ") (";
        for (size_t i = 0; i < c.datatypes.size(); ++i) {
          if (i) os << " ";
          os << "(";
          const auto& cs = c.datatypes[i].ctors;
          for (size_t j = 0; j < cs.size(); ++j) {
            if (j) os << " ";
            os << "(" << cs[j].name;
            for (const auto& [sel, sort] : cs[j].sels)
              os << " (" << sel << " " << sort << ")";
            os << ")";
          }
          os << ")";
        }
        os << "))\n";
        break;
      }
      case Command::Kind::DeclareFun: {
        os << "(declare-fun " << c.name << " (";
        for (size_t i = 0; i < c.arg_sorts.size(); ++i) {
          if (i) os << " ";
          os << c.arg_sorts[i];
        }
        os << ") " << c.result_sort << ")\n";
        break;
      }
      case Command::Kind::DefineFunRec: {
        os << "(define-fun-rec " << c.name << " (";
        for (size_t i = 0; i < c.params.size(); ++i) {
          if (i) os << " ";
          os << "(" << c.params[i].first << " " << c.params[i].second << ")";
        }
        os << ") Bool " << sexpr_to_string(c.payload) << ")\n";
        break;
      }
      case Command::Kind::Assert:
        os << "(assert " << sexpr_to_string(c.payload) << ")\n";
        break;
      case Command::Kind::CheckSat:
        os << "(check-sat)\n";
        break;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// clausify

namespace {

// user-visible name -> (clause variable, sort)
using Env = std::map<std::string, std::pair<std::string, std::string>>;

struct Clausifier {
  ChcSystem sys;

  std::string fresh_var(Clause& cl, const std::string& base) const {
    auto taken = [&](const std::string& n) {
      return cl.vars.count(n) || cl.exvars.count(n);
    };
    if (!taken(base)) return base;
    for (int i = 2;; ++i) {
      std::string cand = base + "_" + std::to_string(i);
      if (!taken(cand)) return cand;
    }
  }

  void check_var_name(const SExpr& at, const std::string& n) const {
    if (is_reserved(n)) fail_at(at, "'" + n + "' is a reserved word");
    if (sys.sig.ctor(n) || sys.sig.func(n) || sys.sig.pred(n) ||
        sys.sig.selector(n))
      fail_at(at, "variable name collides with a declared symbol: " + n);
  }

  // ((x S) (y T) ...)
  std::vector<std::pair<std::string, std::string>> parse_binder(
      const SExpr& b) const {
    if (!b.is_list() || b.size() == 0)
      fail_at(b, "expected a non-empty binder list");
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    for (const auto& p : b.items) {
      if (!p.is_list() || p.size() != 2) fail_at(p, "expected (name Sort)");
      std::string n = atom_of(p[0], "variable name");
      std::string s = atom_of(p[1], "sort name");
      check_var_name(p[0], n);
      if (!seen.insert(n).second) fail_at(p[0], "duplicate variable: " + n);
      if (!sys.sig.has_sort(s)) fail_at(p[1], "unknown sort: " + s);
      out.emplace_back(n, s);
    }
    return out;
  }

  Term parse_term(const SExpr& e, const Env& env) const {
    if (e.is_atom()) {
      const std::string& n = e.atom;
      auto it = env.find(n);
      if (it != env.end()) return Term::var(it->second.first);
      if (n == "true" || n == "false")
        fail_at(e, "boolean constant in term position");
      if (const CtorInfo* c = sys.sig.ctor(n)) {
        if (!c->arg_sorts.empty())
          fail_at(e, "constructor " + n + " expects " +
                         std::to_string(c->arg_sorts.size()) + " arguments");
        return Term::app(n);
      }
      if (const FuncInfo* f = sys.sig.func(n)) {
        if (!f->arg_sorts.empty())
          fail_at(e, "function " + n + " expects arguments");
        return Term::app(n);
      }
      fail_at(e, "unknown symbol or unbound variable: " + n);
    }
    if (e.size() == 0 || !e[0].is_atom())
      fail_at(e, "expected a term");
    const std::string& f = e[0].atom;
    size_t argc = e.size() - 1;
    std::vector<Term> args;
    auto parse_args = [&](size_t expect) {
      if (argc != expect)
        fail_at(e, f + " expects " + std::to_string(expect) + " arguments, got " +
                       std::to_string(argc));
      for (size_t i = 1; i < e.size(); ++i) args.push_back(parse_term(e[i], env));
    };
    if (const CtorInfo* c = sys.sig.ctor(f)) {
      parse_args(c->arg_sorts.size());
      return Term::app(f, std::move(args));
    }
    if (const FuncInfo* fn = sys.sig.func(f)) {
      parse_args(fn->arg_sorts.size());
      return Term::app(f, std::move(args));
    }
    if (sys.sig.selector(f)) {
      parse_args(1);
      return Term::sel(f, std::move(args[0]));
    }
    if (sys.sig.pred(f)) fail_at(e, "predicate " + f + " used in term position");
    fail_at(e, "unknown function symbol: " + f);
  }

  // Parses a body formula. Existentials in positive positions are hoisted to
  // the clause's universal variables, which is sound in an implication body;
  // hoisting under clause existentials would reorder the quantifier prefix,
  // so that case is rejected.
  Formula parse_formula(const SExpr& e, Env env, Clause& cl, bool positive) {
    if (e.is_atom()) {
      if (e.atom == "true") return Formula::truth();
      if (e.atom == "false") return Formula::falsity();
      if (const PredInfo* p = sys.sig.pred(e.atom)) {
        if (!p->arg_sorts.empty())
          fail_at(e, "predicate " + e.atom + " expects arguments");
        return Formula::lit(Literal::atom(e.atom, {}));
      }
      fail_at(e, "expected a formula");
    }
    if (e.size() == 0) fail_at(e, "expected a formula");

    // ((_ is C) t)
    if (e[0].is_list()) {
      const SExpr& h = e[0];
      if (h.size() == 3 && h[0].is_atom("_") && h[1].is_atom("is")) {
        std::string c = atom_of(h[2], "constructor name");
        if (!sys.sig.ctor(c)) fail_at(h[2], "unknown constructor: " + c);
        if (e.size() != 2) fail_at(e, "tester expects 1 argument");
        return Formula::lit(Literal::tester(c, parse_term(e[1], env)));
      }
      fail_at(e, "expected a formula");
    }

    const std::string& h = e[0].atom;
    if (h == "and" || h == "or") {
      std::vector<Formula> ks;
      for (size_t i = 1; i < e.size(); ++i)
        ks.push_back(parse_formula(e[i], env, cl, positive));
      return h == "and" ? Formula::conj(std::move(ks))
                        : Formula::disj(std::move(ks));
    }
    if (h == "not") {
      if (e.size() != 2) fail_at(e, "not takes 1 argument");
      return Formula::neg(parse_formula(e[1], env, cl, !positive));
    }
    if (h == "=>") {
      if (e.size() != 3) fail_at(e, "=> takes 2 arguments");
      Formula a = parse_formula(e[1], env, cl, !positive);
      Formula b = parse_formula(e[2], env, cl, positive);
      return Formula::disj({Formula::neg(std::move(a)), std::move(b)});
    }
    if (h == "=" || h == "distinct") {
      if (e.size() < 3) fail_at(e, h + " takes at least 2 arguments");
      std::vector<Term> ts;
      for (size_t i = 1; i < e.size(); ++i) ts.push_back(parse_term(e[i], env));
      std::vector<Formula> ks;
      if (h == "=") {
        for (size_t i = 0; i + 1 < ts.size(); ++i)
          ks.push_back(Formula::lit(Literal::eq(ts[i], ts[i + 1])));
      } else {
        for (size_t i = 0; i < ts.size(); ++i)
          for (size_t j = i + 1; j < ts.size(); ++j)
            ks.push_back(Formula::lit(Literal::neq(ts[i], ts[j])));
      }
      return ks.size() == 1 ? ks[0] : Formula::conj(std::move(ks));
    }
    if (h == "exists") {
      if (!positive)
        fail_at(e, "existential quantifier under negation is not supported");
      if (!cl.exvars.empty())
        fail_at(e, "quantifier alternation is too deep "
                   "(existential inside an alternating query)");
      if (e.size() != 3) fail_at(e, "exists takes 2 arguments");
      for (const auto& [n, s] : parse_binder(e[1])) {
        std::string fresh = fresh_var(cl, n);
        cl.vars[fresh] = s;
        env[n] = {fresh, s};
      }
      return parse_formula(e[2], env, cl, positive);
    }
    if (h == "forall")
      fail_at(e, "universal quantifier is not supported inside clause bodies");
    if (h == "match")
      fail_at(e, "match is only supported as a define-fun-rec body");
    if (const PredInfo* p = sys.sig.pred(h)) {
      if (e.size() - 1 != p->arg_sorts.size())
        fail_at(e, "predicate " + h + " expects " +
                       std::to_string(p->arg_sorts.size()) + " arguments");
      std::vector<Term> args;
      for (size_t i = 1; i < e.size(); ++i) args.push_back(parse_term(e[i], env));
      return Formula::lit(Literal::atom(h, std::move(args)));
    }
    fail_at(e, "expected a formula, got application of: " + h);
  }

  // Reject predicate atoms in negative positions inside function definitions:
  // the relational encoding only covers the positive direction.
  void check_no_negative_atoms(const Formula& f, bool positive,
                               const SExpr& at) const {
    switch (f.kind) {
      case Formula::Kind::Lit:
        if (f.atom.kind == Literal::Kind::Atom && !positive)
          fail_at(at, "negative occurrence of predicate " + f.atom.name +
                          " in a function body is not supported");
        return;
      case Formula::Kind::Not:
        check_no_negative_atoms(f.kids[0], !positive, at);
        return;
      default:
        for (const auto& k : f.kids) check_no_negative_atoms(k, positive, at);
    }
  }

  // Flatten top-level conjunctions into body conjuncts; true disappears.
  // Returns false when the body is unsatisfiable (literal false), in which
  // case the clause must be dropped.
  bool push_body(Clause& cl, const Formula& f) const {
    switch (f.kind) {
      case Formula::Kind::True:
        return true;
      case Formula::Kind::False:
        return false;
      case Formula::Kind::And:
        for (const auto& k : f.kids)
          if (!push_body(cl, k)) return false;
        return true;
      default:
        cl.body.push_back(f);
        return true;
    }
  }

  // -------------------------------------------------------------------------
  // match translation

  struct Pat {
    enum class Kind { Wild, Var, Ctor };
    Kind kind = Kind::Wild;
    std::string name;
    std::vector<Pat> args;
    int line = 1, col = 1;
  };

  Pat parse_pattern(const SExpr& e) const {
    Pat p;
    p.line = e.line;
    p.col = e.col;
    if (e.is_atom()) {
      if (e.atom == "_") {
        p.kind = Pat::Kind::Wild;
        return p;
      }
      if (const CtorInfo* c = sys.sig.ctor(e.atom)) {
        if (!c->arg_sorts.empty())
          fail_at(e, "constructor " + e.atom + " expects arguments in pattern");
        p.kind = Pat::Kind::Ctor;
        p.name = e.atom;
        return p;
      }
      check_var_name(e, e.atom);
      p.kind = Pat::Kind::Var;
      p.name = e.atom;
      return p;
    }
    if (e.size() == 0 || !e[0].is_atom()) fail_at(e, "expected a pattern");
    const CtorInfo* c = sys.sig.ctor(e[0].atom);
    if (!c) fail_at(e[0], "unknown constructor in pattern: " + e[0].atom);
    if (e.size() - 1 != c->arg_sorts.size())
      fail_at(e, "constructor " + c->name + " expects " +
                     std::to_string(c->arg_sorts.size()) + " pattern arguments");
    p.kind = Pat::Kind::Ctor;
    p.name = e[0].atom;
    for (size_t i = 1; i < e.size(); ++i) p.args.push_back(parse_pattern(e[i]));
    return p;
  }

  // Turn a constructor pattern into a term, naming its variables as fresh
  // clause universals. rho carries pattern variable meanings across the
  // whole pattern tuple of one branch.
  Term freshen(const Pat& p, const std::string& sort, Clause& cl,
               std::map<std::string, Term>& rho, Env& env) {
    switch (p.kind) {
      case Pat::Kind::Wild: {
        std::string n = fresh_var(cl, "w");
        cl.vars[n] = sort;
        return Term::var(n);
      }
      case Pat::Kind::Var: {
        auto it = rho.find(p.name);
        if (it != rho.end()) return it->second;
        std::string n = fresh_var(cl, p.name);
        cl.vars[n] = sort;
        rho[p.name] = Term::var(n);
        env[p.name] = {n, sort};
        return Term::var(n);
      }
      case Pat::Kind::Ctor: {
        const CtorInfo* c = sys.sig.ctor(p.name);
        if (c->result_sort != sort) {
          SExpr where = SExpr::mk_atom(p.name, p.line, p.col);
          fail_at(where, "constructor " + p.name + " builds sort " +
                             c->result_sort + ", expected " + sort);
        }
        std::vector<Term> args;
        for (size_t i = 0; i < p.args.size(); ++i)
          args.push_back(freshen(p.args[i], c->arg_sorts[i], cl, rho, env));
        return Term::app(p.name, std::move(args));
      }
    }
    throw Error("unreachable");
  }

  // Does earlier pattern `p` match the value shape `rigid`? Collects the
  // residual conditions (equalities between already-pinned terms, testers on
  // unconstrained positions); returns false on constructor clash, meaning the
  // earlier pattern can never fire alongside this branch's shape.
  bool guard_unify(const Pat& p, const Term& rigid,
                   std::map<std::string, Term>& theta,
                   std::vector<Literal>& conds) const {
    switch (p.kind) {
      case Pat::Kind::Wild:
        return true;
      case Pat::Kind::Var: {
        auto it = theta.find(p.name);
        if (it == theta.end()) {
          theta[p.name] = rigid;
          return true;
        }
        if (rigid == it->second) return true;
        conds.push_back(Literal::eq(rigid, it->second));
        return true;
      }
      case Pat::Kind::Ctor: {
        const CtorInfo* c = sys.sig.ctor(p.name);
        if (rigid.kind == Term::Kind::App && sys.sig.ctor(rigid.name)) {
          if (rigid.name != p.name) return false;
          for (size_t i = 0; i < p.args.size(); ++i)
            if (!guard_unify(p.args[i], rigid.args[i], theta, conds))
              return false;
          return true;
        }
        conds.push_back(Literal::tester(p.name, rigid));
        for (size_t i = 0; i < p.args.size(); ++i)
          if (!guard_unify(p.args[i], Term::sel(c->selectors[i], rigid), theta,
                           conds))
            return false;
        return true;
      }
    }
    return true;
  }

  void translate_fun_rec(const Command& cmd) {
    Env params;
    std::vector<Term> head_args;
    for (const auto& [n, s] : cmd.params) {
      params[n] = {n, s};
      head_args.push_back(Term::var(n));
    }
    Literal head = Literal::atom(cmd.name, head_args);
    auto base_clause = [&] {
      Clause cl;
      for (const auto& [n, s] : cmd.params) cl.vars[n] = s;
      return cl;
    };

    const SExpr& body = cmd.payload;
    if (!(body.is_list() && body.size() > 0 && body[0].is_atom("match"))) {
      Clause cl = base_clause();
      Formula f = parse_formula(body, params, cl, true);
      check_no_negative_atoms(f, true, body);
      cl.head = head;
      cl.note = cmd.name;
      if (push_body(cl, f)) {
        prune_unused_vars(cl);
        sys.clauses.push_back(std::move(cl));
      }
      return;
    }

    if (body.size() != 3)
      fail_at(body, "match needs a scrutinee and a branch list");
    std::vector<std::string> scrut;
    const SExpr& se = body[1];
    if (se.is_atom()) {
      scrut.push_back(se.atom);
    } else {
      for (const auto& s : se.items) scrut.push_back(atom_of(s, "scrutinee"));
    }
    if (scrut.empty()) fail_at(se, "empty scrutinee list");
    std::set<std::string> seen;
    for (const auto& s : scrut) {
      if (!params.count(s))
        fail_at(se, "scrutinee must be a parameter: " + s);
      if (!seen.insert(s).second) fail_at(se, "repeated scrutinee: " + s);
    }

    // Parse all branch patterns first: later branches are guarded by the
    // failure of every earlier pattern, reachable or not.
    struct Branch {
      std::vector<Pat> pats;
      const SExpr* rhs;
    };
    std::vector<Branch> branches;
    const SExpr& blist = body[2];
    if (!blist.is_list() || blist.size() == 0)
      fail_at(blist, "expected a non-empty branch list");
    for (const SExpr& b : blist.items) {
      if (!b.is_list() || b.size() != 2)
        fail_at(b, "expected a match branch (pattern body)");
      Branch br;
      br.rhs = &b[1];
      if (scrut.size() == 1) {
        br.pats.push_back(parse_pattern(b[0]));
      } else {
        if (!b[0].is_list() || b[0].size() != scrut.size())
          fail_at(b[0], "pattern tuple must have " +
                            std::to_string(scrut.size()) + " entries");
        for (const auto& p : b[0].items) br.pats.push_back(parse_pattern(p));
      }
      branches.push_back(std::move(br));
    }

    for (size_t i = 0; i < branches.size(); ++i) {
      Clause cl = base_clause();
      Env env = params;
      std::map<std::string, Term> rho;
      Substitution subst;
      std::vector<Term> rigid;
      std::vector<std::pair<std::string, Term>> bindings;

      for (size_t m = 0; m < scrut.size(); ++m) {
        const Pat& p = branches[i].pats[m];
        const std::string& sv = scrut[m];
        const std::string& ssort = params[sv].second;
        switch (p.kind) {
          case Pat::Kind::Wild:
            rigid.push_back(Term::var(sv));
            break;
          case Pat::Kind::Var: {
            auto it = rho.find(p.name);
            if (it != rho.end()) {
              subst[sv] = it->second;
              rigid.push_back(it->second);
            } else {
              rho[p.name] = Term::var(sv);
              env[p.name] = {sv, ssort};
              rigid.push_back(Term::var(sv));
            }
            break;
          }
          case Pat::Kind::Ctor: {
            Term t = freshen(p, ssort, cl, rho, env);
            bindings.emplace_back(sv, t);
            rigid.push_back(t);
            break;
          }
        }
      }

      if (branches[i].rhs->is_atom("false")) continue;

      // Fall-through guards: this branch fires only where every earlier
      // pattern fails.
      std::vector<Formula> guards;
      bool unreachable = false;
      for (size_t j = 0; j < i; ++j) {
        std::map<std::string, Term> theta;
        std::vector<Literal> conds;
        bool matches = true;
        for (size_t m = 0; m < scrut.size() && matches; ++m)
          matches = guard_unify(branches[j].pats[m], rigid[m], theta, conds);
        if (!matches) continue;  // clash: earlier branch never overlaps
        if (conds.empty()) {
          unreachable = true;  // earlier branch always matches here
          break;
        }
        std::vector<Formula> disj;
        for (Literal c : conds) {
          if (c.kind == Literal::Kind::Eq) {
            disj.push_back(Formula::lit(Literal::neq(c.args[0], c.args[1])));
          } else {
            c.positive = false;
            disj.push_back(Formula::lit(c));
          }
        }
        guards.push_back(disj.size() == 1 ? disj[0]
                                          : Formula::disj(std::move(disj)));
      }
      if (unreachable) continue;

      for (const auto& [sv, t] : bindings)
        cl.body.push_back(Formula::lit(Literal::eq(Term::var(sv), t)));
      for (auto& g : guards) cl.body.push_back(std::move(g));

      Formula rhs = parse_formula(*branches[i].rhs, env, cl, true);
      check_no_negative_atoms(rhs, true, *branches[i].rhs);
      if (!push_body(cl, rhs)) continue;

      cl.head = head;
      cl.note = cmd.name + " branch " + std::to_string(i + 1);
      if (!subst.empty()) {
        for (auto& f : cl.body) f = apply_subst(f, subst);
        cl.head = apply_subst(*cl.head, subst);
      }
      prune_unused_vars(cl);
      sys.clauses.push_back(std::move(cl));
    }
  }

  // -------------------------------------------------------------------------
  // asserts

  // A head is a predicate atom, or `false` (query), or `true` (no clause).
  // Parsed directly rather than via parse_formula so that no quantifier or
  // connective can sneak into head position.
  enum class HeadKind { Atom, Query, Vacuous };
  HeadKind parse_head(const SExpr& e, const Env& env, Clause& cl) {
    if (e.is_atom("false")) return HeadKind::Query;
    if (e.is_atom("true")) return HeadKind::Vacuous;
    std::string name;
    size_t argc = 0;
    if (e.is_atom()) {
      name = e.atom;
    } else if (e.size() > 0 && e[0].is_atom()) {
      name = e[0].atom;
      argc = e.size() - 1;
    } else {
      fail_at(e, "clause head must be a predicate atom, true, or false");
    }
    const PredInfo* p = sys.sig.pred(name);
    if (!p) fail_at(e, "clause head must be a predicate atom, true, or false");
    if (argc != p->arg_sorts.size())
      fail_at(e, "predicate " + name + " expects " +
                     std::to_string(p->arg_sorts.size()) + " arguments");
    std::vector<Term> args;
    for (size_t i = 1; i < e.size(); ++i) args.push_back(parse_term(e[i], env));
    cl.head = Literal::atom(name, std::move(args));
    return HeadKind::Atom;
  }

  void translate_assert(const SExpr& payload, int index) {
    Clause cl;
    cl.note = "assert " + std::to_string(index);
    Env env;
    const SExpr* inner = &payload;

    if (inner->is_list() && inner->size() == 3 && (*inner)[0].is_atom("forall")) {
      for (const auto& [n, s] : parse_binder((*inner)[1])) {
        cl.vars[n] = s;
        env[n] = {n, s};
      }
      inner = &(*inner)[2];
    }

    if (inner->is_list() && inner->size() == 2 && (*inner)[0].is_atom("not")) {
      const SExpr* x = &(*inner)[1];
      while (x->is_list() && x->size() == 3 && (*x)[0].is_atom("exists")) {
        for (const auto& [n, s] : parse_binder((*x)[1])) {
          if (cl.vars.count(n) || cl.exvars.count(n))
            fail_at((*x)[1], "variable shadows an outer quantifier: " + n);
          cl.vars[n] = s;
          env[n] = {n, s};
        }
        x = &(*x)[2];
      }
      if (x->is_list() && x->size() == 3 && (*x)[0].is_atom("forall")) {
        for (const auto& [n, s] : parse_binder((*x)[1])) {
          if (cl.vars.count(n) || cl.exvars.count(n))
            fail_at((*x)[1], "variable shadows an outer quantifier: " + n);
          cl.exvars[n] = s;
          env[n] = {n, s};
        }
        x = &(*x)[2];
      }
      Formula f = parse_formula(*x, env, cl, true);
      if (!push_body(cl, f)) return;  // body contains false: vacuous
      prune_unused_vars(cl);
      sys.clauses.push_back(std::move(cl));
      return;
    }

    if (inner->is_list() && inner->size() == 3 && (*inner)[0].is_atom("=>")) {
      Formula f = parse_formula((*inner)[1], env, cl, true);
      if (!push_body(cl, f)) return;
      if (parse_head((*inner)[2], env, cl) == HeadKind::Vacuous) return;
      prune_unused_vars(cl);
      sys.clauses.push_back(std::move(cl));
      return;
    }

    if (parse_head(*inner, env, cl) == HeadKind::Vacuous) return;
    prune_unused_vars(cl);
    sys.clauses.push_back(std::move(cl));
  }
};

}  // namespace

ChcSystem clausify(const Script& script) {
  Clausifier cz;
  int assert_index = 0;
  for (const Command& cmd : script.commands) {
    switch (cmd.kind) {
      case Command::Kind::DeclareDatatypes:
        for (const auto& dt : cmd.datatypes) cz.sys.sig.sorts.push_back(dt.sort);
        for (const auto& dt : cmd.datatypes) {
          for (const auto& c : dt.ctors) {
            CtorInfo ci;
            ci.name = c.name;
            ci.result_sort = dt.sort;
            for (const auto& [sel, sort] : c.sels) {
              ci.selectors.push_back(sel);
              ci.arg_sorts.push_back(sort);
            }
            cz.sys.sig.ctors.push_back(std::move(ci));
          }
        }
        break;
      case Command::Kind::DeclareFun:
        if (cmd.result_sort == "Bool")
          cz.sys.sig.preds.push_back({cmd.name, cmd.arg_sorts, false});
        else
          cz.sys.sig.funcs.push_back({cmd.name, cmd.arg_sorts, cmd.result_sort});
        break;
      case Command::Kind::DefineFunRec: {
        PredInfo p;
        p.name = cmd.name;
        for (const auto& [n, s] : cmd.params) p.arg_sorts.push_back(s);
        cz.sys.sig.preds.push_back(std::move(p));
        cz.translate_fun_rec(cmd);
        break;
      }
      case Command::Kind::Assert:
        cz.translate_assert(cmd.payload, assert_index++);
        break;
      case Command::Kind::CheckSat:
        break;
    }
  }
  auto diags = check_well_sorted(cz.sys);
  if (!diags.empty()) {
    std::string msg = "clausified system is ill-sorted:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw Error(msg);
  }
  return cz.sys;
}

// ---------------------------------------------------------------------------
// Skolemization

std::pair<ChcSystem, SkolemRecord> skolemize_existentials(const ChcSystem& sys) {
  ChcSystem out = sys;
  SkolemRecord record;
  for (size_t i = 0; i < out.clauses.size(); ++i) {
    Clause& cl = out.clauses[i];
    if (cl.exvars.empty()) continue;
    std::vector<std::string> arg_sorts;
    std::vector<Term> arg_terms;
    for (const auto& [u, s] : cl.vars) {
      arg_sorts.push_back(s);
      arg_terms.push_back(Term::var(u));
    }
    Substitution subst;
    for (const auto& [v, s] : cl.exvars) {
      std::string name = out.sig.fresh_global("f_" + v);
      out.sig.funcs.push_back({name, arg_sorts, s});
      record[name] = {arg_sorts, s, static_cast<int>(i)};
      subst[v] = Term::app(name, arg_terms);
    }
    for (auto& f : cl.body) f = apply_subst(f, subst);
    if (cl.head) cl.head = apply_subst(*cl.head, subst);
    cl.exvars.clear();
  }
  return {std::move(out), std::move(record)};
}

ChcSystem load_system(const std::string& text, SkolemRecord* record) {
  auto [sys, rec] = skolemize_existentials(clausify(parse_script(text)));
  if (record) *record = std::move(rec);
  return sys;
}

}  // namespace horncat
