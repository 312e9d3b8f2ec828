#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "horncat/frontend.hpp"
#include "horncat/model.hpp"
#include "horncat/preprocess.hpp"

using namespace horncat;

namespace {

Term V(const std::string& n) { return Term::var(n); }
Term A(const std::string& f, std::vector<Term> args = {}) {
  return Term::app(f, std::move(args));
}
Formula L(Literal l) { return Formula::lit(std::move(l)); }

const char* kEvenText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(define-fun-rec even ((n Nat)) Bool
  (match n
    ((Z true)
     ((S Z) false)
     ((S (S m)) (even m)))))
(assert (not (exists ((x Nat)) (and (even x) (even (S x))))))
(check-sat)
)";

const char* kIncDecText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(declare-fun inc (Nat Nat) Bool)
(declare-fun dec (Nat Nat) Bool)
(assert (forall ((x Nat) (y Nat)) (=> (and (= x Z) (= y (S Z))) (inc x y))))
(assert (forall ((x Nat) (y Nat)) (=> (inc x y) (inc (S x) (S y)))))
(assert (forall ((x Nat) (y Nat)) (=> (and (= x (S Z)) (= y Z)) (dec x y))))
(assert (forall ((x Nat) (y Nat)) (=> (dec x y) (dec (S x) (S y)))))
(assert (not (exists ((x Nat) (y Nat)) (and (inc x y) (dec x y)))))
(check-sat)
)";

const char* kDiseqZZText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(assert (=> (distinct Z Z) false))
(check-sat)
)";

const char* kNeqZSZText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(assert (=> (distinct Z (S Z)) false))
(check-sat)
)";

const char* kEvenLeftText = R"(
(declare-datatypes ((Tree 0)) (((leaf) (node (left Tree) (right Tree)))))
(declare-fun evenLeft (Tree) Bool)
(assert (evenLeft leaf))
(assert (forall ((xp Tree) (y Tree) (z Tree))
  (=> (evenLeft xp) (evenLeft (node (node xp y) z)))))
(assert (not (exists ((x Tree) (y Tree))
  (and (evenLeft x) (evenLeft (node x y))))))
(check-sat)
)";

// eq is diagonal, diseq covers everything off the term diagonal; over any
// finite domain S must revisit an element, which drags diseq onto the
// diagonal, so no finite model exists at any size.
const char* kDiagText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(declare-fun eq (Nat Nat) Bool)
(declare-fun diseq (Nat Nat) Bool)
(assert (forall ((x Nat) (y Nat)) (=> (= x y) (eq x y))))
(assert (forall ((x Nat) (y Nat) (xp Nat))
  (=> (and (= x (S xp)) (= y Z)) (diseq x y))))
(assert (forall ((x Nat) (y Nat) (yp Nat))
  (=> (and (= y (S yp)) (= x Z)) (diseq x y))))
(assert (forall ((x Nat) (y Nat) (xp Nat) (yp Nat))
  (=> (and (= x (S xp)) (= y (S yp)) (diseq xp yp)) (diseq x y))))
(assert (not (exists ((x Nat) (y Nat)) (and (eq x y) (diseq x y)))))
(check-sat)
)";

const char* kLtGtText = R"(
(declare-datatypes ((Nat 0)) (((Z) (S (pred_of Nat)))))
(declare-fun lt (Nat Nat) Bool)
(declare-fun gt (Nat Nat) Bool)
(assert (forall ((x Nat) (y Nat) (yp Nat))
  (=> (and (= x Z) (= y (S yp))) (lt x y))))
(assert (forall ((x Nat) (y Nat) (xp Nat) (yp Nat))
  (=> (and (= x (S xp)) (= y (S yp)) (lt xp yp)) (lt x y))))
(assert (forall ((x Nat) (y Nat) (xp Nat))
  (=> (and (= x (S xp)) (= y Z)) (gt x y))))
(assert (forall ((x Nat) (y Nat) (xp Nat) (yp Nat))
  (=> (and (= x (S xp)) (= y (S yp)) (gt xp yp)) (gt x y))))
(assert (not (exists ((x Nat) (y Nat)) (and (lt x y) (gt x y)))))
(check-sat)
)";

const char* kStlcText = R"(
(declare-datatypes ((Var 0)) (((x0))))
(declare-datatypes ((Type 0)) (((arrow (arg Type) (res Type)) (prim))))
(declare-datatypes ((Expr 0))
  (((var (vname Var)) (abs (bvar Var) (body Expr)) (app (fn Expr) (arg2 Expr)))))
(declare-datatypes ((Env 0))
  (((empty) (cons (cvar Var) (ctype Type) (crest Env)))))
(define-fun-rec typeCheck ((G Env) (e Expr) (t Type)) Bool
  (match (G e t)
    ((((cons v t2 _) (var v) t2) true)
     (((cons v2 t3 G2) (var v) _) (typeCheck G2 e t))
     ((_ (abs v e2) (arrow t2 u)) (typeCheck (cons v t2 G) e2 u))
     ((_ (app e1 e2) _)
      (exists ((u Type)) (and (typeCheck G e2 u) (typeCheck G e1 (arrow u t)))))
     ((_ _ _) false))))
(assert (not (exists ((e Expr))
  (forall ((a Type) (b Type))
    (typeCheck empty e (arrow (arrow a b) a))))))
(check-sat)
)";

ChcSystem pipelined(const char* text) {
  auto [out, report] = run_pipeline(load_system(text));
  return out;
}

CardinalityVector nat_card(int k) { return {{"Nat", k}}; }

FiniteModel even_model2() {
  FiniteModel m;
  m.domains = {{"Nat", 2}};
  m.funcs["Z"][{}] = 0;
  m.funcs["S"][{0}] = 1;
  m.funcs["S"][{1}] = 0;
  m.preds["even"] = {{0}};
  return m;
}

FiniteModel mod3_model() {
  FiniteModel m;
  m.domains = {{"Nat", 3}};
  m.funcs["Z"][{}] = 0;
  m.funcs["S"][{0}] = 1;
  m.funcs["S"][{1}] = 2;
  m.funcs["S"][{2}] = 0;
  m.preds["inc"] = {{0, 1}, {1, 2}, {2, 0}};
  m.preds["dec"] = {{0, 2}, {1, 0}, {2, 1}};
  return m;
}

FiniteModel evenleft_model2() {
  FiniteModel m;
  m.domains = {{"Tree", 2}};
  m.funcs["leaf"][{}] = 0;
  m.funcs["node"][{0, 0}] = 1;
  m.funcs["node"][{0, 1}] = 1;
  m.funcs["node"][{1, 0}] = 0;
  m.funcs["node"][{1, 1}] = 0;
  m.preds["evenLeft"] = {{0}};
  return m;
}

FiniteModel diseq_zz_model2() {
  FiniteModel m;
  m.domains = {{"Nat", 2}};
  m.funcs["Z"][{}] = 0;
  m.funcs["S"][{0}] = 1;
  m.funcs["S"][{1}] = 1;
  m.preds["diseq_Nat"] = {{0, 1}, {1, 0}, {1, 1}};
  return m;
}

std::vector<int> decl_order(const Signature& sig, const CardinalityVector& c) {
  std::vector<int> v;
  for (const auto& s : sig.sorts) v.push_back(c.at(s));
  return v;
}

uint64_t choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cardinality schedules

TEST_CASE("cardinality schedule enumerates totals then lexicographic") {
  SearchBudget b;

  SUBCASE("one sort") {
    Signature s;
    s.sorts = {"Nat"};
    b.max_total = 3;
    std::vector<CardinalityVector> want = {{{"Nat", 1}}, {{"Nat", 2}},
                                           {{"Nat", 3}}};
    CHECK(cardinality_schedule(s, b) == want);
  }
  SUBCASE("two sorts") {
    Signature s;
    s.sorts = {"Nat", "List"};
    b.max_total = 3;
    std::vector<CardinalityVector> want = {
        {{"Nat", 1}, {"List", 1}},
        {{"Nat", 1}, {"List", 2}},
        {{"Nat", 2}, {"List", 1}},
    };
    CHECK(cardinality_schedule(s, b) == want);
  }
  SUBCASE("four sorts cover the interesting point") {
    Signature s;
    s.sorts = {"Var", "Type", "Expr", "Env"};
    b.max_total = 6;
    auto sched = cardinality_schedule(s, b);
    CardinalityVector target = {
        {"Var", 1}, {"Type", 2}, {"Expr", 1}, {"Env", 2}};
    CHECK(std::count(sched.begin(), sched.end(), target) == 1);
    // one composition per way of splitting total-4 extra elements
    uint64_t expect = 0;
    for (int t = 4; t <= 6; ++t) expect += choose(t - 1, 3);
    CHECK(sched.size() == expect);
  }
  SUBCASE("ordering and uniqueness properties") {
    Signature s;
    s.sorts = {"A", "B", "C"};
    b.max_total = 7;
    auto sched = cardinality_schedule(s, b);
    std::set<std::vector<int>> seen;
    int prev_total = 0;
    std::vector<int> prev;
    for (const auto& c : sched) {
      REQUIRE(c.size() == 3);
      for (const auto& kv : c) CHECK(kv.second >= 1);
      int t = total_cardinality(c);
      CHECK(t >= 3);
      CHECK(t <= 7);
      CHECK(t >= prev_total);
      std::vector<int> v = decl_order(s, c);
      if (t == prev_total) CHECK(prev < v);
      CHECK(seen.insert(v).second);
      prev_total = t;
      prev = v;
    }
    uint64_t expect = 0;
    for (int t = 3; t <= 7; ++t) expect += choose(t - 1, 2);
    CHECK(sched.size() == expect);
  }
  SUBCASE("budget below sort count is empty") {
    Signature s;
    s.sorts = {"A", "B"};
    b.max_total = 1;
    CHECK(cardinality_schedule(s, b).empty());
  }
}

// ---------------------------------------------------------------------------
// The verifier is the oracle for everything the search returns, so pin its
// behavior first on hand-written models.

TEST_CASE("hand-built mod-3 model satisfies the inc/dec system") {
  ChcSystem sys = pipelined(kIncDecText);
  FiniteModel m = mod3_model();
  CHECK(!verify_model(sys, m).has_value());

  SUBCASE("removing a dec tuple is caught at the dec step clause") {
    m.preds["dec"] = {{1, 0}, {2, 1}};
    auto bad = verify_model(sys, m);
    REQUIRE(bad.has_value());
    CHECK(bad->clause_index == 3);
    CHECK(bad->assignment == std::map<std::string, int>{{"x", 2}, {"y", 1}});
  }
  SUBCASE("an extra dec tuple breaks closure under the step clause") {
    m.preds["dec"].insert({0, 1});
    auto bad = verify_model(sys, m);
    REQUIRE(bad.has_value());
    CHECK(bad->clause_index == 3);
    CHECK(bad->assignment == std::map<std::string, int>{{"x", 0}, {"y", 1}});
  }
  SUBCASE("sharing a full cycle moves the violation to the query") {
    m.preds["dec"] = m.preds["inc"];
    auto bad = verify_model(sys, m);
    REQUIRE(bad.has_value());
    CHECK(bad->clause_index == 2);  // dec's base fact is gone first
    m.preds["dec"].insert({1, 0});  // restore the base, still inc-closed?
    bad = verify_model(sys, m);
    REQUIRE(bad.has_value());
    CHECK(bad->clause_index == 3);  // (1,0) now needs (2,1)
  }
}

TEST_CASE("verifier flags the even query when even is everything") {
  ChcSystem sys = pipelined(kEvenText);
  FiniteModel m = even_model2();
  CHECK(!verify_model(sys, m).has_value());

  m.preds["even"] = {{0}, {1}};
  auto bad = verify_model(sys, m);
  REQUIRE(bad.has_value());
  CHECK(bad->clause_index == 2);
  CHECK(bad->assignment == std::map<std::string, int>{{"x", 0}});
}

TEST_CASE("verifier rejects structurally unusable models") {
  ChcSystem sys = pipelined(kEvenText);

  SUBCASE("missing sort") {
    FiniteModel m = even_model2();
    m.domains.clear();
    CHECK_THROWS_WITH_AS(verify_model(sys, m),
                         doctest::Contains("does not define sort"), Error);
  }
  SUBCASE("missing function table") {
    FiniteModel m = even_model2();
    m.funcs.erase("S");
    CHECK_THROWS_WITH_AS(verify_model(sys, m),
                         doctest::Contains("does not define function S"),
                         Error);
  }
  SUBCASE("partial function table") {
    FiniteModel m = even_model2();
    m.funcs["S"].erase({1});
    CHECK_THROWS_WITH_AS(verify_model(sys, m),
                         doctest::Contains("not total"), Error);
  }
  SUBCASE("result outside the domain") {
    FiniteModel m = even_model2();
    m.funcs["S"][{1}] = 5;
    CHECK_THROWS_WITH_AS(verify_model(sys, m),
                         doctest::Contains("out-of-domain"), Error);
  }
}

TEST_CASE("verifier treats existential blocks as per-assignment witnesses") {
  ChcSystem sys;
  sys.sig.sorts = {"Nat"};
  sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
  sys.sig.ctors.push_back({"S", {"Nat"}, "Nat", {"pred_of"}});
  sys.sig.preds.push_back({"r", {"Nat", "Nat"}, false});

  Clause diag;
  diag.vars = {{"x", "Nat"}};
  diag.head = Literal::atom("r", {V("x"), V("x")});
  Clause query;  // for every x there must be a y with r(x,y) false
  query.vars = {{"x", "Nat"}};
  query.exvars = {{"y", "Nat"}};
  query.body = {L(Literal::atom("r", {V("x"), V("y")}))};
  sys.clauses = {diag, query};

  FiniteModel m;
  m.domains = {{"Nat", 2}};
  m.funcs["Z"][{}] = 0;
  m.funcs["S"][{0}] = 1;
  m.funcs["S"][{1}] = 0;
  m.preds["r"] = {{0, 0}, {1, 1}};
  CHECK(!verify_model(sys, m).has_value());

  m.preds["r"] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  auto bad = verify_model(sys, m);
  REQUIRE(bad.has_value());
  CHECK(bad->clause_index == 1);
  CHECK(bad->assignment == std::map<std::string, int>{{"x", 0}});
}

// ---------------------------------------------------------------------------
// Text form

TEST_CASE("model text form renders and parses back") {
  SUBCASE("even model") {
    ChcSystem sys = pipelined(kEvenText);
    FiniteModel m = even_model2();
    std::string text = render_model(m, sys.sig);
    CHECK(text ==
          "sort Nat = {0,1}\n"
          "fun Z: ()->0\n"
          "fun S: 0->1, 1->0\n"
          "pred even = {(0)}\n");
    CHECK(parse_model(text) == m);
  }
  SUBCASE("mod-3 model orders predicates by declaration") {
    ChcSystem sys = pipelined(kIncDecText);
    FiniteModel m = mod3_model();
    std::string text = render_model(m, sys.sig);
    CHECK(text ==
          "sort Nat = {0,1,2}\n"
          "fun Z: ()->0\n"
          "fun S: 0->1, 1->2, 2->0\n"
          "pred inc = {(0,1), (1,2), (2,0)}\n"
          "pred dec = {(0,2), (1,0), (2,1)}\n");
    CHECK(parse_model(text) == m);
  }
  SUBCASE("binary constructor tuples") {
    ChcSystem sys = pipelined(kEvenLeftText);
    FiniteModel m = evenleft_model2();
    std::string text = render_model(m, sys.sig);
    CHECK(text ==
          "sort Tree = {0,1}\n"
          "fun leaf: ()->0\n"
          "fun node: (0,0)->1, (0,1)->1, (1,0)->0, (1,1)->0\n"
          "pred evenLeft = {(0)}\n");
    CHECK(parse_model(text) == m);
  }
  SUBCASE("comments and blank lines are skipped") {
    FiniteModel m = parse_model(
        "# a model\n"
        "\n"
        "sort Nat = {0,1}\n"
        "fun Z: ()->1\n"
        "pred p = {}\n");
    CHECK(m.domains.at("Nat") == 2);
    CHECK(m.funcs.at("Z").at({}) == 1);
    CHECK(m.preds.at("p").empty());
  }
  SUBCASE("rendering without a table is an error") {
    FiniteModel m = even_model2();
    m.funcs.erase("Z");
    CHECK_THROWS_WITH_AS(render_model(m, pipelined(kEvenText).sig),
                         doctest::Contains("does not define function Z"),
                         Error);
  }
  SUBCASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_model("sort Nat = {1,2}\n"),
                         doctest::Contains("model line 1"), Error);
    CHECK_THROWS_WITH_AS(parse_model("sort Nat = {0}\nsort Nat = {0}\n"),
                         doctest::Contains("duplicate sort"), Error);
    CHECK_THROWS_WITH_AS(parse_model("fun S: 0->1, 0->2\n"),
                         doctest::Contains("duplicate table entry"), Error);
    CHECK_THROWS_WITH_AS(parse_model("table Z: 0\n"),
                         doctest::Contains("expected 'sort'"), Error);
    CHECK_THROWS_WITH_AS(parse_model("pred p = {(0)} junk\n"),
                         doctest::Contains("trailing text"), Error);
    CHECK_THROWS_WITH_AS(parse_model("sort Nat = {}\n"),
                         doctest::Contains("empty domain"), Error);
  }
}

// ---------------------------------------------------------------------------
// Search

TEST_CASE("search finds the swap model for the even system") {
  ChcSystem sys = pipelined(kEvenText);
  SearchBudget b;

  SearchResult r1 = find_model(sys, nat_card(1), b);
  CHECK(r1.status == SearchStatus::NoModelAtThisSize);
  CHECK(!r1.model.has_value());

  SearchResult r2 = find_model(sys, nat_card(2), b);
  REQUIRE(r2.status == SearchStatus::Model);
  REQUIRE(r2.model.has_value());
  CHECK(*r2.model == even_model2());
  CHECK(!verify_model(sys, *r2.model).has_value());
  CHECK(r2.nodes > 0);

  // byte-for-byte deterministic
  SearchResult again = find_model(sys, nat_card(2), b);
  CHECK(again.status == SearchStatus::Model);
  CHECK(*again.model == *r2.model);
  CHECK(again.nodes == r2.nodes);
}

TEST_CASE("search reproduces the irreflexive diseq model") {
  ChcSystem sys = pipelined(kDiseqZZText);
  REQUIRE(sys.clauses.size() == 4);
  SearchBudget b;

  CHECK(find_model(sys, nat_card(1), b).status ==
        SearchStatus::NoModelAtThisSize);
  SearchResult r = find_model(sys, nat_card(2), b);
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(*r.model == diseq_zz_model2());
  CHECK(!verify_model(sys, *r.model).has_value());
  CHECK(render_model(*r.model, sys.sig) ==
        "sort Nat = {0,1}\n"
        "fun Z: ()->0\n"
        "fun S: 0->1, 1->1\n"
        "pred diseq_Nat = {(0,1), (1,0), (1,1)}\n");
}

TEST_CASE("search finds the mod-3 model for the inc/dec system") {
  ChcSystem sys = pipelined(kIncDecText);
  SearchBudget b;

  CHECK(find_model(sys, nat_card(1), b).status ==
        SearchStatus::NoModelAtThisSize);
  CHECK(find_model(sys, nat_card(2), b).status ==
        SearchStatus::NoModelAtThisSize);
  SearchResult r = find_model(sys, nat_card(3), b);
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(*r.model == mod3_model());
  CHECK(!verify_model(sys, *r.model).has_value());
}

TEST_CASE("search finds the two-state tree model") {
  ChcSystem sys = pipelined(kEvenLeftText);
  SearchBudget b;

  CHECK(find_model(sys, {{"Tree", 1}}, b).status ==
        SearchStatus::NoModelAtThisSize);
  SearchResult r = find_model(sys, {{"Tree", 2}}, b);
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(*r.model == evenleft_model2());
  CHECK(!verify_model(sys, *r.model).has_value());
}

TEST_CASE("a derivable query kills every small candidate") {
  ChcSystem sys = pipelined(kNeqZSZText);
  SearchBudget b;
  for (int k = 1; k <= 4; ++k) {
    SearchResult r = find_model(sys, nat_card(k), b);
    CHECK(r.status == SearchStatus::NoModelAtThisSize);
  }
}

TEST_CASE("reflexivity-forcing systems exhaust every small cardinality") {
  SearchBudget b;
  b.max_total = 4;
  for (const char* text : {kDiagText, kLtGtText}) {
    CAPTURE(text);
    ChcSystem sys = pipelined(text);
    auto sched = cardinality_schedule(sys.sig, b);
    REQUIRE(sched.size() == 4);
    for (const auto& card : sched) {
      SearchResult r = find_model(sys, card, b);
      CHECK(r.status == SearchStatus::NoModelAtThisSize);
    }
  }
}

TEST_CASE("predicates come back least: nothing forces p, so p is empty") {
  ChcSystem sys;
  sys.sig.sorts = {"Nat"};
  sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
  sys.sig.ctors.push_back({"S", {"Nat"}, "Nat", {"pred_of"}});
  sys.sig.preds.push_back({"p", {"Nat"}, false});
  Clause q;
  q.body = {L(Literal::atom("p", {A("S", {A("Z")})}))};
  sys.clauses = {q};

  SearchResult r = find_model(sys, nat_card(1), SearchBudget{});
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(r.model->preds.at("p").empty());
  CHECK(r.model->funcs.at("Z").at({}) == 0);
  CHECK(r.model->funcs.at("S").at({0}) == 0);
}

TEST_CASE("skolemized forall-exists property gets a model with witnesses") {
  ChcSystem sys = pipelined(kStlcText);
  REQUIRE(sys.sig.funcs.size() == 2);  // one witness function per inner var
  SearchBudget b;

  CHECK(find_model(sys,
                   {{"Var", 1}, {"Type", 1}, {"Expr", 1}, {"Env", 1}}, b)
            .status == SearchStatus::NoModelAtThisSize);

  SearchResult r = find_model(
      sys, {{"Var", 1}, {"Type", 2}, {"Expr", 1}, {"Env", 2}}, b);
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(r.model->funcs.size() == sys.sig.ctors.size() + sys.sig.funcs.size());
  CHECK(!verify_model(sys, *r.model).has_value());
}

TEST_CASE("search rejects systems it cannot ground soundly") {
  SUBCASE("cardinality must cover every sort") {
    ChcSystem sys = pipelined(kEvenText);
    CHECK_THROWS_WITH_AS(find_model(sys, {{"List", 2}}, SearchBudget{}),
                         doctest::Contains("positive size"), Error);
  }
  SUBCASE("equational bodies are not searchable") {
    ChcSystem sys = load_system(kEvenText);  // not pipelined
    CHECK_THROWS_WITH_AS(find_model(sys, nat_card(2), SearchBudget{}),
                         doctest::Contains("positive predicate atom"), Error);
  }
  SUBCASE("existential variables are not searchable") {
    ChcSystem sys;
    sys.sig.sorts = {"Nat"};
    sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
    sys.sig.preds.push_back({"r", {"Nat", "Nat"}, false});
    Clause q;
    q.vars = {{"x", "Nat"}};
    q.exvars = {{"y", "Nat"}};
    q.body = {L(Literal::atom("r", {V("x"), V("y")}))};
    sys.clauses = {q};
    CHECK_THROWS_WITH_AS(find_model(sys, nat_card(2), SearchBudget{}),
                         doctest::Contains("Skolemized"), Error);
  }
  SUBCASE("selector applications are not searchable") {
    ChcSystem sys;
    sys.sig.sorts = {"Nat"};
    sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
    sys.sig.ctors.push_back({"S", {"Nat"}, "Nat", {"pred_of"}});
    sys.sig.preds.push_back({"p", {"Nat"}, false});
    Clause c;
    c.vars = {{"x", "Nat"}};
    c.body = {L(Literal::atom("p", {Term::sel("pred_of", V("x"))}))};
    sys.clauses = {c};
    CHECK_THROWS_WITH_AS(find_model(sys, nat_card(2), SearchBudget{}),
                         doctest::Contains("selector"), Error);
  }
  SUBCASE("too many ground instances") {
    ChcSystem sys;
    sys.sig.sorts = {"Nat"};
    sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
    sys.sig.preds.push_back({"p", {"Nat"}, false});
    Clause c;
    for (int i = 0; i < 9; ++i) c.vars["x" + std::to_string(i)] = "Nat";
    c.head = Literal::atom("p", {V("x0")});
    sys.clauses = {c};
    CHECK_THROWS_WITH_AS(find_model(sys, nat_card(8), SearchBudget{}),
                         doctest::Contains("too many ground instances"),
                         Error);
  }
}

TEST_CASE("seeds shuffle value order but never the verdict") {
  ChcSystem even = pipelined(kEvenText);
  ChcSystem refuted = pipelined(kNeqZSZText);
  for (uint64_t seed : {0ull, 1ull, 42ull, 1337ull}) {
    CAPTURE(seed);
    SearchBudget b;
    b.seed = seed;
    SearchResult r = find_model(even, nat_card(2), b);
    REQUIRE(r.status == SearchStatus::Model);
    CHECK(!verify_model(even, *r.model).has_value());
    CHECK(find_model(refuted, nat_card(2), b).status ==
          SearchStatus::NoModelAtThisSize);
  }
}

TEST_CASE("symmetry pinning keeps verdicts and the pinned origin") {
  SearchBudget b;
  b.symmetry = true;

  ChcSystem even = pipelined(kEvenText);
  SearchResult r = find_model(even, nat_card(2), b);
  REQUIRE(r.status == SearchStatus::Model);
  CHECK(r.model->funcs.at("Z").at({}) == 0);
  CHECK(!verify_model(even, *r.model).has_value());

  ChcSystem diag = pipelined(kDiagText);
  CHECK(find_model(diag, nat_card(3), b).status ==
        SearchStatus::NoModelAtThisSize);
}

TEST_CASE("a time budget interrupts instead of exhausting") {
  ChcSystem sys = pipelined(kDiagText);
  SearchBudget b;
  b.time_limit = std::chrono::milliseconds(10);
  SearchResult r = find_model(sys, nat_card(8), b);
  CHECK(r.status == SearchStatus::TimedOut);
  CHECK(!r.model.has_value());
}

// ---------------------------------------------------------------------------
// Random systems, cross-checked against a brute-force enumerator that knows
// nothing about the search: it tries every table and every predicate subset.

namespace {

struct BruteModel {
  int k = 1;
  int z = 0;
  std::vector<int> s;               // successor table
  std::set<int> p;                  // unary predicate
  std::set<std::vector<int>> q;     // binary predicate
};

int brute_eval(const BruteModel& bm, const Term& t,
               const std::map<std::string, int>& asg) {
  if (t.kind == Term::Kind::Var) return asg.at(t.name);
  if (t.name == "Z") return bm.z;
  return bm.s[brute_eval(bm, t.args[0], asg)];
}

bool brute_atom(const BruteModel& bm, const Literal& l,
                const std::map<std::string, int>& asg) {
  if (l.name == "p") return bm.p.count(brute_eval(bm, l.args[0], asg)) > 0;
  return bm.q.count({brute_eval(bm, l.args[0], asg),
                     brute_eval(bm, l.args[1], asg)}) > 0;
}

bool brute_satisfies(const BruteModel& bm, const ChcSystem& sys) {
  for (const Clause& cl : sys.clauses) {
    std::vector<std::string> names;
    for (const auto& [n, sort] : cl.vars) names.push_back(n);
    std::vector<int> idx(names.size(), 0);
    for (bool done = false; !done;) {
      std::map<std::string, int> asg;
      for (size_t i = 0; i < names.size(); ++i) asg[names[i]] = idx[i];
      bool body = true;
      for (const Formula& f : cl.body)
        if (!brute_atom(bm, f.atom, asg)) {
          body = false;
          break;
        }
      if (body && !(cl.head && brute_atom(bm, *cl.head, asg))) return false;
      done = true;
      for (size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] < bm.k) {
          done = false;
          break;
        }
        idx[i] = 0;
      }
    }
  }
  return true;
}

bool brute_exists(const ChcSystem& sys, int k) {
  BruteModel bm;
  bm.k = k;
  int pairs = k * k;
  for (bm.z = 0; bm.z < k; ++bm.z) {
    int stables = 1;
    for (int i = 0; i < k; ++i) stables *= k;
    for (int st = 0; st < stables; ++st) {
      bm.s.assign(k, 0);
      int rest = st;
      for (int i = 0; i < k; ++i) {
        bm.s[i] = rest % k;
        rest /= k;
      }
      for (int pm = 0; pm < (1 << k); ++pm) {
        bm.p.clear();
        for (int i = 0; i < k; ++i)
          if (pm & (1 << i)) bm.p.insert(i);
        for (int qm = 0; qm < (1 << pairs); ++qm) {
          bm.q.clear();
          for (int i = 0; i < pairs; ++i)
            if (qm & (1 << i)) bm.q.insert({i / k, i % k});
          if (brute_satisfies(bm, sys)) return true;
        }
      }
    }
  }
  return false;
}

ChcSystem random_system(uint32_t round) {
  std::mt19937 rng(0xACE5 + round * 2654435761u);
  auto rnd = [&](int n) { return static_cast<int>(rng() % n); };

  ChcSystem sys;
  sys.sig.sorts = {"Nat"};
  sys.sig.ctors.push_back({"Z", {}, "Nat", {}});
  sys.sig.ctors.push_back({"S", {"Nat"}, "Nat", {"pred_of"}});
  sys.sig.preds.push_back({"p", {"Nat"}, false});
  sys.sig.preds.push_back({"q", {"Nat", "Nat"}, false});

  int nv = 1 + rnd(3);
  auto rand_term = [&]() -> Term {
    switch (rnd(4)) {
      case 0: return V("x" + std::to_string(rnd(nv)));
      case 1: return A("Z");
      case 2: return A("S", {V("x" + std::to_string(rnd(nv)))});
      default: return A("S", {A("Z")});
    }
  };
  auto rand_atom = [&]() -> Literal {
    if (rnd(2) == 0) return Literal::atom("p", {rand_term()});
    return Literal::atom("q", {rand_term(), rand_term()});
  };
  auto fresh_clause = [&]() {
    Clause cl;
    for (int v = 0; v < nv; ++v) cl.vars["x" + std::to_string(v)] = "Nat";
    return cl;
  };

  int defs = 2 + rnd(4);
  for (int i = 0; i < defs; ++i) {
    Clause cl = fresh_clause();
    int atoms = rnd(3);
    for (int a = 0; a < atoms; ++a) cl.body.push_back(L(rand_atom()));
    cl.head = rand_atom();
    sys.clauses.push_back(std::move(cl));
  }
  if (rnd(2) == 0) {
    Clause cl = fresh_clause();
    int atoms = 1 + rnd(2);
    for (int a = 0; a < atoms; ++a) cl.body.push_back(L(rand_atom()));
    sys.clauses.push_back(std::move(cl));
  }
  return sys;
}

}  // namespace

TEST_CASE("random systems agree with brute-force existence") {
  for (uint32_t round = 0; round < 200; ++round) {
    CAPTURE(round);
    ChcSystem sys = random_system(round);
    for (int k = 1; k <= 2; ++k) {
      SearchResult r = find_model(sys, nat_card(k), SearchBudget{});
      bool expect = brute_exists(sys, k);
      REQUIRE(r.status == (expect ? SearchStatus::Model
                                  : SearchStatus::NoModelAtThisSize));
      if (r.model) REQUIRE(!verify_model(sys, *r.model).has_value());
    }
  }
}
