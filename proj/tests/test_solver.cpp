// Portfolio solver: interleaved model search and refutation, certified
// verdicts, rendering, and the fixture corpus runner.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "horncat/automata.hpp"
#include "horncat/solver.hpp"

using namespace horncat;
using std::chrono::milliseconds;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(HORNCAT_FIXTURES) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Term s_pow(int n) {
  Term t = Term::app("Z", {});
  for (int i = 0; i < n; ++i) t = Term::app("S", {t});
  return t;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("even solves sat with the two element parity model") {
  SolveOutput out = solve_text(read_fixture("even.smt2"), {});
  REQUIRE(out.verdict.kind == VerdictKind::Sat);
  REQUIRE(out.verdict.model.has_value());
  CHECK(total_cardinality(out.verdict.model->domains) == 2);
  CHECK(out.verdict.theorem1.ok());
  CHECK(out.verdict.herbrand.all_ok());
  CHECK(out.verdict.elapsed.count() >= 0);

  REQUIRE(out.verdict.automata.count("even") == 1);
  std::vector<std::vector<Term>> want;
  for (int n = 0; n <= 4; n += 2) want.push_back({s_pow(n)});
  CHECK(enumerate_accepted(out.preprocessed.sig,
                           out.verdict.automata.at("even"), 6) == want);

  RenderedVerdict r = render_verdict(out);
  CHECK(r.verdict_line == "sat");
  CHECK(r.exit_code == 0);
  CHECK(r.payload.substr(0, 17) == "sort Nat = {0,1}\n");
  CHECK(r.payload.find("automaton even : Nat\n") != std::string::npos);
}

TEST_CASE("the unsat fixture refutes at height two with the frozen derivation") {
  RunConfig cfg;
  cfg.time_limit = milliseconds{0};  // unlimited; slicing alone keeps it fair
  SolveOutput out = solve_text(read_fixture("neq_zsz.smt2"), cfg);
  REQUIRE(out.verdict.kind == VerdictKind::Unsat);
  CHECK(out.verdict.refuted_at_height == 2);
  REQUIRE(out.verdict.derivation.has_value());
  CHECK(out.verdict.derivation->steps.size() == 2);
  CHECK(!out.verdict.model.has_value());

  RenderedVerdict r = render_verdict(out);
  CHECK(r.verdict_line == "unsat");
  CHECK(r.exit_code == 0);
  CHECK(r.payload ==
        "[1] diseq_Nat(Z, S(Z)) by clause 1 with {b1:=Z} using []\n"
        "[2] FALSE by clause 0 with {} using [1]\n");
}

TEST_CASE("systems with neither a small model nor a refutation exhaust to unknown") {
  RunConfig cfg;
  cfg.max_total = 4;
  cfg.refute_height = 5;
  for (const char* name : {"diag.smt2", "ltgt.smt2"}) {
    CAPTURE(name);
    SolveOutput out = solve_text(read_fixture(name), cfg);
    CHECK(out.verdict.kind == VerdictKind::Unknown);
    CHECK(out.verdict.cards_exhausted_total == 4);
    CHECK(out.verdict.heights_exhausted_to == 5);
    CHECK(!out.verdict.timed_out);
    CHECK(!out.verdict.model.has_value());
    CHECK(!out.verdict.derivation.has_value());

    RenderedVerdict r = render_verdict(out);
    CHECK(r.verdict_line == "unknown");
    CHECK(r.exit_code == 2);
    CHECK(r.payload ==
          "# no model at any cardinality with total <= 4\n"
          "# no refutation at any chaining height <= 5\n");
  }
}

TEST_CASE("the type checker fixture solves sat at the expected cardinalities") {
  RunConfig cfg;
  cfg.max_total = 6;
  cfg.check_height = 3;
  SolveOutput out = solve_text(read_fixture("stlc.smt2"), cfg);
  REQUIRE(out.verdict.kind == VerdictKind::Sat);
  const std::map<std::string, int> want = {
      {"Env", 2}, {"Expr", 1}, {"Type", 2}, {"Var", 1}};
  CHECK(out.verdict.model->domains == want);
  CHECK(out.verdict.theorem1.ok());
  CHECK(out.verdict.herbrand.all_ok());

  // arrow on the two type values acts as implication, up to which element
  // plays "true"
  const auto& arrow = out.verdict.model->funcs.at("arrow");
  auto implication_with_true = [&](int t) {
    int f = 1 - t;
    return arrow.at({f, f}) == t && arrow.at({f, t}) == t &&
           arrow.at({t, t}) == t && arrow.at({t, f}) == f;
  };
  CHECK((implication_with_true(0) || implication_with_true(1)));
}

TEST_CASE("certify_sat rejects corrupted models") {
  RunConfig cfg;
  SolveOutput out = solve_text(read_fixture("even.smt2"), cfg);
  REQUIRE(out.verdict.kind == VerdictKind::Sat);

  FiniteModel extra_row = *out.verdict.model;
  extra_row.preds.at("even").insert({1});
  CHECK_THROWS_AS(certify_sat(out.original, out.preprocessed, extra_row, cfg),
                  InternalError);

  FiniteModel bent_cell = *out.verdict.model;
  bent_cell.funcs.at("S").at({0}) = 0;
  CHECK_THROWS_AS(certify_sat(out.original, out.preprocessed, bent_cell, cfg),
                  InternalError);

  Verdict ok =
      certify_sat(out.original, out.preprocessed, *out.verdict.model, cfg);
  CHECK(ok.kind == VerdictKind::Sat);
}

TEST_CASE("certify_unsat rejects tampered derivations") {
  RunConfig cfg;
  SolveOutput out = solve_text(read_fixture("neq_zsz.smt2"), cfg);
  REQUIRE(out.verdict.kind == VerdictKind::Unsat);
  const Derivation& good = *out.verdict.derivation;

  Derivation wrong_head = good;
  wrong_head.steps[0].args = {s_pow(0), s_pow(0)};
  CHECK_THROWS_WITH_AS(certify_unsat(out.preprocessed, wrong_head, 2),
                       doctest::Contains("does not replay"), InternalError);

  Derivation wrong_premise = good;
  wrong_premise.steps[1].premises = {5};
  CHECK_THROWS_AS(certify_unsat(out.preprocessed, wrong_premise, 2),
                  InternalError);

  Derivation truncated = good;
  truncated.steps.pop_back();
  CHECK_THROWS_AS(certify_unsat(out.preprocessed, truncated, 2),
                  InternalError);

  Derivation wrong_value = good;
  wrong_value.steps[0].assignment.at("b1") = s_pow(1);
  CHECK_THROWS_AS(certify_unsat(out.preprocessed, wrong_value, 2),
                  InternalError);

  Verdict ok = certify_unsat(out.preprocessed, good, 2);
  CHECK(ok.kind == VerdictKind::Unsat);
}

TEST_CASE("rendered output is byte identical across repeated runs") {
  auto render = [](const std::string& text, const RunConfig& cfg) {
    return render_verdict(solve_text(text, cfg));
  };
  const std::string even = read_fixture("even.smt2");
  RenderedVerdict a = render(even, {});
  RenderedVerdict b = render(even, {});
  CHECK(a.verdict_line == b.verdict_line);
  CHECK(a.payload == b.payload);

  const std::string neq = read_fixture("neq_zsz.smt2");
  RenderedVerdict c = render(neq, {});
  RenderedVerdict d = render(neq, {});
  CHECK(c.payload == d.payload);

  RunConfig small;
  small.max_total = 2;
  small.refute_height = 2;
  const std::string diag = read_fixture("diag.smt2");
  RenderedVerdict e = render(diag, small);
  RenderedVerdict f = render(diag, small);
  CHECK(e.verdict_line == "unknown");
  CHECK(e.payload == f.payload);
  CHECK(e.payload ==
        "# no model at any cardinality with total <= 2\n"
        "# no refutation at any chaining height <= 2\n");
}

TEST_CASE("a tiny time limit yields unknown with a timeout note") {
  RunConfig cfg;
  cfg.max_total = 24;
  cfg.refute_height = 50;
  cfg.time_limit = milliseconds{1};
  SolveOutput out = solve_text(read_fixture("diag.smt2"), cfg);
  REQUIRE(out.verdict.kind == VerdictKind::Unknown);
  CHECK(out.verdict.timed_out);

  RenderedVerdict r = render_verdict(out);
  CHECK(r.verdict_line == "unknown");
  CHECK(r.exit_code == 2);
  CHECK(r.payload.find("# timed out\n") != std::string::npos);
}

TEST_CASE("solve validates its configuration") {
  const std::string even = read_fixture("even.smt2");
  RunConfig zero_card;
  zero_card.max_total = 0;
  CHECK_THROWS_WITH_AS(solve_text(even, zero_card),
                       doctest::Contains("bounds must be positive"), Error);
  RunConfig zero_height;
  zero_height.refute_height = 0;
  CHECK_THROWS_AS(solve_text(even, zero_height), Error);
  RunConfig zero_check;
  zero_check.check_height = 0;
  CHECK_THROWS_AS(solve_text(even, zero_check), Error);
  RunConfig neg_time;
  neg_time.time_limit = milliseconds{-5};
  CHECK_THROWS_WITH_AS(solve_text(even, neg_time),
                       doctest::Contains("time limit"), Error);
}

TEST_CASE("the bundled corpus matches every sidecar") {
  CorpusSummary sum = run_corpus(HORNCAT_FIXTURES, {});
  REQUIRE(sum.rows.size() == 8);
  CHECK(sum.skipped.empty());
  CHECK(sum.all_match());
  int sat = 0, unsat = 0, unknown = 0;
  for (const CorpusRow& r : sum.rows) {
    CAPTURE(r.name);
    CHECK(r.seconds >= 0.0);
    sat += r.got == "sat";
    unsat += r.got == "unsat";
    unknown += r.got == "unknown";
    if (r.name == "even") CHECK(r.model_size == 2);
    if (r.name == "incdec") CHECK(r.model_size == 3);
    if (r.name == "stlc") CHECK(r.model_size == 6);
  }
  CHECK(sat == 5);
  CHECK(unsat == 1);
  CHECK(unknown == 2);

  std::string tbl = sum.table();
  CHECK(tbl.find("MISMATCH") == std::string::npos);
  CHECK(tbl.find("8 fixtures: 5 sat, 1 unsat, 2 unknown; 0 mismatches") !=
        std::string::npos);
}

TEST_CASE("the corpus runner flags mismatches and skips unusable sidecars") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() /
                 ("horncat_solver_corpus_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string even = read_fixture("even.smt2");

  write_file(dir / "broken.smt2", "(this is not a script");
  write_file(dir / "broken.expected", "sat\n");
  write_file(dir / "odd_overrides.smt2", even);
  write_file(dir / "odd_overrides.expected", "sat\nmax_total=very\n");
  write_file(dir / "odd_verdict.smt2", even);
  write_file(dir / "odd_verdict.expected", "maybe\n");
  write_file(dir / "orphan.smt2", even);
  write_file(dir / "small.smt2", even);
  write_file(dir / "small.expected", "unknown\nmax_total=1 refute_height=2\n");
  write_file(dir / "wrong.smt2", even);
  write_file(dir / "wrong.expected", "unsat\n");
  write_file(dir / "notes.txt", "not an input");

  CorpusSummary sum = run_corpus(dir.string(), {});
  REQUIRE(sum.rows.size() == 3);
  CHECK(sum.rows[0].name == "broken");
  CHECK(sum.rows[0].got == "error");
  CHECK(!sum.rows[0].match);
  CHECK(sum.rows[1].name == "small");
  CHECK(sum.rows[1].got == "unknown");  // the override shrank the bounds
  CHECK(sum.rows[1].match);
  CHECK(sum.rows[2].name == "wrong");
  CHECK(sum.rows[2].got == "sat");
  CHECK(!sum.rows[2].match);
  CHECK(!sum.all_match());
  CHECK(sum.table().find("MISMATCH") != std::string::npos);

  REQUIRE(sum.skipped.size() == 3);
  CHECK(sum.skipped[0] == "odd_overrides (bad sidecar overrides)");
  CHECK(sum.skipped[1] == "odd_verdict (bad sidecar verdict)");
  CHECK(sum.skipped[2] == "orphan (no sidecar)");

  fs::path empty = dir / "empty";
  fs::create_directories(empty);
  CorpusSummary none = run_corpus(empty.string(), {});
  CHECK(none.rows.empty());
  CHECK(none.skipped.empty());
  CHECK(none.all_match());
  CHECK(none.table().find("0 fixtures") != std::string::npos);

  fs::remove_all(dir);
}
