#include "horncat/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "horncat/frontend.hpp"

namespace horncat {

namespace {

int log_level() {
  static const int lvl = [] {
    const char* e = std::getenv("HORNCAT_LOG");
    if (!e || !*e) return 0;
    char* end = nullptr;
    long v = std::strtol(e, &end, 10);
    return (end && *end == '\0') ? static_cast<int>(v) : 1;
  }();
  return lvl;
}

void logln(const std::string& s) {
  if (log_level() >= 1) std::fprintf(stderr, "horncat: %s\n", s.c_str());
}

std::string card_to_string(const CardinalityVector& card) {
  std::string out = "{";
  bool first = true;
  for (const auto& [sort, n] : card) {
    if (!first) out += ", ";
    first = false;
    out += sort + ":" + std::to_string(n);
  }
  return out + "}";
}

// Structural replay of a derivation against the clauses it claims to use.
// Verifies the shape bounded_refute promises; shares nothing with the
// chainer's matching machinery.
std::string replay_error(const ChcSystem& sys, const Derivation& d) {
  if (d.steps.empty() || !d.steps.back().pred.empty())
    return "derivation does not end in FALSE";
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    const FactBase::Entry& s = d.steps[i];
    std::string at = "step " + std::to_string(i + 1) + ": ";
    if (s.clause_index >= sys.clauses.size())
      return at + "clause index out of range";
    const Clause& c = sys.clauses[s.clause_index];

    if (s.assignment.size() != c.vars.size())
      return at + "assignment does not cover the clause variables";
    for (const auto& [v, sort] : c.vars) {
      auto it = s.assignment.find(v);
      if (it == s.assignment.end()) return at + "no value for " + v;
      if (!it->second.is_ground())
        return at + "value for " + v + " is not ground";
    }

    std::vector<Literal> atoms = c.body_atoms();
    if (atoms.size() != s.premises.size())
      return at + "premise count differs from the body atom count";
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      std::size_t p = s.premises[k];
      if (p >= i) return at + "premise does not precede the step";
      Literal g = apply_subst(atoms[k], s.assignment);
      if (d.steps[p].pred != g.name || d.steps[p].args != g.args)
        return at + "premise " + std::to_string(p + 1) +
               " is not the substituted body atom";
    }

    if (s.pred.empty()) {
      if (!c.is_query()) return at + "FALSE step on a definite clause";
      if (i + 1 != d.steps.size()) return at + "FALSE before the last step";
    } else {
      if (!c.head) return at + "fact step on a query clause";
      Literal h = apply_subst(*c.head, s.assignment);
      if (h.name != s.pred || h.args != s.args)
        return at + "head instance differs from the recorded fact";
    }
  }
  return "";
}

Verdict run_portfolio(const ChcSystem& original, const ChcSystem& prepped,
                      const RunConfig& cfg) {
  using std::chrono::duration_cast;
  using std::chrono::milliseconds;
  using std::chrono::steady_clock;
  const auto t0 = steady_clock::now();
  const bool limited = cfg.time_limit.count() > 0;
  auto elapsed = [&] {
    return duration_cast<milliseconds>(steady_clock::now() - t0);
  };

  SearchBudget base;
  base.max_total = cfg.max_total;
  base.seed = cfg.seed;
  base.symmetry = true;
  const std::vector<CardinalityVector> schedule =
      cardinality_schedule(prepped.sig, base);

  std::size_t card_i = 0;
  int height = 1;
  milliseconds model_slice{100};
  milliseconds refute_slice{100};
  bool model_turn = true;

  auto finish = [&](Verdict v) {
    v.elapsed = elapsed();
    return v;
  };
  // Exhaustion reached so far. The schedule is total-ascending, so once
  // card_i points past every vector of total T, all of total <= T is proved.
  auto unknown_now = [&](bool timeout) {
    Verdict v;
    v.timed_out = timeout;
    v.cards_exhausted_total =
        card_i == schedule.size()
            ? cfg.max_total
            : total_cardinality(schedule[card_i]) - 1;
    v.heights_exhausted_to = height - 1;
    return finish(v);
  };

  while (card_i < schedule.size() || height <= cfg.refute_height) {
    if (limited && elapsed() >= cfg.time_limit) {
      logln("time limit reached");
      return unknown_now(true);
    }

    bool model_side = model_turn;
    if (card_i >= schedule.size()) model_side = false;
    if (height > cfg.refute_height) model_side = true;
    model_turn = !model_turn;

    if (model_side) {
      SearchBudget b = base;
      b.time_limit = model_slice;
      if (limited)
        b.time_limit = std::min(
            model_slice,
            std::max(milliseconds{1}, (cfg.time_limit - elapsed()) / 8));
      SearchResult r = find_model(prepped, schedule[card_i], b);
      if (r.status == SearchStatus::Model) {
        logln("model found at " + card_to_string(schedule[card_i]) + " after " +
              std::to_string(r.nodes) + " nodes");
        return finish(certify_sat(original, prepped, *r.model, cfg));
      }
      if (r.status == SearchStatus::NoModelAtThisSize) {
        logln("no model at " + card_to_string(schedule[card_i]));
        ++card_i;
      } else {
        logln("model slice of " + std::to_string(model_slice.count()) +
              " ms ran out at " + card_to_string(schedule[card_i]));
        model_slice *= 2;
      }
    } else {
      ChainLimits lim;
      lim.time_limit = refute_slice;
      if (limited)
        lim.time_limit =
            std::min(refute_slice,
                     std::max(milliseconds{1}, (cfg.time_limit - elapsed()) / 8));
      RefuteResult r = bounded_refute(prepped, height, lim);
      if (r.status == RefuteStatus::Refuted) {
        logln("refuted at height " + std::to_string(height) + " after " +
              std::to_string(r.steps) + " steps");
        return finish(certify_unsat(prepped, *r.derivation, height));
      }
      if (r.status == RefuteStatus::NotRefutedAtThisBound) {
        logln("not refuted at height " + std::to_string(height));
        ++height;
      } else {
        logln("refuter slice of " + std::to_string(lim.time_limit.count()) +
              " ms ran out at height " + std::to_string(height));
        refute_slice *= 2;
      }
    }
  }
  return unknown_now(false);
}

}  // namespace

Verdict certify_sat(const ChcSystem& original, const ChcSystem& prepped,
                    const FiniteModel& model, const RunConfig& cfg) {
  if (auto bad = verify_model(prepped, model))
    throw InternalError(
        "model search returned a structure that fails verification on "
        "clause " +
        std::to_string(bad->clause_index));
  Verdict v;
  v.kind = VerdictKind::Sat;
  v.automata = build_automata(model, prepped.sig, true);
  v.theorem1 = theorem1_check(model, v.automata, prepped.sig, cfg.check_height);
  if (!v.theorem1.ok())
    throw InternalError("automaton for " + v.theorem1.mismatch->first +
                        " disagrees with the model tables");
  v.herbrand = check_herbrand_model(original, v.automata, cfg.check_height,
                                    &model);
  if (!v.herbrand.all_ok())
    throw InternalError(
        "automata fail the original clauses at check height " +
        std::to_string(cfg.check_height));
  v.model = model;
  return v;
}

Verdict certify_unsat(const ChcSystem& prepped, const Derivation& d,
                      int height) {
  std::string err = replay_error(prepped, d);
  if (!err.empty()) throw InternalError("refutation does not replay: " + err);
  Verdict v;
  v.kind = VerdictKind::Unsat;
  v.derivation = d;
  v.refuted_at_height = height;
  return v;
}

SolveOutput solve_text(const std::string& text, const RunConfig& cfg) {
  if (cfg.max_total < 1 || cfg.refute_height < 1 || cfg.check_height < 1)
    throw Error("config: bounds must be positive");
  if (cfg.time_limit.count() < 0)
    throw Error("config: time limit must be >= 0");

  SolveOutput out;
  out.original = load_system(text);
  auto [prepped, report] = run_pipeline(out.original);
  out.preprocessed = std::move(prepped);
  out.passes = std::move(report);
  if (log_level() >= 2) std::fprintf(stderr, "%s", out.passes.to_string().c_str());
  out.verdict = run_portfolio(out.original, out.preprocessed, cfg);
  return out;
}

RenderedVerdict render_verdict(const SolveOutput& out) {
  const Verdict& v = out.verdict;
  RenderedVerdict r;
  switch (v.kind) {
    case VerdictKind::Sat:
      r.verdict_line = "sat";
      r.exit_code = 0;
      r.payload = render_model(*v.model, out.preprocessed.sig);
      for (const auto& [pred, a] : v.automata)
        r.payload += "\n" + serialize_automaton(a);
      break;
    case VerdictKind::Unsat:
      r.verdict_line = "unsat";
      r.exit_code = 0;
      r.payload = render_derivation(*v.derivation);
      break;
    case VerdictKind::Unknown:
      r.verdict_line = "unknown";
      r.exit_code = 2;
      if (v.cards_exhausted_total > 0)
        r.payload += "# no model at any cardinality with total <= " +
                     std::to_string(v.cards_exhausted_total) + "\n";
      if (v.heights_exhausted_to > 0)
        r.payload += "# no refutation at any chaining height <= " +
                     std::to_string(v.heights_exhausted_to) + "\n";
      if (v.timed_out) r.payload += "# timed out\n";
      break;
  }
  return r;
}

bool CorpusSummary::all_match() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const CorpusRow& r) { return r.match; });
}

std::string CorpusSummary::table() const {
  std::size_t w = 7;
  for (const CorpusRow& r : rows) w = std::max(w, r.name.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w)) << "fixture"
     << "  verdict  expected  time_s    size\n";
  int sat = 0, unsat = 0, unknown = 0, mismatches = 0;
  for (const CorpusRow& r : rows) {
    os << std::left << std::setw(static_cast<int>(w)) << r.name << "  "
       << std::setw(7) << r.got << "  " << std::setw(8) << r.expected << "  "
       << std::right << std::fixed << std::setprecision(2) << std::setw(6)
       << r.seconds << "  " << std::setw(6)
       << (r.got == "sat" ? std::to_string(r.model_size) : "-");
    if (!r.match) os << "  MISMATCH";
    os << "\n";
    sat += r.got == "sat";
    unsat += r.got == "unsat";
    unknown += r.got == "unknown";
    mismatches += !r.match;
  }
  os << rows.size() << " fixtures: " << sat << " sat, " << unsat << " unsat, "
     << unknown << " unknown; " << mismatches << " mismatches\n";
  for (const std::string& s : skipped) os << "skipped: " << s << "\n";
  return os.str();
}

namespace {

std::string trimmed(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// key=value overrides from a sidecar's second line. False on anything
// unrecognized so the fixture is skipped rather than run with a half-read
// config.
bool apply_overrides(const std::string& line, RunConfig& cfg) {
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    std::size_t eq = tok.find('=');
    if (eq == std::string::npos) return false;
    std::string key = tok.substr(0, eq);
    long long val = 0;
    try {
      val = std::stoll(tok.substr(eq + 1));
    } catch (const std::exception&) {
      return false;
    }
    if (key == "max_total")
      cfg.max_total = static_cast<int>(val);
    else if (key == "refute_height")
      cfg.refute_height = static_cast<int>(val);
    else if (key == "check_height")
      cfg.check_height = static_cast<int>(val);
    else if (key == "time_limit_s")
      cfg.time_limit = std::chrono::seconds(val);
    else if (key == "seed")
      cfg.seed = static_cast<uint64_t>(val);
    else
      return false;
  }
  return true;
}

}  // namespace

CorpusSummary run_corpus(const std::string& dir, const RunConfig& base) {
  namespace fs = std::filesystem;
  CorpusSummary sum;
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".smt2")
      inputs.push_back(e.path());
  std::sort(inputs.begin(), inputs.end());

  for (const fs::path& p : inputs) {
    std::string name = p.stem().string();
    fs::path side = p;
    side.replace_extension(".expected");
    std::ifstream sf(side);
    if (!sf) {
      sum.skipped.push_back(name + " (no sidecar)");
      continue;
    }
    std::string expect, overrides;
    std::getline(sf, expect);
    expect = trimmed(expect);
    if (expect != "sat" && expect != "unsat" && expect != "unknown") {
      sum.skipped.push_back(name + " (bad sidecar verdict)");
      continue;
    }
    RunConfig cfg = base;
    if (std::getline(sf, overrides) && !trimmed(overrides).empty() &&
        !apply_overrides(trimmed(overrides), cfg)) {
      sum.skipped.push_back(name + " (bad sidecar overrides)");
      continue;
    }

    std::ifstream in(p);
    std::ostringstream text;
    text << in.rdbuf();

    CorpusRow row;
    row.name = name;
    row.expected = expect;
    auto t0 = std::chrono::steady_clock::now();
    try {
      SolveOutput out = solve_text(text.str(), cfg);
      switch (out.verdict.kind) {
        case VerdictKind::Sat:
          row.got = "sat";
          row.model_size = total_cardinality(out.verdict.model->domains);
          break;
        case VerdictKind::Unsat:
          row.got = "unsat";
          break;
        case VerdictKind::Unknown:
          row.got = "unknown";
          break;
      }
    } catch (const Error& e) {
      logln(name + ": " + e.what());
      row.got = "error";
    }
    row.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    row.match = row.got == row.expected;
    sum.rows.push_back(std::move(row));
  }
  return sum;
}

}  // namespace horncat
