#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "horncat/automata.hpp"
#include "horncat/ir.hpp"
#include "horncat/model.hpp"
#include "horncat/preprocess.hpp"
#include "horncat/refuter.hpp"

namespace horncat {

struct RunConfig {
  int max_total = 8;      // largest sum of domain sizes the model search tries
  int refute_height = 6;  // largest chaining height bound the refuter tries
  int check_height = 4;   // automata / Herbrand check height on the sat path
  std::chrono::milliseconds time_limit{300000};  // zero: no limit
  uint64_t seed = 0;      // value-order seed for the model search
};

enum class VerdictKind { Sat, Unsat, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;

  // Sat: the verified model with its automata and both check reports.
  std::optional<FiniteModel> model;
  std::map<std::string, TreeAutomaton> automata;
  Theorem1Report theorem1;
  HerbrandCheckReport herbrand;

  // Unsat: the replayed derivation and the height bound that produced it.
  std::optional<Derivation> derivation;
  int refuted_at_height = 0;

  // Unknown: how much of each bound was fully exhausted before stopping.
  // cards_exhausted_total = T means every cardinality vector with total <= T
  // was proved model-free; heights_exhausted_to = H means chaining saturated
  // without a refutation at every height <= H. Zero: nothing completed.
  int cards_exhausted_total = 0;
  int heights_exhausted_to = 0;
  bool timed_out = false;

  std::chrono::milliseconds elapsed{0};
};

struct SolveOutput {
  Verdict verdict;
  ChcSystem original;      // loaded, Skolemized system (pre-pipeline)
  ChcSystem preprocessed;  // pipeline output the searches ran on
  PassReport passes;
};

// Parse + pipeline once, then interleave the cardinality schedule with
// refuter height bounds, round-robin with budget slices (time slices for the
// model search, step quanta for the refuter, each doubling when a slice runs
// out), until the first verified answer or both bounds are exhausted. The
// answer never depends on slice timing: cardinalities only advance on a
// completed no-model proof and heights only on completed saturation, so the
// model reported is the one at the first feasible cardinality and the
// derivation is the one at the lowest refutable height for this config+seed.
SolveOutput solve_text(const std::string& text, const RunConfig& cfg);

// Soundness gates. Both re-verify a search result with checks that do not
// trust the search: certify_sat runs verify_model, builds the automata, and
// requires theorem1_check and check_herbrand_model to pass at
// cfg.check_height; certify_unsat replays the derivation step by step
// against the clauses. A result that fails its gate throws InternalError,
// so it can never be rendered as an answer.
Verdict certify_sat(const ChcSystem& original, const ChcSystem& prepped,
                    const FiniteModel& model, const RunConfig& cfg);
Verdict certify_unsat(const ChcSystem& prepped, const Derivation& d,
                      int height);

// Text rendering: verdict_line is exactly "sat", "unsat", or "unknown";
// payload is the model plus every automaton (sat), the derivation (unsat),
// or comment lines naming the exhausted bounds (unknown). Exit codes:
// sat/unsat 0, unknown 2.
struct RenderedVerdict {
  std::string verdict_line;
  std::string payload;
  int exit_code = 2;
};
RenderedVerdict render_verdict(const SolveOutput& out);

// Fixture corpus runner: solves every *.smt2 under dir (sorted by name) and
// compares the verdict with its sidecar file (same name, .expected
// extension; first line sat|unsat|unknown, optional second line of
// key=value config overrides: max_total, refute_height, check_height,
// time_limit_s, seed). Fixtures without a usable sidecar are skipped and
// listed. model_size is the sum of all sort cardinalities when sat.
struct CorpusRow {
  std::string name;
  std::string expected;
  std::string got;
  bool match = false;
  double seconds = 0.0;
  int model_size = 0;
};
struct CorpusSummary {
  std::vector<CorpusRow> rows;
  std::vector<std::string> skipped;
  bool all_match() const;
  std::string table() const;
};
CorpusSummary run_corpus(const std::string& dir, const RunConfig& base);

}  // namespace horncat
