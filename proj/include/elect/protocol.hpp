#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elect/instance.hpp"
#include "elect/solution.hpp"
#include "elect/verify.hpp"

namespace elect::protocol {

enum class Strategy {
  BalancedPhragmms,
  SeqPhragmen,
  Mms,
  LazyMms,
  AdversarialOverweight,
  Malformed,
};

std::string strategy_name(Strategy s);

struct ProverSpec {
  Strategy strategy = Strategy::BalancedPhragmms;
  int submit_block = 1;
  double threshold = 0.0;
  std::string name;
};

// JSON array of {"strategy": ..., "submit_block": ..., "threshold"?, "name"?}.
std::vector<ProverSpec> parse_provers(const std::string& json_text);

struct Event {
  int block = 0;
  std::string actor;
  std::string action;
  std::optional<double> objective;
  std::string reason;
};

enum class Mode { FullCheck, Optimized };

struct Tentative {
  Solution<double> solution;
  std::string actor;
  int block = 0;
  double objective = 0.0;
  bool fully_verified = false;
};

struct ChainState {
  Mode mode = Mode::FullCheck;
  int window_end = 0;
  std::optional<Tentative> tentative;
  std::vector<Event> log;
};

struct WindowResult {
  std::optional<Solution<double>> winner;
  std::string winner_actor;
  bool extended = false;
  std::vector<Event> log;
};

// Process one submission at the given block under the state's admission mode.
// Full-check mode admits only solutions that are feasible, strictly better
// than the tentative winner, and pass full verification. Optimized mode runs
// full verification for the first admission only, then feasibility plus
// strict improvement.
void submit(const ElectionInstance& inst, ChainState& state, int block, const std::string& actor,
            const SolutionFile& file);

// Close the window. Full-check mode declares the tentative winner outright.
// Optimized mode first tests the parametric representation condition at the
// average support threshold; on failure it extends the window and repairs the
// winner with the local-search post-processor before declaring.
WindowResult finalize(const ElectionInstance& inst, ChainState& state, int extension_len);

// Sparsify a solution before submission; the positive edges of the result
// form a forest, so there are fewer than |voters| + k of them.
Solution<double> trim_and_submit(const ElectionInstance& inst, const Solution<double>& sol);

// Deterministic submission for a prover strategy, including the adversarial
// ones (doubled weights; an unknown committee name).
SolutionFile build_submission(const ElectionInstance& inst, const ProverSpec& spec);

WindowResult run_window(const ElectionInstance& inst, const std::vector<ProverSpec>& provers,
                        Mode mode, int window_len, int extension_len = -1);

std::string log_to_jsonl(const std::vector<Event>& log);

}  // namespace elect::protocol
