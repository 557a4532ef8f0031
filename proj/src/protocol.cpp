#include "elect/protocol.hpp"

#include <stdexcept>
#include <utility>

#include "elect/flow.hpp"
#include "elect/solvers.hpp"
#include "json.hpp"

namespace elect::protocol {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::BalancedPhragmms: return "balanced_phragmms";
    case Strategy::SeqPhragmen: return "seq_phragmen";
    case Strategy::Mms: return "mms";
    case Strategy::LazyMms: return "lazy_mms";
    case Strategy::AdversarialOverweight: return "adversarial_overweight";
    case Strategy::Malformed: return "malformed";
  }
  return "unknown";
}

static Strategy strategy_from_name(const std::string& raw) {
  std::string name = raw;
  for (char& ch : name)
    if (ch == '-') ch = '_';
  if (name == "balanced_phragmms") return Strategy::BalancedPhragmms;
  if (name == "seq_phragmen") return Strategy::SeqPhragmen;
  if (name == "mms") return Strategy::Mms;
  if (name == "lazy_mms") return Strategy::LazyMms;
  if (name == "adversarial_overweight") return Strategy::AdversarialOverweight;
  if (name == "malformed") return Strategy::Malformed;
  throw ValidationError("unknown prover strategy: " + raw);
}

std::vector<ProverSpec> parse_provers(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("prover spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("prover spec must be a JSON array");
  std::vector<ProverSpec> out;
  for (const auto& item : doc) {
    if (!item.is_object()) throw ValidationError("prover entry must be an object");
    if (!item.contains("strategy") || !item["strategy"].is_string())
      throw ValidationError("prover entry needs a string 'strategy'");
    ProverSpec spec;
    spec.strategy = strategy_from_name(item["strategy"].get<std::string>());
    if (!item.contains("submit_block") || !item["submit_block"].is_number_integer())
      throw ValidationError("prover entry needs an integer 'submit_block'");
    spec.submit_block = item["submit_block"].get<int>();
    if (item.contains("threshold")) spec.threshold = item["threshold"].get<double>();
    if (item.contains("name")) spec.name = item["name"].get<std::string>();
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw ValidationError("prover spec must list at least one prover");
  return out;
}

Solution<double> trim_and_submit(const ElectionInstance& inst, const Solution<double>& sol) {
  Solution<double> out = flow::trim_to_forest(inst, sol);
  int positive = 0;
  for (int e = 0; e < inst.num_edges(); ++e)
    if (out.is_member(inst.edge_candidate(e)) && out.weights[e] > 0.0) ++positive;
  if (positive >= inst.num_voters() + static_cast<int>(out.committee.size()))
    throw std::logic_error("trim_and_submit: trimmed solution is not forest-sized");
  return out;
}

SolutionFile build_submission(const ElectionInstance& inst, const ProverSpec& spec) {
  switch (spec.strategy) {
    case Strategy::BalancedPhragmms: {
      auto sol = solvers::solve_balanced_phragmms<double>(inst);
      return solution_to_file(inst, trim_and_submit(inst, sol));
    }
    case Strategy::SeqPhragmen: {
      auto sol = solvers::solve_seq_phragmen<double>(inst);
      return solution_to_file(inst, trim_and_submit(inst, sol));
    }
    case Strategy::Mms: {
      auto sol = solvers::solve_mms<double>(inst);
      return solution_to_file(inst, trim_and_submit(inst, sol));
    }
    case Strategy::LazyMms: {
      auto r = solvers::solve_lazy_mms<double>(inst, spec.threshold);
      // On failure the partial committee is submitted as is; the verifier
      // rejects it for its size.
      return solution_to_file(inst, r.solution);
    }
    case Strategy::AdversarialOverweight: {
      auto sol = trim_and_submit(inst, solvers::solve_balanced_phragmms<double>(inst));
      for (auto& w : sol.weights) w *= 2.0;
      sol.recompute_supports(inst);
      return solution_to_file(inst, sol);
    }
    case Strategy::Malformed: {
      SolutionFile file;
      file.committee.push_back("__nobody");
      return file;
    }
  }
  throw std::logic_error("build_submission: unhandled strategy");
}

void submit(const ElectionInstance& inst, ChainState& state, int block, const std::string& actor,
            const SolutionFile& file) {
  auto checked = verify::verify_file<double>(inst, file);
  Event ev;
  ev.block = block;
  ev.actor = actor;
  ev.action = "submitted";
  if (checked.solution) ev.objective = verify::recomputed_objective(inst, *checked.solution);
  state.log.push_back(ev);

  auto reject = [&](const std::string& reason) {
    Event r;
    r.block = block;
    r.actor = actor;
    r.action = "rejected";
    r.objective = ev.objective;
    r.reason = reason;
    state.log.push_back(std::move(r));
  };

  if (!checked.solution) {
    reject("malformed submission (" + checked.bind_error + "); submitter subject to fine");
    return;
  }
  const auto& rep = checked.report;
  if (!rep.feasible) {
    std::string what = rep.witness ? rep.witness->what : "infeasible";
    reject("infeasible submission (" + what + "); submitter subject to fine");
    return;
  }
  if (state.tentative &&
      !num<double>::approx_gt(rep.objective, state.tentative->objective)) {
    reject("objective does not improve on the tentative winner; no reward");
    return;
  }
  const bool need_full = state.mode == Mode::FullCheck || !state.tentative;
  if (need_full && !rep.pass()) {
    std::string what = rep.witness ? rep.witness->what : "verification failed";
    reject("fails verification (" + what + "); submitter subject to fine");
    return;
  }

  Event adm;
  adm.block = block;
  adm.actor = actor;
  adm.action = "admitted";
  adm.objective = rep.objective;
  if (state.tentative)
    adm.reason = "replaces tentative winner " + state.tentative->actor +
                 "; submitter eligible for reward";
  else
    adm.reason = need_full ? "passes full verification; submitter eligible for reward"
                           : "feasible and improving; submitter eligible for reward";
  state.log.push_back(std::move(adm));
  state.tentative = Tentative{std::move(*checked.solution), actor, block, rep.objective,
                              need_full ? rep.pass() : false};
}

WindowResult finalize(const ElectionInstance& inst, ChainState& state, int extension_len) {
  WindowResult out;
  if (extension_len < 0) extension_len = inst.committee_size();
  const int end = state.window_end;
  if (!state.tentative) {
    Event ev;
    ev.block = end;
    ev.actor = "chain";
    ev.action = "declared_winner";
    ev.reason = "no admissible submission in the window";
    state.log.push_back(std::move(ev));
    out.log = state.log;
    return out;
  }

  auto declare = [&](int block, const std::string& reason) {
    Event ev;
    ev.block = block;
    ev.actor = state.tentative->actor;
    ev.action = "declared_winner";
    ev.objective = state.tentative->objective;
    ev.reason = reason;
    state.log.push_back(std::move(ev));
    out.winner = state.tentative->solution;
    out.winner_actor = state.tentative->actor;
    out.log = state.log;
  };

  if (state.mode == Mode::FullCheck) {
    declare(end, "official winner; fully verified; eligible for reward");
    return out;
  }

  const double t_hat = inst.total_stake<double>() / inst.committee_size();
  if (verify::pjr_condition(inst, state.tentative->solution, t_hat)) {
    declare(end, "official winner; representation check at average support passed");
    return out;
  }

  Event ext;
  ext.block = end;
  ext.actor = "chain";
  ext.action = "window_extended";
  ext.objective = state.tentative->objective;
  ext.reason = "tentative winner fails representation check at average support; window extended " +
               std::to_string(extension_len) + " blocks for local-search repair";
  state.log.push_back(std::move(ext));
  out.extended = true;

  auto repaired =
      solvers::ls_pjr<double>(inst, state.tentative->solution, std::nullopt);
  const int repair_block = end + extension_len;
  double obj = verify::recomputed_objective(inst, repaired.solution);
  Event adm;
  adm.block = repair_block;
  adm.actor = "chain:local_search";
  adm.action = "admitted";
  adm.objective = obj;
  adm.reason = "local-search repair of the tentative winner; objective cannot decrease";
  state.log.push_back(std::move(adm));
  state.tentative = Tentative{std::move(repaired.solution), "chain:local_search", repair_block,
                              obj, false};
  declare(repair_block, "official winner; repaired solution satisfies the representation check");
  return out;
}

WindowResult run_window(const ElectionInstance& inst, const std::vector<ProverSpec>& provers,
                        Mode mode, int window_len, int extension_len) {
  if (provers.empty()) throw ValidationError("run_window: at least one prover required");
  if (window_len < 1) throw ValidationError("run_window: window must span at least one block");
  for (const auto& p : provers)
    if (p.submit_block < 1 || p.submit_block > window_len)
      throw ValidationError("run_window: submit_block outside the window");

  ChainState state;
  state.mode = mode;
  state.window_end = window_len;
  for (int block = 1; block <= window_len; ++block) {
    for (size_t i = 0; i < provers.size(); ++i) {
      if (provers[i].submit_block != block) continue;
      std::string actor = provers[i].name.empty()
                              ? "p" + std::to_string(i) + ":" + strategy_name(provers[i].strategy)
                              : provers[i].name;
      submit(inst, state, block, actor, build_submission(inst, provers[i]));
    }
  }
  return finalize(inst, state, extension_len);
}

std::string log_to_jsonl(const std::vector<Event>& log) {
  std::string out;
  for (const Event& ev : log) {
    nlohmann::ordered_json j;
    j["block"] = ev.block;
    j["actor"] = ev.actor;
    j["action"] = ev.action;
    if (ev.objective) j["objective"] = *ev.objective;
    j["reason"] = ev.reason;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace elect::protocol
