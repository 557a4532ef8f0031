#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "elect/instance.hpp"
#include "elect/json_util.hpp"
#include "elect/numeric.hpp"
#include "elect/phragmms.hpp"
#include "elect/solution.hpp"

namespace elect::verify {

template <class W>
struct VerifyWitness {
  std::string what;
  VoterId voter = -1;
  CandidateId candidate = -1;
  int edge = -1;
  W expected{};
  W actual{};
};

template <class W>
struct VerifyReport {
  bool feasible = false;
  bool balanced = false;
  bool local_optimal = false;
  std::optional<std::pair<W, bool>> pjr;
  W objective{};
  std::optional<VerifyWitness<W>> witness;
  long edge_visits = 0;
  bool pass() const { return feasible && balanced && local_optimal; }
};

template <class W>
W recomputed_objective(const ElectionInstance& inst, const Solution<W>& sol) {
  if (sol.committee.empty()) return W(0);
  std::vector<W> supp(inst.num_candidates(), W(0));
  for (int e = 0; e < inst.num_edges(); ++e)
    if (sol.is_member(inst.edge_candidate(e))) supp[inst.edge_candidate(e)] += sol.weights[e];
  W best = supp[sol.committee.front()];
  for (CandidateId c : sol.committee)
    if (supp[c] < best) best = supp[c];
  return best;
}

// Full admission test on an untrusted solution. Nothing is taken from the
// input's caches: supports are rebuilt during the feasibility sweep. Four
// passes over the edge set in total (feasibility, balancedness, and two
// inside the prescore maximization), so edge_visits stays within
// 4|E| + O(|N|+|C|) when no PJR threshold is requested.
template <class W>
VerifyReport<W> verify_solution(const ElectionInstance& inst, const Solution<W>& sol,
                                std::optional<W> pjr_t = std::nullopt) {
  VerifyReport<W> rep;

  Solution<W> chk = sol;
  chk.supports.assign(inst.num_candidates(), W(0));
  if (static_cast<int>(chk.weights.size()) != inst.num_edges()) {
    rep.witness = VerifyWitness<W>{"weight_vector_size", -1, -1, -1,
                                   W(inst.num_edges()), W(static_cast<int>(chk.weights.size()))};
    return rep;
  }

  rep.feasible = true;
  if (static_cast<int>(chk.committee.size()) != inst.committee_size()) {
    rep.feasible = false;
    rep.witness = VerifyWitness<W>{"committee_size", -1, -1, -1, W(inst.committee_size()),
                                   W(static_cast<int>(chk.committee.size()))};
  }
  for (VoterId n = 0; n < inst.num_voters() && rep.feasible; ++n) {
    W spent{};
    for (int e : inst.voter_edges(n)) {
      ++rep.edge_visits;
      const W& w = chk.weights[e];
      if (num<W>::approx_lt(w, W(0))) {
        rep.feasible = false;
        rep.witness = VerifyWitness<W>{"negative_weight", n, inst.edge_candidate(e), e, W(0), w};
        break;
      }
      spent += w;
      CandidateId c = inst.edge_candidate(e);
      if (chk.is_member(c)) chk.supports[c] += w;
    }
    if (rep.feasible && !num<W>::approx_le(spent, inst.stake<W>(n))) {
      rep.feasible = false;
      rep.witness = VerifyWitness<W>{"overspent", n, -1, -1, inst.stake<W>(n), spent};
    }
  }
  if (!rep.feasible) return rep;

  rep.objective = W(0);
  if (!chk.committee.empty()) {
    rep.objective = chk.supports[chk.committee.front()];
    for (CandidateId c : chk.committee)
      if (chk.supports[c] < rep.objective) rep.objective = chk.supports[c];
  }

  rep.balanced = true;
  for (VoterId n = 0; n < inst.num_voters() && rep.balanced; ++n) {
    bool represented = false;
    W spent{};
    W min_supp{};
    W max_pos{};
    int max_pos_edge = -1;
    for (int e : inst.voter_edges(n)) {
      ++rep.edge_visits;
      CandidateId c = inst.edge_candidate(e);
      if (!chk.is_member(c)) continue;
      spent += chk.weights[e];
      if (!represented || chk.supports[c] < min_supp) min_supp = chk.supports[c];
      represented = true;
      if (num<W>::approx_lt(W(0), chk.weights[e]) &&
          (max_pos_edge < 0 || chk.supports[c] > max_pos)) {
        max_pos = chk.supports[c];
        max_pos_edge = e;
      }
    }
    if (!represented) continue;
    if (!num<W>::approx_eq(spent, inst.stake<W>(n))) {
      rep.balanced = false;
      rep.witness = VerifyWitness<W>{"unspent_stake", n, -1, -1, inst.stake<W>(n), spent};
    } else if (max_pos_edge >= 0 && !num<W>::approx_eq(max_pos, min_supp)) {
      rep.balanced = false;
      rep.witness = VerifyWitness<W>{"support_above_min", n, inst.edge_candidate(max_pos_edge),
                                     max_pos_edge, min_supp, max_pos};
    }
  }

  rep.local_optimal = true;  // vacuous when every candidate is elected
  if (static_cast<int>(chk.committee.size()) < inst.num_candidates()) {
    auto mp = phragmms::max_prescore(inst, chk, rep.objective, nullptr, &rep.edge_visits);
    rep.local_optimal = num<W>::approx_le(mp.value, rep.objective);
    if (!rep.local_optimal && !rep.witness)
      rep.witness = VerifyWitness<W>{"score_above_support", -1, mp.candidate, -1, rep.objective,
                                     mp.value};
  }

  if (pjr_t) {
    if (static_cast<int>(chk.committee.size()) >= inst.num_candidates()) {
      rep.pjr = std::make_pair(*pjr_t, true);
    } else {
      auto mp = phragmms::max_prescore(inst, chk, *pjr_t, nullptr, &rep.edge_visits);
      rep.pjr = std::make_pair(*pjr_t, mp.value < *pjr_t);
    }
  }
  return rep;
}

// Sufficient parametric representation test: no outside candidate can gather
// prescore t from voter slack at threshold t. Strict comparison by design;
// passing it proves t-PJR.
template <class W>
bool pjr_condition(const ElectionInstance& inst, const Solution<W>& sol, const W& t) {
  if (t < W(0)) throw std::invalid_argument("pjr_condition: negative threshold");
  Solution<W> chk = sol;
  chk.recompute_supports(inst);
  if (static_cast<int>(chk.committee.size()) >= inst.num_candidates()) return true;
  return phragmms::max_prescore(inst, chk, t).value < t;
}

enum class Ordering { Retain, Replace };

// The challenger must beat the incumbent by more than the numeric tolerance.
template <class W>
Ordering compare_solutions(const ElectionInstance& inst, const Solution<W>& incumbent,
                           const Solution<W>& challenger) {
  W oi = recomputed_objective(inst, incumbent);
  W oc = recomputed_objective(inst, challenger);
  return num<W>::approx_gt(oc, oi) ? Ordering::Replace : Ordering::Retain;
}

template <class W>
struct FileVerify {
  VerifyReport<W> report;
  std::optional<Solution<W>> solution;
  std::string bind_error;
};

// Bind an untrusted solution file against the instance, then verify. Binding
// failures (unknown names, non-approval edges, duplicates) come back as an
// infeasible report with the message as witness.
template <class W>
FileVerify<W> verify_file(const ElectionInstance& inst, const SolutionFile& file,
                          std::optional<W> pjr_t = std::nullopt) {
  FileVerify<W> out;
  auto bound = bind_solution<W>(inst, file);
  if (!bound.solution) {
    out.bind_error = bound.error;
    out.report.witness = VerifyWitness<W>{"malformed: " + bound.error, -1, -1, -1, W(0), W(0)};
    return out;
  }
  out.solution = std::move(bound.solution);
  out.report = verify_solution(inst, *out.solution, pjr_t);
  return out;
}

namespace detail {

template <class W>
nlohmann::json value_json(const W& v) {
  if constexpr (num<W>::exact)
    return rational_to_json(v);
  else
    return v;
}

}  // namespace detail

template <class W>
nlohmann::ordered_json report_to_json(const VerifyReport<W>& rep) {
  nlohmann::ordered_json j;
  j["pass"] = rep.pass();
  j["feasible"] = rep.feasible;
  j["balanced"] = rep.balanced;
  j["local_optimal"] = rep.local_optimal;
  j["objective"] = detail::value_json(rep.objective);
  if (rep.pjr) {
    j["pjr"] = nlohmann::ordered_json{{"t", detail::value_json(rep.pjr->first)},
                                      {"pass", rep.pjr->second}};
  }
  if (rep.witness) {
    nlohmann::ordered_json w;
    w["what"] = rep.witness->what;
    if (rep.witness->voter >= 0) w["voter"] = rep.witness->voter;
    if (rep.witness->candidate >= 0) w["candidate"] = rep.witness->candidate;
    if (rep.witness->edge >= 0) w["edge"] = rep.witness->edge;
    w["expected"] = detail::value_json(rep.witness->expected);
    w["actual"] = detail::value_json(rep.witness->actual);
    j["witness"] = w;
  }
  j["edge_visits"] = rep.edge_visits;
  return j;
}

}  // namespace elect::verify
