#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "elect/flow.hpp"
#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/solution.hpp"

namespace elect::balancing {

// Result of the parametric floor search on one committee level: the largest
// floor every member can be supported at simultaneously, a feasible flow
// attaining it, and the members that are tight at that floor (slots into the
// members vector passed in).
template <class W>
struct LevelFloor {
  W floor{};
  flow::FloorFlow<W> flow;
  std::vector<int> tight;
};

// Largest t such that every member of `members` can simultaneously receive
// support t from the (active) voters, found by ratio iteration: start at the
// average, and on infeasibility jump to the witness subset's stake-to-size
// ratio, which strictly decreases until feasibility. In exact arithmetic the
// result is the true maximum; in floating point a stalled iteration falls
// back to bisection.
template <class W>
LevelFloor<W> max_feasible_floor(const ElectionInstance& inst,
                                 const std::vector<CandidateId>& members,
                                 const std::vector<char>* voter_active = nullptr) {
  if (members.empty()) throw std::invalid_argument("max_feasible_floor: empty member set");
  const int nm = static_cast<int>(members.size());

  std::vector<char> seen(inst.num_voters(), 0);
  W adj{};
  for (CandidateId c : members) {
    for (int e : inst.candidate_edges(c)) {
      VoterId n = inst.edge_voter(e);
      if (voter_active && !(*voter_active)[n]) continue;
      if (!seen[n]) {
        seen[n] = 1;
        adj += inst.stake<W>(n);
      }
    }
  }

  auto slots_of = [&](const std::vector<CandidateId>& ids) {
    std::vector<int> slots;
    for (CandidateId id : ids)
      for (int i = 0; i < nm; ++i)
        if (members[i] == id) {
          slots.push_back(i);
          break;
        }
    return slots;
  };
  auto all_slots = [&] {
    std::vector<int> slots(nm);
    for (int i = 0; i < nm; ++i) slots[i] = i;
    return slots;
  };
  auto tight_of = [&](const flow::FloorFlow<W>& res, const std::vector<CandidateId>& witness) {
    std::vector<int> tight;
    for (int i = 0; i < nm; ++i)
      if (!res.member_reachable[i]) tight.push_back(i);
    if (tight.empty()) tight = slots_of(witness);
    if (tight.empty()) tight = all_slots();
    return tight;
  };

  if (!(adj > W(0))) {
    LevelFloor<W> r;
    r.floor = W(0);
    r.flow.feasible = true;
    r.flow.weights.assign(inst.num_edges(), W(0));
    r.flow.member_reachable.assign(nm, true);
    r.tight = all_slots();
    return r;
  }

  W t = adj / W(nm);
  std::vector<CandidateId> last_witness;
  const long cap = num<W>::exact ? (1L << 20) : 64;
  for (long iter = 0; iter < cap; ++iter) {
    auto res = flow::floor_flow(inst, members, t, voter_active);
    if (res.feasible) {
      auto tight = tight_of(res, last_witness);
      return {t, std::move(res), std::move(tight)};
    }
    last_witness = res.deficient;
    W t2 = res.deficient_stake / W(static_cast<int>(res.deficient.size()));
    if (!(t2 < t)) {
      if (num<W>::exact) throw std::logic_error("max_feasible_floor: witness ratio failed to decrease");
      break;
    }
    t = t2;
  }
  if (num<W>::exact) throw std::logic_error("max_feasible_floor: iteration cap exceeded");

  W lo{};
  W hi = t;
  auto best = flow::floor_flow(inst, members, lo, voter_active);
  const W width_tol = W(kEpsAbs) + W(kEpsRel) * (W(1) + inst.total_stake<W>());
  for (int iter = 0; iter < 64 && hi - lo > width_tol; ++iter) {
    W mid = (lo + hi) / W(2);
    auto res = flow::floor_flow(inst, members, mid, voter_active);
    if (res.feasible) {
      lo = mid;
      best = std::move(res);
    } else {
      hi = mid;
      last_witness = res.deficient;
    }
  }
  auto tight = tight_of(best, last_witness);
  return {lo, std::move(best), std::move(tight)};
}

// Balanced weight vector for a fixed committee: peel off the tightest group
// (the members pinned at the max feasible floor together with their voters,
// who are provably spent in full into that group), then rebalance the rest
// among the remaining voters. Supports come out nondecreasing level by level,
// which yields exactly the two balancedness properties: every represented
// voter spends its full stake on members, and positive weight only flows to
// a voter's least-supported member neighbors.
template <class W>
Solution<W> balance(const ElectionInstance& inst, const std::vector<CandidateId>& committee) {
  if (committee.empty()) throw std::invalid_argument("balance: empty committee");
  Solution<W> sol = Solution<W>::zero(inst);
  for (CandidateId c : committee) sol.add_member(c);

  std::vector<char> active(inst.num_voters(), 1);
  std::vector<CandidateId> remaining = committee;
  std::vector<char> is_tight(inst.num_candidates(), 0);
  while (!remaining.empty()) {
    auto lf = max_feasible_floor<W>(inst, remaining, &active);
    for (int slot : lf.tight) is_tight[remaining[slot]] = 1;
    for (CandidateId c : remaining) {
      if (!is_tight[c]) continue;
      for (int e : inst.candidate_edges(c))
        if (active[inst.edge_voter(e)]) sol.weights[e] = lf.flow.weights[e];
    }
    for (CandidateId c : remaining)
      if (is_tight[c])
        for (int e : inst.candidate_edges(c)) active[inst.edge_voter(e)] = 0;
    std::vector<CandidateId> next;
    for (CandidateId c : remaining)
      if (!is_tight[c]) next.push_back(c);
    remaining = std::move(next);
  }
  sol.recompute_supports(inst);
  return sol;
}

template <class W>
Solution<W> balance(const ElectionInstance& inst, const Solution<W>& shape) {
  return balance<W>(inst, shape.committee);
}

enum class BalanceDefect { UnspentStake, MisroutedEdge };

template <class W>
struct BalanceViolation {
  BalanceDefect kind{};
  VoterId voter = -1;
  int edge = -1;
  W expected{};
  W actual{};
};

// Checks the two balancedness properties against freshly recomputed supports.
template <class W>
std::optional<BalanceViolation<W>> balance_violation(const ElectionInstance& inst,
                                                     const Solution<W>& sol) {
  std::vector<W> supp(inst.num_candidates(), W(0));
  for (int e = 0; e < inst.num_edges(); ++e)
    if (sol.is_member(inst.edge_candidate(e))) supp[inst.edge_candidate(e)] += sol.weights[e];

  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    bool represented = false;
    W spent{};
    W min_supp{};
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!sol.is_member(c)) continue;
      spent += sol.weights[e];
      if (!represented || supp[c] < min_supp) min_supp = supp[c];
      represented = true;
    }
    if (!represented) continue;
    if (!num<W>::approx_eq(spent, inst.stake<W>(n)))
      return BalanceViolation<W>{BalanceDefect::UnspentStake, n, -1, inst.stake<W>(n), spent};
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!sol.is_member(c)) continue;
      if (num<W>::approx_lt(W(0), sol.weights[e]) && !num<W>::approx_eq(supp[c], min_supp))
        return BalanceViolation<W>{BalanceDefect::MisroutedEdge, n, e, min_supp, supp[c]};
    }
  }
  return std::nullopt;
}

template <class W>
bool is_balanced(const ElectionInstance& inst, const Solution<W>& sol) {
  return !balance_violation(inst, sol).has_value();
}

// Exhaustive minimum over nonempty member subsets of stake(neighborhood)/size.
// For a balanced solution this equals the least member support. Subset-sum
// transform over committee bitmasks; oracle-scale only.
template <class W>
W maximin_over_subsets(const ElectionInstance& inst, const std::vector<CandidateId>& committee) {
  const int nm = static_cast<int>(committee.size());
  if (nm == 0) throw std::invalid_argument("maximin_over_subsets: empty committee");
  if (nm > 20) throw std::invalid_argument("maximin_over_subsets: committee too large");

  std::vector<int> slot(inst.num_candidates(), -1);
  for (int i = 0; i < nm; ++i) slot[committee[i]] = i;

  const std::uint32_t full = (nm == 32) ? ~0u : ((1u << nm) - 1u);
  std::vector<W> g(static_cast<size_t>(full) + 1, W(0));
  W total{};
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    std::uint32_t mask = 0;
    for (int e : inst.voter_edges(n)) {
      int s = slot[inst.edge_candidate(e)];
      if (s >= 0) mask |= 1u << s;
    }
    g[mask] += inst.stake<W>(n);
    total += inst.stake<W>(n);
  }
  for (int i = 0; i < nm; ++i)
    for (std::uint32_t m = 0; m <= full; ++m)
      if (m & (1u << i)) g[m] += g[m ^ (1u << i)];

  bool first = true;
  W best{};
  for (std::uint32_t s = 1; s <= full; ++s) {
    W v = (total - g[full ^ s]) / W(static_cast<int>(std::popcount(s)));
    if (first || v < best) {
      best = v;
      first = false;
    }
  }
  return best;
}

template <class W>
W maximin_over_subsets(const ElectionInstance& inst, const Solution<W>& sol) {
  return maximin_over_subsets<W>(inst, sol.committee);
}

}  // namespace elect::balancing
