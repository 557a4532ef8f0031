#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "elect/balancing.hpp"
#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/phragmms.hpp"
#include "elect/solution.hpp"

namespace elect::solvers {

// Greedy max-score insertion with a full rebalance after every round.
// Output is balanced and locally optimal: least support >= every unelected
// candidate's score, which certifies PJR and the 63/20 approximation factor.
template <class W>
Solution<W> solve_balanced_phragmms(const ElectionInstance& inst) {
  Solution<W> sol = Solution<W>::zero(inst);
  for (int i = 0; i < inst.committee_size(); ++i) {
    auto ms = phragmms::max_score(inst, sol);
    sol = phragmms::insert(inst, sol, ms.candidate, ms.value);
    sol = balancing::balance<W>(inst, sol.committee);
  }
  return sol;
}

// Classic sequential method on voter loads: each round elects the candidate
// with least prospective load, records edge weights as load increments, and
// finally scales each voter's increments to its actual stake.
template <class W>
Solution<W> solve_seq_phragmen(const ElectionInstance& inst) {
  Solution<W> sol = Solution<W>::zero(inst);
  std::vector<W> vload(inst.num_voters(), W(0));
  std::vector<W> appr(inst.num_candidates(), W(0));
  for (int e = 0; e < inst.num_edges(); ++e)
    appr[inst.edge_candidate(e)] += inst.stake<W>(inst.edge_voter(e));

  for (int round = 0; round < inst.committee_size(); ++round) {
    CandidateId pick = -1;
    W pick_load{};
    for (CandidateId c = 0; c < inst.num_candidates(); ++c) {
      if (sol.is_member(c)) continue;
      W num = W(1);
      for (int e : inst.candidate_edges(c))
        num += inst.stake<W>(inst.edge_voter(e)) * vload[inst.edge_voter(e)];
      W cl = num / appr[c];
      if (pick < 0 || cl < pick_load) {
        pick = c;
        pick_load = cl;
      }
    }
    for (int e : inst.candidate_edges(pick)) {
      VoterId n = inst.edge_voter(e);
      sol.weights[e] = pick_load - vload[n];
      vload[n] = pick_load;
    }
    sol.add_member(pick);
  }
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    if (!(vload[n] > W(0))) continue;
    W scale = inst.stake<W>(n) / vload[n];
    for (int e : inst.voter_edges(n))
      if (sol.weights[e] > W(0)) sol.weights[e] *= scale;
  }
  sol.recompute_supports(inst);
  return sol;
}

// One round of the exhaustive greedy: the value of adding candidate c is the
// balanced least support of A+c, which equals the max feasible floor, so the
// sweep needs no full balancing. The per-candidate evaluations are
// independent; with `parallel` they run under OpenMP and the argmax is
// reduced serially so ties still resolve to the lowest id.
template <class W>
Solution<W> solve_mms(const ElectionInstance& inst, bool parallel = false) {
  std::vector<CandidateId> committee;
  std::vector<char> member(inst.num_candidates(), 0);
  for (int round = 0; round < inst.committee_size(); ++round) {
    std::vector<std::pair<char, W>> val(inst.num_candidates());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (CandidateId c = 0; c < inst.num_candidates(); ++c) {
      if (member[c]) {
        val[c] = {0, W(0)};
        continue;
      }
      std::vector<CandidateId> trial = committee;
      trial.push_back(c);
      val[c] = {1, balancing::max_feasible_floor<W>(inst, trial).floor};
    }
    CandidateId pick = -1;
    for (CandidateId c = 0; c < inst.num_candidates(); ++c) {
      if (!val[c].first) continue;
      if (pick < 0 || val[c].second > val[pick].second) pick = c;
    }
    committee.push_back(pick);
    member[pick] = 1;
  }
  return balancing::balance<W>(inst, committee);
}

template <class W>
struct LazyResult {
  bool success = false;
  Solution<W> solution;
};

// Single-threshold lazy greedy: inspect candidates in order of current max
// score; each inspected candidate is either committed (if the rebalanced
// committee keeps least support >= t) or permanently discarded.
template <class W>
LazyResult<W> solve_lazy_mms(const ElectionInstance& inst, const W& t) {
  if (t < W(0)) throw std::invalid_argument("solve_lazy_mms: negative threshold");
  LazyResult<W> r;
  r.solution = Solution<W>::zero(inst);
  std::vector<char> uninspected(inst.num_candidates(), 1);
  int left = inst.num_candidates();
  while (left > 0) {
    auto ms = phragmms::max_score(inst, r.solution, &uninspected);
    uninspected[ms.candidate] = 0;
    --left;
    std::vector<CandidateId> trial = r.solution.committee;
    trial.push_back(ms.candidate);
    Solution<W> bal = balancing::balance<W>(inst, trial);
    W least = *bal.objective();
    bool good = num<W>::exact ? (least >= t) : num<W>::approx_ge(least, t);
    if (good) {
      r.solution = std::move(bal);
      if (static_cast<int>(r.solution.committee.size()) == inst.committee_size()) {
        r.success = true;
        return r;
      }
    }
  }
  return r;
}

template <class W>
struct LazySearchResult {
  Solution<W> solution;
  int trials = 0;
};

namespace detail {

template <class W>
W geometric_mid(const W& lo, const W& hi) {
  if constexpr (num<W>::exact) {
    double d = std::sqrt(lo.template convert_to<double>() * hi.template convert_to<double>());
    if (std::isfinite(d) && d > 0) {
      W m{Rational(d)};
      if (lo < m && m < hi) return m;
    }
    return (lo + hi) / W(2);
  } else {
    return std::sqrt(lo * hi);
  }
}

}  // namespace detail

// Geometric binary search over lazy thresholds, seeded by the balanced
// greedy's objective t: success is guaranteed at t/2 and the search narrows
// the success/failure ratio below 1 + eps/2, yielding a (2+eps) factor.
template <class W>
LazySearchResult<W> solve_lazy_mms_search(const ElectionInstance& inst, const W& eps) {
  if (!(eps > W(0))) throw std::invalid_argument("solve_lazy_mms_search: eps must be positive");
  LazySearchResult<W> out;
  Solution<W> base = solve_balanced_phragmms<W>(inst);
  W t = *base.objective();
  if (!(t > W(0))) {
    out.solution = std::move(base);
    return out;
  }
  W lo = t / W(2);
  auto first = solve_lazy_mms(inst, lo);
  ++out.trials;
  if (!first.success) {
    out.solution = std::move(base);
    return out;
  }
  out.solution = std::move(first.solution);
  W hi = t * W(63) / W(20);
  auto top = solve_lazy_mms(inst, hi);
  ++out.trials;
  if (top.success) {
    out.solution = std::move(top.solution);
    return out;
  }
  const W stop_ratio = W(1) + eps / W(2);
  while (hi / lo > stop_ratio) {
    W mid = detail::geometric_mid(lo, hi);
    if (!(lo < mid && mid < hi)) break;
    auto r = solve_lazy_mms(inst, mid);
    ++out.trials;
    if (r.success) {
      lo = mid;
      out.solution = std::move(r.solution);
    } else {
      hi = mid;
    }
  }
  return out;
}

template <class W>
struct LsPjrResult {
  Solution<W> solution;
  int iterations = 0;
  bool changed = false;
};

// Local search: repeatedly swap out a least-supported member for the
// highest-scoring outside candidate until the max score drops below
// min((1+eps) * least support, total stake / k). The least support never
// decreases, and on exit the solution carries a verifiable PJR certificate.
// An absent eps makes the stopping threshold the average support alone.
template <class W>
LsPjrResult<W> ls_pjr(const ElectionInstance& inst, Solution<W> sol, std::optional<W> eps) {
  if (eps && !(*eps > W(0))) throw std::invalid_argument("ls_pjr: eps must be positive");
  if (static_cast<int>(sol.committee.size()) != inst.committee_size())
    throw std::invalid_argument("ls_pjr: solution is not a full committee");
  const W t_hat = inst.total_stake<W>() / W(inst.committee_size());
  LsPjrResult<W> out;
  for (;;) {
    ++out.iterations;
    if (out.iterations > 1000000) throw std::logic_error("ls_pjr: iteration cap exceeded");
    CandidateId c_min = -1;
    for (CandidateId c : sol.committee)
      if (c_min < 0 || sol.supports[c] < sol.supports[c_min] ||
          (sol.supports[c] == sol.supports[c_min] && c < c_min))
        c_min = c;
    W t_min = sol.supports[c_min];
    auto ms = phragmms::max_score(inst, sol);
    W stop = t_hat;
    if (eps) {
      W alt = (W(1) + *eps) * t_min;
      if (alt < stop) stop = alt;
    }
    if (ms.value < stop) break;
    sol.remove_member(inst, c_min);
    sol = phragmms::insert(inst, sol, ms.candidate, ms.value);
    out.changed = true;
  }
  out.solution = std::move(sol);
  return out;
}

}  // namespace elect::solvers
