#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/solution.hpp"

namespace elect::phragmms {

enum class ScoreKind { Prescore, Score, Linscore };

template <class W>
struct ScoreReport {
  CandidateId candidate = -1;
  W value{};
  W threshold{};
  ScoreKind kind = ScoreKind::Prescore;
};

// Stake voter n could redirect to a new candidate at threshold t without
// pushing any member it currently supports below t:
//   slack(n, t) = s_n - sum over member edges of w * min(1, t / supp(c)).
template <class W>
W slack(const ElectionInstance& inst, const Solution<W>& sol, VoterId n, const W& t) {
  W s = inst.stake<W>(n);
  for (int e : inst.voter_edges(n)) {
    CandidateId c = inst.edge_candidate(e);
    if (!sol.is_member(c)) continue;
    const W& w = sol.weights[e];
    if (!(w > W(0))) continue;
    const W& sp = sol.supports[c];
    if (sp <= t)
      s -= w;
    else
      s -= w * t / sp;
  }
  return s;
}

template <class W>
W prescore(const ElectionInstance& inst, const Solution<W>& sol, CandidateId c, const W& t) {
  W p{};
  for (int e : inst.candidate_edges(c)) p += slack(inst, sol, inst.edge_voter(e), t);
  return p;
}

// Argmax of prescore(c', t) over unelected candidates (optionally restricted
// to an allowed set), ties to the lowest id. Two passes over the edge set:
// one to compute voter slacks, one to sum them per candidate. edge_visits,
// when given, accumulates the number of edge inspections.
template <class W>
ScoreReport<W> max_prescore(const ElectionInstance& inst, const Solution<W>& sol, const W& t,
                            const std::vector<char>* allowed = nullptr,
                            long* edge_visits = nullptr) {
  std::vector<W> sl(inst.num_voters());
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    sl[n] = slack(inst, sol, n, t);
    if (edge_visits) *edge_visits += static_cast<long>(inst.voter_edges(n).size());
  }
  ScoreReport<W> best;
  best.kind = ScoreKind::Prescore;
  best.threshold = t;
  bool found = false;
  for (CandidateId c = 0; c < inst.num_candidates(); ++c) {
    if (sol.is_member(c)) continue;
    if (allowed && !(*allowed)[c]) continue;
    W p{};
    for (int e : inst.candidate_edges(c)) {
      p += sl[inst.edge_voter(e)];
      if (edge_visits) ++*edge_visits;
    }
    if (!found || p > best.value) {
      best.candidate = c;
      best.value = p;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("max_prescore: no unelected candidate to evaluate");
  return best;
}

namespace detail {

// Distinct positive member supports, ascending.
template <class W>
std::vector<W> support_breakpoints(const Solution<W>& sol) {
  std::vector<W> bps;
  bps.reserve(sol.committee.size());
  for (CandidateId c : sol.committee)
    if (sol.supports[c] > W(0)) bps.push_back(sol.supports[c]);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  return bps;
}

}  // namespace detail

// Root of the prescore function linearized around x, extending the linear
// piece that starts at x to the whole domain: members with supp <= x are
// counted as fully capped, members above x contribute proportionally. The
// tangent line of a convex decreasing function roots left of the function's
// own root, so linscore(c', x) <= score(c') for every x, with equality when
// [x, score(c')] contains no support breakpoint.
template <class W>
W linscore(const ElectionInstance& inst, const Solution<W>& sol, CandidateId cand, const W& x) {
  W p{};
  W q{};
  for (int e0 : inst.candidate_edges(cand)) {
    VoterId n = inst.edge_voter(e0);
    p += inst.stake<W>(n);
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!sol.is_member(c)) continue;
      const W& w = sol.weights[e];
      if (!(w > W(0))) continue;
      const W& sp = sol.supports[c];
      if (sp <= x)
        p -= w;
      else
        q += w / sp;
    }
  }
  W val = p / (W(1) + q);
  if (val < W(0)) val = W(0);
  return val;
}

// Unique root of t -> prescore(c', t) - t, solved exactly on the linear piece
// that contains it: scan the support breakpoints while prescore stays at or
// above the breakpoint, then take the linearized root of that piece.
template <class W>
W score(const ElectionInstance& inst, const Solution<W>& sol, CandidateId cand) {
  if (sol.is_member(cand)) throw std::invalid_argument("score: candidate already elected");
  W tj{};
  for (const W& b : detail::support_breakpoints(sol)) {
    if (prescore(inst, sol, cand, b) >= b)
      tj = b;
    else
      break;
  }
  return linscore(inst, sol, cand, tj);
}

// Largest support breakpoint t_j whose max prescore still reaches t_j, found
// by ceil-midpoint binary search; every candidate's prescore is linear
// between the returned value and the max score.
template <class W>
W find_interval(const ElectionInstance& inst, const Solution<W>& sol,
                const std::vector<char>* allowed = nullptr) {
  std::vector<W> bps = detail::support_breakpoints(sol);
  const int r = static_cast<int>(bps.size());
  if (r == 0) return W(0);
  if (max_prescore(inst, sol, bps[r - 1], allowed).value >= bps[r - 1]) return bps[r - 1];
  // Indices 0..r-1 stand for the thresholds 0, bps[0], ..., bps[r-2].
  int j_lo = 0;
  int j_hi = r - 1;
  while (j_lo < j_hi) {
    int j = (j_lo + j_hi + 1) / 2;
    W tj = (j == 0) ? W(0) : bps[j - 1];
    if (max_prescore(inst, sol, tj, allowed).value >= tj)
      j_lo = j;
    else
      j_hi = j - 1;
  }
  return (j_lo == 0) ? W(0) : bps[j_lo - 1];
}

// Candidate with the highest score and that score, via linearization around
// find_interval's threshold. Ties to the lowest id.
template <class W>
ScoreReport<W> max_score(const ElectionInstance& inst, const Solution<W>& sol,
                         const std::vector<char>* allowed = nullptr) {
  W tp = find_interval(inst, sol, allowed);
  std::vector<W> p(inst.num_voters());
  std::vector<W> q(inst.num_voters());
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    p[n] = inst.stake<W>(n);
    q[n] = W(0);
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!sol.is_member(c)) continue;
      const W& w = sol.weights[e];
      if (!(w > W(0))) continue;
      const W& sp = sol.supports[c];
      if (sp <= tp)
        p[n] -= w;
      else
        q[n] += w / sp;
    }
  }
  ScoreReport<W> best;
  best.kind = ScoreKind::Score;
  best.threshold = tp;
  bool found = false;
  for (CandidateId c = 0; c < inst.num_candidates(); ++c) {
    if (sol.is_member(c)) continue;
    if (allowed && !(*allowed)[c]) continue;
    W ps{};
    W qs{};
    for (int e : inst.candidate_edges(c)) {
      ps += p[inst.edge_voter(e)];
      qs += q[inst.edge_voter(e)];
    }
    W val = ps / (W(1) + qs);
    if (val < W(0)) val = W(0);
    if (!found || val > best.value) {
      best.candidate = c;
      best.value = val;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("max_score: no unelected candidate to evaluate");
  return best;
}

// Adds a candidate at threshold t: member edges of its approvers with support
// above t are scaled down by t/supp (supports snapshotted at entry), and each
// approver's remaining stake goes to the new candidate, giving it support
// equal to prescore(c', t) while no old member drops below min(old supp, t).
template <class W>
Solution<W> insert(const ElectionInstance& inst, const Solution<W>& sol, CandidateId cand,
                   const W& t) {
  if (sol.is_member(cand)) throw std::invalid_argument("insert: candidate already elected");
  if (t < W(0)) throw std::invalid_argument("insert: negative threshold");
  Solution<W> out = sol;
  for (int e_new : inst.candidate_edges(cand)) {
    VoterId n = inst.edge_voter(e_new);
    W rest = inst.stake<W>(n);
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!sol.is_member(c)) continue;
      if (sol.supports[c] > t && sol.weights[e] > W(0))
        out.weights[e] = sol.weights[e] * t / sol.supports[c];
      rest -= out.weights[e];
    }
    if (!num<W>::exact && rest < W(0)) rest = W(0);
    out.weights[e_new] = rest;
  }
  out.add_member(cand);
  out.recompute_supports(inst);
  return out;
}

}  // namespace elect::phragmms
