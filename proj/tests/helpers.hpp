#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/solution.hpp"

namespace testutil {

using namespace elect;

// Shorthand builder: candidates c0..c{nc-1}, voters n0.. with exact stakes
// given as strings and approvals as candidate indices.
inline ElectionInstance mk(int num_candidates, int k,
                           const std::vector<std::pair<std::string, std::vector<int>>>& voters) {
  std::vector<std::string> cnames;
  cnames.reserve(num_candidates);
  for (int c = 0; c < num_candidates; ++c) cnames.push_back("c" + std::to_string(c));
  std::vector<VoterRecord> vrec;
  int i = 0;
  for (const auto& [stake, appr] : voters) {
    VoterRecord r;
    r.name = "n" + std::to_string(i++);
    r.stake = parse_rational(stake);
    for (int c : appr) r.approvals.push_back(c);
    vrec.push_back(std::move(r));
  }
  return ElectionInstance::create(std::move(cnames), std::move(vrec), k);
}

// Deterministic mixed corpus of small instances, >= `count` of them, covering
// |N| <= 8, |C| <= 8, k <= 4 with unit and integer stakes.
inline std::vector<ElectionInstance> corpus(int count = 500) {
  std::vector<ElectionInstance> out;
  std::uint64_t seed = 1;
  while (static_cast<int>(out.size()) < count) {
    for (int voters = 2; voters <= 8 && static_cast<int>(out.size()) < count; voters += 2) {
      for (int cands = 2; cands <= 8 && static_cast<int>(out.size()) < count; cands += 3) {
        for (int k = 1; k <= std::min(4, cands - 1) && static_cast<int>(out.size()) < count; ++k) {
          // denser approvals when few voters must cover many candidates
          double prob = 0.25 + 0.15 * static_cast<double>(seed % 4);
          if (cands > 2 * voters) prob = std::max(prob, 0.7);
          const StakeDist dist = (seed % 2) ? StakeDist::uniform_int(1, 9) : StakeDist::unit();
          out.push_back(gen_random(voters, cands, k, prob, dist, seed));
          ++seed;
        }
      }
    }
  }
  return out;
}

// Independent reference for the optimal (= balanced) least support of a fixed
// committee: min over nonempty member subsets S of stake(N(S)) / |S|,
// enumerated directly.
template <class W>
W subset_formula(const ElectionInstance& inst, const std::vector<CandidateId>& committee) {
  const int m = static_cast<int>(committee.size());
  bool first = true;
  W best{};
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    W stake{};
    for (VoterId n = 0; n < inst.num_voters(); ++n) {
      bool hit = false;
      for (int e : inst.voter_edges(n)) {
        for (int j = 0; j < m && !hit; ++j)
          if ((mask >> j & 1) && inst.edge_candidate(e) == committee[j]) hit = true;
        if (hit) break;
      }
      if (hit) stake += inst.stake<W>(n);
    }
    W v = stake / W(std::popcount(mask));
    if (first || v < best) {
      best = v;
      first = false;
    }
  }
  return best;
}

template <class W>
W sum_sq_supports(const Solution<W>& sol) {
  W acc{};
  for (CandidateId c : sol.committee) acc += sol.supports[c] * sol.supports[c];
  return acc;
}

// Positive-weight member edges form a forest (checked with union-find), the
// shape trim_to_forest must produce.
template <class W>
bool positive_edges_acyclic(const ElectionInstance& inst, const Solution<W>& sol) {
  const int nodes = inst.num_voters() + inst.num_candidates();
  std::vector<int> parent(nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int e = 0; e < inst.num_edges(); ++e) {
    if (!(sol.weights[e] > W(0)) || !sol.is_member(inst.edge_candidate(e))) continue;
    int a = find(inst.edge_voter(e));
    int b = find(inst.num_voters() + inst.edge_candidate(e));
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

template <class W>
int count_positive_member_edges(const ElectionInstance& inst, const Solution<W>& sol) {
  int cnt = 0;
  for (int e = 0; e < inst.num_edges(); ++e)
    if (sol.weights[e] > W(0) && sol.is_member(inst.edge_candidate(e))) ++cnt;
  return cnt;
}

}  // namespace testutil
