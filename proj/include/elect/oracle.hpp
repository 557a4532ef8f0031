#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "elect/balancing.hpp"
#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/phragmms.hpp"
#include "elect/solution.hpp"

namespace elect::oracle {

namespace detail {

// C(n, r), saturating at cap+1. The running prefix product C(n-r+i, i) stays
// integral, so the divisions are exact.
inline unsigned long long binom_capped(int n, int r, unsigned long long cap) {
  if (r < 0 || r > n) return 0;
  if (r > n - r) r = n - r;
  unsigned long long acc = 1;
  for (int i = 1; i <= r; ++i) {
    acc = acc * static_cast<unsigned long long>(n - r + i) / static_cast<unsigned long long>(i);
    if (acc > cap) return cap + 1;
  }
  return acc;
}

// rank -> k-subset of {0..n-1} in lexicographic order of the sorted id lists.
inline void unrank_combination(unsigned long long rank, int n, int k,
                               std::vector<CandidateId>& out) {
  out.clear();
  int x = 0;
  for (int slot = 0; slot < k; ++slot) {
    for (;; ++x) {
      unsigned long long cnt = binom_capped(n - 1 - x, k - 1 - slot, ~0ull >> 1);
      if (rank < cnt) break;
      rank -= cnt;
    }
    out.push_back(x);
    ++x;
  }
}

}  // namespace detail

template <class W>
struct OptResult {
  W value{};
  std::vector<CandidateId> committee;
};

// Exhaustive maximin optimum: every k-committee's balanced least support
// equals its max feasible floor, so one floor search per committee suffices.
// Enumeration goes by combination rank; with `parallel` the ranks are split
// across OpenMP threads and the per-thread bests are merged under the strict
// total order (value desc, committee lex asc), keeping the result identical
// to the serial sweep.
template <class W>
OptResult<W> opt_maximin(const ElectionInstance& inst, bool parallel = false) {
  const int nc = inst.num_candidates();
  const int k = inst.committee_size();
  const unsigned long long limit = 1000000ull;
  unsigned long long total = detail::binom_capped(nc, k, limit);
  if (total > limit) throw std::invalid_argument("opt_maximin: instance too large");

  struct Best {
    bool has = false;
    W value{};
    std::vector<CandidateId> committee;
  };
  auto better = [](const Best& a, const Best& b) {
    if (!b.has) return true;
    if (!a.has) return false;
    if (a.value != b.value) return a.value > b.value;
    return a.committee < b.committee;
  };

  Best global;
  const long long t = static_cast<long long>(total);
#ifdef _OPENMP
#pragma omp parallel if (parallel)
#endif
  {
    Best local;
    std::vector<CandidateId> comm;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 8) nowait
#endif
    for (long long r = 0; r < t; ++r) {
      detail::unrank_combination(static_cast<unsigned long long>(r), nc, k, comm);
      W v = balancing::max_feasible_floor<W>(inst, comm).floor;
      if (!local.has || v > local.value || (v == local.value && comm < local.committee)) {
        local.has = true;
        local.value = std::move(v);
        local.committee = comm;
      }
    }
#ifdef _OPENMP
#pragma omp critical(opt_maximin_merge)
#endif
    {
      if (better(local, global)) global = std::move(local);
    }
  }
  if (!global.has) throw std::logic_error("opt_maximin: empty enumeration");
  return {std::move(global.value), std::move(global.committee)};
}

struct PjrWitness {
  std::vector<VoterId> group;
  int r = 0;
};

struct PjrCheck {
  bool ok = true;
  std::optional<PjrWitness> witness;
};

// Exact parametric representation check by voter-subset enumeration: a
// violation is a group with stake at least r*t and r common candidates but
// fewer than r committee members among its approvals. The witness carries
// the first violating group (by subset mask) with the largest violating r.
template <class W>
PjrCheck check_pjr_exact(const ElectionInstance& inst, const std::vector<CandidateId>& committee,
                         const W& t) {
  if (inst.num_voters() > 16) throw std::invalid_argument("check_pjr_exact: too many voters");
  if (inst.num_candidates() > 64)
    throw std::invalid_argument("check_pjr_exact: too many candidates");
  if (t < W(0)) throw std::invalid_argument("check_pjr_exact: negative threshold");

  const int nv = inst.num_voters();
  std::vector<std::uint64_t> appr(nv, 0);
  for (VoterId n = 0; n < nv; ++n)
    for (int e : inst.voter_edges(n)) appr[n] |= 1ull << inst.edge_candidate(e);
  std::uint64_t amask = 0;
  for (CandidateId c : committee) amask |= 1ull << c;
  const int ka = static_cast<int>(committee.size());

  for (std::uint32_t mask = 1; mask < (1u << nv); ++mask) {
    W stake{};
    std::uint64_t inter = ~0ull;
    std::uint64_t uni = 0;
    for (VoterId n = 0; n < nv; ++n) {
      if (!(mask & (1u << n))) continue;
      stake += inst.stake<W>(n);
      inter &= appr[n];
      uni |= appr[n];
    }
    const int common = std::popcount(inter);
    const int reps = std::popcount(uni & amask);
    int r_hi = common < ka ? common : ka;
    for (int r = r_hi; r > reps; --r) {
      if (stake >= W(r) * t) {
        PjrWitness w;
        w.r = r;
        for (VoterId n = 0; n < nv; ++n)
          if (mask & (1u << n)) w.group.push_back(n);
        return {false, std::move(w)};
      }
    }
  }
  return {};
}

// Independent score oracle: plain bisection on the decreasing function
// prescore(c', t) - t, run to an interval width of 1e-12.
template <class W>
W score_by_rootfind(const ElectionInstance& inst, const Solution<W>& sol, CandidateId cand) {
  if (sol.is_member(cand)) throw std::invalid_argument("score_by_rootfind: candidate elected");
  W lo{};
  W hi = inst.total_stake<W>();
  const W width = weight_from_rational<W>(Rational(1, 1000000000000LL));
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    W mid = (lo + hi) / W(2);
    if (phragmms::prescore(inst, sol, cand, mid) >= mid)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / W(2);
}

}  // namespace elect::oracle
