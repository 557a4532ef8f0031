#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elect/instance.hpp"

namespace elect {

// Committee plus per-edge weight vector. `supports` caches the column sums;
// every mutation below keeps it in sync. Verification never trusts the cache
// and recomputes from `weights`.
template <class W>
struct Solution {
  std::vector<CandidateId> committee;  // insertion order
  std::vector<char> member;            // |C| membership mask
  std::vector<W> weights;              // |E|, nonnegative
  std::vector<W> supports;             // |C|

  static Solution zero(const ElectionInstance& inst) {
    Solution s;
    s.member.assign(inst.num_candidates(), 0);
    s.weights.assign(inst.num_edges(), W(0));
    s.supports.assign(inst.num_candidates(), W(0));
    return s;
  }

  bool is_member(CandidateId c) const { return member[c] != 0; }
  bool full(const ElectionInstance& inst) const {
    return (int)committee.size() == inst.committee_size();
  }

  void add_member(CandidateId c) {
    committee.push_back(c);
    member[c] = 1;
  }

  // Drops c from the committee and zeroes its incident weights, so the
  // invariant "positive weights only on committee edges" is preserved.
  void remove_member(const ElectionInstance& inst, CandidateId c) {
    committee.erase(std::find(committee.begin(), committee.end(), c));
    member[c] = 0;
    for (int e : inst.candidate_edges(c)) weights[e] = W(0);
    supports[c] = W(0);
  }

  void recompute_supports(const ElectionInstance& inst) {
    supports.assign(inst.num_candidates(), W(0));
    for (int e = 0; e < inst.num_edges(); ++e)
      supports[inst.edge_candidate(e)] += weights[e];
  }

  // Least member support; nullopt for the empty committee.
  std::optional<W> objective() const {
    std::optional<W> best;
    for (CandidateId c : committee)
      if (!best || supports[c] < *best) best = supports[c];
    return best;
  }
};

struct FeasibilityWitness {
  enum class Kind { NegativeWeight, Overspent } kind;
  VoterId voter = -1;
  int edge = -1;
};

// Checks w >= 0 and per-voter spend <= stake (eps-tolerant in float mode).
template <class W>
std::optional<FeasibilityWitness> feasibility_violation(const ElectionInstance& inst,
                                                        const Solution<W>& sol) {
  for (int e = 0; e < inst.num_edges(); ++e)
    if (sol.weights[e] < W(0))
      return FeasibilityWitness{FeasibilityWitness::Kind::NegativeWeight,
                                inst.edge_voter(e), e};
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    W spent(0);
    for (int e : inst.voter_edges(n)) spent += sol.weights[e];
    if (!num<W>::approx_le(spent, inst.template stake<W>(n)))
      return FeasibilityWitness{FeasibilityWitness::Kind::Overspent, n, -1};
  }
  return std::nullopt;
}

// Wire format for solutions:
//   {"committee": [name...],
//    "weights": [{"voter": name, "candidate": name, "value": number|string}...]}
// Values follow the same canonical encoding as stakes. Zero weights are
// omitted; entries are sorted by (voter id, candidate id).
struct SolutionFile {
  struct Entry {
    std::string voter;
    std::string candidate;
    Rational value;
  };
  std::vector<std::string> committee;
  std::vector<Entry> entries;
};

SolutionFile parse_solution(const std::string& json_text);
std::string serialize_solution(const SolutionFile& file);

template <class W>
SolutionFile solution_to_file(const ElectionInstance& inst, const Solution<W>& sol) {
  SolutionFile f;
  for (CandidateId c : sol.committee) f.committee.push_back(inst.candidate_name(c));
  for (int e = 0; e < inst.num_edges(); ++e) {
    if (sol.weights[e] == W(0)) continue;
    f.entries.push_back({inst.voter_name(inst.edge_voter(e)),
                         inst.candidate_name(inst.edge_candidate(e)),
                         Rational(sol.weights[e])});
  }
  return f;
}

// Resolving a wire-format solution against an instance. Structural problems
// (unknown names, duplicate entries, weight on a non-approval edge) fail the
// bind; numeric violations are left for verification.
template <class W>
struct BindResult {
  std::optional<Solution<W>> solution;
  std::string error;   // empty on success
  std::string entity;  // offending name, when known
};

template <class W>
BindResult<W> bind_solution(const ElectionInstance& inst, const SolutionFile& file) {
  BindResult<W> out;
  Solution<W> sol = Solution<W>::zero(inst);
  for (const auto& name : file.committee) {
    auto c = inst.find_candidate(name);
    if (!c) {
      out.error = "unknown committee candidate";
      out.entity = name;
      return out;
    }
    if (sol.is_member(*c)) {
      out.error = "duplicate committee member";
      out.entity = name;
      return out;
    }
    sol.add_member(*c);
  }
  std::vector<char> seen(inst.num_edges(), 0);
  for (const auto& entry : file.entries) {
    auto n = inst.find_voter(entry.voter);
    if (!n) {
      out.error = "unknown voter";
      out.entity = entry.voter;
      return out;
    }
    auto c = inst.find_candidate(entry.candidate);
    if (!c) {
      out.error = "unknown candidate";
      out.entity = entry.candidate;
      return out;
    }
    int e = inst.edge_between(*n, *c);
    if (e < 0) {
      out.error = "weight on a non-approval edge";
      out.entity = entry.voter + "->" + entry.candidate;
      return out;
    }
    if (seen[e]) {
      out.error = "duplicate weight entry";
      out.entity = entry.voter + "->" + entry.candidate;
      return out;
    }
    seen[e] = 1;
    sol.weights[e] = weight_from_rational<W>(entry.value);
  }
  sol.recompute_supports(inst);
  out.solution = std::move(sol);
  return out;
}

}  // namespace elect
