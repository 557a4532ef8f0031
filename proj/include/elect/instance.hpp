#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "elect/numeric.hpp"

namespace elect {

using VoterId = std::int32_t;
using CandidateId = std::int32_t;

// Raised on any schema or invariant violation while building or parsing an
// instance. `what()` names the offending entity.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VoterRecord {
  std::string name;
  Rational stake;
  std::vector<CandidateId> approvals;  // deduplicated, sorted on create()
};

// Immutable election instance: voters with positive stakes and approval sets,
// candidates, committee size k. Edges (voter, approved candidate) carry dense
// ids in (voter, candidate) lexicographic order; a CSR index per candidate is
// kept for the algorithms that sweep approver lists.
class ElectionInstance {
 public:
  static ElectionInstance create(std::vector<std::string> candidate_names,
                                 std::vector<VoterRecord> voters, int k);

  int num_voters() const { return (int)voters_.size(); }
  int num_candidates() const { return (int)candidate_names_.size(); }
  int committee_size() const { return k_; }
  int num_edges() const { return (int)edge_candidate_.size(); }

  const std::string& voter_name(VoterId n) const { return voters_[n].name; }
  const std::string& candidate_name(CandidateId c) const { return candidate_names_[c]; }
  std::optional<VoterId> find_voter(const std::string& name) const;
  std::optional<CandidateId> find_candidate(const std::string& name) const;

  const Rational& stake_exact(VoterId n) const { return voters_[n].stake; }
  template <class W>
  W stake(VoterId n) const {
    if constexpr (num<W>::exact) return voters_[n].stake;
    else return stake_dbl_[n];
  }
  template <class W>
  W total_stake() const {
    if constexpr (num<W>::exact) return total_stake_;
    else return total_stake_dbl_;
  }

  // Edge ids incident to a voter / candidate, ascending.
  std::span<const int> voter_edges(VoterId n) const {
    return {edge_ids_by_voter_.data() + voter_begin_[n],
            edge_ids_by_voter_.data() + voter_begin_[n + 1]};
  }
  std::span<const int> candidate_edges(CandidateId c) const {
    return {edge_ids_by_candidate_.data() + candidate_begin_[c],
            edge_ids_by_candidate_.data() + candidate_begin_[c + 1]};
  }
  VoterId edge_voter(int e) const { return edge_voter_[e]; }
  CandidateId edge_candidate(int e) const { return edge_candidate_[e]; }
  // Edge id for (n, c), or -1 when c is not approved by n.
  int edge_between(VoterId n, CandidateId c) const;

  const std::vector<VoterRecord>& voters() const { return voters_; }
  const std::vector<std::string>& candidate_names() const { return candidate_names_; }

 private:
  ElectionInstance() = default;

  int k_ = 0;
  std::vector<std::string> candidate_names_;
  std::vector<VoterRecord> voters_;
  std::vector<double> stake_dbl_;
  Rational total_stake_;
  double total_stake_dbl_ = 0;

  std::vector<VoterId> edge_voter_;
  std::vector<CandidateId> edge_candidate_;
  std::vector<int> edge_ids_by_voter_;
  std::vector<int> voter_begin_;
  std::vector<int> edge_ids_by_candidate_;
  std::vector<int> candidate_begin_;
};

// Canonical JSON wire format:
//   {"k": int, "candidates": [name...],
//    "voters": [{"id": name, "stake": number|string, "approvals": [name...]}...]}
// Stakes are parsed exactly; strings may be decimals ("0.1") or fractions
// ("60/119"). serialize_instance emits the canonical form: entities in id
// order, stakes as integer / shortest round-trip double / exact string,
// whichever is the first to represent the value exactly.
ElectionInstance parse_instance(const std::string& json_text);
std::string serialize_instance(const ElectionInstance& inst);

// H_k = 1 + 1/2 + ... + 1/k.
Rational harmonic(int k);

// Worst-case family for sequential Phragmen: voter n_0 with stake
// 1/(H_k - eps) approves only c_0; voters n_1..n_k with unit stake approve
// {c_1, .., c_j}. Requires 0 < eps < H_k.
ElectionInstance gen_phragmen_worstcase(int k, const Rational& eps);

// Election whose candidates are the vertices of a cubic graph and whose
// voters are its edges (unit stake, approving both endpoints). Committees
// drawn from an independent set reach support 3 per member; any committee
// with an adjacent pair is capped at 5/2.
ElectionInstance gen_cubic_gap(int vertex_count,
                               const std::vector<std::pair<int, int>>& edges, int k,
                               const std::vector<std::string>* vertex_names = nullptr);

struct StakeDist {
  enum class Kind { Unit, UniformInt, Pareto };
  Kind kind = Kind::Unit;
  long lo = 1, hi = 1;   // UniformInt
  double alpha = 1.5;    // Pareto
  static StakeDist unit() { return {}; }
  static StakeDist uniform_int(long lo, long hi);
  static StakeDist pareto(double alpha);
  // "unit" | "uniform:lo,hi" | "pareto:alpha"
  static StakeDist parse(const std::string& text);
};

// Random instance: each (voter, candidate) approval drawn with probability
// approval_prob; empty rows resampled; matrices with unapproved candidates
// rediscarded. Deterministic in seed. Throws ValidationError when the
// parameters cannot yield a valid instance.
ElectionInstance gen_random(int voters, int candidates, int k, double approval_prob,
                            const StakeDist& stakes, std::uint64_t seed);

// Built-in cubic graphs for the CLI and tests: "k4", "k33", "petersen".
std::optional<std::pair<int, std::vector<std::pair<int, int>>>> cubic_graph_preset(
    const std::string& name);

}  // namespace elect
