#include "elect/instance.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "elect/json_util.hpp"

namespace elect {

using nlohmann::json;

ElectionInstance ElectionInstance::create(std::vector<std::string> candidate_names,
                                          std::vector<VoterRecord> voters, int k) {
  ElectionInstance inst;
  int C = (int)candidate_names.size();
  int N = (int)voters.size();
  if (C < 2) throw ValidationError("instance needs at least two candidates");
  if (N < 1) throw ValidationError("instance needs at least one voter");
  if (k <= 0 || k >= C)
    throw ValidationError("k out of range: k=" + std::to_string(k) +
                          " with " + std::to_string(C) + " candidates");
  {
    std::set<std::string> seen;
    for (const auto& name : candidate_names)
      if (!seen.insert(name).second)
        throw ValidationError("duplicate candidate name: " + name);
  }
  {
    std::set<std::string> seen;
    for (const auto& v : voters)
      if (!seen.insert(v.name).second)
        throw ValidationError("duplicate voter id: " + v.name);
  }
  std::vector<char> approved(C, 0);
  for (auto& v : voters) {
    if (v.stake <= 0)
      throw ValidationError("stake must be positive: voter " + v.name);
    std::sort(v.approvals.begin(), v.approvals.end());
    v.approvals.erase(std::unique(v.approvals.begin(), v.approvals.end()),
                      v.approvals.end());
    if (v.approvals.empty())
      throw ValidationError("isolated voter: " + v.name);
    for (CandidateId c : v.approvals) {
      if (c < 0 || c >= C)
        throw ValidationError("approval out of range: voter " + v.name);
      approved[c] = 1;
    }
  }
  for (CandidateId c = 0; c < C; ++c)
    if (!approved[c])
      throw ValidationError("isolated candidate: " + candidate_names[c]);

  inst.k_ = k;
  inst.candidate_names_ = std::move(candidate_names);
  inst.voters_ = std::move(voters);
  inst.stake_dbl_.reserve(N);
  inst.total_stake_ = 0;
  for (const auto& v : inst.voters_) {
    inst.stake_dbl_.push_back(to_double(v.stake));
    inst.total_stake_ += v.stake;
  }
  inst.total_stake_dbl_ = 0;
  for (double s : inst.stake_dbl_) inst.total_stake_dbl_ += s;

  inst.voter_begin_.assign(N + 1, 0);
  for (VoterId n = 0; n < N; ++n) {
    inst.voter_begin_[n + 1] = inst.voter_begin_[n] + (int)inst.voters_[n].approvals.size();
    for (CandidateId c : inst.voters_[n].approvals) {
      inst.edge_ids_by_voter_.push_back((int)inst.edge_voter_.size());
      inst.edge_voter_.push_back(n);
      inst.edge_candidate_.push_back(c);
    }
  }
  int E = (int)inst.edge_voter_.size();
  inst.candidate_begin_.assign(C + 1, 0);
  for (int e = 0; e < E; ++e) inst.candidate_begin_[inst.edge_candidate_[e] + 1]++;
  for (CandidateId c = 0; c < C; ++c)
    inst.candidate_begin_[c + 1] += inst.candidate_begin_[c];
  inst.edge_ids_by_candidate_.assign(E, 0);
  std::vector<int> cursor(inst.candidate_begin_.begin(), inst.candidate_begin_.end() - 1);
  for (int e = 0; e < E; ++e)
    inst.edge_ids_by_candidate_[cursor[inst.edge_candidate_[e]]++] = e;
  return inst;
}

std::optional<VoterId> ElectionInstance::find_voter(const std::string& name) const {
  for (VoterId n = 0; n < num_voters(); ++n)
    if (voters_[n].name == name) return n;
  return std::nullopt;
}

std::optional<CandidateId> ElectionInstance::find_candidate(const std::string& name) const {
  for (CandidateId c = 0; c < num_candidates(); ++c)
    if (candidate_names_[c] == name) return c;
  return std::nullopt;
}

int ElectionInstance::edge_between(VoterId n, CandidateId c) const {
  const auto& ap = voters_[n].approvals;
  auto it = std::lower_bound(ap.begin(), ap.end(), c);
  if (it == ap.end() || *it != c) return -1;
  return voter_begin_[n] + (int)(it - ap.begin());
}

namespace {

Rational stake_from_json(const json& j, const std::string& where) {
  try {
    return rational_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace

ElectionInstance parse_instance(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("instance is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("instance must be a JSON object");
  if (!j.contains("k") || !j["k"].is_number_integer())
    throw ValidationError("missing integer field: k");
  if (!j.contains("candidates") || !j["candidates"].is_array())
    throw ValidationError("missing array field: candidates");
  if (!j.contains("voters") || !j["voters"].is_array())
    throw ValidationError("missing array field: voters");

  std::vector<std::string> names;
  for (const auto& c : j["candidates"]) {
    if (!c.is_string()) throw ValidationError("candidate names must be strings");
    names.push_back(c.get<std::string>());
  }
  std::map<std::string, CandidateId> by_name;
  for (CandidateId c = 0; c < (int)names.size(); ++c) {
    if (!by_name.emplace(names[c], c).second)
      throw ValidationError("duplicate candidate name: " + names[c]);
  }

  std::vector<VoterRecord> voters;
  int index = 0;
  for (const auto& v : j["voters"]) {
    if (!v.is_object()) throw ValidationError("voter entries must be objects");
    VoterRecord rec;
    rec.name = v.contains("id") ? v["id"].get<std::string>()
                                : "v" + std::to_string(index);
    if (!v.contains("stake")) throw ValidationError("voter missing stake: " + rec.name);
    rec.stake = stake_from_json(v["stake"], "stake of voter " + rec.name);
    if (!v.contains("approvals") || !v["approvals"].is_array())
      throw ValidationError("voter missing approvals array: " + rec.name);
    for (const auto& a : v["approvals"]) {
      if (!a.is_string()) throw ValidationError("approvals must be candidate names");
      auto it = by_name.find(a.get<std::string>());
      if (it == by_name.end())
        throw ValidationError("unknown candidate in approvals of voter " + rec.name +
                              ": " + a.get<std::string>());
      rec.approvals.push_back(it->second);
    }
    voters.push_back(std::move(rec));
    ++index;
  }
  return ElectionInstance::create(std::move(names), std::move(voters),
                                  j["k"].get<int>());
}

std::string serialize_instance(const ElectionInstance& inst) {
  json j;
  j["k"] = inst.committee_size();
  j["candidates"] = json::array();
  for (const auto& name : inst.candidate_names()) j["candidates"].push_back(name);
  j["voters"] = json::array();
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    const VoterRecord& v = inst.voters()[n];
    json jv;
    jv["id"] = v.name;
    jv["stake"] = rational_to_json(v.stake);
    jv["approvals"] = json::array();
    for (CandidateId c : v.approvals) jv["approvals"].push_back(inst.candidate_name(c));
    j["voters"].push_back(std::move(jv));
  }
  return j.dump();
}

Rational harmonic(int k) {
  Rational h = 0;
  for (int i = 1; i <= k; ++i) h += Rational(1, i);
  return h;
}

ElectionInstance gen_phragmen_worstcase(int k, const Rational& eps) {
  if (k < 1) throw ValidationError("k must be positive");
  Rational hk = harmonic(k);
  if (eps <= 0 || eps >= hk)
    throw ValidationError("eps must lie in (0, H_k)");
  std::vector<std::string> names;
  for (int j = 0; j <= k; ++j) names.push_back("c" + std::to_string(j));
  std::vector<VoterRecord> voters;
  {
    VoterRecord v;
    v.name = "n0";
    v.stake = Rational(1) / (hk - eps);
    v.approvals = {0};
    voters.push_back(std::move(v));
  }
  for (int j = 1; j <= k; ++j) {
    VoterRecord v;
    v.name = "n" + std::to_string(j);
    v.stake = 1;
    for (int i = 1; i <= j; ++i) v.approvals.push_back(i);
    voters.push_back(std::move(v));
  }
  return ElectionInstance::create(std::move(names), std::move(voters), k);
}

ElectionInstance gen_cubic_gap(int vertex_count,
                               const std::vector<std::pair<int, int>>& edges, int k,
                               const std::vector<std::string>* vertex_names) {
  std::vector<int> degree(vertex_count, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || u >= vertex_count || v < 0 || v >= vertex_count || u == v)
      throw ValidationError("bad graph edge");
    ++degree[u];
    ++degree[v];
  }
  for (int u = 0; u < vertex_count; ++u)
    if (degree[u] != 3)
      throw ValidationError("graph is not cubic: vertex " + std::to_string(u) +
                            " has degree " + std::to_string(degree[u]));
  std::vector<std::string> names;
  for (int u = 0; u < vertex_count; ++u)
    names.push_back(vertex_names ? (*vertex_names)[u] : "v" + std::to_string(u));
  std::vector<VoterRecord> voters;
  for (auto [u, v] : edges) {
    VoterRecord rec;
    rec.name = "e" + std::to_string(u) + "-" + std::to_string(v);
    rec.stake = 1;
    rec.approvals = {u, v};
    voters.push_back(std::move(rec));
  }
  return ElectionInstance::create(std::move(names), std::move(voters), k);
}

StakeDist StakeDist::uniform_int(long lo, long hi) {
  StakeDist d;
  d.kind = Kind::UniformInt;
  d.lo = lo;
  d.hi = hi;
  return d;
}

StakeDist StakeDist::pareto(double alpha) {
  StakeDist d;
  d.kind = Kind::Pareto;
  d.alpha = alpha;
  return d;
}

StakeDist StakeDist::parse(const std::string& text) {
  if (text == "unit") return unit();
  if (text.rfind("pareto:", 0) == 0) {
    double a = std::stod(text.substr(7));
    if (a <= 0) throw ValidationError("pareto alpha must be positive");
    return pareto(a);
  }
  if (text.rfind("uniform:", 0) == 0) {
    auto body = text.substr(8);
    auto comma = body.find(',');
    if (comma == std::string::npos)
      throw ValidationError("uniform stake dist needs lo,hi");
    long lo = std::stol(body.substr(0, comma));
    long hi = std::stol(body.substr(comma + 1));
    if (lo < 1 || hi < lo) throw ValidationError("bad uniform stake range");
    return uniform_int(lo, hi);
  }
  throw ValidationError("unknown stake distribution: " + text);
}

namespace {

// Platform-independent uniform draw in [0, 1).
double unit_uniform(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

Rational draw_stake(const StakeDist& dist, std::mt19937_64& rng) {
  switch (dist.kind) {
    case StakeDist::Kind::Unit:
      return 1;
    case StakeDist::Kind::UniformInt: {
      long span = dist.hi - dist.lo + 1;
      return Rational(dist.lo + (long)(unit_uniform(rng) * span));
    }
    case StakeDist::Kind::Pareto: {
      double u = unit_uniform(rng);
      double x = std::pow(1.0 - u, -1.0 / dist.alpha);
      return Rational(x);
    }
  }
  return 1;
}

}  // namespace

ElectionInstance gen_random(int voters, int candidates, int k, double approval_prob,
                            const StakeDist& stakes, std::uint64_t seed) {
  if (voters < 1 || candidates < 2 || k <= 0 || k >= candidates)
    throw ValidationError("infeasible size parameters");
  if (!(approval_prob > 0.0) || approval_prob > 1.0)
    throw ValidationError("approval_prob must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<VoterRecord> rows;
    bool rows_ok = true;
    for (int n = 0; n < voters && rows_ok; ++n) {
      VoterRecord rec;
      rec.name = "n" + std::to_string(n);
      rec.stake = draw_stake(stakes, rng);
      int tries = 0;
      while (rec.approvals.empty()) {
        if (++tries > 200) { rows_ok = false; break; }
        for (CandidateId c = 0; c < candidates; ++c)
          if (unit_uniform(rng) < approval_prob) rec.approvals.push_back(c);
      }
      rows.push_back(std::move(rec));
    }
    if (!rows_ok) continue;
    std::vector<char> covered(candidates, 0);
    for (const auto& r : rows)
      for (CandidateId c : r.approvals) covered[c] = 1;
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) continue;
    std::vector<std::string> names;
    for (CandidateId c = 0; c < candidates; ++c) names.push_back("c" + std::to_string(c));
    return ElectionInstance::create(std::move(names), std::move(rows), k);
  }
  throw ValidationError("could not sample a valid instance with these parameters");
}

std::optional<std::pair<int, std::vector<std::pair<int, int>>>> cubic_graph_preset(
    const std::string& name) {
  using E = std::vector<std::pair<int, int>>;
  if (name == "k4")
    return std::make_pair(4, E{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  if (name == "k33")
    return std::make_pair(
        6, E{{0, 3}, {0, 4}, {0, 5}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}});
  if (name == "petersen")
    return std::make_pair(10, E{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                                {0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9},
                                {5, 7}, {7, 9}, {9, 6}, {6, 8}, {8, 5}});
  return std::nullopt;
}

}  // namespace elect
