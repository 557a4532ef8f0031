#pragma once

#include <cassert>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "elect/solution.hpp"

namespace elect::flow {

// Max-flow network for "give every committee member support >= floor":
// source -> voter (cap stake), voter -> member (cap above any stake, so the
// min cut never crosses it), member -> sink (cap floor). Dinic blocking flow.
template <class W>
struct FloorFlow {
  bool feasible = false;
  std::vector<W> weights;              // |E|; the flow, only when feasible
  std::vector<char> member_reachable;  // per committee index, in the final residual
  std::vector<CandidateId> deficient;  // min-cut witness, only when infeasible
  W deficient_stake{};                 // total stake adjacent to `deficient`
};

namespace detail {

template <class W>
class Dinic {
 public:
  explicit Dinic(int nodes, W zero_eps) : g_(nodes), level_(nodes), iter_(nodes), eps_(zero_eps) {}

  int add_edge(int u, int v, W cap) {
    g_[u].push_back({v, cap, (int)g_[v].size()});
    g_[v].push_back({u, W(0), (int)g_[u].size() - 1});
    return (int)g_[u].size() - 1;
  }

  W flow_on(int u, int idx) const {
    const Edge& e = g_[u][idx];
    return g_[e.to][e.rev].cap;
  }

  W max_flow(int s, int t) {
    W total(0);
    while (bfs(s, t)) {
      std::fill(iter_.begin(), iter_.end(), 0);
      while (true) {
        W pushed = dfs(s, t, W(-1));
        if (!(pushed > eps_)) break;
        total += pushed;
      }
    }
    return total;
  }

  // Source side of the min cut after max_flow.
  std::vector<char> reachable(int s) const {
    std::vector<char> seen(g_.size(), 0);
    std::vector<int> queue{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      int u = queue[i];
      for (const Edge& e : g_[u])
        if (!seen[e.to] && e.cap > eps_) {
          seen[e.to] = 1;
          queue.push_back(e.to);
        }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    W cap;
    int rev;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue{s};
    level_[s] = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      int u = queue[i];
      for (const Edge& e : g_[u])
        if (level_[e.to] < 0 && e.cap > eps_) {
          level_[e.to] = level_[u] + 1;
          queue.push_back(e.to);
        }
    }
    return level_[t] >= 0;
  }

  // limit < 0 means unbounded.
  W dfs(int u, int t, W limit) {
    if (u == t) return limit;
    for (int& i = iter_[u]; i < (int)g_[u].size(); ++i) {
      Edge& e = g_[u][i];
      if (!(e.cap > eps_) || level_[e.to] != level_[u] + 1) continue;
      W next_limit = (limit < W(0) || e.cap < limit) ? e.cap : limit;
      W pushed = dfs(e.to, t, next_limit);
      if (pushed > eps_) {
        e.cap -= pushed;
        g_[e.to][e.rev].cap += pushed;
        return pushed;
      }
    }
    return W(0);
  }

  std::vector<std::vector<Edge>> g_;
  std::vector<int> level_;
  std::vector<int> iter_;
  W eps_;
};

template <class W>
W dinic_eps(const ElectionInstance& inst) {
  if constexpr (num<W>::exact) return W(0);
  else return 1e-13 * (1.0 + inst.template total_stake<double>());
}

}  // namespace detail

// Runs the floor network restricted to `members` (and, when given, to voters
// with voter_active[n] != 0). Feasible iff max flow == |members| * floor.
template <class W>
FloorFlow<W> floor_flow(const ElectionInstance& inst, std::span<const CandidateId> members,
                        const W& floor, const std::vector<char>* voter_active = nullptr) {
  if (floor < W(0)) throw std::invalid_argument("floor must be nonnegative");
  if (members.empty()) throw std::invalid_argument("committee must be nonempty");
  int nm = (int)members.size();
  std::vector<char> is_member(inst.num_candidates(), 0);
  std::vector<int> member_index(inst.num_candidates(), -1);
  for (int j = 0; j < nm; ++j) {
    is_member[members[j]] = 1;
    member_index[members[j]] = j;
  }

  std::vector<VoterId> active;
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    if (voter_active && !(*voter_active)[n]) continue;
    for (int e : inst.voter_edges(n))
      if (is_member[inst.edge_candidate(e)]) {
        active.push_back(n);
        break;
      }
  }

  int source = 0;
  int voter_base = 1;
  int member_base = voter_base + (int)active.size();
  int sink = member_base + nm;
  detail::Dinic<W> net(sink + 1, detail::dinic_eps<W>(inst));

  W big = inst.template total_stake<W>();
  big += W(1);
  struct EdgeRef {
    int instance_edge;
    int node;
    int idx;
  };
  std::vector<EdgeRef> refs;
  for (int vi = 0; vi < (int)active.size(); ++vi) {
    VoterId n = active[vi];
    net.add_edge(source, voter_base + vi, inst.template stake<W>(n));
    for (int e : inst.voter_edges(n)) {
      CandidateId c = inst.edge_candidate(e);
      if (!is_member[c]) continue;
      int idx = net.add_edge(voter_base + vi, member_base + member_index[c], big);
      refs.push_back({e, voter_base + vi, idx});
    }
  }
  for (int j = 0; j < nm; ++j) net.add_edge(member_base + j, sink, floor);

  W value = net.max_flow(source, sink);
  W target = floor * W(nm);

  FloorFlow<W> out;
  std::vector<char> reach = net.reachable(source);
  out.member_reachable.resize(nm);
  for (int j = 0; j < nm; ++j) out.member_reachable[j] = reach[member_base + j];
  if (num<W>::approx_ge(value, target)) {
    out.feasible = true;
    out.weights.assign(inst.num_edges(), W(0));
    for (const EdgeRef& r : refs) {
      W f = net.flow_on(r.node, r.idx);
      if (f > W(0)) out.weights[r.instance_edge] = f;
    }
  } else {
    out.feasible = false;
    for (int j = 0; j < nm; ++j)
      if (!out.member_reachable[j]) out.deficient.push_back(members[j]);
    // Cut structure guarantees the unreachable side is nonempty when short.
    assert(!out.deficient.empty());
    std::vector<char> def_mask(inst.num_candidates(), 0);
    for (CandidateId c : out.deficient) def_mask[c] = 1;
    out.deficient_stake = W(0);
    for (VoterId n : active)
      for (int e : inst.voter_edges(n))
        if (def_mask[inst.edge_candidate(e)]) {
          out.deficient_stake += inst.template stake<W>(n);
          break;
        }
  }
  return out;
}

template <class W>
struct Infeasible {
  std::vector<CandidateId> committee_subset;  // group with stake < |subset| * floor
  W group_stake{};
};

template <class W>
using MaxSupportResult = std::variant<std::vector<W>, Infeasible<W>>;

// Weight vector giving every member support >= floor, or a witness
// sub-committee whose joint approver stake falls short.
template <class W>
MaxSupportResult<W> max_support_flow(const ElectionInstance& inst,
                                     std::span<const CandidateId> members, const W& floor) {
  FloorFlow<W> r = floor_flow(inst, members, floor);
  if (r.feasible) return std::move(r.weights);
  return Infeasible<W>{std::move(r.deficient), r.deficient_stake};
}

// ---------------------------------------------------------------------------
// Signed flows between weight vectors, their path/cycle structure, and the
// forest-trimming post-pass.
//
// Vertex encoding shared by the decomposition results: voter n is vertex n,
// candidate c is vertex num_voters() + c. Positive f on edge (n, c) is flow
// from n toward c.

template <class W>
struct FlowPath {
  std::vector<int> vertices;  // path: from net-excess vertex to net-demand vertex
  W value{};
  bool is_cycle = false;  // cycles store vertices once; the closing hop is implicit
};

template <class W>
struct Decomposition {
  std::vector<FlowPath<W>> paths;
  std::vector<FlowPath<W>> cycles;
};

namespace detail {

template <class W>
W signed_zero_eps(const std::vector<W>& f) {
  if constexpr (num<W>::exact) {
    return W(0);
  } else {
    double m = 0;
    for (double x : f) m = std::max(m, std::fabs(x));
    return 1e-13 * (1.0 + m);
  }
}

}  // namespace detail

template <class W>
Decomposition<W> decompose(const ElectionInstance& inst, std::vector<W> f) {
  int N = inst.num_voters();
  int V = N + inst.num_candidates();
  W eps = detail::signed_zero_eps(f);
  std::vector<W> excess(V, W(0));  // voters: net out-flow; candidates: net give-up
  for (int e = 0; e < inst.num_edges(); ++e) {
    excess[inst.edge_voter(e)] += f[e];
    excess[N + inst.edge_candidate(e)] -= f[e];
  }

  // From voter vertices we leave along f > 0, from candidate vertices along
  // f < 0; lowest-id neighbor first, so the result is deterministic.
  auto next_edge = [&](int v) -> int {
    if (v < N) {
      for (int e : inst.voter_edges(v))
        if (f[e] > eps) return e;
    } else {
      for (int e : inst.candidate_edges(v - N))
        if (f[e] < W(0) - eps) return e;
    }
    return -1;
  };
  auto other_end = [&](int v, int e) {
    return v < N ? N + inst.edge_candidate(e) : (int)inst.edge_voter(e);
  };

  Decomposition<W> out;
  std::vector<int> pos_on_path(V, -1);

  auto subtract = [&](std::span<const int> verts, std::span<const int> edges, const W& val,
                      bool cycle) {
    for (std::size_t i = 0; i < edges.size(); ++i) {
      int from = verts[i];
      if (from < N) f[edges[i]] -= val;
      else f[edges[i]] += val;
    }
    if (!cycle) {
      excess[verts.front()] -= val;
      excess[verts.back()] += val;
    }
  };

  // Returns how many paths/cycles were peeled off, so float-mode residue
  // below eps can be detected and dropped instead of looping.
  auto walk_from = [&](int start, bool circulation_phase) -> int {
    std::vector<int> path{start};
    std::vector<int> edges;
    pos_on_path[start] = 0;
    int extracted = 0;
    auto clear_marks = [&] {
      for (int v : path) pos_on_path[v] = -1;
    };
    long guard_max = (long)(inst.num_edges() + 2) * (V + 2) + 8;
    for (long guard = 0; guard <= guard_max; ++guard) {
      int cur = path.back();
      if (!circulation_phase && cur != start && excess[cur] < W(0) - eps) {
        W val = excess[start];
        W demand = W(0) - excess[cur];
        if (demand < val) val = demand;
        for (std::size_t i = 0; i < edges.size(); ++i) {
          W mag = num<W>::abs(f[edges[i]]);
          if (mag < val) val = mag;
        }
        subtract(path, edges, val, false);
        out.paths.push_back({path, val, false});
        clear_marks();
        return extracted + 1;
      }
      int e = next_edge(cur);
      if (e < 0) {
        // Exhausted below eps (float residue): drop the walk.
        clear_marks();
        return extracted;
      }
      int nxt = other_end(cur, e);
      if (pos_on_path[nxt] >= 0) {
        int p = pos_on_path[nxt];
        std::span<const int> cyc_verts(path.data() + p, path.size() - p);
        std::vector<int> cyc_edges(edges.begin() + p, edges.end());
        cyc_edges.push_back(e);
        W val = num<W>::abs(f[cyc_edges[0]]);
        for (int ce : cyc_edges) {
          W mag = num<W>::abs(f[ce]);
          if (mag < val) val = mag;
        }
        subtract(cyc_verts, cyc_edges, val, true);
        out.cycles.push_back(
            {std::vector<int>(cyc_verts.begin(), cyc_verts.end()), val, true});
        ++extracted;
        for (std::size_t i = p + 1; i < path.size(); ++i) pos_on_path[path[i]] = -1;
        path.resize(p + 1);
        edges.resize(p);
        if (circulation_phase && path.size() == 1) {
          clear_marks();
          return extracted;
        }
        continue;
      }
      pos_on_path[nxt] = (int)path.size();
      path.push_back(nxt);
      edges.push_back(e);
    }
    clear_marks();
    throw std::logic_error("flow decomposition did not terminate");
  };

  // Phase 1: peel paths out of net-excess vertices, ascending vertex id.
  for (int v = 0; v < V; ++v)
    while (excess[v] > eps)
      if (walk_from(v, false) == 0) {
        excess[v] = W(0);  // sub-eps residue
        break;
      }
  // Phase 2: what remains is circulation; peel cycles from the lowest live edge.
  while (true) {
    int start = -1;
    for (int e = 0; e < inst.num_edges() && start < 0; ++e)
      if (num<W>::abs(f[e]) > eps)
        start = f[e] > W(0) ? (int)inst.edge_voter(e) : N + inst.edge_candidate(e);
    if (start < 0) break;
    if (walk_from(start, true) == 0) break;  // float residue only
  }
  return out;
}

// Test helper: rebuilds the signed edge vector described by a decomposition.
template <class W>
std::vector<W> recompose(const ElectionInstance& inst, const Decomposition<W>& d) {
  int N = inst.num_voters();
  std::vector<W> f(inst.num_edges(), W(0));
  auto apply = [&](const FlowPath<W>& p) {
    std::size_t hops = p.is_cycle ? p.vertices.size() : p.vertices.size() - 1;
    for (std::size_t i = 0; i < hops; ++i) {
      int a = p.vertices[i];
      int b = p.vertices[(i + 1) % p.vertices.size()];
      int voter = a < N ? a : b;
      int cand = a < N ? b - N : a - N;
      int e = inst.edge_between(voter, cand);
      if (e < 0) throw std::logic_error("decomposition mentions a non-edge");
      f[e] += a < N ? p.value : W(0) - p.value;
    }
  };
  for (const auto& p : d.paths) apply(p);
  for (const auto& c : d.cycles) apply(c);
  return f;
}

struct SubflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// w + f, rejecting any f that is structurally not a sub-flow of a difference
// of feasible vectors: the result must stay nonnegative and within stakes.
template <class W>
std::vector<W> apply_subflow(const ElectionInstance& inst, const std::vector<W>& w,
                             const std::vector<W>& f) {
  if (w.size() != (std::size_t)inst.num_edges() || f.size() != w.size())
    throw SubflowError("weight and flow vectors must cover every edge");
  std::vector<W> out(w.size());
  for (int e = 0; e < inst.num_edges(); ++e) {
    W v = w[e] + f[e];
    if (v < W(0)) {
      if constexpr (!num<W>::exact) {
        if (num<W>::approx_eq(v, 0.0)) {
          out[e] = W(0);
          continue;
        }
      }
      throw SubflowError("sub-flow drives edge " + std::to_string(e) + " negative");
    }
    out[e] = v;
  }
  for (VoterId n = 0; n < inst.num_voters(); ++n) {
    W spent(0);
    for (int e : inst.voter_edges(n)) spent += out[e];
    if (!num<W>::approx_le(spent, inst.template stake<W>(n)))
      throw SubflowError("sub-flow overspends voter " + inst.voter_name(n));
  }
  return out;
}

// Cancels cycles among the positive committee edges until they form a forest.
// Member supports and voter spends are preserved (exactly in rational mode);
// afterwards fewer than |voters| + |committee| edges carry weight.
template <class W>
Solution<W> trim_to_forest(const ElectionInstance& inst, Solution<W> sol) {
  int N = inst.num_voters();
  int V = N + inst.num_candidates();
  auto positive = [&](int e) {
    return sol.is_member(inst.edge_candidate(e)) && sol.weights[e] > W(0);
  };

  // Each round, one DFS over the positive-edge graph either finds a cycle
  // (returned as an edge list in cycle order) or proves it a forest.
  while (true) {
    std::vector<int> parent_edge(V, -1), parent(V, -1);
    std::vector<char> state(V, 0);
    std::vector<int> cycle_edges;
    for (int root = 0; root < V && cycle_edges.empty(); ++root) {
      if (state[root] != 0) continue;
      std::vector<std::pair<int, std::size_t>> stack;
      stack.push_back({root, 0});
      state[root] = 1;
      while (!stack.empty() && cycle_edges.empty()) {
        int v = stack.back().first;
        std::span<const int> edges = v < N ? inst.voter_edges(v)
                                           : inst.candidate_edges(v - N);
        bool pushed = false;
        while (stack.back().second < edges.size()) {
          int e = edges[stack.back().second++];
          if (!positive(e) || e == parent_edge[v]) continue;
          int u = v < N ? N + inst.edge_candidate(e) : (int)inst.edge_voter(e);
          if (state[u] == 1) {
            // Back edge: walk parents from v up to u.
            cycle_edges.push_back(e);
            int x = v;
            while (x != u) {
              cycle_edges.push_back(parent_edge[x]);
              x = parent[x];
            }
            break;
          }
          if (state[u] == 0) {
            state[u] = 1;
            parent[u] = v;
            parent_edge[u] = e;
            stack.push_back({u, 0});
            pushed = true;
            break;
          }
        }
        if (!pushed && cycle_edges.empty() && stack.back().first == v &&
            stack.back().second >= edges.size()) {
          state[v] = 2;
          stack.pop_back();
        }
      }
    }
    if (cycle_edges.empty()) break;

    // Alternate +/- around the cycle; pick the orientation that zeroes the
    // lightest edge. Bipartite cycles have even length, so alternation
    // preserves every support and every spend.
    W min_even = sol.weights[cycle_edges[0]], min_odd(0);
    bool have_odd = false;
    for (std::size_t i = 0; i < cycle_edges.size(); ++i) {
      const W& x = sol.weights[cycle_edges[i]];
      if (i % 2 == 0) {
        if (x < min_even) min_even = x;
      } else if (!have_odd || x < min_odd) {
        min_odd = x;
        have_odd = true;
      }
    }
    bool minus_on_even = !have_odd || min_even <= min_odd;
    W delta = minus_on_even ? min_even : min_odd;
    for (std::size_t i = 0; i < cycle_edges.size(); ++i) {
      bool minus = (i % 2 == 0) == minus_on_even;
      if (minus) sol.weights[cycle_edges[i]] -= delta;
      else sol.weights[cycle_edges[i]] += delta;
    }
  }
  sol.recompute_supports(inst);
  return sol;
}

}  // namespace elect::flow
