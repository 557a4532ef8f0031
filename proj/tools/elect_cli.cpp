#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "elect/balancing.hpp"
#include "elect/flow.hpp"
#include "elect/instance.hpp"
#include "elect/numeric.hpp"
#include "elect/oracle.hpp"
#include "elect/phragmms.hpp"
#include "elect/protocol.hpp"
#include "elect/solution.hpp"
#include "elect/solvers.hpp"
#include "elect/verify.hpp"

namespace {

using namespace elect;

// Negative domain verdicts (threshold unattainable, failed admission) exit
// with code 2; code 1 stays reserved for usage and IO problems.
struct VerdictFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

ElectionInstance load_instance(const std::string& path) { return parse_instance(read_text(path)); }
SolutionFile load_solution(const std::string& path) { return parse_solution(read_text(path)); }

template <class W>
Solution<W> bind_or_throw(const ElectionInstance& inst, const SolutionFile& file) {
  auto r = bind_solution<W>(inst, file);
  if (!r.solution) throw ValidationError("solution does not match instance: " + r.error);
  return std::move(*r.solution);
}

// 0 or 1 -> serial; n > 1 -> n OpenMP threads and parallel reductions.
bool apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 1) {
    omp_set_num_threads(threads);
    return true;
  }
#else
  (void)threads;
#endif
  return false;
}

template <class F>
int dispatch(bool exact, F&& f) {
  if (exact) return f(Rational{});
  return f(0.0);
}

void emit_instance(const ElectionInstance& inst, const std::string& out) {
  write_text(out, serialize_instance(inst) + "\n");
}

template <class W>
void emit_solution(const ElectionInstance& inst, const Solution<W>& sol, const std::string& out) {
  write_text(out, serialize_solution(solution_to_file(inst, sol)) + "\n");
}

template <class W>
int run_solve(const std::string& in, const std::string& algo,
              const std::optional<std::string>& threshold, const std::string& eps_text,
              bool parallel, const std::string& out) {
  auto inst = load_instance(in);
  Solution<W> sol;
  if (algo == "balanced-phragmms") {
    sol = solvers::solve_balanced_phragmms<W>(inst);
  } else if (algo == "seq-phragmen") {
    sol = solvers::solve_seq_phragmen<W>(inst);
  } else if (algo == "mms") {
    sol = solvers::solve_mms<W>(inst, parallel);
  } else if (algo == "lazy-mms") {
    if (threshold) {
      auto r = solvers::solve_lazy_mms<W>(inst, weight_from_rational<W>(parse_rational(*threshold)));
      if (!r.success)
        throw VerdictFailure("lazy-mms found no committee with least support " + *threshold);
      sol = std::move(r.solution);
    } else {
      auto r =
          solvers::solve_lazy_mms_search<W>(inst, weight_from_rational<W>(parse_rational(eps_text)));
      sol = std::move(r.solution);
    }
  } else {
    throw ValidationError("unknown algorithm: " + algo);
  }
  emit_solution(inst, sol, out);
  return 0;
}

template <class W>
int run_ls_pjr(const std::string& in, const std::string& sol_path, const std::string& eps_text,
               const std::string& out) {
  auto inst = load_instance(in);
  auto sol = bind_or_throw<W>(inst, load_solution(sol_path));
  std::optional<W> eps;
  if (eps_text != "inf") eps = weight_from_rational<W>(parse_rational(eps_text));
  auto r = solvers::ls_pjr<W>(inst, std::move(sol), eps);
  emit_solution(inst, r.solution, out);
  return 0;
}

template <class W>
int run_verify(const std::string& in, const std::string& sol_path,
               const std::optional<std::string>& pjr_t) {
  auto inst = load_instance(in);
  auto file = load_solution(sol_path);
  std::optional<W> t;
  if (pjr_t) t = weight_from_rational<W>(parse_rational(*pjr_t));
  auto fv = verify::verify_file<W>(inst, file, t);
  std::cout << verify::report_to_json(fv.report).dump(2) << "\n";
  const bool ok = fv.report.pass() && (!fv.report.pjr || fv.report.pjr->second);
  return ok ? 0 : 2;
}

template <class W>
int run_trim(const std::string& in, const std::string& sol_path, const std::string& out) {
  auto inst = load_instance(in);
  auto sol = flow::trim_to_forest(inst, bind_or_throw<W>(inst, load_solution(sol_path)));
  emit_solution(inst, sol, out);
  return 0;
}

int run_oracle_opt(const std::string& in, bool parallel) {
  auto inst = load_instance(in);
  auto r = oracle::opt_maximin<Rational>(inst, parallel);
  nlohmann::ordered_json out;
  out["value"] = rational_to_json(r.value);
  auto names = nlohmann::json::array();
  for (CandidateId c : r.committee) names.push_back(inst.candidate_name(c));
  out["committee"] = std::move(names);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_oracle_pjr(const std::string& in, const std::string& sol_path,
                   const std::optional<std::string>& t_text) {
  auto inst = load_instance(in);
  auto sol = bind_or_throw<Rational>(inst, load_solution(sol_path));
  const Rational t = t_text ? Rational(parse_rational(*t_text))
                            : Rational(inst.total_stake<Rational>() / inst.committee_size());
  auto r = oracle::check_pjr_exact<Rational>(inst, sol.committee, t);
  nlohmann::ordered_json out;
  out["ok"] = r.ok;
  out["t"] = rational_to_json(t);
  if (r.witness) {
    nlohmann::ordered_json w;
    auto group = nlohmann::json::array();
    for (VoterId n : r.witness->group) group.push_back(inst.voter_name(n));
    w["group"] = std::move(group);
    w["r"] = r.witness->r;
    out["witness"] = std::move(w);
  }
  std::cout << out.dump(2) << "\n";
  return r.ok ? 0 : 2;
}

int run_oracle_score(const std::string& in, const std::string& sol_path,
                     const std::string& cand_name) {
  auto inst = load_instance(in);
  auto sol = bind_or_throw<double>(inst, load_solution(sol_path));
  auto c = inst.find_candidate(cand_name);
  if (!c) throw ValidationError("unknown candidate: " + cand_name);
  if (sol.is_member(*c)) throw ValidationError("candidate is already a member: " + cand_name);
  nlohmann::ordered_json out;
  out["candidate"] = cand_name;
  out["score"] = oracle::score_by_rootfind<double>(inst, sol, *c);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_simulate(const std::string& in, const std::string& provers_path,
                 const std::string& mode_text, int window_len, int extension_len,
                 const std::string& winner_out) {
  auto inst = load_instance(in);
  auto provers = protocol::parse_provers(read_text(provers_path));
  protocol::Mode mode;
  if (mode_text == "full") {
    mode = protocol::Mode::FullCheck;
  } else if (mode_text == "optimized") {
    mode = protocol::Mode::Optimized;
  } else {
    throw ValidationError("unknown mode: " + mode_text);
  }
  if (window_len <= 0)
    for (const auto& p : provers) window_len = std::max(window_len, p.submit_block);
  auto res = protocol::run_window(inst, provers, mode, window_len, extension_len);
  std::cout << protocol::log_to_jsonl(res.log);
  if (!winner_out.empty() && winner_out != "-" && res.winner)
    emit_solution(inst, *res.winner, winner_out);
  return 0;
}

ElectionInstance bench_instance(const std::string& family, int size, std::uint64_t seed) {
  if (family == "random") {
    const int candidates = std::max(4, size / 4);
    const int k = std::max(2, candidates / 4);
    return gen_random(size, candidates, k, 0.3, StakeDist::uniform_int(1, 9), seed);
  }
  if (family == "phragmen-worstcase") return gen_phragmen_worstcase(size, Rational(1, 10));
  if (family == "cubic-gap") {
    std::string name;
    if (size == 4) name = "k4";
    else if (size == 6) name = "k33";
    else if (size == 10) name = "petersen";
    else throw ValidationError("cubic-gap sizes are 4 (k4), 6 (k33), 10 (petersen)");
    auto preset = cubic_graph_preset(name);
    return gen_cubic_gap(preset->first, preset->second, 2);
  }
  throw ValidationError("unknown family: " + family);
}

int run_bench(const std::string& family, const std::vector<int>& sizes, std::uint64_t seed,
              const std::string& eps_text, bool parallel) {
  using Clock = std::chrono::steady_clock;
  const double eps = weight_from_rational<double>(parse_rational(eps_text));
  std::cout << "family,voters,candidates,k,algorithm,objective,ratio_to_best,millis\n";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto inst = bench_instance(family, sizes[i], seed + i);
    struct Row {
      const char* algo;
      double objective;
      double millis;
    };
    std::vector<Row> rows;
    auto time_one = [&](const char* algo, auto&& solve) {
      const auto start = Clock::now();
      Solution<double> sol = solve();
      const std::chrono::duration<double, std::milli> ms = Clock::now() - start;
      rows.push_back({algo, sol.objective().value_or(0.0), ms.count()});
    };
    time_one("balanced-phragmms", [&] { return solvers::solve_balanced_phragmms<double>(inst); });
    time_one("seq-phragmen", [&] { return solvers::solve_seq_phragmen<double>(inst); });
    time_one("mms", [&] { return solvers::solve_mms<double>(inst, parallel); });
    time_one("lazy-mms", [&] { return solvers::solve_lazy_mms_search<double>(inst, eps).solution; });
    double best = 0;
    for (const auto& r : rows) best = std::max(best, r.objective);
    for (const auto& r : rows) {
      const double ratio = best > 0 ? r.objective / best : 1.0;
      std::printf("%s,%d,%d,%d,%s,%s,%.6f,%.3f\n", family.c_str(), inst.num_voters(),
                  inst.num_candidates(), inst.committee_size(), r.algo,
                  format_double(r.objective).c_str(), ratio, r.millis);
    }
  }
  std::cout.flush();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approval-based committee elections under the maximin support objective"};
  app.require_subcommand(1);
  int rc = 0;

  // generate
  auto* gen = app.add_subcommand("generate", "write a benchmark instance as JSON");
  gen->require_subcommand(1);

  int pw_k = 4;
  std::string pw_eps = "1/10";
  std::string pw_out = "-";
  auto* pw = gen->add_subcommand("phragmen-worstcase",
                                 "family where sequential Phragmen trails the optimum by H_k - eps");
  pw->add_option("--k", pw_k, "committee size")->required();
  pw->add_option("--eps", pw_eps, "offset below H_k, in (0, H_k)")->capture_default_str();
  pw->add_option("-o,--output", pw_out, "output path or -")->capture_default_str();
  pw->callback([&] { emit_instance(gen_phragmen_worstcase(pw_k, parse_rational(pw_eps)), pw_out); });

  std::string cg_graph = "k4";
  int cg_k = 2;
  std::string cg_out = "-";
  auto* cg = gen->add_subcommand("cubic-gap", "election over the edges of a cubic graph");
  cg->add_option("--graph", cg_graph, "preset: k4, k33, petersen")->capture_default_str();
  cg->add_option("--k", cg_k, "committee size")->capture_default_str();
  cg->add_option("-o,--output", cg_out, "output path or -")->capture_default_str();
  cg->callback([&] {
    auto preset = cubic_graph_preset(cg_graph);
    if (!preset) throw ValidationError("unknown cubic graph preset: " + cg_graph);
    emit_instance(gen_cubic_gap(preset->first, preset->second, cg_k), cg_out);
  });

  int rd_voters = 8, rd_candidates = 8, rd_k = 4;
  double rd_prob = 0.5;
  std::string rd_stakes = "unit";
  std::uint64_t rd_seed = 1;
  std::string rd_out = "-";
  auto* rd = gen->add_subcommand("random", "random approvals with a chosen stake distribution");
  rd->add_option("--voters", rd_voters, "number of voters")->capture_default_str();
  rd->add_option("--candidates", rd_candidates, "number of candidates")->capture_default_str();
  rd->add_option("--k", rd_k, "committee size")->capture_default_str();
  rd->add_option("--approval-prob", rd_prob, "per-pair approval probability")->capture_default_str();
  rd->add_option("--stakes", rd_stakes, "unit | uniform:lo,hi | pareto:alpha")->capture_default_str();
  rd->add_option("--seed", rd_seed, "RNG seed")->capture_default_str();
  rd->add_option("-o,--output", rd_out, "output path or -")->capture_default_str();
  rd->callback([&] {
    emit_instance(gen_random(rd_voters, rd_candidates, rd_k, rd_prob, StakeDist::parse(rd_stakes), rd_seed),
                  rd_out);
  });

  // solve
  std::string so_algo, so_in, so_out = "-", so_threshold, so_eps = "1/10";
  bool so_exact = false;
  int so_threads = 0;
  auto* so = app.add_subcommand("solve", "compute a committee and weight vector");
  so->add_option("--algorithm", so_algo, "balanced-phragmms | seq-phragmen | mms | lazy-mms")
      ->required()
      ->check(CLI::IsMember({"balanced-phragmms", "seq-phragmen", "mms", "lazy-mms"}));
  so->add_option("-i,--instance", so_in, "instance JSON path")->required();
  so->add_option("-o,--output", so_out, "solution output path or -")->capture_default_str();
  auto* so_thr_opt = so->add_option("--threshold", so_threshold,
                                    "lazy-mms: single run at this least-support target");
  so->add_option("--eps", so_eps, "lazy-mms: search accuracy when no threshold is given")
      ->capture_default_str();
  so->add_flag("--exact", so_exact, "exact rational arithmetic");
  so->add_option("--threads", so_threads, "OpenMP threads for the mms candidate sweep");
  so->callback([&] {
    const bool parallel = apply_threads(so_threads);
    std::optional<std::string> thr;
    if (so_thr_opt->count() > 0) thr = so_threshold;
    rc = dispatch(so_exact, [&](auto tag) {
      using W = std::decay_t<decltype(tag)>;
      return run_solve<W>(so_in, so_algo, thr, so_eps, parallel, so_out);
    });
  });

  // postprocess
  auto* post = app.add_subcommand("postprocess", "improve an existing solution");
  post->require_subcommand(1);
  std::string lp_in, lp_sol, lp_out = "-", lp_eps;
  bool lp_exact = false;
  auto* lp = post->add_subcommand("ls-pjr",
                                  "local search until the parametric representation test passes");
  lp->add_option("--eps", lp_eps, "relative step, or inf for plain threshold mode")->required();
  lp->add_option("-i,--instance", lp_in, "instance JSON path")->required();
  lp->add_option("-s,--solution", lp_sol, "solution JSON path")->required();
  lp->add_option("-o,--output", lp_out, "solution output path or -")->capture_default_str();
  lp->add_flag("--exact", lp_exact, "exact rational arithmetic");
  lp->callback([&] {
    rc = dispatch(lp_exact, [&](auto tag) {
      using W = std::decay_t<decltype(tag)>;
      return run_ls_pjr<W>(lp_in, lp_sol, lp_eps, lp_out);
    });
  });

  // verify
  std::string ve_in, ve_sol, ve_pjr_t;
  bool ve_exact = false;
  auto* ve = app.add_subcommand("verify", "admission test for an untrusted solution");
  ve->add_option("-i,--instance", ve_in, "instance JSON path")->required();
  ve->add_option("-s,--solution", ve_sol, "solution JSON path")->required();
  auto* ve_pjr_opt = ve->add_option("--pjr-t", ve_pjr_t, "also test representation at this threshold");
  ve->add_flag("--exact", ve_exact, "exact rational arithmetic");
  ve->callback([&] {
    std::optional<std::string> t;
    if (ve_pjr_opt->count() > 0) t = ve_pjr_t;
    rc = dispatch(ve_exact, [&](auto tag) {
      using W = std::decay_t<decltype(tag)>;
      return run_verify<W>(ve_in, ve_sol, t);
    });
  });

  // trim
  std::string tr_in, tr_sol, tr_out = "-";
  bool tr_exact = false;
  auto* tr = app.add_subcommand("trim", "sparsify a solution to a forest of positive edges");
  tr->add_option("-i,--instance", tr_in, "instance JSON path")->required();
  tr->add_option("-s,--solution", tr_sol, "solution JSON path")->required();
  tr->add_option("-o,--output", tr_out, "solution output path or -")->capture_default_str();
  tr->add_flag("--exact", tr_exact, "exact rational arithmetic");
  tr->callback([&] {
    rc = dispatch(tr_exact, [&](auto tag) {
      using W = std::decay_t<decltype(tag)>;
      return run_trim<W>(tr_in, tr_sol, tr_out);
    });
  });

  // oracle
  auto* orc = app.add_subcommand("oracle", "exact reference answers by enumeration");
  orc->require_subcommand(1);

  std::string oo_in;
  int oo_threads = 0;
  auto* oo = orc->add_subcommand("opt", "optimal maximin support value by full enumeration");
  oo->add_option("-i,--instance", oo_in, "instance JSON path")->required();
  oo->add_option("--threads", oo_threads, "OpenMP threads over committee ranks");
  oo->callback([&] { rc = run_oracle_opt(oo_in, apply_threads(oo_threads)); });

  std::string op_in, op_sol, op_t;
  auto* op = orc->add_subcommand("pjr", "exact representation check by voter-subset enumeration");
  op->add_option("-i,--instance", op_in, "instance JSON path")->required();
  op->add_option("-s,--solution", op_sol, "solution JSON path (committee is used)")->required();
  auto* op_t_opt = op->add_option("--t", op_t, "threshold; defaults to total stake / k");
  op->callback([&] {
    std::optional<std::string> t;
    if (op_t_opt->count() > 0) t = op_t;
    rc = run_oracle_pjr(op_in, op_sol, t);
  });

  std::string os_in, os_sol, os_cand;
  auto* os = orc->add_subcommand("score", "candidate score by root finding on the prescore");
  os->add_option("-i,--instance", os_in, "instance JSON path")->required();
  os->add_option("-s,--solution", os_sol, "solution JSON path")->required();
  os->add_option("--candidate", os_cand, "non-member candidate name")->required();
  os->callback([&] { rc = run_oracle_score(os_in, os_sol, os_cand); });

  // simulate
  std::string si_in, si_provers, si_mode = "full", si_winner;
  int si_window = 0, si_extension = -1;
  auto* si = app.add_subcommand("simulate", "off-chain provers against the on-chain verifier");
  si->add_option("-i,--instance", si_in, "instance JSON path")->required();
  si->add_option("--provers", si_provers, "prover roster JSON path")->required();
  si->add_option("--mode", si_mode, "full | optimized")
      ->capture_default_str()
      ->check(CLI::IsMember({"full", "optimized"}));
  si->add_option("--window", si_window, "window length in blocks; default fits the roster");
  si->add_option("--extension", si_extension, "extension length in blocks; default k");
  si->add_option("--winner", si_winner, "also write the declared winner here");
  si->callback(
      [&] { rc = run_simulate(si_in, si_provers, si_mode, si_window, si_extension, si_winner); });

  // bench
  std::string be_family = "random", be_eps = "1/10";
  std::vector<int> be_sizes;
  std::uint64_t be_seed = 1;
  int be_threads = 0;
  auto* be = app.add_subcommand("bench", "objective ratios and timings as CSV");
  be->add_option("--family", be_family, "random | phragmen-worstcase | cubic-gap")
      ->capture_default_str()
      ->check(CLI::IsMember({"random", "phragmen-worstcase", "cubic-gap"}));
  be->add_option("--sizes", be_sizes, "comma-separated instance sizes")
      ->required()
      ->delimiter(',');
  be->add_option("--seed", be_seed, "RNG seed")->capture_default_str();
  be->add_option("--eps", be_eps, "lazy-mms search accuracy")->capture_default_str();
  be->add_option("--threads", be_threads, "OpenMP threads for the mms candidate sweep");
  be->callback(
      [&] { rc = run_bench(be_family, be_sizes, be_seed, be_eps, apply_threads(be_threads)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  } catch (const VerdictFailure& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return rc;
}
