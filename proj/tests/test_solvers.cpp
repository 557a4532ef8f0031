#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "elect/oracle.hpp"
#include "elect/solvers.hpp"
#include "helpers.hpp"

using namespace elect;
using testutil::mk;

namespace {

void check_weights(const ElectionInstance& inst, const Solution<Rational>& sol,
                   const std::map<std::pair<VoterId, CandidateId>, Rational>& expect) {
  for (int e = 0; e < inst.num_edges(); ++e) {
    auto key = std::make_pair(inst.edge_voter(e), inst.edge_candidate(e));
    auto it = expect.find(key);
    Rational want = (it == expect.end()) ? Rational(0) : it->second;
    CHECK(sol.weights[e] == want);
  }
}

}  // namespace

TEST_CASE("sequential method on the adversarial family, k=2: full frozen trace") {
  auto inst = gen_phragmen_worstcase(2, Rational(1, 10));
  auto sol = solvers::solve_seq_phragmen<Rational>(inst);
  CHECK(sol.committee == std::vector<CandidateId>{1, 0});
  CHECK(sol.supports[0] == Rational(5, 7));
  CHECK(sol.supports[1] == Rational(2));
  CHECK(*sol.objective() == Rational(5, 7));
  check_weights(inst, sol,
                {{{0, 0}, Rational(5, 7)}, {{1, 1}, Rational(1)}, {{2, 1}, Rational(1)}});
}

TEST_CASE("sequential method on the adversarial family, k=4: full frozen trace") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  auto sol = solvers::solve_seq_phragmen<Rational>(inst);
  CHECK(sol.committee == std::vector<CandidateId>{1, 2, 3, 0});
  CHECK(sol.supports[0] == Rational(60, 119));
  CHECK(sol.supports[1] == Rational(172, 91));
  CHECK(sol.supports[2] == Rational(108, 91));
  CHECK(sol.supports[3] == Rational(12, 13));
  CHECK(*sol.objective() == Rational(60, 119));
  check_weights(inst, sol,
                {{{0, 0}, Rational(60, 119)},
                 {{1, 1}, Rational(1)},
                 {{2, 1}, Rational(3, 7)},
                 {{2, 2}, Rational(4, 7)},
                 {{3, 1}, Rational(3, 13)},
                 {{3, 2}, Rational(4, 13)},
                 {{3, 3}, Rational(6, 13)},
                 {{4, 1}, Rational(3, 13)},
                 {{4, 2}, Rational(4, 13)},
                 {{4, 3}, Rational(6, 13)}});
}

TEST_CASE("sequential method hits exactly 1/(H_k - eps) for k in {8, 16}") {
  auto s8 = solvers::solve_seq_phragmen<Rational>(gen_phragmen_worstcase(8, Rational(1, 10)));
  CHECK(*s8.objective() == Rational(280, 733));
  CHECK(s8.is_member(0));
  auto s16 = solvers::solve_seq_phragmen<Rational>(gen_phragmen_worstcase(16, Rational(1, 10)));
  CHECK(*s16.objective() == Rational(720720, 2364487));
  CHECK(s16.is_member(0));
}

TEST_CASE("sequential method output is always feasible with a full committee") {
  for (const auto& inst : testutil::corpus(80)) {
    auto sol = solvers::solve_seq_phragmen<Rational>(inst);
    CHECK(static_cast<int>(sol.committee.size()) == inst.committee_size());
    CHECK(feasibility_violation(inst, sol) == std::nullopt);
  }
}

TEST_CASE("balanced greedy: balanced output whose least support is the committee optimum") {
  for (const auto& inst : testutil::corpus(80)) {
    auto sol = solvers::solve_balanced_phragmms<Rational>(inst);
    CHECK(static_cast<int>(sol.committee.size()) == inst.committee_size());
    CHECK(feasibility_violation(inst, sol) == std::nullopt);
    CHECK(balancing::is_balanced(inst, sol));
    CHECK(*sol.objective() == testutil::subset_formula<Rational>(inst, sol.committee));
  }
}

TEST_CASE("balanced greedy never scores an outsider above its least support") {
  for (const auto& inst : testutil::corpus(40)) {
    auto sol = solvers::solve_balanced_phragmms<Rational>(inst);
    if (static_cast<int>(sol.committee.size()) == inst.num_candidates()) continue;
    auto ms = phragmms::max_score(inst, sol);
    CHECK(ms.value <= *sol.objective());
  }
}

TEST_CASE("exhaustive greedy: serial and parallel sweeps agree bit for bit") {
  for (const auto& inst : testutil::corpus(30)) {
    auto serial = solvers::solve_mms<Rational>(inst, false);
    auto parallel = solvers::solve_mms<Rational>(inst, true);
    CHECK(serial.committee == parallel.committee);
    CHECK(serial.weights == parallel.weights);
    CHECK(balancing::is_balanced(inst, serial));
    CHECK(*serial.objective() == testutil::subset_formula<Rational>(inst, serial.committee));
  }
}

TEST_CASE("exhaustive greedy never does worse than the balanced greedy") {
  for (const auto& inst : testutil::corpus(40)) {
    auto mms = solvers::solve_mms<Rational>(inst);
    auto bal = solvers::solve_balanced_phragmms<Rational>(inst);
    CHECK(*mms.objective() >= *bal.objective());
  }
}

TEST_CASE("lazy greedy at threshold zero reproduces the balanced greedy") {
  for (const auto& inst : testutil::corpus(40)) {
    auto lazy = solvers::solve_lazy_mms<Rational>(inst, Rational(0));
    auto bal = solvers::solve_balanced_phragmms<Rational>(inst);
    CHECK(lazy.success);
    CHECK(lazy.solution.committee == bal.committee);
    CHECK(*lazy.solution.objective() == *bal.objective());
  }
}

TEST_CASE("lazy greedy accepts and rejects around the committee optimum") {
  auto inst = mk(3, 2, {{"4", {0}}, {"2", {0, 1}}, {"1", {2}}});
  auto at_opt = solvers::solve_lazy_mms<Rational>(inst, Rational(2));
  CHECK(at_opt.success);
  CHECK(at_opt.solution.committee == std::vector<CandidateId>{0, 1});
  CHECK(*at_opt.solution.objective() == Rational(2));

  auto above = solvers::solve_lazy_mms<Rational>(inst, Rational(2) + Rational(1, 1000));
  CHECK_FALSE(above.success);
  CHECK(above.solution.committee == std::vector<CandidateId>{0});

  CHECK_THROWS_AS(solvers::solve_lazy_mms<Rational>(inst, Rational(-1)), std::invalid_argument);
}

TEST_CASE("lazy greedy always succeeds at half the balanced objective") {
  for (const auto& inst : testutil::corpus(60)) {
    auto bal = solvers::solve_balanced_phragmms<Rational>(inst);
    Rational half = *bal.objective() / 2;
    auto lazy = solvers::solve_lazy_mms<Rational>(inst, half);
    CHECK(lazy.success);
    CHECK(*lazy.solution.objective() >= half);
  }
}

TEST_CASE("threshold search: few trials, objective at least half the balanced one") {
  // range [t/2, 3.15t] has log-ratio log2(6.3); halving the log-gap down to
  // log(1.05) takes at most ceil(log2(log(6.3)/log(1.05))) = 6 probes
  for (const auto& inst : testutil::corpus(30)) {
    auto bal = solvers::solve_balanced_phragmms<Rational>(inst);
    auto r = solvers::solve_lazy_mms_search<Rational>(inst, Rational(1, 10));
    CHECK(r.trials <= 8);
    CHECK(static_cast<int>(r.solution.committee.size()) == inst.committee_size());
    CHECK(*r.solution.objective() >= *bal.objective() / 2);
    CHECK(feasibility_violation(inst, r.solution) == std::nullopt);
  }
  CHECK_THROWS_AS(solvers::solve_lazy_mms_search<Rational>(testutil::corpus(1)[0], Rational(0)),
                  std::invalid_argument);
}

TEST_CASE("local swap search: argument validation") {
  auto inst = mk(3, 2, {{"1", {0}}, {"1", {1}}, {"1", {2}}});
  auto seq = solvers::solve_seq_phragmen<Rational>(inst);
  CHECK_THROWS_AS(solvers::ls_pjr<Rational>(inst, seq, Rational(0)), std::invalid_argument);
  CHECK_THROWS_AS(solvers::ls_pjr<Rational>(inst, Solution<Rational>::zero(inst), std::nullopt),
                  std::invalid_argument);
}

TEST_CASE("local swap search from the sequential seed: objective never drops") {
  for (const auto& inst : testutil::corpus(60)) {
    auto seq = solvers::solve_seq_phragmen<Rational>(inst);
    Rational before = *seq.objective();
    auto r = solvers::ls_pjr<Rational>(inst, seq, Rational(1, 10));
    CHECK(*r.solution.objective() >= before);
    CHECK(static_cast<int>(r.solution.committee.size()) == inst.committee_size());
    CHECK(feasibility_violation(inst, r.solution) == std::nullopt);
  }
}

TEST_CASE("local swap search stops under the parametric threshold it promises") {
  for (const auto& inst : testutil::corpus(40)) {
    auto seq = solvers::solve_seq_phragmen<Rational>(inst);
    auto r = solvers::ls_pjr<Rational>(inst, seq, Rational(1, 10));
    const auto& sol = r.solution;
    if (static_cast<int>(sol.committee.size()) == inst.num_candidates()) continue;
    Rational least = *sol.objective();
    Rational t_hat = inst.total_stake<Rational>() / inst.committee_size();
    Rational stop = std::min(Rational(11, 10) * least, t_hat);
    CHECK(phragmms::max_score(inst, sol).value < stop);
  }
}

TEST_CASE("local swap search without eps needs at most k+1 rounds") {
  for (const auto& inst : testutil::corpus(60)) {
    auto seq = solvers::solve_seq_phragmen<Rational>(inst);
    auto r = solvers::ls_pjr<Rational>(inst, seq, std::nullopt);
    if (static_cast<int>(r.solution.committee.size()) == inst.num_candidates()) continue;
    CHECK(r.iterations <= inst.committee_size() + 1);
    Rational t_hat = inst.total_stake<Rational>() / inst.committee_size();
    CHECK(phragmms::max_score(inst, r.solution).value < t_hat);
  }
}

TEST_CASE("local swap search from a balanced seed respects the iteration budget") {
  const double per_k = 1.0 + std::log(3.15) / std::log(1.1);
  for (const auto& inst : testutil::corpus(40)) {
    auto bal = solvers::solve_balanced_phragmms<Rational>(inst);
    auto r = solvers::ls_pjr<Rational>(inst, bal, Rational(1, 10));
    CHECK(r.iterations <= static_cast<int>(inst.committee_size() * per_k) + 1);
  }
}

TEST_CASE("local swap results satisfy exact proportional representation at the stop level") {
  int checked = 0;
  for (const auto& inst : testutil::corpus(120)) {
    if (inst.num_voters() > 8 || inst.num_candidates() > 8) continue;
    auto seq = solvers::solve_seq_phragmen<Rational>(inst);
    auto r = solvers::ls_pjr<Rational>(inst, seq, Rational(1, 10));
    Rational least = *r.solution.objective();
    Rational t_hat = inst.total_stake<Rational>() / inst.committee_size();
    Rational level = std::min(Rational(11, 10) * least, t_hat);
    auto pjr = oracle::check_pjr_exact(inst, r.solution.committee, level);
    CHECK(pjr.ok);
    ++checked;
  }
  CHECK(checked >= 40);
}
