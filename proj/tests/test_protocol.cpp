#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "elect/protocol.hpp"
#include "elect/solvers.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace elect;
using testutil::mk;

namespace {

bool near(std::optional<double> a, double b) { return a && std::abs(*a - b) <= 1e-9; }

const double kPw4Seq = 60.0 / 119.0;

std::vector<protocol::ProverSpec> golden_provers() {
  using protocol::Strategy;
  return {{Strategy::SeqPhragmen, 1, 0.0, ""},
          {Strategy::BalancedPhragmms, 2, 0.0, ""},
          {Strategy::Malformed, 2, 0.0, ""},
          {Strategy::AdversarialOverweight, 3, 0.0, ""},
          {Strategy::SeqPhragmen, 3, 0.0, ""}};
}

}  // namespace

TEST_CASE("prover specs parse from JSON, hyphens and all") {
  auto specs = protocol::parse_provers(
      R"([{"strategy": "balanced-phragmms", "submit_block": 1},
          {"strategy": "lazy_mms", "submit_block": 2, "threshold": 0.5, "name": "lazy"}])");
  REQUIRE(specs.size() == 2);
  CHECK(specs[0].strategy == protocol::Strategy::BalancedPhragmms);
  CHECK(specs[0].submit_block == 1);
  CHECK(specs[1].strategy == protocol::Strategy::LazyMms);
  CHECK(specs[1].threshold == 0.5);
  CHECK(specs[1].name == "lazy");

  CHECK_THROWS_AS(protocol::parse_provers("not json"), ValidationError);
  CHECK_THROWS_AS(protocol::parse_provers(R"({"strategy": "mms"})"), ValidationError);
  CHECK_THROWS_AS(protocol::parse_provers("[]"), ValidationError);
  CHECK_THROWS_AS(protocol::parse_provers(R"([{"submit_block": 1}])"), ValidationError);
  CHECK_THROWS_AS(protocol::parse_provers(R"([{"strategy": "zz", "submit_block": 1}])"),
                  ValidationError);
  CHECK_THROWS_AS(protocol::parse_provers(R"([{"strategy": "mms"}])"), ValidationError);
}

TEST_CASE("strategy names are stable") {
  using protocol::Strategy;
  CHECK(protocol::strategy_name(Strategy::BalancedPhragmms) == "balanced_phragmms");
  CHECK(protocol::strategy_name(Strategy::SeqPhragmen) == "seq_phragmen");
  CHECK(protocol::strategy_name(Strategy::Mms) == "mms");
  CHECK(protocol::strategy_name(Strategy::LazyMms) == "lazy_mms");
  CHECK(protocol::strategy_name(Strategy::AdversarialOverweight) == "adversarial_overweight");
  CHECK(protocol::strategy_name(Strategy::Malformed) == "malformed");
}

TEST_CASE("submissions are deterministic and honest ones are forest-sized") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  for (auto strat : {protocol::Strategy::BalancedPhragmms, protocol::Strategy::SeqPhragmen,
                     protocol::Strategy::Mms}) {
    protocol::ProverSpec spec;
    spec.strategy = strat;
    auto one = protocol::build_submission(inst, spec);
    auto two = protocol::build_submission(inst, spec);
    CHECK(serialize_solution(one) == serialize_solution(two));
    CHECK(static_cast<int>(one.committee.size()) == inst.committee_size());
    CHECK(static_cast<int>(one.entries.size()) <
          inst.num_voters() + inst.committee_size());
    auto bound = bind_solution<double>(inst, one);
    REQUIRE(bound.solution.has_value());
    CHECK(verify::verify_solution(inst, *bound.solution).feasible);
  }
}

TEST_CASE("lazy prover with an unreachable threshold submits a short committee") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  protocol::ProverSpec spec;
  spec.strategy = protocol::Strategy::LazyMms;
  spec.threshold = 100.0;
  auto file = protocol::build_submission(inst, spec);
  CHECK(static_cast<int>(file.committee.size()) < inst.committee_size());
  auto out = verify::verify_file<double>(inst, file);
  CHECK_FALSE(out.report.feasible);
  REQUIRE(out.report.witness.has_value());
  CHECK(out.report.witness->what == "committee_size");
}

TEST_CASE("adversarial submissions: overweight overspends, malformed fails the bind") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  protocol::ProverSpec over;
  over.strategy = protocol::Strategy::AdversarialOverweight;
  auto file = protocol::build_submission(inst, over);
  auto out = verify::verify_file<double>(inst, file);
  CHECK(out.bind_error.empty());
  CHECK_FALSE(out.report.feasible);
  REQUIRE(out.report.witness.has_value());
  CHECK(out.report.witness->what == "overspent");

  protocol::ProverSpec bad;
  bad.strategy = protocol::Strategy::Malformed;
  auto mal = protocol::build_submission(inst, bad);
  CHECK(verify::verify_file<double>(inst, mal).bind_error == "unknown committee candidate");
}

TEST_CASE("full-check window: honest and adversarial provers, frozen event trail") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  auto r = protocol::run_window(inst, golden_provers(), protocol::Mode::FullCheck, 3);

  REQUIRE(r.winner.has_value());
  CHECK(r.winner_actor == "p1:balanced_phragmms");
  CHECK_FALSE(r.extended);
  CHECK(r.winner->committee == std::vector<CandidateId>{1, 2, 3, 4});

  REQUIRE(r.log.size() == 11);
  auto& L = r.log;
  CHECK(L[0].actor == "p0:seq_phragmen");
  CHECK(L[0].action == "submitted");
  CHECK(L[0].block == 1);
  CHECK(near(L[0].objective, kPw4Seq));
  CHECK(L[1].action == "rejected");
  CHECK(L[1].reason == "fails verification (support_above_min); submitter subject to fine");
  CHECK(L[2].actor == "p1:balanced_phragmms");
  CHECK(L[2].action == "submitted");
  CHECK(near(L[2].objective, 1.0));
  CHECK(L[3].action == "admitted");
  CHECK(L[3].reason == "passes full verification; submitter eligible for reward");
  CHECK(L[4].actor == "p2:malformed");
  CHECK_FALSE(L[4].objective.has_value());
  CHECK(L[5].reason ==
        "malformed submission (unknown committee candidate); submitter subject to fine");
  CHECK(L[6].actor == "p3:adversarial_overweight");
  CHECK(near(L[6].objective, 2.0));
  CHECK(L[7].reason == "infeasible submission (overspent); submitter subject to fine");
  CHECK(L[8].actor == "p4:seq_phragmen");
  CHECK(L[9].reason == "objective does not improve on the tentative winner; no reward");
  CHECK(L[10].actor == "p1:balanced_phragmms");
  CHECK(L[10].action == "declared_winner");
  CHECK(L[10].block == 3);
  CHECK(L[10].reason == "official winner; fully verified; eligible for reward");
}

TEST_CASE("window logs are byte-identical across reruns") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  for (auto mode : {protocol::Mode::FullCheck, protocol::Mode::Optimized}) {
    auto a = protocol::run_window(inst, golden_provers(), mode, 3);
    auto b = protocol::run_window(inst, golden_provers(), mode, 3);
    auto ja = protocol::log_to_jsonl(a.log);
    CHECK(ja == protocol::log_to_jsonl(b.log));
    CHECK_FALSE(ja.empty());
  }
}

TEST_CASE("optimized window: one full verification, then the cheap admission path") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  std::vector<protocol::ProverSpec> provers = {
      {protocol::Strategy::BalancedPhragmms, 1, 0.0, ""},
      {protocol::Strategy::Mms, 2, 0.0, ""}};
  auto r = protocol::run_window(inst, provers, protocol::Mode::Optimized, 2);
  REQUIRE(r.winner.has_value());
  CHECK(r.winner_actor == "p0:balanced_phragmms");
  CHECK_FALSE(r.extended);
  REQUIRE(r.log.size() == 5);
  CHECK(r.log[1].action == "admitted");
  CHECK(r.log[1].reason == "passes full verification; submitter eligible for reward");
  CHECK(r.log[3].action == "rejected");
  CHECK(r.log[3].reason == "objective does not improve on the tentative winner; no reward");
  CHECK(r.log[4].action == "declared_winner");
  CHECK(r.log[4].reason == "official winner; representation check at average support passed");

  auto full = protocol::run_window(inst, provers, protocol::Mode::FullCheck, 2);
  REQUIRE(full.winner.has_value());
  CHECK(full.winner->committee == r.winner->committee);
}

TEST_CASE("optimized admission replaces a weaker tentative winner without a full recheck") {
  auto inst = mk(3, 2, {{"4", {0}}, {"2", {0, 1}}, {"1", {2}}});
  auto weak = Solution<double>::zero(inst);
  weak.add_member(0);
  weak.add_member(1);
  weak.weights[inst.edge_between(0, 0)] = 4.0;
  weak.weights[inst.edge_between(1, 1)] = 1.0;  // unspent stake: full check would fail
  weak.recompute_supports(inst);

  protocol::ChainState state;
  state.mode = protocol::Mode::Optimized;
  state.window_end = 3;
  state.tentative = protocol::Tentative{weak, "p9:custom", 1, 1.0, true};

  auto balanced = solvers::solve_balanced_phragmms<double>(inst);
  protocol::submit(inst, state, 2, "p0:balanced_phragmms", solution_to_file(inst, balanced));

  REQUIRE(state.log.size() == 2);
  CHECK(state.log[1].action == "admitted");
  CHECK(state.log[1].reason ==
        "replaces tentative winner p9:custom; submitter eligible for reward");
  REQUIRE(state.tentative.has_value());
  CHECK(state.tentative->actor == "p0:balanced_phragmms");
  CHECK_FALSE(state.tentative->fully_verified);
  CHECK(near(state.tentative->objective, 2.0));
}

TEST_CASE("optimized finalize extends the window and repairs an unrepresentative winner") {
  auto inst = mk(3, 2, {{"4", {0}}, {"2", {0, 1}}, {"12", {2}}});
  protocol::ChainState state;
  state.mode = protocol::Mode::Optimized;
  state.window_end = 3;
  state.tentative =
      protocol::Tentative{balancing::balance<double>(inst, {0, 1}), "p0:crafted", 1, 2.0, false};

  auto r = protocol::finalize(inst, state, 2);
  CHECK(r.extended);
  REQUIRE(r.winner.has_value());
  CHECK(r.winner_actor == "chain:local_search");
  CHECK(r.winner->committee == std::vector<CandidateId>{0, 2});

  REQUIRE(r.log.size() == 3);
  CHECK(r.log[0].action == "window_extended");
  CHECK(r.log[0].actor == "chain");
  CHECK(r.log[0].block == 3);
  CHECK(r.log[0].reason ==
        "tentative winner fails representation check at average support; window extended 2 "
        "blocks for local-search repair");
  CHECK(r.log[1].action == "admitted");
  CHECK(r.log[1].actor == "chain:local_search");
  CHECK(r.log[1].block == 5);
  CHECK(near(r.log[1].objective, 4.0));
  CHECK(r.log[1].reason == "local-search repair of the tentative winner; objective cannot decrease");
  CHECK(r.log[2].action == "declared_winner");
  CHECK(r.log[2].block == 5);
  CHECK(r.log[2].reason == "official winner; repaired solution satisfies the representation check");
}

TEST_CASE("window with no admissible submission declares no winner") {
  auto inst = gen_phragmen_worstcase(2, Rational(1, 10));
  std::vector<protocol::ProverSpec> provers = {
      {protocol::Strategy::Malformed, 1, 0.0, ""},
      {protocol::Strategy::AdversarialOverweight, 1, 0.0, ""}};
  auto r = protocol::run_window(inst, provers, protocol::Mode::FullCheck, 1);
  CHECK_FALSE(r.winner.has_value());
  CHECK(r.winner_actor.empty());
  CHECK(r.log.back().action == "declared_winner");
  CHECK(r.log.back().reason == "no admissible submission in the window");
}

TEST_CASE("adversaries never win, in either mode, across a corpus sample") {
  int windows = 0;
  for (const auto& inst : testutil::corpus(12)) {
    std::vector<protocol::ProverSpec> provers = {
        {protocol::Strategy::Malformed, 1, 0.0, ""},
        {protocol::Strategy::AdversarialOverweight, 1, 0.0, ""},
        {protocol::Strategy::BalancedPhragmms, 2, 0.0, ""}};
    for (auto mode : {protocol::Mode::FullCheck, protocol::Mode::Optimized}) {
      auto r = protocol::run_window(inst, provers, mode, 2);
      REQUIRE(r.winner.has_value());
      CHECK(r.winner_actor == "p2:balanced_phragmms");
      ++windows;
    }
  }
  CHECK(windows >= 20);
}

TEST_CASE("window argument validation") {
  auto inst = gen_phragmen_worstcase(2, Rational(1, 10));
  std::vector<protocol::ProverSpec> ok = {{protocol::Strategy::Mms, 1, 0.0, ""}};
  CHECK_THROWS_AS(protocol::run_window(inst, {}, protocol::Mode::FullCheck, 2), ValidationError);
  CHECK_THROWS_AS(protocol::run_window(inst, ok, protocol::Mode::FullCheck, 0), ValidationError);
  std::vector<protocol::ProverSpec> late = {{protocol::Strategy::Mms, 5, 0.0, ""}};
  CHECK_THROWS_AS(protocol::run_window(inst, late, protocol::Mode::FullCheck, 2), ValidationError);
}

TEST_CASE("event log serializes to one JSON object per line") {
  auto inst = gen_phragmen_worstcase(4, Rational(1, 10));
  auto r = protocol::run_window(inst, golden_provers(), protocol::Mode::FullCheck, 3);
  auto jsonl = protocol::log_to_jsonl(r.log);
  size_t lines = 0;
  size_t start = 0;
  while (start < jsonl.size()) {
    size_t end = jsonl.find('\n', start);
    REQUIRE(end != std::string::npos);
    auto j = nlohmann::json::parse(jsonl.substr(start, end - start));
    CHECK(j.contains("block"));
    CHECK(j.contains("actor"));
    CHECK(j.contains("action"));
    CHECK(j.contains("reason"));
    ++lines;
    start = end + 1;
  }
  CHECK(lines == r.log.size());
}
