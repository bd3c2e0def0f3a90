// Copyright 2026 The clockauction Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>

#include "test_util.hpp"

namespace clockauction {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& tag) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path p = fs::temp_directory_path() / "clockauction_tests" /
               (std::string(info->test_suite_name()) + "." + info->name() + "." + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

GameInstance family_instance(int types, int sample, ProcessingRule rule = ProcessingRule::kDropByBidder) {
  return generate_family_member("2p", types, sample, 31, {rule}).front();
}

TEST(StraightforwardTest, ChoiceExamples) {
  const auto rules = case_study_rules();
  const std::vector<DemandVector> actions{{0, 0}, {0, 1}, {0, 2}, {1, 0}};
  // Highest profit wins.
  EXPECT_EQ(straightforward_choice(rules, actions, {0.0, 1.0, 3.0, 2.0}), 2);
  // Tie on profit: the smaller activity wins ((0,2) has 6 points, (1,0) has 5).
  EXPECT_EQ(straightforward_choice(rules, actions, {0.0, 1.0, 3.0, 3.0}), 3);
  // Tie on profit and activity: the lexicographically first bid.
  EXPECT_EQ(straightforward_choice(rules, {{0, 0}, {0, 1}, {0, 1}}, {-1.0, 2.0, 2.0}), 1);
  EXPECT_EQ(straightforward_choice(rules, actions, {0.0, -1.0, -2.0, -3.0}), 0);
}

TEST(StraightforwardTest, PolicyPicksMyopicBestEverywhere) {
  const GameInstance inst = family_instance(3, 0);
  const GameTree tree = build_game_tree(inst);
  const Policy sf = straightforward_policy(inst, tree);
  EXPECT_TRUE(sf.pure);
  for (int p = 0; p < 2; ++p) {
    for (int s = 0; s < tree.num_infostates(p); ++s) {
      const auto& info = tree.infostate(p, s);
      const int a = argmax_lowest(sf.probs[p][s]);
      const double best = *std::max_element(info.profits.begin(), info.profits.end());
      EXPECT_NEAR(info.profits[a], best, 1e-12);
      EXPECT_EQ(sf.probs[p][s][a], 1.0);
    }
  }
}

TEST(SimulateTest, DeterministicAndFirstEpisodeMatchesSingleEpisode) {
  const GameInstance inst = family_instance(2, 1, ProcessingRule::kDropByLicense);
  const GameTree tree = build_game_tree(inst);
  Rng prng(2);
  const Policy pol = testing::random_policy(tree, prng);
  std::vector<EpisodeRecord> a, b;
  Rng r1(9), r2(9), r3(9);
  const auto ma = simulate(tree, pol, 200, r1, &a);
  const auto mb = simulate(tree, pol, 200, r2, &b);
  EXPECT_EQ(ma.revenue, mb.revenue);
  EXPECT_EQ(ma.lotteries, mb.lotteries);
  ASSERT_EQ(a.size(), 200u);
  const EpisodeRecord one = play_episode(tree, pol, r3);
  EXPECT_EQ(one.types, a[0].types);
  EXPECT_EQ(one.allocation, a[0].allocation);
  EXPECT_EQ(one.round_lottery, a[0].round_lottery);
  EXPECT_EQ(a[199].episode, 199);
  EXPECT_THROW(simulate(tree, pol, 0, r1), Error);
}

TEST(SimulateTest, EpisodeAccountingIdentities) {
  for (auto rule : {ProcessingRule::kDropByBidder, ProcessingRule::kDropByLicense}) {
    const GameInstance inst = family_instance(3, 2, rule);
    const GameTree tree = build_game_tree(inst);
    Rng prng(5);
    const Policy pol = testing::random_policy(tree, prng);
    std::vector<EpisodeRecord> log;
    Rng rng(6);
    const auto m = simulate(tree, pol, 500, rng, &log);
    const int warmup = static_cast<int>(inst.rules.warmup_bids.size());
    double revenue = 0.0, lotteries = 0.0;
    for (const auto& ep : log) {
      EXPECT_EQ(ep.strategic_rounds, static_cast<int>(ep.round_lottery.size()));
      EXPECT_EQ(ep.total_rounds, ep.strategic_rounds + warmup);
      EXPECT_EQ(ep.lotteries, std::count(ep.round_lottery.begin(), ep.round_lottery.end(), true));
      double paid = 0.0, value = 0.0;
      int sold = 0;
      for (int i = 0; i < 2; ++i) {
        paid += ep.payments[i];
        value += inst.values.value(inst.rules, i, ep.types[i], ep.allocation[i]);
        for (int x : ep.allocation[i]) sold += x;
      }
      EXPECT_NEAR(ep.revenue, paid, 1e-9);
      EXPECT_NEAR(ep.welfare, value, 1e-9);
      int supply = 0;
      for (const auto& p : inst.rules.products) supply += p.supply;
      EXPECT_EQ(ep.unsold, supply - sold);
      revenue += ep.revenue;
      lotteries += ep.lotteries;
    }
    EXPECT_NEAR(m.revenue, revenue / 500, 1e-9);
    EXPECT_NEAR(m.lotteries, lotteries / 500, 1e-12);
  }
}

TEST(SimulateTest, PureSingleTypeWithoutLotteriesHasNoVariance) {
  // Find a one-type instance whose straightforward path has no lottery.
  std::vector<EpisodeRecord> log;
  for (int sample = 0; sample < 20; ++sample) {
    const GameInstance inst = family_instance(1, sample);
    const GameTree tree = build_game_tree(inst);
    Rng probe(0);
    if (play_episode(tree, straightforward_policy(inst, tree), probe).lotteries > 0) continue;
    Rng rng(1);
    simulate(tree, straightforward_policy(inst, tree), 50, rng, &log);
    break;
  }
  ASSERT_EQ(log.size(), 50u);
  for (const auto& ep : log) {
    EXPECT_EQ(ep.revenue, log[0].revenue);
    EXPECT_EQ(ep.allocation, log[0].allocation);
  }
}

TEST(IoTest, InstanceRoundTrip) {
  const GameInstance inst = family_instance(3, 0, ProcessingRule::kDropByLicense);
  const OrderedJson j = to_json(inst);
  const GameInstance back = instance_from_json(j);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.rules.processing_rule, ProcessingRule::kDropByLicense);
  EXPECT_EQ(back.values.table(1, 2), inst.values.table(1, 2));

  OrderedJson bad = j;
  bad["value_tables"][0][0][1] = 123.0;
  EXPECT_THROW(instance_from_json(bad), Error);
  OrderedJson future = j;
  future["schema_version"] = kSchemaVersion + 1;
  EXPECT_THROW(instance_from_json(future), Error);
  EXPECT_THROW(parse_json("{not json", "instance"), Error);
}

TEST(IoTest, FileRoundTripAndMissingFile) {
  const fs::path dir = scratch_dir("io");
  const GameInstance inst = family_instance(1, 0);
  write_json(dir / "nested" / "inst.json", to_json(inst));
  EXPECT_EQ(to_json(load_instance(dir / "nested" / "inst.json")).dump(), to_json(inst).dump());
  try {
    load_instance(dir / "missing.json");
    FAIL() << "expected an io error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(IoTest, PolicyAndCheckpointRoundTrip) {
  const GameInstance inst = family_instance(2, 0);
  const GameTree tree = build_game_tree(inst);
  SolverConfig cfg;
  cfg.iterations = 500;
  const TrainResult tr = train(tree, cfg);
  const Policy back = policy_from_json(tree, parse_json(to_json(tree, tr.average, inst.id).dump(), "policy"));
  EXPECT_EQ(back.probs, tr.average.probs);
  const Checkpoint cp = checkpoint_from_json(tree, parse_json(to_json(tree, tr.checkpoints.back()).dump(), "cp"));
  EXPECT_EQ(cp.iteration, 500);
  EXPECT_EQ(cp.table, tr.table);

  // A policy for a different game does not map.
  const GameTree other = build_game_tree(family_instance(3, 1));
  EXPECT_THROW(policy_from_json(other, to_json(tree, tr.average, inst.id)), Error);
}

TEST(CsvTest, FormattingAndOrdering) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0), "2");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  CsvRow a, b;
  a.instance_id = "x";
  a.family = "2p";
  a.num_types = 3;
  a.algorithm = "mccfr";
  b = a;
  b.num_types = 1;
  b.excluded = true;
  const std::string csv = render_csv({a, b});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
  EXPECT_LT(csv.find(",1,mccfr"), csv.find(",3,mccfr"));
  EXPECT_EQ(csv_line(csv_row_from_json(to_json(b))), csv_line(b));
}

TEST(HarnessTest, RunIsByteStableAndConsistent) {
  RunSpec spec;
  spec.instances = {family_instance(1, 0), family_instance(1, 1, ProcessingRule::kDropByLicense)};
  spec.solver.iterations = 2000;
  spec.seeds = {0, 1};
  spec.episodes = 300;
  spec.master_seed = 4;
  spec.out_dir = scratch_dir("a");
  const auto first = run_experiment(spec);
  spec.out_dir = scratch_dir("b");
  const auto second = run_experiment(spec);
  EXPECT_TRUE(first.failures.empty());
  ASSERT_EQ(first.rows.size(), 6u);
  const std::string csv = read_text(first.csv_path);
  EXPECT_EQ(csv, read_text(second.csv_path));
  EXPECT_EQ(csv, render_csv(collect_runs(spec.out_dir)));
  EXPECT_TRUE(fs::exists(spec.out_dir / "summary.json"));
  for (const auto& r : first.rows) {
    EXPECT_EQ(r.excluded, !(r.nashconv <= spec.threshold));
    EXPECT_EQ(r.metrics.episodes, 300);
    EXPECT_EQ(r.num_types, 1);
  }
  int baselines = 0;
  for (const auto& r : first.rows) baselines += r.algorithm == "straightforward";
  EXPECT_EQ(baselines, 2);
}

TEST(HarnessTest, SummaryLeavesExcludedRowsOut) {
  CsvRow kept, dropped;
  kept.instance_id = dropped.instance_id = "x";
  kept.family = dropped.family = "2p";
  kept.rule = dropped.rule = "dbb";
  kept.num_types = dropped.num_types = 1;
  kept.algorithm = dropped.algorithm = "mccfr";
  kept.metrics.revenue = 10.0;
  dropped.metrics.revenue = 1000.0;
  dropped.excluded = true;
  dropped.seed = 1;
  const OrderedJson s = summarize({kept, dropped});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0]["revenue"].get<double>(), 10.0);
}

TEST(AblationTest, RecordShape) {
  AblationSpec spec;
  spec.instances = {family_instance(1, 0)};
  spec.seeds = {0};
  spec.iterations = 60;
  spec.num_checkpoints = 3;
  const auto records = ablate(spec);
  ASSERT_EQ(records.size(), 4u);
  std::set<std::pair<bool, bool>> variants;
  for (const auto& r : records) {
    variants.insert({r["secondary_rewards"].get<bool>(), r["trembling"].get<bool>()});
    ASSERT_EQ(r["checkpoints"].size(), 3u);
    EXPECT_EQ(r["checkpoints"][0]["iteration"].get<int>(), 20);
    EXPECT_EQ(r["checkpoints"][2]["iteration"].get<int>(), 60);
    EXPECT_GE(r["checkpoints"][2]["nashconv"].get<double>(), 0.0);
  }
  EXPECT_EQ(variants.size(), 4u);
  spec.iterations = 2;
  EXPECT_THROW(ablate(spec), Error);
}

}  // namespace
}  // namespace clockauction
