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

#include "test_util.hpp"

namespace clockauction {
namespace {

using testing::make_instance;

const TypeParams kWorked{24.0, 0.40, 0.15};
const TypeParams kRich{60.0, 0.40, 0.15};
const TypeParams kZero{0.0, 0.40, 0.15};

TEST(RootChanceTest, UniformProduct) {
  const auto rules = case_study_rules();
  auto three = make_instance(rules, {{kWorked, kRich, kZero}, {kWorked, kRich, kZero}});
  const auto p9 = root_chance(three);
  ASSERT_EQ(p9.size(), 9u);
  for (const auto& [prob, types] : p9) EXPECT_DOUBLE_EQ(prob, 1.0 / 9.0);
  EXPECT_EQ(p9.front().second, (std::vector<int>{0, 0}));
  EXPECT_EQ(p9[1].second, (std::vector<int>{0, 1}));

  EXPECT_EQ(root_chance(make_instance(rules, {{kWorked}, {kRich}})).size(), 1u);
  auto uneven = make_instance(rules, {{kWorked, kRich}, {kWorked, kRich, kZero, kWorked, kRich}});
  const auto p10 = root_chance(uneven);
  ASSERT_EQ(p10.size(), 10u);
  EXPECT_DOUBLE_EQ(p10[3].first, 0.1);
}

TEST(LegalActionsTest, ZeroValueKeepsOnlyZeroBid) {
  const auto inst = make_instance(case_study_rules(), {{kZero}, {kZero}});
  const auto s = replay_warmup(inst.rules);
  EXPECT_EQ(legal_actions(inst, make_info_state(inst, s, 0, 0)), (std::vector<DemandVector>{{0, 0}}));
}

TEST(LegalActionsTest, PruningDisabledMatchesActivityRule) {
  AuctionRules rules = case_study_rules();
  rules.dominated_bid_pruning = false;
  const auto inst = make_instance(rules, {{kZero}, {kZero}});
  const auto s = replay_warmup(rules);
  EXPECT_EQ(legal_actions(inst, make_info_state(inst, s, 0, 0)), activity_legal_demands(rules, s, 0));
}

TEST(LegalActionsTest, WorkedTypePrunesUnprofitableBids) {
  const auto inst = make_instance(case_study_rules(), {{kWorked}, {kWorked}});
  const auto s = replay_warmup(inst.rules);
  const auto info = make_info_state(inst, s, 0, 0);
  const auto actions = legal_actions(inst, info);
  EXPECT_NEAR(bundle_profit(inst, info, {0, 3}), 16.7623 - 23.1525, 1e-4);
  EXPECT_EQ(std::count(actions.begin(), actions.end(), DemandVector{0, 3}), 0);
  const double v11 = type_value(kWorked, {1, 1}, inst.rules.products);
  const bool keep11 = v11 - 19.7175 >= 0.0;
  EXPECT_EQ(std::count(actions.begin(), actions.end(), DemandVector{1, 1}), keep11 ? 1 : 0);
  EXPECT_EQ(actions.front(), (DemandVector{0, 0}));
  EXPECT_TRUE(std::is_sorted(actions.begin(), actions.end()));
}

class StepTest : public ::testing::Test {
 protected:
  void SetUp() override {
    AuctionRules rules = case_study_rules(ProcessingRule::kDropByLicense);
    rules.dominated_bid_pruning = false;
    inst_ = make_instance(rules, {{kRich}, {kRich}});
    h_ = initial_history(inst_, {0, 0});
  }
  int id(const DemandVector& d) const {
    const auto actions = legal_actions(inst_, make_info_state(inst_, h_.state, 0, 0));
    return static_cast<int>(std::find(actions.begin(), actions.end(), d) - actions.begin());
  }
  GameInstance inst_;
  History h_;
};

TEST_F(StepTest, DropByLicenseLottery) {
  const auto next = step(inst_, h_, {id({1, 1}), id({1, 1})});
  ASSERT_EQ(next.size(), 3u);
  std::vector<double> probs;
  for (const auto& [p, h] : next) {
    probs.push_back(p);
    EXPECT_TRUE(h.state.history.back().lottery);
  }
  std::sort(probs.begin(), probs.end());
  EXPECT_NEAR(probs[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(probs[1], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(probs[2], 2.0 / 3.0, 1e-15);
}

TEST_F(StepTest, RepeatingDemandRaisesPrice) {
  const auto next = step(inst_, h_, {id({0, 3}), id({0, 3})});
  ASSERT_EQ(next.size(), 1u);
  EXPECT_NEAR(next[0].second.state.price(inst_.rules, 1), 7.7175 * 1.05, 1e-9);
  EXPECT_FALSE(next[0].second.is_terminal());
}

TEST_F(StepTest, ClearingBidsTerminate) {
  const auto next = step(inst_, h_, {id({0, 2}), id({0, 2})});
  ASSERT_EQ(next.size(), 1u);
  EXPECT_TRUE(next[0].second.is_terminal());
}

TEST_F(StepTest, IllegalActionRejected) {
  EXPECT_THROW(step(inst_, h_, {99, 0}), Error);
}

TEST(PenaltyTest, EndpointsAndDegenerateRange) {
  EXPECT_EQ(round_penalties({3.0, 1.0, 2.0}), (std::vector<double>{0.0, 1.0, 0.5}));
  EXPECT_EQ(round_penalties({4.0}), (std::vector<double>{0.0}));
  EXPECT_EQ(round_penalties({2.0, 2.0}), (std::vector<double>{0.0, 0.0}));

  const auto inst = make_instance(case_study_rules(), {{kRich}, {kRich}});
  const auto s = replay_warmup(inst.rules);
  const auto info = make_info_state(inst, s, 0, 0);
  const auto actions = legal_actions(inst, info);
  const auto profits = action_profits(inst, info, actions);
  const int best = static_cast<int>(std::max_element(profits.begin(), profits.end()) - profits.begin());
  const int worst = static_cast<int>(std::min_element(profits.begin(), profits.end()) - profits.begin());
  EXPECT_EQ(round_penalty(inst, info, best), 0.0);
  EXPECT_EQ(round_penalty(inst, info, worst), 1.0);
}

TEST(TerminalUtilityTest, WorkedExampleAndPenaltyFlag) {
  AuctionRules rules = case_study_rules();
  rules.dominated_bid_pruning = false;
  const auto inst = make_instance(rules, {{kWorked}, {kWorked}});
  History h = initial_history(inst, {0, 0});
  const auto actions = legal_actions(inst, make_info_state(inst, h.state, 0, 0));
  const int a03 = static_cast<int>(std::find(actions.begin(), actions.end(), DemandVector{0, 3}) - actions.begin());
  const int a00 = 0;
  // Bidder 0 keeps (0,3); bidder 1 tries to exit but the sale guarantee
  // stops the drop at one remaining unit, so E clears at exactly 4.
  const auto next = step(inst, h, {a03, a00});
  ASSERT_EQ(next.size(), 1u);
  const History& end = next[0].second;
  ASSERT_TRUE(end.is_terminal());
  const auto u = terminal_utility(inst, end, false);
  EXPECT_NEAR(u[0], 16.7623 - 23.1525, 1e-4);
  EXPECT_EQ(end.state.processed[1], (DemandVector{0, 1}));
  EXPECT_NEAR(u[1], type_value(kWorked, {0, 1}, rules.products) - 7.7175, 1e-9);
  const auto up = terminal_utility(inst, end, true);
  EXPECT_NEAR(up[0], u[0] - end.penalties[0], 1e-15);
  EXPECT_GT(end.penalties[0], 0.0);
  EXPECT_THROW(terminal_utility(inst, h, false), Error);
}

TEST(GameTreeTest, ClearingWarmupHasNoDecisions) {
  AuctionRules rules = case_study_rules();
  rules.warmup_bids = {{{0, 2}, {0, 2}}};
  const auto inst = make_instance(rules, {{kWorked}, {kRich}});
  const GameTree tree = build_game_tree(inst);
  EXPECT_EQ(tree.infostate_counts(), (std::vector<int>{0, 0}));
  EXPECT_EQ(enumerate_info_states(inst), (std::vector<int>{0, 0}));
  EXPECT_EQ(tree.node(tree.root()).kind, NodeKind::kChance);
  EXPECT_EQ(tree.node(tree.node(tree.root()).children[0]).kind, NodeKind::kTerminal);
}

TEST(GameTreeTest, SizeGuard) {
  const auto inst = make_instance(case_study_rules(), {{kRich, kWorked}, {kRich, kWorked}});
  TreeLimits limits;
  limits.max_infostates_per_player = 3;
  try {
    build_game_tree(inst, {}, limits);
    FAIL() << "guard not enforced";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSizeGuard);
  }
}

// Reference expected utility by recursion over History, independent of the
// explicit tree, using the tree only to look policies up by key.
std::vector<double> history_value(const GameInstance& inst, const GameTree& tree, const Policy& pol,
                                  const History& h) {
  const int n = inst.rules.num_bidders;
  if (h.is_terminal()) return terminal_utility(inst, h, false);
  std::vector<std::vector<double>> probs(n);
  std::vector<int> sizes(n);
  for (int i = 0; i < n; ++i) {
    const auto info = make_info_state(inst, h.state, i, h.types[i]);
    const int id = tree.find_infostate(i, info.key);
    EXPECT_GE(id, 0) << info.key;
    probs[i] = pol.probs[i][id];
    sizes[i] = static_cast<int>(probs[i].size());
  }
  std::vector<double> total(n, 0.0);
  std::vector<int> joint(n, 0);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) w *= probs[i][joint[i]];
    if (w > 0.0) {
      for (const auto& [p, next] : step(inst, h, joint)) {
        const auto v = history_value(inst, tree, pol, next);
        for (int i = 0; i < n; ++i) total[i] += w * p * v[i];
      }
    }
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++joint[i] < sizes[i]) break;
      joint[i] = 0;
    }
    if (i < 0) break;
  }
  return total;
}

class TreeProperty : public ::testing::TestWithParam<int> {};

TEST_P(TreeProperty, MatchesHistoryRecursionAndStructuralInvariants) {
  const auto rule = GetParam() % 2 ? ProcessingRule::kDropByLicense : ProcessingRule::kDropByBidder;
  SamplingConfig cfg = two_player_config(GetParam() < 2 ? 1 : 2, 99);
  cfg.max_infostates_per_player = 400;
  Rng rng(derive_seed(99, "tree-property", GetParam()));
  const GameInstance inst = generate_instance(cfg, case_study_rules(rule), rng);
  const GameTree tree = build_game_tree(inst, {true});
  Rng prng(GetParam());
  const Policy pol = testing::random_policy(tree, prng);

  std::vector<double> ref(2, 0.0);
  for (const auto& [p, types] : root_chance(inst)) {
    const auto v = history_value(inst, tree, pol, initial_history(inst, types));
    for (int i = 0; i < 2; ++i) ref[i] += p * v[i];
  }
  const auto eu = expected_utilities(tree, pol);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(eu[i], ref[i], 1e-9);

  // Chance nodes sum to one; penalties in [0,1] with a zero at the best bid.
  for (const auto& node : tree.nodes()) {
    if (node.kind != NodeKind::kChance) continue;
    double s = 0.0;
    for (double p : node.chance_probs) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  for (int p = 0; p < 2; ++p) {
    for (const auto& info : tree.infostates(p)) {
      ASSERT_EQ(static_cast<int>(info.penalty.size()), info.num_actions);
      for (double x : info.penalty) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
      EXPECT_EQ(*std::min_element(info.penalty.begin(), info.penalty.end()), 0.0);
    }
  }

  // Perfect recall: all members of an infostate share the owner's own
  // sequence of (infostate, action) pairs.
  std::vector<std::map<int, std::vector<std::pair<int, int>>>> seen(2);
  std::function<void(int, std::vector<std::vector<std::pair<int, int>>>)> walk =
      [&](int id, std::vector<std::vector<std::pair<int, int>>> seq) {
        const TreeNode& node = tree.node(id);
        if (node.kind == NodeKind::kTerminal) return;
        if (node.kind == NodeKind::kChance) {
          for (int c : node.children) walk(c, seq);
          return;
        }
        for (int p = 0; p < 2; ++p) {
          auto [it, fresh] = seen[p].try_emplace(node.infostate[p], seq[p]);
          if (!fresh) {
            EXPECT_EQ(it->second, seq[p]);
          }
        }
        std::vector<int> joint;
        for (std::size_t idx = 0; idx < node.children.size(); ++idx) {
          tree.decode_joint(id, idx, joint);
          auto next = seq;
          for (int p = 0; p < 2; ++p) next[p].push_back({node.infostate[p], joint[p]});
          walk(node.children[idx], next);
        }
      };
  walk(tree.root(), {{}, {}});
}

INSTANTIATE_TEST_SUITE_P(Instances, TreeProperty, ::testing::Values(0, 1, 2, 3));

TEST(GameTreeTest, JointIndexRoundTrip) {
  GameTree tree(2);
  const int a = tree.intern_infostate(0, "a", 0, 3);
  const int b = tree.intern_infostate(1, "b", 0, 2);
  std::vector<int> kids;
  for (int k = 0; k < 6; ++k) kids.push_back(tree.add_terminal({double(k), -double(k)}));
  const int root = tree.add_decision({a, b}, kids);
  tree.set_root(root);
  std::vector<int> joint;
  for (std::size_t idx = 0; idx < 6; ++idx) {
    tree.decode_joint(root, idx, joint);
    EXPECT_EQ(tree.joint_index(root, joint), idx);
  }
  EXPECT_EQ(tree.child(root, {2, 1}), kids[5]);
  EXPECT_EQ(tree.child(root, {1, 0}), kids[2]);
  EXPECT_THROW(tree.intern_infostate(0, "a", 0, 4), Error);
}

}  // namespace
}  // namespace clockauction
