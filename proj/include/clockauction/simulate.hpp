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

#ifndef CLOCKAUCTION_SIMULATE_HPP
#define CLOCKAUCTION_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/game.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/policy.hpp"
#include "clockauction/rng.hpp"

namespace clockauction {

/// Myopic profile: every infostate bids its highest-profit legal demand at
/// the current prices (ties: least activity, then smallest bid).
inline Policy straightforward_policy(const GameInstance& inst, const GameTree& tree) {
  std::vector<std::vector<int>> choice(tree.num_players());
  for (int p = 0; p < tree.num_players(); ++p) {
    for (const auto& info : tree.infostates(p)) {
      choice[p].push_back(straightforward_choice(inst.rules, info.actions, info.profits));
    }
  }
  return pure_policy(tree, choice);
}

struct EpisodeRecord {
  std::int64_t episode = 0;
  std::vector<int> types;
  std::vector<bool> round_lottery;  // one flag per strategic round
  DemandMatrix allocation;
  std::vector<double> payments;
  double revenue = 0.0;
  double welfare = 0.0;
  int unsold = 0;
  int strategic_rounds = 0;
  int total_rounds = 0;
  int lotteries = 0;
};

struct MetricsSummary {
  std::int64_t episodes = 0;
  double revenue = 0.0;
  double welfare = 0.0;
  double rounds = 0.0;  // strategic rounds
  double total_rounds = 0.0;
  double unsold = 0.0;
  double lotteries = 0.0;
};

/// Plays one episode by sampling types, actions and processing outcomes.
inline EpisodeRecord play_episode(const GameTree& tree, const Policy& policy, Rng& rng) {
  EpisodeRecord ep;
  int node_id = tree.root();
  std::vector<int> joint(tree.num_players());
  while (tree.node(node_id).kind != NodeKind::kTerminal) {
    const TreeNode& node = tree.node(node_id);
    if (node.kind == NodeKind::kChance) {
      node_id = node.children[sample_index(rng, node.chance_probs)];
      continue;
    }
    for (int p = 0; p < tree.num_players(); ++p) {
      joint[p] = sample_index(rng, policy.probs[p][node.infostate[p]]);
    }
    node_id = tree.child(node_id, joint);
    const bool lottery = tree.node(node_id).kind == NodeKind::kChance && tree.node(node_id).lottery;
    ep.round_lottery.push_back(lottery);
    ep.lotteries += lottery ? 1 : 0;
  }
  const TreeNode& leaf = tree.node(node_id);
  CLOCKAUCTION_CHECK(leaf.terminal >= 0, ErrorKind::kContractViolation,
                     "terminal without outcome data; simulate needs an auction tree");
  const TerminalInfo& info = tree.terminals()[leaf.terminal];
  ep.types = info.types;
  ep.allocation = info.allocation;
  ep.payments = info.payments;
  ep.revenue = info.revenue;
  ep.welfare = info.welfare;
  ep.unsold = info.unsold;
  ep.strategic_rounds = info.strategic_rounds;
  ep.total_rounds = info.total_rounds;
  return ep;
}

/// Simulates `episodes` independent playthroughs. `log`, when given,
/// receives every episode in order.
inline MetricsSummary simulate(const GameTree& tree, const Policy& policy, std::int64_t episodes,
                               Rng& rng, std::vector<EpisodeRecord>* log = nullptr) {
  CLOCKAUCTION_CHECK(episodes >= 1, ErrorKind::kMalformedInput, "episode count must be >= 1");
  MetricsSummary m;
  m.episodes = episodes;
  for (std::int64_t e = 0; e < episodes; ++e) {
    EpisodeRecord ep = play_episode(tree, policy, rng);
    ep.episode = e;
    m.revenue += ep.revenue;
    m.welfare += ep.welfare;
    m.rounds += ep.strategic_rounds;
    m.total_rounds += ep.total_rounds;
    m.unsold += ep.unsold;
    m.lotteries += ep.lotteries;
    if (log) log->push_back(std::move(ep));
  }
  const double n = static_cast<double>(episodes);
  m.revenue /= n;
  m.welfare /= n;
  m.rounds /= n;
  m.total_rounds /= n;
  m.unsold /= n;
  m.lotteries /= n;
  return m;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_SIMULATE_HPP
