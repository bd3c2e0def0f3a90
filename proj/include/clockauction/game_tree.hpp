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

#ifndef CLOCKAUCTION_GAME_TREE_HPP
#define CLOCKAUCTION_GAME_TREE_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clockauction/engine.hpp"
#include "clockauction/error.hpp"
#include "clockauction/game.hpp"

namespace clockauction {

enum class NodeKind : std::uint8_t { kChance, kDecision, kTerminal };

/// Node of a finite simultaneous-move game tree.
///
/// Decision nodes have every player move at once; children are indexed by
/// the joint action in row-major order (player 0 most significant).
struct TreeNode {
  NodeKind kind = NodeKind::kTerminal;
  bool lottery = false;  // chance node created by bid processing
  std::vector<double> chance_probs;
  std::vector<int> children;
  std::vector<int> infostate;  // decision: one infostate id per player
  std::vector<double> utility;  // terminal, without penalties
  int terminal = -1;            // index into GameTree::terminals()
};

/// Outcome data recorded at each terminal of an auction tree.
struct TerminalInfo {
  std::vector<int> types;
  DemandMatrix allocation;
  std::vector<double> payments;
  double revenue = 0.0;
  double welfare = 0.0;
  int unsold = 0;
  int strategic_rounds = 0;
  int total_rounds = 0;
};

struct InfoStateData {
  int player = 0;
  int depth = 0;  // decisions the player made before this one
  int num_actions = 0;
  std::string key;
  std::vector<DemandVector> actions;  // empty for hand-built games
  std::vector<double> profits;
  std::vector<double> penalty;  // per action, all zero when penalties are off
  std::vector<int> members;     // decision nodes in this infostate
};

class GameTree {
 public:
  explicit GameTree(int num_players = 2)
      : infostates_(num_players), key_index_(num_players) {}

  int num_players() const { return static_cast<int>(infostates_.size()); }
  int root() const { return root_; }
  void set_root(int node) { root_ = node; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int id) const { return nodes_[id]; }
  const std::vector<InfoStateData>& infostates(int player) const { return infostates_[player]; }
  const InfoStateData& infostate(int player, int id) const { return infostates_[player][id]; }
  int num_infostates(int player) const { return static_cast<int>(infostates_[player].size()); }
  const std::vector<TerminalInfo>& terminals() const { return terminals_; }

  /// Finds or creates the infostate with `key`; returns its id.
  int intern_infostate(int player, const std::string& key, int depth, int num_actions) {
    auto [it, inserted] = key_index_[player].try_emplace(key, num_infostates(player));
    if (inserted) {
      InfoStateData d;
      d.player = player;
      d.depth = depth;
      d.num_actions = num_actions;
      d.key = key;
      d.penalty.assign(num_actions, 0.0);
      infostates_[player].push_back(std::move(d));
    } else {
      CLOCKAUCTION_CHECK(infostates_[player][it->second].num_actions == num_actions,
                         ErrorKind::kContractViolation,
                         "histories sharing infostate '" + key + "' disagree on action count");
    }
    return it->second;
  }

  InfoStateData& mutable_infostate(int player, int id) { return infostates_[player][id]; }

  /// Returns -1 when the key is unknown.
  int find_infostate(int player, const std::string& key) const {
    const auto it = key_index_[player].find(key);
    return it == key_index_[player].end() ? -1 : it->second;
  }

  int add_terminal(std::vector<double> utility) {
    TreeNode n;
    n.kind = NodeKind::kTerminal;
    n.utility = std::move(utility);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_terminal(std::vector<double> utility, TerminalInfo info) {
    const int id = add_terminal(std::move(utility));
    nodes_[id].terminal = static_cast<int>(terminals_.size());
    terminals_.push_back(std::move(info));
    return id;
  }

  int add_chance(std::vector<double> probs, std::vector<int> children, bool lottery = false) {
    TreeNode n;
    n.kind = NodeKind::kChance;
    n.lottery = lottery;
    n.chance_probs = std::move(probs);
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  /// Children must be listed in row-major joint-action order.
  int add_decision(std::vector<int> infostate_ids, std::vector<int> children) {
    TreeNode n;
    n.kind = NodeKind::kDecision;
    n.infostate = std::move(infostate_ids);
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    for (int p = 0; p < num_players(); ++p) infostates_[p][nodes_[id].infostate[p]].members.push_back(id);
    return id;
  }

  int num_actions(int node_id, int player) const {
    return infostates_[player][nodes_[node_id].infostate[player]].num_actions;
  }

  /// Child of a decision node for a joint action (one action per player).
  int child(int node_id, const std::vector<int>& joint) const {
    return nodes_[node_id].children[joint_index(node_id, joint)];
  }

  std::size_t joint_index(int node_id, const std::vector<int>& joint) const {
    std::size_t idx = 0;
    for (int p = 0; p < num_players(); ++p) {
      idx = idx * static_cast<std::size_t>(num_actions(node_id, p)) + static_cast<std::size_t>(joint[p]);
    }
    return idx;
  }

  /// Inverse of joint_index.
  void decode_joint(int node_id, std::size_t idx, std::vector<int>& joint) const {
    joint.resize(num_players());
    for (int p = num_players() - 1; p >= 0; --p) {
      const auto n = static_cast<std::size_t>(num_actions(node_id, p));
      joint[p] = static_cast<int>(idx % n);
      idx /= n;
    }
  }

  std::vector<int> infostate_counts() const {
    std::vector<int> out;
    for (const auto& v : infostates_) out.push_back(static_cast<int>(v.size()));
    return out;
  }

 private:
  int root_ = -1;
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<InfoStateData>> infostates_;
  std::vector<std::unordered_map<std::string, int>> key_index_;
  std::vector<TerminalInfo> terminals_;
};

struct TreeLimits {
  std::size_t max_nodes = 5'000'000;
  int max_infostates_per_player = 1'000'000;
  std::uint64_t ordering_limit = kDefaultOrderingLimit;
};

namespace detail {

class AuctionTreeBuilder {
 public:
  AuctionTreeBuilder(const GameInstance& inst, const PenaltyConfig& penalty, const TreeLimits& limits)
      : inst_(inst), penalty_(penalty), limits_(limits), tree_(inst.rules.num_bidders) {}

  GameTree build() {
    const AuctionState start = replay_warmup(inst_.rules);
    warmup_rounds_ = static_cast<int>(start.history.size());
    const auto profiles = root_chance(inst_);
    std::vector<double> probs;
    std::vector<int> children;
    for (const auto& [p, types] : profiles) {
      probs.push_back(p);
      children.push_back(expand(start, types, 0));
    }
    tree_.set_root(tree_.add_chance(std::move(probs), std::move(children)));
    return std::move(tree_);
  }

 private:
  void guard() const {
    CLOCKAUCTION_CHECK(tree_.nodes().size() < limits_.max_nodes, ErrorKind::kSizeGuard,
                       "game tree exceeds " + std::to_string(limits_.max_nodes) + " nodes");
    for (int p = 0; p < tree_.num_players(); ++p) {
      CLOCKAUCTION_CHECK(tree_.num_infostates(p) <= limits_.max_infostates_per_player,
                         ErrorKind::kSizeGuard,
                         "player " + std::to_string(p) + " has more than " +
                             std::to_string(limits_.max_infostates_per_player) + " infostates");
    }
  }

  int terminal(const AuctionState& s, const std::vector<int>& types) {
    const Settlement st = final_settlement(inst_.rules, s);
    TerminalInfo info;
    info.types = types;
    info.allocation = st.allocation;
    info.payments = st.payments;
    info.revenue = st.revenue();
    info.unsold = st.total_unsold();
    info.total_rounds = static_cast<int>(s.history.size());
    info.strategic_rounds = info.total_rounds - warmup_rounds_;
    std::vector<double> u(types.size());
    for (std::size_t i = 0; i < types.size(); ++i) {
      const double v = inst_.values.value(inst_.rules, static_cast<int>(i), types[i], st.allocation[i]);
      info.welfare += v;
      u[i] = v - st.payments[i];
    }
    return tree_.add_terminal(std::move(u), std::move(info));
  }

  int expand(const AuctionState& s, const std::vector<int>& types, int depth) {
    guard();
    if (s.terminated) return terminal(s, types);

    const int n = inst_.rules.num_bidders;
    std::vector<int> ids(n);
    std::vector<std::vector<DemandVector>> actions(n);
    for (int i = 0; i < n; ++i) {
      const InfoState info = make_info_state(inst_, s, i, types[i]);
      actions[i] = legal_actions(inst_, info);
      const int before = tree_.num_infostates(i);
      ids[i] = tree_.intern_infostate(i, info.key, depth, static_cast<int>(actions[i].size()));
      auto& data = tree_.mutable_infostate(i, ids[i]);
      if (tree_.num_infostates(i) > before) {
        data.actions = actions[i];
        data.profits = action_profits(inst_, info, actions[i]);
        if (penalty_.enabled) data.penalty = round_penalties(data.profits);
      } else {
        CLOCKAUCTION_CHECK(data.actions == actions[i], ErrorKind::kContractViolation,
                           "histories sharing infostate '" + info.key + "' disagree on actions");
      }
    }

    std::size_t joint_count = 1;
    for (const auto& a : actions) joint_count *= a.size();
    std::vector<int> children(joint_count, -1);
    std::vector<int> joint(n, 0);
    DemandMatrix submitted(n);
    for (std::size_t idx = 0; idx < joint_count; ++idx) {
      std::size_t rest = idx;
      for (int i = n - 1; i >= 0; --i) {
        joint[i] = static_cast<int>(rest % actions[i].size());
        rest /= actions[i].size();
        submitted[i] = actions[i][joint[i]];
      }
      const auto dist = outcome_distribution(inst_.rules, s, submitted, limits_.ordering_limit);
      if (dist.size() == 1) {
        children[idx] = expand(advance(inst_.rules, s, dist.entries[0].outcome), types, depth + 1);
      } else {
        std::vector<double> probs;
        std::vector<int> kids;
        for (std::size_t k = 0; k < dist.size(); ++k) {
          probs.push_back(dist.probability(k));
          kids.push_back(expand(advance(inst_.rules, s, dist.entries[k].outcome, {true, {}}),
                                types, depth + 1));
        }
        children[idx] = tree_.add_chance(std::move(probs), std::move(kids), true);
      }
    }
    return tree_.add_decision(std::move(ids), std::move(children));
  }

  const GameInstance& inst_;
  PenaltyConfig penalty_;
  TreeLimits limits_;
  GameTree tree_;
  int warmup_rounds_ = 0;
};

}  // namespace detail

/// Enumerates every reachable history of the instance into an explicit tree.
/// Throws kSizeGuard if the tree outgrows `limits`.
inline GameTree build_game_tree(const GameInstance& inst, const PenaltyConfig& penalty = {},
                                const TreeLimits& limits = {}) {
  return detail::AuctionTreeBuilder(inst, penalty, limits).build();
}

/// Per-player information-state counts.
inline std::vector<int> enumerate_info_states(const GameInstance& inst, const TreeLimits& limits = {}) {
  return build_game_tree(inst, {false}, limits).infostate_counts();
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_GAME_TREE_HPP
