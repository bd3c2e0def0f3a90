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

// Exact evaluation of policy profiles on an explicit GameTree. Terminal
// utilities in the tree never include round penalties, so everything here
// measures the unmodified game.

#ifndef CLOCKAUCTION_VERIFIER_HPP
#define CLOCKAUCTION_VERIFIER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/policy.hpp"

namespace clockauction {

/// Regrets smaller than this are reported as exactly zero.
inline constexpr double kRegretTolerance = 1e-9;

inline void check_policy_shape(const GameTree& tree, const Policy& policy) {
  CLOCKAUCTION_CHECK(static_cast<int>(policy.probs.size()) == tree.num_players(),
                     ErrorKind::kMalformedInput, "policy has wrong player count");
  for (int p = 0; p < tree.num_players(); ++p) {
    CLOCKAUCTION_CHECK(static_cast<int>(policy.probs[p].size()) == tree.num_infostates(p),
                       ErrorKind::kMalformedInput,
                       "policy for player " + std::to_string(p) + " has wrong infostate count");
    for (int s = 0; s < tree.num_infostates(p); ++s) {
      const auto& row = policy.probs[p][s];
      CLOCKAUCTION_CHECK(static_cast<int>(row.size()) == tree.infostate(p, s).num_actions,
                         ErrorKind::kMalformedInput,
                         "policy row for '" + tree.infostate(p, s).key + "' has wrong action count");
      double sum = 0.0;
      for (double x : row) {
        CLOCKAUCTION_CHECK(x >= 0.0, ErrorKind::kMalformedInput, "negative policy probability");
        sum += x;
      }
      CLOCKAUCTION_CHECK(std::abs(sum - 1.0) <= 1e-9, ErrorKind::kMalformedInput,
                         "policy row for '" + tree.infostate(p, s).key + "' does not sum to 1");
    }
  }
}

namespace detail {

inline void eu_rec(const GameTree& tree, const Policy& policy, int node_id, double weight,
                   std::vector<double>& acc, std::vector<int>& joint) {
  if (weight == 0.0) return;
  const TreeNode& node = tree.node(node_id);
  switch (node.kind) {
    case NodeKind::kTerminal:
      for (int p = 0; p < tree.num_players(); ++p) acc[p] += weight * node.utility[p];
      return;
    case NodeKind::kChance:
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        eu_rec(tree, policy, node.children[k], weight * node.chance_probs[k], acc, joint);
      }
      return;
    case NodeKind::kDecision: {
      std::vector<int> local;
      for (std::size_t idx = 0; idx < node.children.size(); ++idx) {
        tree.decode_joint(node_id, idx, local);
        double w = weight;
        for (int p = 0; p < tree.num_players() && w != 0.0; ++p) {
          w *= policy.probs[p][node.infostate[p]][local[p]];
        }
        eu_rec(tree, policy, node.children[idx], w, acc, joint);
      }
      return;
    }
  }
}

}  // namespace detail

/// Exact expected utility of every player under `policy`.
inline std::vector<double> expected_utilities(const GameTree& tree, const Policy& policy) {
  check_policy_shape(tree, policy);
  std::vector<double> acc(tree.num_players(), 0.0);
  std::vector<int> joint;
  detail::eu_rec(tree, policy, tree.root(), 1.0, acc, joint);
  return acc;
}

struct BestResponseResult {
  double value = 0.0;
  Policy policy;  // `player` replaced by the pure best response
  bool timed_out = false;
};

namespace detail {

struct Timeout {};

class BestResponder {
 public:
  BestResponder(const GameTree& tree, const Policy& policy, int player, double budget_seconds)
      : tree_(tree),
        policy_(policy),
        player_(player),
        budget_(budget_seconds),
        start_(std::chrono::steady_clock::now()),
        reach_(tree.nodes().size(), 0.0),
        value_(tree.nodes().size(), 0.0),
        done_(tree.nodes().size(), 0),
        choice_(tree.num_infostates(player), -1) {}

  BestResponseResult run() {
    BestResponseResult out;
    out.policy = policy_;
    try {
      forward(tree_.root(), 1.0);
      std::vector<int> order(tree_.num_infostates(player_));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return tree_.infostate(player_, a).depth > tree_.infostate(player_, b).depth;
      });
      for (int s : order) decide(s);
      out.value = value(tree_.root());
    } catch (const Timeout&) {
      out.timed_out = true;
      out.value = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
    for (int s = 0; s < tree_.num_infostates(player_); ++s) {
      auto& row = out.policy.probs[player_][s];
      std::fill(row.begin(), row.end(), 0.0);
      row[choice_[s]] = 1.0;
    }
    return out;
  }

 private:
  void tick() {
    if (budget_ <= 0.0 || (++ticks_ & 4095) != 0) return;
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (t > budget_) throw Timeout{};
  }

  // Opponent-and-chance reach of every node.
  void forward(int node_id, double r) {
    tick();
    reach_[node_id] = r;
    const TreeNode& node = tree_.node(node_id);
    if (node.kind == NodeKind::kChance) {
      for (std::size_t k = 0; k < node.children.size(); ++k) forward(node.children[k], r * node.chance_probs[k]);
    } else if (node.kind == NodeKind::kDecision) {
      std::vector<int> joint;
      for (std::size_t idx = 0; idx < node.children.size(); ++idx) {
        tree_.decode_joint(node_id, idx, joint);
        forward(node.children[idx], r * others(node, joint));
      }
    }
  }

  double others(const TreeNode& node, const std::vector<int>& joint) const {
    double w = 1.0;
    for (int q = 0; q < tree_.num_players(); ++q) {
      if (q != player_) w *= policy_.probs[q][node.infostate[q]][joint[q]];
    }
    return w;
  }

  // Player's expected utility below `node_id`, conditional on reaching it,
  // with already-decided best-response actions at the player's infostates.
  double value(int node_id) {
    if (done_[node_id]) return value_[node_id];
    tick();
    const TreeNode& node = tree_.node(node_id);
    double v = 0.0;
    if (node.kind == NodeKind::kTerminal) {
      v = node.utility[player_];
    } else if (node.kind == NodeKind::kChance) {
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        if (node.chance_probs[k] > 0.0) v += node.chance_probs[k] * value(node.children[k]);
      }
    } else {
      const int a = choice_[node.infostate[player_]];
      CLOCKAUCTION_CHECK(a >= 0, ErrorKind::kContractViolation,
                         "best response visited an undecided infostate (imperfect recall?)");
      v = action_value(node_id, a);
    }
    value_[node_id] = v;
    done_[node_id] = 1;
    return v;
  }

  double action_value(int node_id, int a) {
    const TreeNode& node = tree_.node(node_id);
    std::vector<int> joint;
    double v = 0.0;
    for (std::size_t idx = 0; idx < node.children.size(); ++idx) {
      tree_.decode_joint(node_id, idx, joint);
      if (joint[player_] != a) continue;
      const double w = others(node, joint);
      if (w > 0.0) v += w * value(node.children[idx]);
    }
    return v;
  }

  void decide(int s) {
    const InfoStateData& info = tree_.infostate(player_, s);
    int best = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < info.num_actions; ++a) {
      double q = 0.0;
      for (int h : info.members) {
        if (reach_[h] > 0.0) q += reach_[h] * action_value(h, a);
      }
      if (q > best_q + 1e-12) {
        best_q = q;
        best = a;
      }
    }
    choice_[s] = best;
  }

  const GameTree& tree_;
  const Policy& policy_;
  int player_;
  double budget_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t ticks_ = 0;
  std::vector<double> reach_;
  std::vector<double> value_;
  std::vector<char> done_;
  std::vector<int> choice_;
};

}  // namespace detail

/// Exact best response of `player` against the rest of `policy`. Ties go to
/// the lowest action index. budget_seconds <= 0 disables the time limit.
inline BestResponseResult best_response(const GameTree& tree, const Policy& policy, int player,
                                        double budget_seconds = 3600.0) {
  check_policy_shape(tree, policy);
  CLOCKAUCTION_CHECK(player >= 0 && player < tree.num_players(), ErrorKind::kMalformedInput,
                     "player out of range");
  return detail::BestResponder(tree, policy, player, budget_seconds).run();
}

struct PlayerRegret {
  double on_policy = 0.0;
  double best_response = 0.0;
  double regret = 0.0;
  bool timed_out = false;
};

struct NashConvReport {
  std::vector<PlayerRegret> players;
  double nashconv = 0.0;
  double seconds = 0.0;
  bool exact = true;
};

inline double clamp_regret(double r) { return r < kRegretTolerance ? 0.0 : r; }

inline NashConvReport nashconv(const GameTree& tree, const Policy& policy, double budget_seconds = 3600.0) {
  const auto start = std::chrono::steady_clock::now();
  NashConvReport rep;
  const std::vector<double> on = expected_utilities(tree, policy);
  for (int p = 0; p < tree.num_players(); ++p) {
    const BestResponseResult br = best_response(tree, policy, p, budget_seconds);
    PlayerRegret pr;
    pr.on_policy = on[p];
    pr.best_response = br.value;
    pr.timed_out = br.timed_out;
    if (br.timed_out) {
      rep.exact = false;
      pr.regret = std::numeric_limits<double>::quiet_NaN();
    } else {
      pr.regret = clamp_regret(br.value - on[p]);
      rep.nashconv += pr.regret;
    }
    rep.players.push_back(pr);
  }
  if (!rep.exact) rep.nashconv = std::numeric_limits<double>::quiet_NaN();
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

namespace detail {

// Infostates of `player` first reached below `node_id` (not crossing another
// of the player's decisions).
inline void next_own_infostates(const GameTree& tree, int player, int node_id, std::vector<int>& out) {
  const TreeNode& node = tree.node(node_id);
  if (node.kind == NodeKind::kTerminal) return;
  if (node.kind == NodeKind::kDecision) {
    out.push_back(node.infostate[player]);
    return;
  }
  for (int c : node.children) next_own_infostates(tree, player, c, out);
}

class PureStrategyEnumerator {
 public:
  PureStrategyEnumerator(const GameTree& tree, int player) : tree_(tree), player_(player) {
    const int n = tree.num_infostates(player);
    succ_.resize(n);
    for (int s = 0; s < n; ++s) {
      const InfoStateData& info = tree.infostate(player, s);
      succ_[s].resize(info.num_actions);
      for (int h : info.members) {
        const TreeNode& node = tree.node(h);
        std::vector<int> joint;
        for (std::size_t idx = 0; idx < node.children.size(); ++idx) {
          tree.decode_joint(h, idx, joint);
          next_own_infostates(tree, player, node.children[idx], succ_[s][joint[player]]);
        }
      }
      for (auto& v : succ_[s]) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
    }
    next_own_infostates(tree, player, tree.root(), roots_);
    std::sort(roots_.begin(), roots_.end());
    roots_.erase(std::unique(roots_.begin(), roots_.end()), roots_.end());
    count_memo_.assign(n, -1.0);
  }

  /// Number of reduced pure strategies (saturates well above any guard).
  double count() {
    double c = 1.0;
    for (int s : roots_) c = std::min(c * count_from(s), 1e300);
    return c;
  }

  template <typename Visit>
  void for_each(Visit&& visit) {
    std::vector<int> choice(tree_.num_infostates(player_), 0);
    recurse(roots_, 0, choice, visit);
  }

 private:
  double count_from(int s) {
    if (count_memo_[s] >= 0.0) return count_memo_[s];
    double total = 0.0;
    for (const auto& next : succ_[s]) {
      double prod = 1.0;
      for (int t : next) prod = std::min(prod * count_from(t), 1e300);
      total = std::min(total + prod, 1e300);
    }
    return count_memo_[s] = total;
  }

  template <typename Visit>
  void recurse(std::vector<int> frontier, std::size_t pos, std::vector<int>& choice, Visit& visit) {
    if (pos == frontier.size()) {
      visit(static_cast<const std::vector<int>&>(choice));
      return;
    }
    const int s = frontier[pos];
    for (int a = 0; a < tree_.infostate(player_, s).num_actions; ++a) {
      choice[s] = a;
      std::vector<int> next = frontier;
      next.insert(next.end(), succ_[s][a].begin(), succ_[s][a].end());
      recurse(std::move(next), pos + 1, choice, visit);
    }
    choice[s] = 0;
  }

  const GameTree& tree_;
  int player_;
  std::vector<std::vector<std::vector<int>>> succ_;  // [infostate][action] -> next own infostates
  std::vector<int> roots_;
  std::vector<double> count_memo_;
};

}  // namespace detail

inline constexpr double kBruteForceStrategyLimit = 1e6;

/// Number of reduced pure strategies of `player` (infostates the player's own
/// earlier choices make unreachable are not enumerated).
inline double pure_strategy_count(const GameTree& tree, int player) {
  return detail::PureStrategyEnumerator(tree, player).count();
}

/// NashConv by exhaustive enumeration of each player's pure strategies.
/// Independent of best_response; intended as a test oracle on tiny games.
inline NashConvReport brute_force_nashconv(const GameTree& tree, const Policy& policy,
                                           double strategy_limit = kBruteForceStrategyLimit) {
  const auto start = std::chrono::steady_clock::now();
  NashConvReport rep;
  const std::vector<double> on = expected_utilities(tree, policy);
  for (int p = 0; p < tree.num_players(); ++p) {
    detail::PureStrategyEnumerator en(tree, p);
    const double count = en.count();
    CLOCKAUCTION_CHECK(count <= strategy_limit, ErrorKind::kEnumerationLimit,
                       "player " + std::to_string(p) + " has " + std::to_string(count) +
                           " pure strategies, over the limit");
    double best = -std::numeric_limits<double>::infinity();
    Policy trial = policy;
    en.for_each([&](const std::vector<int>& choice) {
      for (int s = 0; s < tree.num_infostates(p); ++s) {
        auto& row = trial.probs[p][s];
        std::fill(row.begin(), row.end(), 0.0);
        row[choice[s]] = 1.0;
      }
      best = std::max(best, expected_utilities(tree, trial)[p]);
    });
    PlayerRegret pr;
    pr.on_policy = on[p];
    pr.best_response = best;
    pr.regret = clamp_regret(best - on[p]);
    rep.nashconv += pr.regret;
    rep.players.push_back(pr);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_VERIFIER_HPP
