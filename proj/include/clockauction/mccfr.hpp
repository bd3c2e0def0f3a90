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

// External-sampling Monte Carlo CFR over a GameTree.
//
// Each iteration updates one player (round robin). The updating player
// explores every action; opponents sample one action from their current
// regret-matching strategy, or a uniform action with probability
// tremble_epsilon; chance is sampled from its exact distribution. Regret
// matching plus floors regrets at zero, and linear weighting scales both
// regret and average-strategy contributions of iteration t by t.

#ifndef CLOCKAUCTION_MCCFR_HPP
#define CLOCKAUCTION_MCCFR_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/policy.hpp"
#include "clockauction/rng.hpp"

namespace clockauction {

struct RegretRow {
  std::vector<double> regret;
  std::vector<double> strategy_sum;
  std::uint64_t visits = 0;

  friend bool operator==(const RegretRow&, const RegretRow&) = default;
};

struct RegretTable {
  std::vector<std::vector<RegretRow>> rows;  // [player][infostate]

  static RegretTable for_tree(const GameTree& tree) {
    RegretTable t;
    t.rows.resize(tree.num_players());
    for (int p = 0; p < tree.num_players(); ++p) {
      for (const auto& info : tree.infostates(p)) {
        t.rows[p].push_back({std::vector<double>(info.num_actions, 0.0),
                             std::vector<double>(info.num_actions, 0.0), 0});
      }
    }
    return t;
  }

  friend bool operator==(const RegretTable&, const RegretTable&) = default;
};

struct SolverConfig {
  std::int64_t iterations = 10000;
  double time_budget_seconds = 0.0;  // > 0 stops on wall clock instead
  double tremble_epsilon = 0.01;
  bool use_rm_plus = true;
  bool use_linear_weighting = true;
  bool penalty_enabled = true;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 0;  // 0 = no intermediate checkpoints

  void validate() const {
    CLOCKAUCTION_CHECK(iterations > 0 || time_budget_seconds > 0.0, ErrorKind::kMalformedInput,
                       "solver budget must be positive");
    CLOCKAUCTION_CHECK(tremble_epsilon >= 0.0 && tremble_epsilon < 1.0, ErrorKind::kMalformedInput,
                       "tremble epsilon must be in [0,1)");
    CLOCKAUCTION_CHECK(checkpoint_every >= 0, ErrorKind::kMalformedInput,
                       "checkpoint cadence must be non-negative");
  }
};

/// Regret matching: proportional to positive regret, uniform if none.
inline void current_strategy(const std::vector<double>& regret, std::vector<double>& out) {
  out.resize(regret.size());
  double total = 0.0;
  for (double r : regret) total += std::max(r, 0.0);
  if (total > 0.0) {
    for (std::size_t a = 0; a < regret.size(); ++a) out[a] = std::max(regret[a], 0.0) / total;
  } else {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(regret.size()));
  }
}

inline std::vector<double> current_strategy(const std::vector<double>& regret) {
  std::vector<double> out;
  current_strategy(regret, out);
  return out;
}

/// Normalized strategy sums; infostates never updated are uniform.
inline Policy average_policy(const GameTree& tree, const RegretTable& table) {
  Policy p = uniform_policy(tree);
  for (int pl = 0; pl < tree.num_players(); ++pl) {
    for (std::size_t s = 0; s < table.rows[pl].size(); ++s) {
      const auto& sums = table.rows[pl][s].strategy_sum;
      double total = 0.0;
      for (double v : sums) total += v;
      if (total <= 0.0) continue;
      for (std::size_t a = 0; a < sums.size(); ++a) p.probs[pl][s][a] = sums[a] / total;
    }
  }
  return p;
}

class EsMccfr {
 public:
  EsMccfr(const GameTree& tree, const SolverConfig& config)
      : tree_(tree), config_(config), table_(RegretTable::for_tree(tree)), rng_(config.seed) {
    scratch_.resize(64);
  }

  /// One traversal updating `player`, with iteration weight index t >= 1.
  void iteration(int player, std::int64_t t) {
    weight_ = config_.use_linear_weighting ? static_cast<double>(t) : 1.0;
    traverse(tree_.root(), player, 1.0, 0);
  }

  const RegretTable& table() const { return table_; }
  RegretTable& mutable_table() { return table_; }

 private:
  struct Scratch {
    std::vector<int> joint;
    std::vector<double> sigma;
    std::vector<double> values;
    std::vector<double> opp_sigma;
  };

  int sample_opponent(int player, int infostate) {
    const auto& row = table_.rows[player][infostate];
    const int n = static_cast<int>(row.regret.size());
    // Always draw the tremble coin so epsilon only changes which branch is used.
    const double coin = uniform01(rng_);
    const double u = uniform01(rng_);
    if (coin < config_.tremble_epsilon) return std::min(n - 1, static_cast<int>(u * n));
    double total = 0.0;
    for (double r : row.regret) total += std::max(r, 0.0);
    if (total <= 0.0) return std::min(n - 1, static_cast<int>(u * n));
    double acc = 0.0;
    int last = 0;
    for (int a = 0; a < n; ++a) {
      const double p = std::max(row.regret[a], 0.0) / total;
      if (p <= 0.0) continue;
      acc += p;
      last = a;
      if (u < acc) return a;
    }
    return last;
  }

  double traverse(int node_id, int player, double own_reach, std::size_t depth) {
    const TreeNode& node = tree_.node(node_id);
    if (node.kind == NodeKind::kTerminal) return node.utility[player];
    if (node.kind == NodeKind::kChance) {
      return traverse(node.children[sample_index(rng_, node.chance_probs)], player, own_reach, depth);
    }
    if (depth >= scratch_.size()) scratch_.resize(depth * 2 + 1);
    const int n_players = tree_.num_players();
    scratch_[depth].joint.assign(n_players, 0);
    for (int q = 0; q < n_players; ++q) {
      if (q != player) scratch_[depth].joint[q] = sample_opponent(q, node.infostate[q]);
    }
    const int info_id = node.infostate[player];
    const InfoStateData& info = tree_.infostate(player, info_id);
    const int n = info.num_actions;
    if (n == 1) {
      scratch_[depth].joint[player] = 0;
      const double pen = config_.penalty_enabled ? info.penalty[0] : 0.0;
      const double v = traverse(tree_.child(node_id, scratch_[depth].joint), player, own_reach, depth + 1);
      RegretRow& row = table_.rows[player][info_id];
      row.strategy_sum[0] += weight_ * own_reach;
      ++row.visits;
      return v - pen;
    }

    current_strategy(table_.rows[player][info_id].regret, scratch_[depth].sigma);
    scratch_[depth].values.assign(n, 0.0);
    double ev = 0.0;
    for (int a = 0; a < n; ++a) {
      scratch_[depth].joint[player] = a;
      const int child = tree_.child(node_id, scratch_[depth].joint);
      const double sig = scratch_[depth].sigma[a];
      double v = traverse(child, player, own_reach * sig, depth + 1);
      if (config_.penalty_enabled) v -= info.penalty[a];
      scratch_[depth].values[a] = v;
      ev += sig * v;
    }
    RegretRow& row = table_.rows[player][info_id];
    for (int a = 0; a < n; ++a) {
      double r = row.regret[a] + weight_ * (scratch_[depth].values[a] - ev);
      if (config_.use_rm_plus) r = std::max(r, 0.0);
      row.regret[a] = r;
      row.strategy_sum[a] += weight_ * own_reach * scratch_[depth].sigma[a];
    }
    ++row.visits;
    return ev;
  }

  const GameTree& tree_;
  SolverConfig config_;
  RegretTable table_;
  Rng rng_;
  double weight_ = 1.0;
  std::vector<Scratch> scratch_;
};

/// One external-sampling traversal for `player` at iteration t.
inline void es_iteration(EsMccfr& solver, int player, std::int64_t t) { solver.iteration(player, t); }

struct Checkpoint {
  std::int64_t iteration = 0;
  RegretTable table;
};

struct TrainResult {
  Policy average;
  RegretTable table;
  std::vector<Checkpoint> checkpoints;  // includes the final table
  std::int64_t iterations = 0;
  double seconds = 0.0;
};

/// Runs ES-MCCFR with alternating updates. With a time budget the iteration
/// count depends on the machine; with an iteration budget the run is a pure
/// function of (tree, config).
inline TrainResult train(const GameTree& tree, const SolverConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  EsMccfr solver(tree, config);
  TrainResult out;
  std::int64_t t = 0;
  const bool timed = config.time_budget_seconds > 0.0;
  while (true) {
    if (timed) {
      if ((t & 63) == 0 && elapsed() >= config.time_budget_seconds) break;
      if (config.iterations > 0 && t >= config.iterations) break;
    } else if (t >= config.iterations) {
      break;
    }
    ++t;
    solver.iteration(static_cast<int>((t - 1) % tree.num_players()), t);
    if (config.checkpoint_every > 0 && t % config.checkpoint_every == 0) {
      out.checkpoints.push_back({t, solver.table()});
    }
  }
  if (out.checkpoints.empty() || out.checkpoints.back().iteration != t) {
    out.checkpoints.push_back({t, solver.table()});
  }
  out.table = solver.table();
  out.average = average_policy(tree, out.table);
  out.iterations = t;
  out.seconds = elapsed();
  return out;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_MCCFR_HPP
