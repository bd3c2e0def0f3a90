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

#ifndef CLOCKAUCTION_POLICY_HPP
#define CLOCKAUCTION_POLICY_HPP

#include <cmath>
#include <vector>

#include "clockauction/game_tree.hpp"

namespace clockauction {

/// Tabular behaviour strategy for every player: probs[player][infostate][action].
struct Policy {
  std::vector<std::vector<std::vector<double>>> probs;
  bool pure = false;

  const std::vector<double>& at(int player, int infostate) const { return probs[player][infostate]; }
};

inline Policy uniform_policy(const GameTree& tree) {
  Policy p;
  p.probs.resize(tree.num_players());
  for (int pl = 0; pl < tree.num_players(); ++pl) {
    for (const auto& info : tree.infostates(pl)) {
      p.probs[pl].emplace_back(info.num_actions, 1.0 / info.num_actions);
    }
  }
  return p;
}

/// Deterministic policy from one action id per infostate.
inline Policy pure_policy(const GameTree& tree, const std::vector<std::vector<int>>& choice) {
  Policy p;
  p.pure = true;
  p.probs.resize(tree.num_players());
  for (int pl = 0; pl < tree.num_players(); ++pl) {
    for (int s = 0; s < tree.num_infostates(pl); ++s) {
      std::vector<double> row(tree.infostate(pl, s).num_actions, 0.0);
      row[choice[pl][s]] = 1.0;
      p.probs[pl].push_back(std::move(row));
    }
  }
  return p;
}

/// Index of the largest entry; ties go to the lowest index.
inline int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(v.size()); ++a) {
    if (v[a] > v[best]) best = a;
  }
  return best;
}

/// All mass on each infostate's most probable action.
inline Policy modal_policy(const Policy& policy) {
  Policy out;
  out.pure = true;
  out.probs = policy.probs;
  for (auto& player : out.probs) {
    for (auto& row : player) {
      const int best = argmax_lowest(row);
      std::fill(row.begin(), row.end(), 0.0);
      row[best] = 1.0;
    }
  }
  return out;
}

/// Unweighted mean Shannon entropy (bits) over infostates with two or more
/// actions; 0 if there are none.
inline double policy_entropy(const Policy& policy) {
  double total = 0.0;
  int count = 0;
  for (const auto& player : policy.probs) {
    for (const auto& row : player) {
      if (row.size() < 2) continue;
      double h = 0.0;
      for (double p : row) {
        if (p > 0.0) h -= p * std::log2(p);
      }
      total += h;
      ++count;
    }
  }
  return count ? total / count : 0.0;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_POLICY_HPP
