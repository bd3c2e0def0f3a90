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

// Shared fixtures and independent reference implementations for tests.

#ifndef CLOCKAUCTION_TESTS_TEST_UTIL_HPP
#define CLOCKAUCTION_TESTS_TEST_UTIL_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "clockauction/clockauction.hpp"

namespace clockauction::testing {

/// Instance over the case-study rules with explicit type lists.
inline GameInstance make_instance(const AuctionRules& rules, std::vector<std::vector<TypeParams>> types,
                                  const std::string& id = "fixture") {
  GameInstance inst;
  inst.id = id;
  inst.family = "test";
  inst.rules = rules;
  inst.values = ValueProfile(rules, std::move(types));
  return inst;
}

/// Reference bid processing written from the rule text, used as an oracle.
/// Units are labelled, so every permutation is enumerated separately.
struct LabelledUnit {
  int bidder;
  std::vector<std::pair<int, int>> changes;  // (product, delta)
};

inline DemandMatrix reference_process(const AuctionRules& rules, const AuctionState& state,
                                      const std::vector<LabelledUnit>& order) {
  DemandMatrix d = state.processed;
  std::vector<int> z(rules.num_products(), 0);
  for (const auto& row : d) {
    for (int j = 0; j < rules.num_products(); ++j) z[j] += row[j];
  }
  struct Pending {
    int bidder, product, delta;
  };
  std::vector<Pending> queue;
  for (const auto& u : order) {
    for (auto [j, delta] : u.changes) queue.push_back({u.bidder, j, delta});
  }
  auto activity = [&](int i) {
    int a = 0;
    for (int j = 0; j < rules.num_products(); ++j) a += d[i][j] * rules.products[j].eligibility_points;
    return a;
  };
  bool progress = true;
  while (progress && !queue.empty()) {
    progress = false;
    std::vector<Pending> rest;
    for (auto p : queue) {
      int k = std::abs(p.delta);
      int m = 0;
      if (p.delta < 0) {
        m = state.sale_guaranteed[p.product] ? std::min(k, std::max(0, z[p.product] - rules.products[p.product].supply)) : k;
        d[p.bidder][p.product] -= m;
        z[p.product] -= m;
      } else {
        const int room = state.activity_cap[p.bidder] - activity(p.bidder);
        m = std::min(k, std::max(0, room) / rules.products[p.product].eligibility_points);
        d[p.bidder][p.product] += m;
        z[p.product] += m;
      }
      if (m > 0) progress = true;
      if (m < k) rest.push_back({p.bidder, p.product, p.delta < 0 ? -(k - m) : (k - m)});
    }
    queue = std::move(rest);
  }
  return d;
}

/// Distribution over processed demand from all labelled orderings.
inline std::map<DemandMatrix, double> reference_distribution(const AuctionRules& rules, const AuctionState& state,
                                                             const DemandMatrix& submitted) {
  std::vector<LabelledUnit> first;   // shuffled together
  std::vector<LabelledUnit> second;  // shuffled together, after `first`
  for (int i = 0; i < rules.num_bidders; ++i) {
    LabelledUnit drops{i, {}}, picks{i, {}};
    for (int j = 0; j < rules.num_products(); ++j) {
      const int delta = submitted[i][j] - state.processed[i][j];
      if (delta < 0) drops.changes.push_back({j, delta});
      if (delta > 0) picks.changes.push_back({j, delta});
    }
    if (rules.processing_rule == ProcessingRule::kDropByBidder) {
      LabelledUnit all{i, drops.changes};
      all.changes.insert(all.changes.end(), picks.changes.begin(), picks.changes.end());
      if (!all.changes.empty()) first.push_back(all);
    } else {
      for (auto [j, delta] : drops.changes) {
        for (int k = 0; k < -delta; ++k) first.push_back({i, {{j, -1}}});
      }
      if (!picks.changes.empty()) second.push_back(picks);
    }
  }
  std::vector<int> a(first.size()), b(second.size());
  std::iota(a.begin(), a.end(), 0);
  std::iota(b.begin(), b.end(), 0);
  std::map<DemandMatrix, double> counts;
  double total = 0;
  do {
    do {
      std::vector<LabelledUnit> order;
      for (int k : a) order.push_back(first[k]);
      for (int k : b) order.push_back(second[k]);
      counts[reference_process(rules, state, order)] += 1;
      total += 1;
    } while (std::next_permutation(b.begin(), b.end()));
  } while (std::next_permutation(a.begin(), a.end()));
  for (auto& [k, v] : counts) v /= total;
  return counts;
}

/// Random reachable strategic states: play random activity-legal bids from
/// the strategic start for a few rounds.
inline std::vector<AuctionState> random_states(const AuctionRules& rules, Rng& rng, int count) {
  std::vector<AuctionState> out;
  while (static_cast<int>(out.size()) < count) {
    AuctionState s = replay_warmup(rules);
    const int rounds = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int r = 0; r < rounds && !s.terminated; ++r) {
      DemandMatrix bids;
      for (int i = 0; i < rules.num_bidders; ++i) {
        const auto legal = activity_legal_demands(rules, s, i);
        bids.push_back(legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)]);
      }
      const auto dist = outcome_distribution(rules, s, bids);
      std::vector<double> probs;
      for (std::size_t k = 0; k < dist.size(); ++k) probs.push_back(dist.probability(k));
      s = advance(rules, s, dist.entries[sample_index(rng, probs)].outcome);
    }
    if (!s.terminated) out.push_back(s);
  }
  return out;
}

inline Policy random_policy(const GameTree& tree, Rng& rng) {
  Policy p = uniform_policy(tree);
  for (auto& player : p.probs) {
    for (auto& row : player) {
      double total = 0.0;
      for (auto& x : row) total += (x = uniform01(rng) + 1e-3);
      for (auto& x : row) x /= total;
    }
  }
  return p;
}

inline Policy random_pure_policy(const GameTree& tree, Rng& rng) {
  std::vector<std::vector<int>> choice(tree.num_players());
  for (int p = 0; p < tree.num_players(); ++p) {
    for (const auto& info : tree.infostates(p)) {
      choice[p].push_back(std::uniform_int_distribution<int>(0, info.num_actions - 1)(rng));
    }
  }
  return pure_policy(tree, choice);
}

/// Two-player normal-form game as a one-node tree. payoff[a][b] = {u0, u1}.
inline GameTree matrix_game(const std::vector<std::vector<std::pair<double, double>>>& payoff) {
  GameTree tree(2);
  const int rows = static_cast<int>(payoff.size());
  const int cols = static_cast<int>(payoff[0].size());
  const int a = tree.intern_infostate(0, "row", 0, rows);
  const int b = tree.intern_infostate(1, "col", 0, cols);
  std::vector<int> kids;
  for (const auto& r : payoff) {
    for (auto [u0, u1] : r) kids.push_back(tree.add_terminal({u0, u1}));
  }
  tree.set_root(tree.add_decision({a, b}, kids));
  return tree;
}

inline GameTree matching_pennies() {
  return matrix_game({{{1, -1}, {-1, 1}}, {{-1, 1}, {1, -1}}});
}

/// Player 0 picks between payoff 1 and 0; player 1 has a single move.
inline GameTree dominant_game() { return matrix_game({{{1, 0}}, {{0, 0}}}); }

}  // namespace clockauction::testing

#endif  // CLOCKAUCTION_TESTS_TEST_UTIL_HPP
