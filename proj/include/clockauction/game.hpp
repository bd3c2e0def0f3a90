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

// The auction as a finite Bayesian game: a root chance node over type
// profiles, simultaneous bids each round, and chance nodes for processing
// lotteries. Bidders observe their own bids and processed demand, and the
// public prices and aggregate demand.

#ifndef CLOCKAUCTION_GAME_HPP
#define CLOCKAUCTION_GAME_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clockauction/engine.hpp"
#include "clockauction/error.hpp"
#include "clockauction/types.hpp"
#include "clockauction/valuation.hpp"

namespace clockauction {

/// What the rejection sampler measured when it accepted an instance.
struct Provenance {
  std::map<std::string, int> rejections;  // reason -> count
  int attempts = 0;
  int straightforward_rounds = 0;
  double single_increment_mean_rounds = 0.0;
  std::vector<int> infostates_per_player;
};

struct GameInstance {
  std::string id;
  std::string family;
  AuctionRules rules;
  ValueProfile values;
  std::uint64_t seed = 0;
  Provenance provenance;

  int num_types() const { return values.max_types(); }
};

struct PenaltyConfig {
  bool enabled = true;
};

/// A bidder's view at a decision point.
struct InfoState {
  int bidder = 0;
  int type = 0;
  int round = 0;
  std::vector<int> price_steps;
  int activity_cap = 0;
  std::string key;
};

namespace detail {

inline void append_vector(std::string& out, const std::vector<int>& v) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k]);
  }
}

}  // namespace detail

/// Canonical key: bidder, type, then per past round (price steps, aggregate
/// demand, own submitted, own processed, own cap after the round), then the
/// current price steps and cap. Opponents' individual bids never appear.
inline std::string info_state_key(const AuctionRules& rules, const AuctionState& state,
                                  int bidder, int type) {
  std::string key = "p" + std::to_string(bidder) + ".t" + std::to_string(type);
  for (const auto& rec : state.history) {
    key += "|";
    detail::append_vector(key, rec.price_steps);
    key += ';';
    detail::append_vector(key, rec.aggregate);
    key += ';';
    detail::append_vector(key, rec.submitted[bidder]);
    key += ';';
    detail::append_vector(key, rec.processed[bidder]);
    key += ';';
    key += std::to_string(activity_of(rec.processed[bidder], rules.products));
  }
  key += "|@";
  detail::append_vector(key, state.price_steps);
  key += ';';
  key += std::to_string(state.activity_cap[bidder]);
  return key;
}

inline InfoState make_info_state(const GameInstance& inst, const AuctionState& state,
                                 int bidder, int type) {
  return {bidder, type, state.round, state.price_steps, state.activity_cap[bidder],
          info_state_key(inst.rules, state, bidder, type)};
}

/// Value minus cost at the start-of-round prices the bidder observes.
inline double bundle_profit(const GameInstance& inst, const InfoState& info,
                            const DemandVector& d) {
  double cost = 0.0;
  for (int j = 0; j < inst.rules.num_products(); ++j) {
    cost += d[j] * price_after_steps(inst.rules.products[j], inst.rules.clock_increment,
                                     info.price_steps[j]);
  }
  return inst.values.value(inst.rules, info.bidder, info.type, d) - cost;
}

inline bool is_zero_bid(const DemandVector& d) {
  return std::all_of(d.begin(), d.end(), [](int v) { return v == 0; });
}

/// Activity-legal bids, minus bids with negative profit when pruning is on.
/// The zero bid always survives. Lexicographic order; action ids index it.
inline std::vector<DemandVector> legal_actions(const GameInstance& inst, const InfoState& info) {
  std::vector<DemandVector> out;
  const std::size_t n = inst.rules.num_bundles();
  for (std::size_t idx = 0; idx < n; ++idx) {
    DemandVector d = inst.rules.bundle_at(idx);
    if (activity_of(d, inst.rules.products) > info.activity_cap) continue;
    if (inst.rules.dominated_bid_pruning && !is_zero_bid(d) && bundle_profit(inst, info, d) < 0.0) {
      continue;
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<double> action_profits(const GameInstance& inst, const InfoState& info,
                                          const std::vector<DemandVector>& actions) {
  std::vector<double> out;
  out.reserve(actions.size());
  for (const auto& d : actions) out.push_back(bundle_profit(inst, info, d));
  return out;
}

/// Per-action penalty in [0,1]: 0 for the most profitable bid, 1 for the
/// least, linear in between.
inline std::vector<double> round_penalties(const std::vector<double>& profits) {
  std::vector<double> out(profits.size(), 0.0);
  if (profits.empty()) return out;
  const auto [lo, hi] = std::minmax_element(profits.begin(), profits.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t a = 0; a < profits.size(); ++a) {
    out[a] = std::clamp((*hi - profits[a]) / range, 0.0, 1.0);
  }
  return out;
}

inline double round_penalty(const GameInstance& inst, const InfoState& info, int action) {
  const auto actions = legal_actions(inst, info);
  CLOCKAUCTION_CHECK(action >= 0 && action < static_cast<int>(actions.size()),
                     ErrorKind::kRejectedInput, "illegal action id");
  return round_penalties(action_profits(inst, info, actions))[action];
}

/// Myopic best bid: highest profit, then least activity, then the
/// lexicographically smallest bid.
inline int straightforward_choice(const AuctionRules& rules,
                                  const std::vector<DemandVector>& actions,
                                  const std::vector<double>& profits) {
  constexpr double kTie = 1e-12;
  int best = 0;
  for (int a = 1; a < static_cast<int>(actions.size()); ++a) {
    if (profits[a] > profits[best] + kTie) {
      best = a;
    } else if (profits[a] >= profits[best] - kTie &&
               activity_of(actions[a], rules.products) <
                   activity_of(actions[best], rules.products)) {
      best = a;
    }
  }
  return best;
}

/// Uniform distribution over the cross product of per-bidder type lists.
/// Type profiles are listed with bidder 0 most significant.
inline std::vector<std::pair<double, std::vector<int>>> root_chance(const GameInstance& inst) {
  const int n = inst.values.num_bidders();
  std::size_t count = 1;
  for (int i = 0; i < n; ++i) count *= static_cast<std::size_t>(inst.values.num_types(i));
  std::vector<std::pair<double, std::vector<int>>> out;
  out.reserve(count);
  std::vector<int> profile(n, 0);
  for (std::size_t k = 0; k < count; ++k) {
    out.emplace_back(1.0 / static_cast<double>(count), profile);
    for (int i = n - 1; i >= 0; --i) {
      if (++profile[i] < inst.values.num_types(i)) break;
      profile[i] = 0;
    }
  }
  return out;
}

/// A play-through: types, and the rounds played since the strategic start.
struct History {
  std::vector<int> types;
  struct Move {
    std::vector<int> actions;  // one action id per bidder
    int outcome = 0;           // index into that round's OutcomeDistribution
  };
  std::vector<Move> moves;
  AuctionState state;
  std::vector<double> penalties;  // accumulated per bidder

  bool is_terminal() const { return state.terminated; }
};

inline History initial_history(const GameInstance& inst, std::vector<int> types) {
  CLOCKAUCTION_CHECK(static_cast<int>(types.size()) == inst.rules.num_bidders,
                     ErrorKind::kMalformedInput, "need one type per bidder");
  History h;
  h.types = std::move(types);
  h.state = replay_warmup(inst.rules);
  h.penalties.assign(inst.rules.num_bidders, 0.0);
  return h;
}

/// Successors of a joint move with their probabilities. Deterministic
/// processing yields exactly one successor.
inline std::vector<std::pair<double, History>> step(const GameInstance& inst, const History& h,
                                                    const std::vector<int>& joint_action) {
  CLOCKAUCTION_CHECK(!h.is_terminal(), ErrorKind::kContractViolation,
                     "step called on a terminal history");
  const int n = inst.rules.num_bidders;
  CLOCKAUCTION_CHECK(static_cast<int>(joint_action.size()) == n, ErrorKind::kRejectedInput,
                     "need one action per bidder");
  DemandMatrix submitted(n);
  std::vector<double> pen(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const InfoState info = make_info_state(inst, h.state, i, h.types[i]);
    const auto actions = legal_actions(inst, info);
    const int a = joint_action[i];
    CLOCKAUCTION_CHECK(a >= 0 && a < static_cast<int>(actions.size()), ErrorKind::kRejectedInput,
                       "illegal action id " + std::to_string(a) + " for bidder " +
                           std::to_string(i));
    submitted[i] = actions[a];
    pen[i] = round_penalties(action_profits(inst, info, actions))[a];
  }
  const auto dist = outcome_distribution(inst.rules, h.state, submitted);
  std::vector<std::pair<double, History>> out;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    History next = h;
    next.moves.push_back({joint_action, static_cast<int>(k)});
    next.state = advance(inst.rules, h.state, dist.entries[k].outcome, {dist.is_lottery(), {}});
    for (int i = 0; i < n; ++i) next.penalties[i] += pen[i];
    out.emplace_back(dist.probability(k), std::move(next));
  }
  return out;
}

/// Quasilinear payoff of each bidder at a terminal history. Penalties are a
/// training-time shaping term only.
inline std::vector<double> terminal_utility(const GameInstance& inst, const History& h,
                                            bool with_penalty) {
  CLOCKAUCTION_CHECK(h.is_terminal(), ErrorKind::kContractViolation,
                     "terminal_utility called on a non-terminal history");
  const Settlement s = final_settlement(inst.rules, h.state);
  std::vector<double> u(inst.rules.num_bidders);
  for (int i = 0; i < inst.rules.num_bidders; ++i) {
    u[i] = inst.values.value(inst.rules, i, h.types[i], s.allocation[i]) - s.payments[i];
    if (with_penalty) u[i] -= h.penalties[i];
  }
  return u;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_GAME_HPP
