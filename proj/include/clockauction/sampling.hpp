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

// Value-profile sampling with rejection of uninteresting or oversized games.

#ifndef CLOCKAUCTION_SAMPLING_HPP
#define CLOCKAUCTION_SAMPLING_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clockauction/engine.hpp"
#include "clockauction/error.hpp"
#include "clockauction/game.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/rng.hpp"
#include "clockauction/valuation.hpp"

namespace clockauction {

struct SamplingConfig {
  int num_types = 1;
  Interval vps_range{20.0, 30.0};
  Interval market_share_range{0.35, 0.50};
  double keypoint_width = 0.15;
  /// Multiplies every sampled value per subscriber.
  double value_scale = 2.0;
  int max_straightforward_rounds = 20;
  double max_single_increment_rounds = 25.0;
  int single_increment_samples = 100;
  int max_infostates_per_player = 2000;
  /// Games smaller than this offer no real strategic choice; 0 disables.
  int min_infostates_per_player = 10;
  std::size_t max_tree_nodes = 5'000'000;
  bool allocation_check = true;
  std::uint64_t seed = 0;
  int retry_limit = 10000;
  std::uint64_t allocation_limit = 10'000'000;

  void validate() const {
    CLOCKAUCTION_CHECK(num_types >= 1, ErrorKind::kMalformedInput, "num_types must be >= 1");
    CLOCKAUCTION_CHECK(vps_range.lo <= vps_range.hi && vps_range.lo >= 0.0,
                       ErrorKind::kMalformedInput, "bad value-per-subscriber range");
    CLOCKAUCTION_CHECK(market_share_range.lo <= market_share_range.hi &&
                           market_share_range.lo > 0.0 && market_share_range.hi < 1.0,
                       ErrorKind::kMalformedInput, "bad market-share range");
    CLOCKAUCTION_CHECK(keypoint_width > 0.0 && value_scale > 0.0, ErrorKind::kMalformedInput,
                       "keypoint width and value scale must be positive");
    CLOCKAUCTION_CHECK(max_straightforward_rounds > 0 && max_single_increment_rounds > 0.0 &&
                           single_increment_samples > 0 && max_infostates_per_player > 0 &&
                           min_infostates_per_player >= 0 &&
                           min_infostates_per_player <= max_infostates_per_player,
                       ErrorKind::kMalformedInput, "rejection caps must be positive");
    CLOCKAUCTION_CHECK(retry_limit >= 0, ErrorKind::kMalformedInput,
                       "retry limit must be non-negative");
  }
};

/// Two bidders, ranges of the case study.
inline SamplingConfig two_player_config(int num_types, std::uint64_t seed = 0) {
  SamplingConfig c;
  c.num_types = num_types;
  c.seed = seed;
  return c;
}

/// Three bidders: lower market shares, higher values, narrower keypoints,
/// and a size cap sized for the larger trees.
inline SamplingConfig three_player_config(int num_types, std::uint64_t seed = 0) {
  SamplingConfig c;
  c.num_types = num_types;
  c.seed = seed;
  c.vps_range = {35.0, 45.0};
  c.market_share_range = {0.20, 0.30};
  c.keypoint_width = 0.10;
  c.max_infostates_per_player = 60000;
  c.max_tree_nodes = 20'000'000;
  return c;
}

inline AuctionRules family_rules(const std::string& family, ProcessingRule rule) {
  if (family == "2p") return case_study_rules(rule);
  if (family == "3p") return three_bidder_rules(rule);
  throw Error(ErrorKind::kMalformedInput, "unknown instance family '" + family + "'");
}

inline SamplingConfig family_config(const std::string& family, int num_types, std::uint64_t seed) {
  if (family == "2p") return two_player_config(num_types, seed);
  if (family == "3p") return three_player_config(num_types, seed);
  throw Error(ErrorKind::kMalformedInput, "unknown instance family '" + family + "'");
}

inline TypeParams sample_type(Rng& rng, const SamplingConfig& config) {
  TypeParams t = sample_type(rng, config.vps_range, config.market_share_range, config.keypoint_width);
  t.value_per_subscriber *= config.value_scale;
  return t;
}

// ---------------------------------------------------------------------------
// Surplus-optimal allocation

struct AllocationResult {
  DemandMatrix allocation;
  double surplus = 0.0;
  /// Some surplus-maximizing allocation gives every bidder >= 1 licence.
  bool some_optimum_covers_all = false;
};

namespace detail {

/// All ways to hand out at most `supply` units to `n` bidders.
inline std::vector<std::vector<int>> splits(int supply, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(n, 0);
  auto rec = [&](auto&& self, int bidder, int left) -> void {
    if (bidder == n) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[bidder] = k;
      self(self, bidder + 1, left - k);
    }
    cur[bidder] = 0;
  };
  rec(rec, 0, supply);
  return out;
}

}  // namespace detail

/// Exhaustive search over every split of supply (unsold units allowed) for
/// the allocation maximizing total value minus cost at `prices`.
inline AllocationResult surplus_optimal_allocation(const AuctionRules& rules,
                                                   const ValueProfile& values,
                                                   const std::vector<int>& types,
                                                   const std::vector<double>& prices,
                                                   std::uint64_t limit = 10'000'000) {
  const int n = rules.num_bidders;
  const int m = rules.num_products();
  std::vector<std::vector<std::vector<int>>> per_product;
  std::uint64_t count = 1;
  for (const auto& p : rules.products) {
    per_product.push_back(detail::splits(p.supply, n));
    const std::uint64_t k = per_product.back().size();
    CLOCKAUCTION_CHECK(k <= limit && count <= limit / k, ErrorKind::kEnumerationLimit,
                       "too many candidate allocations to enumerate");
    count *= k;
  }
  constexpr double kTol = 1e-9;
  AllocationResult best;
  bool have = false;
  std::vector<std::size_t> pick(m, 0);
  DemandMatrix alloc(n, DemandVector(m, 0));
  while (true) {
    double surplus = 0.0;
    bool covers = true;
    for (int i = 0; i < n; ++i) {
      int units = 0;
      for (int j = 0; j < m; ++j) {
        alloc[i][j] = per_product[j][pick[j]][i];
        units += alloc[i][j];
      }
      surplus += values.value(rules, i, types[i], alloc[i]) - bundle_cost(alloc[i], prices);
      covers = covers && units > 0;
    }
    if (!have || surplus > best.surplus + kTol) {
      best.allocation = alloc;
      best.surplus = surplus;
      best.some_optimum_covers_all = covers;
      have = true;
    } else if (surplus >= best.surplus - kTol && covers) {
      best.some_optimum_covers_all = true;
    }
    int j = m - 1;
    for (; j >= 0; --j) {
      if (++pick[j] < per_product[j].size()) break;
      pick[j] = 0;
    }
    if (j < 0) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Straightforward play on the engine

/// Every bidder's myopic best bid at the current prices.
inline DemandMatrix straightforward_bids(const GameInstance& inst, const AuctionState& state,
                                         const std::vector<int>& types) {
  DemandMatrix bids(inst.rules.num_bidders);
  for (int i = 0; i < inst.rules.num_bidders; ++i) {
    const InfoState info = make_info_state(inst, state, i, types[i]);
    const auto actions = legal_actions(inst, info);
    bids[i] = actions[straightforward_choice(inst.rules, actions, action_profits(inst, info, actions))];
  }
  return bids;
}

/// Longest auction (total rounds, warmup included) over every processing
/// branch when everyone bids straightforwardly. Stops exploring once a branch
/// exceeds `cutoff` and returns cutoff + 1.
inline int straightforward_max_rounds(const GameInstance& inst, const AuctionState& state,
                                      const std::vector<int>& types, int cutoff) {
  const int played = static_cast<int>(state.history.size());
  if (state.terminated) return played;
  if (played > cutoff) return cutoff + 1;
  const auto dist = outcome_distribution(inst.rules, state, straightforward_bids(inst, state, types));
  int worst = 0;
  for (std::size_t k = 0; k < dist.size() && worst <= cutoff; ++k) {
    const auto next = advance(inst.rules, state, dist.entries[k].outcome, {dist.is_lottery(), {}});
    worst = std::max(worst, straightforward_max_rounds(inst, next, types, cutoff));
  }
  return worst;
}

/// One straightforward play-through where only one randomly chosen
/// overdemanded product has its price raised each round.
inline int single_increment_rounds(const GameInstance& inst, const std::vector<int>& types,
                                   Rng& rng, int round_cap = 1000) {
  AuctionState s = replay_warmup(inst.rules);
  const int m = inst.rules.num_products();
  while (!s.terminated && static_cast<int>(s.history.size()) < round_cap) {
    const auto dist = outcome_distribution(inst.rules, s, straightforward_bids(inst, s, types));
    std::vector<double> probs;
    for (std::size_t k = 0; k < dist.size(); ++k) probs.push_back(dist.probability(k));
    const auto& outcome = dist.entries[sample_index(rng, probs)].outcome;
    const DemandVector z = aggregate_demand(outcome.new_processed, m);
    std::vector<int> over;
    for (int j = 0; j < m; ++j) {
      if (z[j] > inst.rules.products[j].supply) over.push_back(j);
    }
    AdvanceOptions opts{dist.is_lottery(), {}};
    if (!over.empty()) {
      opts.increment_mask.assign(m, false);
      const int pick = std::uniform_int_distribution<int>(0, static_cast<int>(over.size()) - 1)(rng);
      opts.increment_mask[over[pick]] = true;
    }
    s = advance(inst.rules, s, outcome, opts);
  }
  return static_cast<int>(s.history.size());
}

// ---------------------------------------------------------------------------
// Rejection

struct RejectionResult {
  bool accepted = false;
  std::string reason;  // allocation | straightforward_length | single_increment_length | size
  int straightforward_rounds = 0;
  double single_increment_mean_rounds = 0.0;
  std::vector<int> infostates_per_player;
};

/// Runs the checks in order and reports the first failure. Length checks
/// always use drop-by-bidder processing; the size check uses the
/// candidate's own rule.
inline RejectionResult rejection_check(const GameInstance& candidate, const SamplingConfig& config) {
  RejectionResult res;
  const auto profiles = root_chance(candidate);

  if (config.allocation_check) {
    std::vector<double> opening;
    for (const auto& p : candidate.rules.products) opening.push_back(p.opening_price);
    for (const auto& [prob, types] : profiles) {
      const auto best = surplus_optimal_allocation(candidate.rules, candidate.values, types,
                                                   opening, config.allocation_limit);
      if (!best.some_optimum_covers_all) {
        res.reason = "allocation";
        return res;
      }
    }
  }

  GameInstance by_bidder = candidate;
  by_bidder.rules.processing_rule = ProcessingRule::kDropByBidder;
  const AuctionState start = replay_warmup(by_bidder.rules);
  for (const auto& [prob, types] : profiles) {
    res.straightforward_rounds =
        std::max(res.straightforward_rounds,
                 straightforward_max_rounds(by_bidder, start, types, config.max_straightforward_rounds));
    if (res.straightforward_rounds > config.max_straightforward_rounds) {
      res.reason = "straightforward_length";
      return res;
    }
  }

  Rng rng(derive_seed(candidate.seed, "single_increment:" + candidate.id));
  double total = 0.0;
  for (int s = 0; s < config.single_increment_samples; ++s) {
    const auto& types = profiles[std::uniform_int_distribution<std::size_t>(0, profiles.size() - 1)(rng)].second;
    total += single_increment_rounds(by_bidder, types, rng);
  }
  res.single_increment_mean_rounds = total / config.single_increment_samples;
  if (res.single_increment_mean_rounds > config.max_single_increment_rounds) {
    res.reason = "single_increment_length";
    return res;
  }

  TreeLimits limits;
  limits.max_infostates_per_player = config.max_infostates_per_player;
  limits.max_nodes = config.max_tree_nodes;
  try {
    res.infostates_per_player = build_game_tree(candidate, {false}, limits).infostate_counts();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kSizeGuard && e.kind() != ErrorKind::kEnumerationLimit) throw;
    res.reason = "size";
    return res;
  }
  for (int n : res.infostates_per_player) {
    if (n < config.min_infostates_per_player) {
      res.reason = "size";
      return res;
    }
  }
  res.accepted = true;
  return res;
}

/// Samples value profiles until every rule variant of the profile passes
/// rejection_check. All returned instances share one ValueProfile.
inline std::vector<GameInstance> generate_matched_instances(
    const SamplingConfig& config, const std::vector<AuctionRules>& variants,
    const std::string& id_prefix, const std::string& family, Rng& rng) {
  config.validate();
  CLOCKAUCTION_CHECK(!variants.empty(), ErrorKind::kMalformedInput, "no rule variants given");
  for (const auto& r : variants) {
    r.validate();
    CLOCKAUCTION_CHECK(warmup_is_strategic(r), ErrorKind::kMalformedInput,
                       "warmup bids must leave some product overdemanded every round");
    CLOCKAUCTION_CHECK(r.num_bidders == variants.front().num_bidders,
                       ErrorKind::kMalformedInput, "rule variants disagree on bidder count");
  }
  Provenance prov;
  for (int attempt = 0; attempt < config.retry_limit; ++attempt) {
    ++prov.attempts;
    std::vector<std::vector<TypeParams>> types(variants.front().num_bidders);
    for (auto& list : types) {
      for (int t = 0; t < config.num_types; ++t) list.push_back(sample_type(rng, config));
    }
    std::vector<GameInstance> out;
    std::string failed;
    for (const auto& rules : variants) {
      GameInstance inst;
      inst.id = variants.size() == 1 ? id_prefix : id_prefix + "-" + std::string(rule_tag(rules.processing_rule));
      inst.family = family;
      inst.rules = rules;
      inst.values = ValueProfile(rules, types);
      inst.seed = config.seed;
      const auto check = rejection_check(inst, config);
      if (!check.accepted) {
        failed = check.reason;
        break;
      }
      inst.provenance.straightforward_rounds = check.straightforward_rounds;
      inst.provenance.single_increment_mean_rounds = check.single_increment_mean_rounds;
      inst.provenance.infostates_per_player = check.infostates_per_player;
      out.push_back(std::move(inst));
    }
    if (failed.empty()) {
      for (auto& inst : out) {
        inst.provenance.attempts = prov.attempts;
        inst.provenance.rejections = prov.rejections;
      }
      return out;
    }
    ++prov.rejections[failed];
  }
  std::string histogram;
  for (const auto& [reason, n] : prov.rejections) histogram += " " + reason + "=" + std::to_string(n);
  throw Error(ErrorKind::kGenerationFailure,
              "no acceptable instance after " + std::to_string(config.retry_limit) +
                  " attempts; rejections:" + (histogram.empty() ? " none" : histogram));
}

inline GameInstance generate_instance(const SamplingConfig& config, const AuctionRules& rules,
                                      Rng& rng, const std::string& id = "instance",
                                      const std::string& family = "custom") {
  return generate_matched_instances(config, {rules}, id, family, rng).front();
}

/// Deterministic family member: the `sample`-th value profile of a family,
/// realized under each requested rule.
inline std::vector<GameInstance> generate_family_member(const std::string& family, int num_types,
                                                        int sample, std::uint64_t master_seed,
                                                        const std::vector<ProcessingRule>& rules) {
  SamplingConfig config = family_config(family, num_types, master_seed);
  config.seed = derive_seed(master_seed, family + "-t" + std::to_string(num_types), sample);
  Rng rng(config.seed);
  std::vector<AuctionRules> variants;
  for (auto r : rules) variants.push_back(family_rules(family, r));
  std::string prefix = family + "-t" + std::to_string(num_types) + "-s" + std::to_string(sample);
  if (rules.size() == 1) prefix += "-" + std::string(rule_tag(rules.front()));
  return generate_matched_instances(config, variants, prefix, family, rng);
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_SAMPLING_HPP
