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

// Clock auction rules: activity, bid processing and price updates.
//
// Every function here is pure. Bid processing takes its queue order as an
// argument; outcome_distribution enumerates every order to produce the exact
// lottery a round induces.

#ifndef CLOCKAUCTION_ENGINE_HPP
#define CLOCKAUCTION_ENGINE_HPP

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/types.hpp"

namespace clockauction {

inline int activity_of(const DemandVector& demand, const std::vector<ProductSpec>& products) {
  CLOCKAUCTION_CHECK(demand.size() == products.size(), ErrorKind::kMalformedInput,
                     "demand vector length does not match product count");
  int points = 0;
  for (std::size_t j = 0; j < products.size(); ++j) {
    points += demand[j] * products[j].eligibility_points;
  }
  return points;
}

inline int full_eligibility(const AuctionRules& rules) {
  int points = 0;
  for (const auto& p : rules.products) points += p.supply * p.eligibility_points;
  return points;
}

inline DemandVector aggregate_demand(const DemandMatrix& demand, int num_products) {
  DemandVector z(num_products, 0);
  for (const auto& row : demand) {
    for (int j = 0; j < num_products; ++j) z[j] += row[j];
  }
  return z;
}

/// Start-of-round price after `steps` clock increments.
inline double price_after_steps(const ProductSpec& product, double increment, int steps) {
  double p = product.opening_price;
  for (int s = 0; s < steps; ++s) p *= (1.0 + increment);
  return p;
}

struct RoundRecord {
  int round = 0;
  std::vector<int> price_steps;  // start-of-round prices, as increment counts
  DemandMatrix submitted;
  DemandMatrix processed;
  DemandVector aggregate;
  bool lottery = false;
};

/// Snapshot of the auction at the start of a round (or at termination).
///
/// Prices are carried as per-product increment counts so that equal price
/// paths compare exactly; `prices()` materializes them.
struct AuctionState {
  int round = 1;
  std::vector<int> price_steps;
  DemandMatrix processed;
  std::vector<int> activity_cap;
  std::vector<bool> sale_guaranteed;
  bool terminated = false;
  std::vector<RoundRecord> history;

  double price(const AuctionRules& rules, int product) const {
    return price_after_steps(rules.products[product], rules.clock_increment,
                             price_steps[product]);
  }

  std::vector<double> prices(const AuctionRules& rules) const {
    std::vector<double> out(rules.products.size());
    for (int j = 0; j < rules.num_products(); ++j) out[j] = price(rules, j);
    return out;
  }

  DemandVector aggregate(int num_products) const {
    return aggregate_demand(processed, num_products);
  }
};

inline AuctionState initial_state(const AuctionRules& rules) {
  rules.validate();
  AuctionState s;
  s.price_steps.assign(rules.products.size(), 0);
  s.processed.assign(rules.num_bidders, DemandVector(rules.products.size(), 0));
  s.activity_cap.assign(rules.num_bidders, full_eligibility(rules));
  s.sale_guaranteed.assign(rules.products.size(), false);
  return s;
}

inline double bundle_cost(const DemandVector& demand, const std::vector<double>& prices) {
  double c = 0.0;
  for (std::size_t j = 0; j < demand.size(); ++j) c += demand[j] * prices[j];
  return c;
}

/// All demand vectors within supply and the bidder's activity cap, in
/// lexicographic order (product 0 most significant).
inline std::vector<DemandVector> activity_legal_demands(const AuctionRules& rules,
                                                        const AuctionState& state,
                                                        int bidder) {
  std::vector<DemandVector> out;
  const int cap = state.activity_cap.at(bidder);
  const std::size_t n = rules.num_bundles();
  for (std::size_t idx = 0; idx < n; ++idx) {
    DemandVector d = rules.bundle_at(idx);
    if (activity_of(d, rules.products) <= cap) out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bid processing

struct ProcessingRequest {
  int bidder = 0;
  int product = 0;
  int delta = 0;  // < 0 drop, > 0 pick-up

  friend bool operator==(const ProcessingRequest&, const ProcessingRequest&) = default;
  friend auto operator<=>(const ProcessingRequest& a, const ProcessingRequest& b) {
    return std::tie(a.bidder, a.product, a.delta) <=> std::tie(b.bidder, b.product, b.delta);
  }
};

/// One request per changed (bidder, product): bidders ascending, drops before
/// pick-ups, products ascending within each group.
inline std::vector<ProcessingRequest> build_requests(const DemandMatrix& previous,
                                                     const DemandMatrix& submitted) {
  CLOCKAUCTION_CHECK(previous.size() == submitted.size(), ErrorKind::kMalformedInput,
                     "previous and submitted demand have different bidder counts");
  std::vector<ProcessingRequest> out;
  for (std::size_t i = 0; i < previous.size(); ++i) {
    CLOCKAUCTION_CHECK(previous[i].size() == submitted[i].size(), ErrorKind::kMalformedInput,
                       "previous and submitted demand have different product counts");
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < previous[i].size(); ++j) {
        const int delta = submitted[i][j] - previous[i][j];
        if ((pass == 0 && delta < 0) || (pass == 1 && delta > 0)) {
          out.push_back({static_cast<int>(i), static_cast<int>(j), delta});
        }
      }
    }
  }
  return out;
}

struct ProcessingOutcome {
  DemandMatrix submitted;
  DemandMatrix new_processed;
  std::vector<ProcessingRequest> applied;      // net applied change per (bidder, product)
  std::vector<ProcessingRequest> unfulfilled;  // residual per (bidder, product)
};

/// Throws kRejectedInput unless every submitted bid is well formed and within
/// the bidder's activity cap.
inline void check_submission(const AuctionRules& rules, const AuctionState& state,
                             const DemandMatrix& submitted) {
  CLOCKAUCTION_CHECK(static_cast<int>(submitted.size()) == rules.num_bidders,
                     ErrorKind::kRejectedInput, "need one submitted bid per bidder");
  for (int i = 0; i < rules.num_bidders; ++i) {
    try {
      rules.check_demand(submitted[i]);
    } catch (const Error& e) {
      throw Error(ErrorKind::kRejectedInput, e.what());
    }
    CLOCKAUCTION_CHECK(activity_of(submitted[i], rules.products) <= state.activity_cap[i],
                       ErrorKind::kRejectedInput,
                       "bid of bidder " + std::to_string(i) + " exceeds its activity cap");
  }
}

/// Runs the queue to a fixed point. `ordered` must contain exactly the
/// requested changes (possibly split into unit drops) in processing order.
inline ProcessingOutcome process_queue(const AuctionRules& rules, const AuctionState& state,
                                       const DemandMatrix& submitted,
                                       std::span<const ProcessingRequest> ordered) {
  CLOCKAUCTION_CHECK(!state.terminated, ErrorKind::kContractViolation,
                     "cannot process bids after the auction has ended");
  check_submission(rules, state, submitted);

  const int num_products = rules.num_products();
  {
    // The queue must carry exactly the requested net change.
    DemandMatrix expected = submitted;
    for (int i = 0; i < rules.num_bidders; ++i) {
      for (int j = 0; j < num_products; ++j) expected[i][j] -= state.processed[i][j];
    }
    for (const auto& r : ordered) {
      CLOCKAUCTION_CHECK(r.bidder >= 0 && r.bidder < rules.num_bidders && r.product >= 0 &&
                             r.product < num_products && r.delta != 0,
                         ErrorKind::kMalformedInput, "queue entry out of range");
      expected[r.bidder][r.product] -= r.delta;
    }
    for (const auto& row : expected) {
      for (int v : row) {
        CLOCKAUCTION_CHECK(v == 0, ErrorKind::kMalformedInput,
                           "queue does not match the submitted bids");
      }
    }
  }

  DemandMatrix working = state.processed;
  DemandVector z = aggregate_demand(working, num_products);
  std::vector<int> activity(rules.num_bidders);
  for (int i = 0; i < rules.num_bidders; ++i) activity[i] = activity_of(working[i], rules.products);

  std::deque<ProcessingRequest> queue(ordered.begin(), ordered.end());
  while (!queue.empty()) {
    int applied_this_sweep = 0;
    const std::size_t sweep = queue.size();
    for (std::size_t n = 0; n < sweep; ++n) {
      ProcessingRequest req = queue.front();
      queue.pop_front();
      const auto& prod = rules.products[req.product];
      const int want = req.delta < 0 ? -req.delta : req.delta;
      int take = 0;
      if (req.delta < 0) {
        take = want;
        if (state.sale_guaranteed[req.product]) {
          take = std::min(want, std::max(0, z[req.product] - prod.supply));
        }
        working[req.bidder][req.product] -= take;
        z[req.product] -= take;
        activity[req.bidder] -= take * prod.eligibility_points;
      } else {
        const int room = state.activity_cap[req.bidder] - activity[req.bidder];
        take = std::min(want, std::max(0, room) / prod.eligibility_points);
        working[req.bidder][req.product] += take;
        z[req.product] += take;
        activity[req.bidder] += take * prod.eligibility_points;
      }
      applied_this_sweep += take;
      if (take < want) {
        req.delta = req.delta < 0 ? -(want - take) : (want - take);
        queue.push_back(req);
      }
    }
    if (applied_this_sweep == 0) break;
  }

  ProcessingOutcome out;
  out.submitted = submitted;
  out.new_processed = std::move(working);
  for (int i = 0; i < rules.num_bidders; ++i) {
    for (int j = 0; j < num_products; ++j) {
      const int applied = out.new_processed[i][j] - state.processed[i][j];
      const int residual = submitted[i][j] - out.new_processed[i][j];
      if (applied != 0) out.applied.push_back({i, j, applied});
      if (residual != 0) out.unfulfilled.push_back({i, j, residual});
    }
  }
  return out;
}

/// Convenience overload: process the requests in build_requests order.
inline ProcessingOutcome process_in_request_order(const AuctionRules& rules,
                                                  const AuctionState& state,
                                                  const DemandMatrix& submitted) {
  const auto requests = build_requests(state.processed, submitted);
  return process_queue(rules, state, submitted, requests);
}

/// A group of requests that moves through the random ordering as one block.
using QueueUnit = std::vector<ProcessingRequest>;

/// The queue is a sequence of segments; within each segment the units are
/// shuffled uniformly and segments keep their relative order.
///
/// DropByBidder: one segment of per-bidder units (drops then pick-ups).
/// DropByLicense: a segment of single-licence drops followed by a segment of
/// per-bidder pick-up units.
inline std::vector<std::vector<QueueUnit>> queue_segments(
    const AuctionRules& rules, const std::vector<ProcessingRequest>& requests) {
  std::vector<std::vector<QueueUnit>> segments;
  if (rules.processing_rule == ProcessingRule::kDropByBidder) {
    std::vector<QueueUnit> units;
    for (const auto& r : requests) {
      if (units.empty() || units.back().front().bidder != r.bidder) units.emplace_back();
      units.back().push_back(r);
    }
    segments.push_back(std::move(units));
  } else {
    std::vector<QueueUnit> drops;
    std::vector<QueueUnit> pickups;
    for (const auto& r : requests) {
      if (r.delta < 0) {
        for (int k = 0; k < -r.delta; ++k) drops.push_back({{r.bidder, r.product, -1}});
      } else {
        if (pickups.empty() || pickups.back().front().bidder != r.bidder) pickups.emplace_back();
        pickups.back().push_back(r);
      }
    }
    segments.push_back(std::move(drops));
    segments.push_back(std::move(pickups));
  }
  return segments;
}

/// Number of distinguishable orderings of a segment (a multinomial, since
/// identical unit drops are interchangeable). Saturates at `cap + 1`.
inline std::uint64_t distinct_orderings(std::vector<QueueUnit> units, std::uint64_t cap) {
  std::sort(units.begin(), units.end());
  std::uint64_t count = 1;
  std::uint64_t placed = 0;
  std::size_t i = 0;
  // count = n! / prod(m_k!) built incrementally as a product of binomials.
  while (i < units.size()) {
    std::size_t run = 1;
    while (i + run < units.size() && units[i + run] == units[i]) ++run;
    for (std::size_t r = 1; r <= run; ++r) {
      ++placed;
      // count *= placed / r, kept exact by multiplying first. An overflowing
      // product is far beyond any usable cap.
      if (count > std::numeric_limits<std::uint64_t>::max() / placed) return cap + 1;
      const std::uint64_t next = count * placed / r;
      if (next > cap) return cap + 1;
      count = next;
    }
    i += run;
  }
  return count;
}

struct OutcomeDistribution {
  struct Entry {
    ProcessingOutcome outcome;
    std::uint64_t orderings = 0;  // how many queue orderings produce it
  };
  std::vector<Entry> entries;
  std::uint64_t total_orderings = 0;

  std::size_t size() const { return entries.size(); }
  bool is_lottery() const { return entries.size() >= 2; }
  double probability(std::size_t k) const {
    return static_cast<double>(entries[k].orderings) / static_cast<double>(total_orderings);
  }
  /// Reduced fraction (numerator, denominator).
  std::pair<std::uint64_t, std::uint64_t> exact_probability(std::size_t k) const {
    const std::uint64_t g = std::gcd(entries[k].orderings, total_orderings);
    return {entries[k].orderings / g, total_orderings / g};
  }
};

inline constexpr std::uint64_t kDefaultOrderingLimit = 3628800;  // 10!

/// Exact distribution over processing results, by enumerating every
/// distinguishable queue ordering. Outcomes are sorted by resulting demand.
inline OutcomeDistribution outcome_distribution(const AuctionRules& rules,
                                                const AuctionState& state,
                                                const DemandMatrix& submitted,
                                                std::uint64_t ordering_limit = kDefaultOrderingLimit) {
  check_submission(rules, state, submitted);
  const auto requests = build_requests(state.processed, submitted);
  auto segments = queue_segments(rules, requests);

  std::uint64_t total = 1;
  for (const auto& seg : segments) {
    const std::uint64_t n = distinct_orderings(seg, ordering_limit);
    CLOCKAUCTION_CHECK(n <= ordering_limit && total <= ordering_limit / n, ErrorKind::kEnumerationLimit,
                       "bid processing has more than " + std::to_string(ordering_limit) +
                           " queue orderings");
    total *= n;
  }
  for (auto& seg : segments) std::sort(seg.begin(), seg.end());

  OutcomeDistribution dist;
  dist.total_orderings = total;
  std::vector<ProcessingRequest> flat;

  // Odometer over segments: advance the last segment first.
  auto record = [&]() {
    flat.clear();
    for (const auto& seg : segments) {
      for (const auto& unit : seg) flat.insert(flat.end(), unit.begin(), unit.end());
    }
    ProcessingOutcome o = process_queue(rules, state, submitted, flat);
    for (auto& e : dist.entries) {
      if (e.outcome.new_processed == o.new_processed) {
        ++e.orderings;
        return;
      }
    }
    dist.entries.push_back({std::move(o), 1});
  };

  while (true) {
    record();
    int s = static_cast<int>(segments.size()) - 1;
    for (; s >= 0; --s) {
      if (std::next_permutation(segments[s].begin(), segments[s].end())) break;
      // next_permutation has wrapped this segment back to sorted order.
    }
    if (s < 0) break;
  }

  std::sort(dist.entries.begin(), dist.entries.end(), [](const auto& a, const auto& b) {
    return a.outcome.new_processed < b.outcome.new_processed;
  });
  return dist;
}

struct AdvanceOptions {
  bool lottery = false;
  /// When non-empty, only products with a true entry may be incremented.
  std::vector<bool> increment_mask;
};

/// Commits a processing outcome and moves to the next round, or ends the
/// auction when no product is overdemanded.
inline AuctionState advance(const AuctionRules& rules, const AuctionState& state,
                            const ProcessingOutcome& outcome, const AdvanceOptions& opts = {}) {
  CLOCKAUCTION_CHECK(!state.terminated, ErrorKind::kContractViolation,
                     "cannot advance a terminated auction");
  const int m = rules.num_products();
  AuctionState next = state;
  next.processed = outcome.new_processed;
  const DemandVector z = aggregate_demand(next.processed, m);

  next.history.push_back(
      {state.round, state.price_steps, outcome.submitted, next.processed, z, opts.lottery});

  for (int i = 0; i < rules.num_bidders; ++i) {
    next.activity_cap[i] = activity_of(next.processed[i], rules.products);
  }
  bool overdemanded = false;
  for (int j = 0; j < m; ++j) {
    if (z[j] >= rules.products[j].supply) next.sale_guaranteed[j] = true;
    if (z[j] > rules.products[j].supply) overdemanded = true;
  }
  if (!overdemanded) {
    next.terminated = true;
    return next;
  }
  for (int j = 0; j < m; ++j) {
    const bool allowed = opts.increment_mask.empty() || opts.increment_mask[j];
    if (z[j] > rules.products[j].supply && allowed) ++next.price_steps[j];
  }
  ++next.round;
  return next;
}

struct Settlement {
  DemandMatrix allocation;
  std::vector<double> payments;
  std::vector<int> unsold;  // per product

  double revenue() const { return std::accumulate(payments.begin(), payments.end(), 0.0); }
  int total_unsold() const { return std::accumulate(unsold.begin(), unsold.end(), 0); }
};

inline Settlement final_settlement(const AuctionRules& rules, const AuctionState& state) {
  CLOCKAUCTION_CHECK(state.terminated, ErrorKind::kContractViolation,
                     "settlement requested before the auction ended");
  Settlement s;
  s.allocation = state.processed;
  const auto prices = state.prices(rules);
  for (const auto& bundle : s.allocation) s.payments.push_back(bundle_cost(bundle, prices));
  const DemandVector z = state.aggregate(rules.num_products());
  for (int j = 0; j < rules.num_products(); ++j) s.unsold.push_back(rules.products[j].supply - z[j]);
  return s;
}

/// Replays the warmup bids through the engine. Each warmup round must be
/// deterministic. Replay stops early if a warmup round clears demand, leaving
/// a terminated state; warmup_is_strategic() tells the two cases apart.
inline AuctionState replay_warmup(const AuctionRules& rules) {
  AuctionState s = initial_state(rules);
  for (std::size_t r = 0; r < rules.warmup_bids.size() && !s.terminated; ++r) {
    const auto dist = outcome_distribution(rules, s, rules.warmup_bids[r]);
    CLOCKAUCTION_CHECK(dist.size() == 1, ErrorKind::kMalformedInput,
                       "warmup round " + std::to_string(r + 1) + " triggers a lottery");
    s = advance(rules, s, dist.entries.front().outcome);
  }
  return s;
}

/// True when every warmup round leaves some product overdemanded.
inline bool warmup_is_strategic(const AuctionRules& rules) {
  const AuctionState s = replay_warmup(rules);
  return !s.terminated && s.history.size() == rules.warmup_bids.size();
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_ENGINE_HPP
