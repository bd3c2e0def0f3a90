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

#ifndef CLOCKAUCTION_TYPES_HPP
#define CLOCKAUCTION_TYPES_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "clockauction/error.hpp"

namespace clockauction {

/// Units demanded per product, indexed like AuctionRules::products.
using DemandVector = std::vector<int>;
/// One DemandVector per bidder.
using DemandMatrix = std::vector<DemandVector>;

struct ProductSpec {
  std::string name;
  int supply = 1;
  double opening_price = 1.0;  // millions
  int eligibility_points = 1;
  double bandwidth_fraction = 1.0;

  void validate() const {
    CLOCKAUCTION_CHECK(supply >= 1, ErrorKind::kMalformedInput,
                       "product '" + name + "': supply must be >= 1");
    CLOCKAUCTION_CHECK(eligibility_points >= 1, ErrorKind::kMalformedInput,
                       "product '" + name + "': eligibility points must be >= 1");
    CLOCKAUCTION_CHECK(opening_price > 0.0, ErrorKind::kMalformedInput,
                       "product '" + name + "': opening price must be > 0");
    CLOCKAUCTION_CHECK(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0,
                       ErrorKind::kMalformedInput,
                       "product '" + name + "': bandwidth fraction must be in (0,1]");
  }
};

enum class ProcessingRule { kDropByBidder, kDropByLicense };

inline std::string_view to_string(ProcessingRule rule) {
  return rule == ProcessingRule::kDropByBidder ? "drop_by_bidder" : "drop_by_license";
}

inline ProcessingRule parse_processing_rule(std::string_view name) {
  if (name == "drop_by_bidder" || name == "dbb") return ProcessingRule::kDropByBidder;
  if (name == "drop_by_license" || name == "dbl") return ProcessingRule::kDropByLicense;
  throw Error(ErrorKind::kMalformedInput,
              "unknown processing rule '" + std::string(name) + "'");
}

/// Short tag used in file names and ids.
inline std::string_view rule_tag(ProcessingRule rule) {
  return rule == ProcessingRule::kDropByBidder ? "dbb" : "dbl";
}

struct AuctionRules {
  std::vector<ProductSpec> products;
  int num_bidders = 2;
  double clock_increment = 0.05;
  ProcessingRule processing_rule = ProcessingRule::kDropByBidder;
  /// warmup_bids[round][bidder] is replayed before strategic play starts.
  std::vector<DemandMatrix> warmup_bids;
  bool dominated_bid_pruning = true;

  int num_products() const { return static_cast<int>(products.size()); }

  /// Structural checks only; warmup legality is checked when it is replayed.
  void validate() const {
    CLOCKAUCTION_CHECK(!products.empty(), ErrorKind::kMalformedInput,
                       "rules need at least one product");
    for (const auto& p : products) p.validate();
    CLOCKAUCTION_CHECK(num_bidders >= 2, ErrorKind::kMalformedInput,
                       "rules need at least two bidders");
    CLOCKAUCTION_CHECK(clock_increment > 0.0, ErrorKind::kMalformedInput,
                       "clock increment must be > 0");
    for (const auto& round : warmup_bids) {
      CLOCKAUCTION_CHECK(static_cast<int>(round.size()) == num_bidders,
                         ErrorKind::kMalformedInput,
                         "warmup round must list one bid per bidder");
      for (const auto& bid : round) check_demand(bid);
    }
  }

  void check_demand(const DemandVector& d) const {
    CLOCKAUCTION_CHECK(static_cast<int>(d.size()) == num_products(),
                       ErrorKind::kMalformedInput, "demand vector has wrong length");
    for (int j = 0; j < num_products(); ++j) {
      CLOCKAUCTION_CHECK(d[j] >= 0 && d[j] <= products[j].supply,
                         ErrorKind::kMalformedInput,
                         "demand for product '" + products[j].name + "' out of [0, supply]");
    }
  }

  /// Number of distinct demand vectors, prod_j (q_j + 1).
  std::size_t num_bundles() const {
    std::size_t n = 1;
    for (const auto& p : products) n *= static_cast<std::size_t>(p.supply + 1);
    return n;
  }

  /// Mixed-radix index with product 0 most significant, so index order is
  /// lexicographic order of demand vectors.
  std::size_t bundle_index(const DemandVector& d) const {
    std::size_t idx = 0;
    for (int j = 0; j < num_products(); ++j) {
      idx = idx * static_cast<std::size_t>(products[j].supply + 1) +
            static_cast<std::size_t>(d[j]);
    }
    return idx;
  }

  DemandVector bundle_at(std::size_t idx) const {
    DemandVector d(products.size(), 0);
    for (int j = num_products() - 1; j >= 0; --j) {
      const auto radix = static_cast<std::size_t>(products[j].supply + 1);
      d[j] = static_cast<int>(idx % radix);
      idx /= radix;
    }
    return d;
  }

  int total_supply() const {
    int n = 0;
    for (const auto& p : products) n += p.supply;
    return n;
  }
};

/// The two-bidder case study: one unencumbered licence and four encumbered
/// licences at 60% bandwidth, 5% clock, two warmup rounds of (0U, 3E).
inline AuctionRules case_study_rules(ProcessingRule rule = ProcessingRule::kDropByBidder) {
  AuctionRules r;
  r.products = {
      {"unencumbered", 1, 12.0, 5, 1.0},
      {"encumbered", 4, 7.0, 3, 0.6},
  };
  r.num_bidders = 2;
  r.clock_increment = 0.05;
  r.processing_rule = rule;
  r.warmup_bids = {{{0, 3}, {0, 3}}, {{0, 3}, {0, 3}}};
  return r;
}

/// Three bidders, a fifth encumbered licence and a 20% clock.
inline AuctionRules three_bidder_rules(ProcessingRule rule = ProcessingRule::kDropByBidder) {
  AuctionRules r;
  r.products = {
      {"unencumbered", 1, 12.0, 5, 1.0},
      {"encumbered", 5, 7.0, 3, 0.6},
  };
  r.num_bidders = 3;
  r.clock_increment = 0.20;
  r.processing_rule = rule;
  r.warmup_bids = {{{0, 3}, {0, 3}, {0, 3}}, {{0, 3}, {0, 3}, {0, 3}}};
  return r;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_TYPES_HPP
