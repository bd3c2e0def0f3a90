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

#ifndef CLOCKAUCTION_VALUATION_HPP
#define CLOCKAUCTION_VALUATION_HPP

#include <algorithm>
#include <random>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/types.hpp"

namespace clockauction {

/// Sigmoidal spectrum valuation of one bidder type.
///
/// Value is `value_per_subscriber * sigma(f)` where f is the fraction of all
/// bandwidth won. sigma is piecewise linear through (0,0), (ms-w, 0.27),
/// (ms+w, 0.73), (1,1); the steep middle segment straddles the market share
/// and sigma(ms) = 0.5.
struct TypeParams {
  double value_per_subscriber = 0.0;  // millions
  double market_share = 0.5;
  double keypoint_width = 0.15;

  void validate() const {
    CLOCKAUCTION_CHECK(value_per_subscriber >= 0.0, ErrorKind::kMalformedInput,
                       "value per subscriber must be non-negative");
    CLOCKAUCTION_CHECK(market_share > 0.0 && market_share < 1.0, ErrorKind::kMalformedInput,
                       "market share must be in (0,1)");
    CLOCKAUCTION_CHECK(keypoint_width > 0.0, ErrorKind::kMalformedInput,
                       "keypoint width must be > 0");
  }

  friend bool operator==(const TypeParams&, const TypeParams&) = default;
};

inline constexpr double kLowKeyLevel = 0.27;
inline constexpr double kHighKeyLevel = 0.73;
inline constexpr double kKeypointMin = 0.05;
inline constexpr double kKeypointMax = 0.95;

struct SigmoidKeypoints {
  double low;   // x where sigma = 0.27
  double high;  // x where sigma = 0.73
};

inline SigmoidKeypoints sigmoid_keypoints(const TypeParams& t) {
  return {std::clamp(t.market_share - t.keypoint_width, kKeypointMin, kKeypointMax),
          std::clamp(t.market_share + t.keypoint_width, kKeypointMin, kKeypointMax)};
}

inline double sigmoid(const TypeParams& t, double fraction) {
  const auto [lo, hi] = sigmoid_keypoints(t);
  const double f = std::clamp(fraction, 0.0, 1.0);
  if (f <= lo) return kLowKeyLevel * f / lo;
  if (f <= hi) {
    // Both keypoints clamp to the same bound only for degenerate widths.
    if (hi <= lo) return kHighKeyLevel;
    return kLowKeyLevel + (kHighKeyLevel - kLowKeyLevel) * (f - lo) / (hi - lo);
  }
  return kHighKeyLevel + (1.0 - kHighKeyLevel) * (f - hi) / (1.0 - hi);
}

inline double bandwidth_fraction(const DemandVector& demand,
                                 const std::vector<ProductSpec>& products) {
  CLOCKAUCTION_CHECK(demand.size() == products.size(), ErrorKind::kMalformedInput,
                     "demand vector length does not match product count");
  double won = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < products.size(); ++j) {
    won += demand[j] * products[j].bandwidth_fraction;
    total += products[j].supply * products[j].bandwidth_fraction;
  }
  return won / total;
}

inline double type_value(const TypeParams& t, const DemandVector& demand,
                         const std::vector<ProductSpec>& products) {
  return t.value_per_subscriber * sigmoid(t, bandwidth_fraction(demand, products));
}

/// Per-bidder type lists (uniform prior) with cached value tables.
class ValueProfile {
 public:
  ValueProfile() = default;

  ValueProfile(const AuctionRules& rules, std::vector<std::vector<TypeParams>> types)
      : types_(std::move(types)) {
    CLOCKAUCTION_CHECK(static_cast<int>(types_.size()) == rules.num_bidders,
                       ErrorKind::kMalformedInput, "need one type list per bidder");
    const std::size_t n = rules.num_bundles();
    tables_.resize(types_.size());
    for (std::size_t i = 0; i < types_.size(); ++i) {
      CLOCKAUCTION_CHECK(!types_[i].empty(), ErrorKind::kMalformedInput,
                         "every bidder needs at least one type");
      for (const auto& t : types_[i]) {
        t.validate();
        std::vector<double> table(n);
        for (std::size_t b = 0; b < n; ++b) table[b] = type_value(t, rules.bundle_at(b), rules.products);
        tables_[i].push_back(std::move(table));
      }
    }
  }

  int num_bidders() const { return static_cast<int>(types_.size()); }
  int num_types(int bidder) const { return static_cast<int>(types_[bidder].size()); }
  const std::vector<std::vector<TypeParams>>& types() const { return types_; }
  const TypeParams& type(int bidder, int type) const { return types_[bidder][type]; }

  /// Value table indexed by AuctionRules::bundle_index.
  const std::vector<double>& table(int bidder, int type) const { return tables_[bidder][type]; }

  double value(const AuctionRules& rules, int bidder, int type, const DemandVector& d) const {
    return tables_[bidder][type][rules.bundle_index(d)];
  }

  /// Largest per-bidder type count (the family's "number of types").
  int max_types() const {
    int n = 0;
    for (const auto& t : types_) n = std::max(n, static_cast<int>(t.size()));
    return n;
  }

 private:
  std::vector<std::vector<TypeParams>> types_;
  std::vector<std::vector<std::vector<double>>> tables_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Draws one type. Degenerate intervals return their endpoint exactly.
template <typename Rng>
TypeParams sample_type(Rng& rng, Interval vps, Interval market_share, double keypoint_width) {
  auto draw = [&rng](Interval iv) {
    if (iv.hi <= iv.lo) return iv.lo;
    return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
  };
  TypeParams t;
  t.value_per_subscriber = draw(vps);
  t.market_share = draw(market_share);
  t.keypoint_width = keypoint_width;
  return t;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_VALUATION_HPP
