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

// JSON persistence for instances, policies, checkpoints and reports.
// Policies and checkpoints are keyed by infostate key, so they remain valid
// for any tree built from the same instance.

#ifndef CLOCKAUCTION_IO_HPP
#define CLOCKAUCTION_IO_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "clockauction/error.hpp"
#include "clockauction/game.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/mccfr.hpp"
#include "clockauction/policy.hpp"
#include "clockauction/simulate.hpp"
#include "clockauction/verifier.hpp"

namespace clockauction {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

template <typename J>
const J& require(const J& j, const char* field) {
  CLOCKAUCTION_CHECK(j.is_object() && j.contains(field), ErrorKind::kMalformedInput,
                     std::string("missing field '") + field + "'");
  return j.at(field);
}

template <typename T, typename J>
T get(const J& j, const char* field) {
  try {
    return require(j, field).template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kMalformedInput, std::string("bad field '") + field + "': " + e.what());
  }
}

template <typename J>
void check_schema(const J& j, const char* what) {
  CLOCKAUCTION_CHECK(get<int>(j, "schema_version") == kSchemaVersion, ErrorKind::kMalformedInput,
                     std::string("unsupported ") + what + " schema version");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  CLOCKAUCTION_CHECK(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  CLOCKAUCTION_CHECK(out.good(), ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  CLOCKAUCTION_CHECK(out.good(), ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

inline OrderedJson parse_json(const std::string& text, const std::string& what) {
  try {
    return OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kMalformedInput, what + ": " + e.what());
  }
}

inline OrderedJson read_json(const std::filesystem::path& path) {
  return parse_json(read_text(path), path.string());
}

inline void write_json(const std::filesystem::path& path, const OrderedJson& j) {
  write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Rules and instances

inline OrderedJson to_json(const AuctionRules& r) {
  OrderedJson products = OrderedJson::array();
  for (const auto& p : r.products) {
    products.push_back({{"name", p.name},
                        {"supply", p.supply},
                        {"opening_price", p.opening_price},
                        {"eligibility_points", p.eligibility_points},
                        {"bandwidth_fraction", p.bandwidth_fraction}});
  }
  return {{"products", products},
          {"num_bidders", r.num_bidders},
          {"clock_increment", r.clock_increment},
          {"processing_rule", std::string(to_string(r.processing_rule))},
          {"warmup_bids", r.warmup_bids},
          {"dominated_bid_pruning", r.dominated_bid_pruning}};
}

inline AuctionRules rules_from_json(const OrderedJson& j) {
  using detail::get;
  AuctionRules r;
  for (const auto& p : detail::require(j, "products")) {
    ProductSpec s;
    s.name = get<std::string>(p, "name");
    s.supply = get<int>(p, "supply");
    s.opening_price = get<double>(p, "opening_price");
    s.eligibility_points = get<int>(p, "eligibility_points");
    s.bandwidth_fraction = get<double>(p, "bandwidth_fraction");
    r.products.push_back(s);
  }
  r.num_bidders = get<int>(j, "num_bidders");
  r.clock_increment = get<double>(j, "clock_increment");
  r.processing_rule = parse_processing_rule(get<std::string>(j, "processing_rule"));
  r.warmup_bids = get<std::vector<DemandMatrix>>(j, "warmup_bids");
  if (j.contains("dominated_bid_pruning")) r.dominated_bid_pruning = get<bool>(j, "dominated_bid_pruning");
  r.validate();
  return r;
}

inline OrderedJson to_json(const GameInstance& inst) {
  OrderedJson types = OrderedJson::array();
  OrderedJson tables = OrderedJson::array();
  for (int i = 0; i < inst.values.num_bidders(); ++i) {
    OrderedJson ts = OrderedJson::array();
    OrderedJson tb = OrderedJson::array();
    for (int t = 0; t < inst.values.num_types(i); ++t) {
      const auto& tp = inst.values.type(i, t);
      ts.push_back({{"value_per_subscriber", tp.value_per_subscriber},
                    {"market_share", tp.market_share},
                    {"keypoint_width", tp.keypoint_width}});
      tb.push_back(inst.values.table(i, t));
    }
    types.push_back(ts);
    tables.push_back(tb);
  }
  OrderedJson rejections = OrderedJson::object();
  for (const auto& [k, v] : inst.provenance.rejections) rejections[k] = v;
  return {{"schema_version", kSchemaVersion},
          {"id", inst.id},
          {"family", inst.family},
          {"seed", inst.seed},
          {"num_types", inst.num_types()},
          {"rules", to_json(inst.rules)},
          {"types", types},
          {"value_tables", tables},
          {"provenance",
           {{"attempts", inst.provenance.attempts},
            {"rejections", rejections},
            {"straightforward_rounds", inst.provenance.straightforward_rounds},
            {"single_increment_mean_rounds", inst.provenance.single_increment_mean_rounds},
            {"infostates_per_player", inst.provenance.infostates_per_player}}}};
}

/// Value tables are recomputed from the type parameters and must match the
/// stored copy.
inline GameInstance instance_from_json(const OrderedJson& j) {
  using detail::get;
  detail::check_schema(j, "instance");
  GameInstance inst;
  inst.id = get<std::string>(j, "id");
  inst.family = get<std::string>(j, "family");
  inst.seed = get<std::uint64_t>(j, "seed");
  inst.rules = rules_from_json(detail::require(j, "rules"));
  std::vector<std::vector<TypeParams>> types;
  for (const auto& bidder : detail::require(j, "types")) {
    std::vector<TypeParams> list;
    for (const auto& t : bidder) {
      list.push_back({get<double>(t, "value_per_subscriber"), get<double>(t, "market_share"),
                      get<double>(t, "keypoint_width")});
    }
    types.push_back(std::move(list));
  }
  inst.values = ValueProfile(inst.rules, std::move(types));
  if (j.contains("value_tables")) {
    const auto stored = get<std::vector<std::vector<std::vector<double>>>>(j, "value_tables");
    bool same = static_cast<int>(stored.size()) == inst.values.num_bidders();
    for (int i = 0; same && i < inst.values.num_bidders(); ++i) {
      same = static_cast<int>(stored[i].size()) == inst.values.num_types(i);
      for (int t = 0; same && t < inst.values.num_types(i); ++t) same = stored[i][t] == inst.values.table(i, t);
    }
    CLOCKAUCTION_CHECK(same, ErrorKind::kMalformedInput,
                       "stored value tables disagree with the type parameters");
  }
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    inst.provenance.attempts = get<int>(p, "attempts");
    inst.provenance.rejections = get<std::map<std::string, int>>(p, "rejections");
    inst.provenance.straightforward_rounds = get<int>(p, "straightforward_rounds");
    inst.provenance.single_increment_mean_rounds = get<double>(p, "single_increment_mean_rounds");
    inst.provenance.infostates_per_player = get<std::vector<int>>(p, "infostates_per_player");
  }
  return inst;
}

inline GameInstance load_instance(const std::filesystem::path& path) { return instance_from_json(read_json(path)); }

// ---------------------------------------------------------------------------
// Policies and checkpoints

inline OrderedJson to_json(const GameTree& tree, const Policy& policy, const std::string& instance_id) {
  OrderedJson players = OrderedJson::array();
  for (int p = 0; p < tree.num_players(); ++p) {
    OrderedJson m = OrderedJson::object();
    for (int s = 0; s < tree.num_infostates(p); ++s) m[tree.infostate(p, s).key] = policy.probs[p][s];
    players.push_back(m);
  }
  return {{"schema_version", kSchemaVersion},
          {"instance_id", instance_id},
          {"pure", policy.pure},
          {"players", players}};
}

/// Maps a keyed policy onto `tree`. Every infostate of the tree must appear.
inline Policy policy_from_json(const GameTree& tree, const OrderedJson& j) {
  detail::check_schema(j, "policy");
  const auto& players = detail::require(j, "players");
  CLOCKAUCTION_CHECK(players.is_array() && static_cast<int>(players.size()) == tree.num_players(),
                     ErrorKind::kMalformedInput, "policy player count does not match the game");
  Policy policy;
  policy.pure = detail::get<bool>(j, "pure");
  policy.probs.resize(tree.num_players());
  for (int p = 0; p < tree.num_players(); ++p) {
    for (const auto& info : tree.infostates(p)) {
      policy.probs[p].push_back(detail::get<std::vector<double>>(players[p], info.key.c_str()));
    }
  }
  check_policy_shape(tree, policy);
  return policy;
}

inline OrderedJson to_json(const GameTree& tree, const Checkpoint& cp) {
  OrderedJson players = OrderedJson::array();
  for (int p = 0; p < tree.num_players(); ++p) {
    OrderedJson m = OrderedJson::object();
    for (int s = 0; s < tree.num_infostates(p); ++s) {
      const auto& row = cp.table.rows[p][s];
      m[tree.infostate(p, s).key] = {
          {"regret", row.regret}, {"strategy_sum", row.strategy_sum}, {"visits", row.visits}};
    }
    players.push_back(m);
  }
  return {{"schema_version", kSchemaVersion}, {"iteration", cp.iteration}, {"players", players}};
}

inline Checkpoint checkpoint_from_json(const GameTree& tree, const OrderedJson& j) {
  detail::check_schema(j, "checkpoint");
  Checkpoint cp;
  cp.iteration = detail::get<std::int64_t>(j, "iteration");
  cp.table = RegretTable::for_tree(tree);
  const auto& players = detail::require(j, "players");
  CLOCKAUCTION_CHECK(players.is_array() && static_cast<int>(players.size()) == tree.num_players(),
                     ErrorKind::kMalformedInput, "checkpoint player count does not match the game");
  for (int p = 0; p < tree.num_players(); ++p) {
    for (int s = 0; s < tree.num_infostates(p); ++s) {
      const auto& e = detail::require(players[p], tree.infostate(p, s).key.c_str());
      auto& row = cp.table.rows[p][s];
      row.regret = detail::get<std::vector<double>>(e, "regret");
      row.strategy_sum = detail::get<std::vector<double>>(e, "strategy_sum");
      row.visits = detail::get<std::uint64_t>(e, "visits");
      CLOCKAUCTION_CHECK(static_cast<int>(row.regret.size()) == tree.infostate(p, s).num_actions &&
                             row.strategy_sum.size() == row.regret.size(),
                         ErrorKind::kMalformedInput, "checkpoint row has wrong action count");
    }
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Reports

/// NaN (timed-out) values serialize as null.
inline OrderedJson number_or_null(double x) { return std::isnan(x) ? OrderedJson(nullptr) : OrderedJson(x); }

inline OrderedJson to_json(const NashConvReport& r) {
  OrderedJson players = OrderedJson::array();
  for (const auto& p : r.players) {
    players.push_back({{"on_policy", number_or_null(p.on_policy)},
                       {"best_response", number_or_null(p.best_response)},
                       {"regret", number_or_null(p.regret)},
                       {"timed_out", p.timed_out}});
  }
  return {{"nashconv", number_or_null(r.nashconv)}, {"exact", r.exact}, {"players", players}};
}

inline OrderedJson to_json(const MetricsSummary& m) {
  return {{"episodes", m.episodes}, {"revenue", m.revenue},           {"welfare", m.welfare},
          {"rounds", m.rounds},     {"total_rounds", m.total_rounds}, {"unsold", m.unsold},
          {"lotteries", m.lotteries}};
}

inline OrderedJson to_json(const EpisodeRecord& e) {
  return {{"episode", e.episode},
          {"types", e.types},
          {"allocation", e.allocation},
          {"payments", e.payments},
          {"revenue", e.revenue},
          {"welfare", e.welfare},
          {"unsold", e.unsold},
          {"rounds", e.strategic_rounds},
          {"total_rounds", e.total_rounds},
          {"lotteries", e.lotteries},
          {"round_lottery", e.round_lottery}};
}

inline OrderedJson to_json(const SolverConfig& c) {
  return {{"iterations", c.iterations},
          {"time_budget_seconds", c.time_budget_seconds},
          {"tremble_epsilon", c.tremble_epsilon},
          {"use_rm_plus", c.use_rm_plus},
          {"use_linear_weighting", c.use_linear_weighting},
          {"penalty_enabled", c.penalty_enabled},
          {"seed", c.seed},
          {"checkpoint_every", c.checkpoint_every}};
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_IO_HPP
