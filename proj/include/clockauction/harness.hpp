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

// Training-run orchestration: solve, round to the modal policy, verify,
// simulate, and write per-run JSON plus one CSV for the whole batch.

#ifndef CLOCKAUCTION_HARNESS_HPP
#define CLOCKAUCTION_HARNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "clockauction/error.hpp"
#include "clockauction/game_tree.hpp"
#include "clockauction/io.hpp"
#include "clockauction/mccfr.hpp"
#include "clockauction/rng.hpp"
#include "clockauction/simulate.hpp"
#include "clockauction/verifier.hpp"

namespace clockauction {

inline constexpr const char* kCsvHeader =
    "instance_id,family,rule,num_types,algorithm,seed,nashconv,revenue,welfare,rounds,"
    "total_rounds,unsold,lotteries,excluded,schema_version";

struct RunSpec {
  std::vector<GameInstance> instances;
  SolverConfig solver;  // seed is replaced per run
  std::vector<std::uint64_t> seeds{0};
  std::int64_t episodes = 10000;
  std::filesystem::path out_dir = "out";
  double threshold = 0.1;
  std::uint64_t master_seed = 0;
  bool straightforward_baseline = true;
  double br_budget_seconds = 3600.0;

  void validate() const {
    CLOCKAUCTION_CHECK(!seeds.empty(), ErrorKind::kMalformedInput, "need at least one seed");
    CLOCKAUCTION_CHECK(episodes >= 1, ErrorKind::kMalformedInput, "episode count must be >= 1");
    CLOCKAUCTION_CHECK(threshold >= 0.0, ErrorKind::kMalformedInput, "threshold must be >= 0");
    solver.validate();
  }
};

struct CsvRow {
  std::string instance_id;
  std::string family;
  std::string rule;
  int num_types = 0;
  std::string algorithm;  // "mccfr" or "straightforward"
  std::uint64_t seed = 0;
  double nashconv = 0.0;
  MetricsSummary metrics;
  bool excluded = false;

  auto sort_key() const { return std::tie(family, num_types, instance_id, algorithm, seed); }
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string csv_line(const CsvRow& r) {
  std::string s;
  s += r.instance_id + "," + r.family + "," + r.rule + "," + std::to_string(r.num_types) + "," +
       r.algorithm + "," + std::to_string(r.seed) + "," + format_number(r.nashconv) + "," +
       format_number(r.metrics.revenue) + "," + format_number(r.metrics.welfare) + "," +
       format_number(r.metrics.rounds) + "," + format_number(r.metrics.total_rounds) + "," +
       format_number(r.metrics.unsold) + "," + format_number(r.metrics.lotteries) + "," +
       (r.excluded ? "1" : "0") + "," + std::to_string(kSchemaVersion);
  return s;
}

/// Rows sorted by (family, num_types, instance, algorithm, seed) so the
/// file is byte-stable across reruns.
inline std::string render_csv(std::vector<CsvRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CsvRow& a, const CsvRow& b) { return a.sort_key() < b.sort_key(); });
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) out += csv_line(r) + "\n";
  return out;
}

inline OrderedJson to_json(const CsvRow& r) {
  return {{"instance_id", r.instance_id}, {"family", r.family},     {"rule", r.rule},
          {"num_types", r.num_types},     {"algorithm", r.algorithm}, {"seed", r.seed},
          {"nashconv", number_or_null(r.nashconv)}, {"metrics", to_json(r.metrics)},
          {"excluded", r.excluded}};
}

inline CsvRow csv_row_from_json(const OrderedJson& j) {
  using detail::get;
  CsvRow r;
  r.instance_id = get<std::string>(j, "instance_id");
  r.family = get<std::string>(j, "family");
  r.rule = get<std::string>(j, "rule");
  r.num_types = get<int>(j, "num_types");
  r.algorithm = get<std::string>(j, "algorithm");
  r.seed = get<std::uint64_t>(j, "seed");
  const auto& nc = detail::require(j, "nashconv");
  r.nashconv = nc.is_null() ? std::nan("") : nc.get<double>();
  const auto& m = detail::require(j, "metrics");
  r.metrics.episodes = get<std::int64_t>(m, "episodes");
  r.metrics.revenue = get<double>(m, "revenue");
  r.metrics.welfare = get<double>(m, "welfare");
  r.metrics.rounds = get<double>(m, "rounds");
  r.metrics.total_rounds = get<double>(m, "total_rounds");
  r.metrics.unsold = get<double>(m, "unsold");
  r.metrics.lotteries = get<double>(m, "lotteries");
  r.excluded = get<bool>(j, "excluded");
  return r;
}

/// Means over the rows that passed the NashConv filter, grouped by
/// (family, rule, num_types, algorithm).
inline OrderedJson summarize(const std::vector<CsvRow>& rows) {
  struct Acc {
    int runs = 0, excluded = 0;
    MetricsSummary sum;
    double nashconv = 0.0;
  };
  std::map<std::tuple<std::string, std::string, int, std::string>, Acc> groups;
  for (const auto& r : rows) {
    Acc& a = groups[{r.family, r.rule, r.num_types, r.algorithm}];
    if (r.excluded) {
      ++a.excluded;
      continue;
    }
    ++a.runs;
    a.nashconv += r.nashconv;
    a.sum.revenue += r.metrics.revenue;
    a.sum.welfare += r.metrics.welfare;
    a.sum.rounds += r.metrics.rounds;
    a.sum.total_rounds += r.metrics.total_rounds;
    a.sum.unsold += r.metrics.unsold;
    a.sum.lotteries += r.metrics.lotteries;
  }
  OrderedJson out = OrderedJson::array();
  for (const auto& [k, a] : groups) {
    const double n = a.runs ? a.runs : 1;
    out.push_back({{"family", std::get<0>(k)},
                   {"rule", std::get<1>(k)},
                   {"num_types", std::get<2>(k)},
                   {"algorithm", std::get<3>(k)},
                   {"runs", a.runs},
                   {"excluded", a.excluded},
                   {"nashconv", a.nashconv / n},
                   {"revenue", a.sum.revenue / n},
                   {"welfare", a.sum.welfare / n},
                   {"rounds", a.sum.rounds / n},
                   {"total_rounds", a.sum.total_rounds / n},
                   {"unsold", a.sum.unsold / n},
                   {"lotteries", a.sum.lotteries / n}});
  }
  return out;
}

struct ExperimentResult {
  std::vector<CsvRow> rows;  // sorted
  std::vector<std::string> failures;
  std::filesystem::path csv_path;
};

inline std::string run_file_name(const std::string& id, const std::string& algorithm, std::uint64_t seed) {
  return id + "--" + algorithm + "--seed" + std::to_string(seed) + ".json";
}

/// Writes the CSV and filtered summary for a set of rows.
inline std::filesystem::path write_report(const std::filesystem::path& out_dir, const std::vector<CsvRow>& rows) {
  const auto csv = out_dir / "results.csv";
  write_text(csv, render_csv(rows));
  write_json(out_dir / "summary.json", {{"schema_version", kSchemaVersion}, {"groups", summarize(rows)}});
  return csv;
}

/// Trains every (instance, seed), evaluates the modal policy and simulates
/// it. A failing run is recorded in its JSON file and skipped in the CSV.
inline ExperimentResult run_experiment(const RunSpec& spec) {
  spec.validate();
  ExperimentResult res;
  const auto runs_dir = spec.out_dir / "runs";
  std::filesystem::create_directories(runs_dir);

  auto record = [&](const GameInstance& inst, const std::string& algorithm, std::uint64_t seed, auto&& body) {
    OrderedJson run = {{"schema_version", kSchemaVersion},
                       {"instance_id", inst.id},
                       {"algorithm", algorithm},
                       {"seed", seed}};
    try {
      CsvRow row;
      row.instance_id = inst.id;
      row.family = inst.family;
      row.rule = std::string(rule_tag(inst.rules.processing_rule));
      row.num_types = inst.num_types();
      row.algorithm = algorithm;
      row.seed = seed;
      body(row, run);
      row.excluded = !(row.nashconv <= spec.threshold);
      run["row"] = to_json(row);
      res.rows.push_back(row);
    } catch (const std::exception& e) {
      run["error"] = e.what();
      res.failures.push_back(inst.id + "/" + algorithm + "/" + std::to_string(seed) + ": " + e.what());
    }
    write_json(runs_dir / run_file_name(inst.id, algorithm, seed), run);
  };

  for (const auto& inst : spec.instances) {
    GameTree tree;
    try {
      tree = build_game_tree(inst, {spec.solver.penalty_enabled});
    } catch (const std::exception& e) {
      res.failures.push_back(inst.id + ": " + e.what());
      write_json(runs_dir / (inst.id + "--error.json"),
                 {{"schema_version", kSchemaVersion}, {"instance_id", inst.id}, {"error", e.what()}});
      continue;
    }
    for (std::uint64_t seed : spec.seeds) {
      record(inst, "mccfr", seed, [&](CsvRow& row, OrderedJson& run) {
        SolverConfig cfg = spec.solver;
        cfg.seed = derive_seed(spec.master_seed, "train:" + inst.id, seed);
        const TrainResult tr = train(tree, cfg);
        const Policy modal = modal_policy(tr.average);
        const NashConvReport rep = nashconv(tree, modal, spec.br_budget_seconds);
        Rng rng(derive_seed(spec.master_seed, "sim:" + inst.id, seed));
        row.nashconv = rep.nashconv;
        row.metrics = simulate(tree, modal, spec.episodes, rng);
        run["solver"] = to_json(cfg);
        run["iterations"] = tr.iterations;
        run["train_seconds"] = tr.seconds;
        run["entropy_average"] = policy_entropy(tr.average);
        run["nashconv_report"] = to_json(rep);
      });
    }
    if (spec.straightforward_baseline) {
      record(inst, "straightforward", 0, [&](CsvRow& row, OrderedJson& run) {
        const Policy sf = straightforward_policy(inst, tree);
        const NashConvReport rep = nashconv(tree, sf, spec.br_budget_seconds);
        Rng rng(derive_seed(spec.master_seed, "sim-straightforward:" + inst.id, 0));
        row.nashconv = rep.nashconv;
        row.metrics = simulate(tree, sf, spec.episodes, rng);
        run["nashconv_report"] = to_json(rep);
      });
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(),
                   [](const CsvRow& a, const CsvRow& b) { return a.sort_key() < b.sort_key(); });
  res.csv_path = write_report(spec.out_dir, res.rows);
  return res;
}

/// Rebuilds the CSV and summary from the per-run files of a run directory.
inline std::vector<CsvRow> collect_runs(const std::filesystem::path& out_dir) {
  const auto runs_dir = out_dir / "runs";
  CLOCKAUCTION_CHECK(std::filesystem::is_directory(runs_dir), ErrorKind::kIo,
                     "no runs directory under '" + out_dir.string() + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(runs_dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CsvRow> rows;
  for (const auto& f : files) {
    const OrderedJson j = read_json(f);
    if (j.contains("row")) rows.push_back(csv_row_from_json(j.at("row")));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Ablation over training-time modifications

struct AblationVariant {
  bool secondary_rewards = true;
  bool trembling = true;
};

inline std::vector<AblationVariant> ablation_grid() {
  return {{true, true}, {true, false}, {false, true}, {false, false}};
}

struct AblationSpec {
  std::vector<GameInstance> instances;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::int64_t iterations = 60000;
  int num_checkpoints = 6;
  double tremble_epsilon = 0.01;
  std::uint64_t master_seed = 0;

  void validate() const {
    CLOCKAUCTION_CHECK(!instances.empty() && !seeds.empty(), ErrorKind::kMalformedInput,
                       "ablation needs instances and seeds");
    CLOCKAUCTION_CHECK(num_checkpoints >= 1 && iterations >= num_checkpoints, ErrorKind::kMalformedInput,
                       "ablation needs iterations >= checkpoints >= 1");
    CLOCKAUCTION_CHECK(tremble_epsilon > 0.0 && tremble_epsilon < 1.0, ErrorKind::kMalformedInput,
                       "tremble epsilon must be in (0,1)");
  }
};

/// One record per (instance, seed, variant), each with num_checkpoints
/// modal-policy NashConv values at evenly spaced iterations. All variants of
/// a seed share the solver seed.
inline std::vector<OrderedJson> ablate(const AblationSpec& spec) {
  spec.validate();
  std::vector<OrderedJson> records;
  for (const auto& inst : spec.instances) {
    const GameTree tree = build_game_tree(inst, {true});
    for (std::uint64_t seed : spec.seeds) {
      for (const auto& v : ablation_grid()) {
        SolverConfig cfg;
        cfg.iterations = spec.iterations;
        cfg.penalty_enabled = v.secondary_rewards;
        cfg.tremble_epsilon = v.trembling ? spec.tremble_epsilon : 0.0;
        cfg.seed = derive_seed(spec.master_seed, "ablate:" + inst.id, seed);
        EsMccfr solver(tree, cfg);
        OrderedJson checkpoints = OrderedJson::array();
        std::int64_t t = 0;
        for (int k = 1; k <= spec.num_checkpoints; ++k) {
          const std::int64_t target = spec.iterations * k / spec.num_checkpoints;
          while (t < target) {
            ++t;
            solver.iteration(static_cast<int>((t - 1) % tree.num_players()), t);
          }
          const Policy modal = modal_policy(average_policy(tree, solver.table()));
          checkpoints.push_back({{"iteration", t}, {"nashconv", number_or_null(nashconv(tree, modal).nashconv)}});
        }
        records.push_back({{"schema_version", kSchemaVersion},
                           {"instance_id", inst.id},
                           {"seed", seed},
                           {"secondary_rewards", v.secondary_rewards},
                           {"trembling", v.trembling},
                           {"checkpoints", checkpoints}});
      }
    }
  }
  return records;
}

}  // namespace clockauction

#endif  // CLOCKAUCTION_HARNESS_HPP
