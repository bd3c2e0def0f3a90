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

// clockauction: generate instances, solve them, evaluate and simulate
// policies, and run experiment batches.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
// JSON object {"error": {"kind": ..., "message": ...}} on stderr.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clockauction/clockauction.hpp"

namespace ca = clockauction;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int report_error(const std::string& kind, const std::string& message, int code) {
  ca::OrderedJson j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
  return code;
}

std::string default_out_root() {
  const char* env = std::getenv("CLOCKAUCTION_OUT");
  return env && *env ? env : "out";
}

// "250000" = iterations, "30s" / "10m" / "1h" = wall clock.
void apply_budget(const std::string& budget, ca::SolverConfig& cfg) {
  if (budget.empty()) throw UsageError("empty --budget");
  const char unit = budget.back();
  const bool timed = unit == 's' || unit == 'm' || unit == 'h';
  const std::string digits = timed ? budget.substr(0, budget.size() - 1) : budget;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(digits, &used);
  } catch (const std::exception&) {
    throw UsageError("bad --budget '" + budget + "'");
  }
  if (used != digits.size() || !(v > 0.0)) throw UsageError("bad --budget '" + budget + "'");
  if (timed) {
    cfg.time_budget_seconds = v * (unit == 'm' ? 60.0 : unit == 'h' ? 3600.0 : 1.0);
    cfg.iterations = 0;
  } else {
    if (v != static_cast<double>(static_cast<std::int64_t>(v))) throw UsageError("iteration budget must be an integer");
    cfg.iterations = static_cast<std::int64_t>(v);
    cfg.time_budget_seconds = 0.0;
  }
}

std::vector<ca::ProcessingRule> parse_rules(const std::string& s) {
  if (s == "both") return {ca::ProcessingRule::kDropByBidder, ca::ProcessingRule::kDropByLicense};
  try {
    return {ca::parse_processing_rule(s)};
  } catch (const ca::Error&) {
    throw UsageError("bad --rule '" + s + "' (expected dbb, dbl or both)");
  }
}

std::vector<std::uint64_t> seed_list(int n) {
  if (n < 1) throw UsageError("--seeds must be >= 1");
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint64_t>(i));
  return out;
}

void print(const ca::OrderedJson& j) { std::cout << j.dump(2) << "\n"; }

struct Options {
  // shared
  std::uint64_t seed = 0;
  std::string out;
  std::string budget = "100000";
  std::int64_t episodes = 10000;
  double threshold = 0.1;
  std::string rule = "both";
  // gen
  std::string family = "2p";
  int types = 1;
  int samples = 1;
  // solve / eval / sim / run / ablate
  std::string instance;
  std::vector<std::string> instances;
  std::string policy;
  double tremble = 0.01;
  bool no_penalty = false;
  std::int64_t checkpoint_every = 0;
  bool modal = false;
  bool straightforward = false;
  double br_budget = 3600.0;
  int seeds = 1;
  int checkpoints = 6;
  bool no_baseline = false;
  std::string runs;
};

int cmd_gen(const Options& o) {
  if (o.types < 1 || o.samples < 1) throw UsageError("--types and --samples must be >= 1");
  const auto rules = parse_rules(o.rule);
  const fs::path dir = o.out.empty() ? fs::path(default_out_root()) / "instances" : fs::path(o.out);
  ca::OrderedJson written = ca::OrderedJson::array();
  for (int s = 0; s < o.samples; ++s) {
    for (const auto& inst : ca::generate_family_member(o.family, o.types, s, o.seed, rules)) {
      const fs::path path = dir / (inst.id + ".json");
      ca::write_json(path, ca::to_json(inst));
      written.push_back({{"id", inst.id},
                         {"path", path.string()},
                         {"infostates_per_player", inst.provenance.infostates_per_player}});
    }
  }
  print({{"instances", written}});
  return 0;
}

ca::SolverConfig solver_config(const Options& o) {
  ca::SolverConfig cfg;
  apply_budget(o.budget, cfg);
  cfg.seed = o.seed;
  cfg.tremble_epsilon = o.tremble;
  cfg.penalty_enabled = !o.no_penalty;
  cfg.checkpoint_every = o.checkpoint_every;
  cfg.validate();
  return cfg;
}

int cmd_solve(const Options& o) {
  const ca::GameInstance inst = ca::load_instance(o.instance);
  const ca::SolverConfig cfg = solver_config(o);
  const ca::GameTree tree = ca::build_game_tree(inst, {cfg.penalty_enabled});
  const ca::TrainResult tr = ca::train(tree, cfg);
  const fs::path dir = o.out.empty() ? fs::path(default_out_root()) / "policies" : fs::path(o.out);
  const fs::path avg = dir / (inst.id + ".policy.json");
  const fs::path modal = dir / (inst.id + ".modal.json");
  const fs::path cps = dir / (inst.id + ".checkpoints.jsonl");
  ca::write_json(avg, ca::to_json(tree, tr.average, inst.id));
  ca::write_json(modal, ca::to_json(tree, ca::modal_policy(tr.average), inst.id));
  std::string lines;
  for (const auto& cp : tr.checkpoints) lines += ca::to_json(tree, cp).dump() + "\n";
  ca::write_text(cps, lines);
  print({{"instance_id", inst.id},
         {"iterations", tr.iterations},
         {"seconds", tr.seconds},
         {"entropy", ca::policy_entropy(tr.average)},
         {"policy", avg.string()},
         {"modal_policy", modal.string()},
         {"checkpoints", cps.string()}});
  return 0;
}

int cmd_eval(const Options& o) {
  const ca::GameInstance inst = ca::load_instance(o.instance);
  const ca::GameTree tree = ca::build_game_tree(inst, {false});
  ca::Policy policy = o.straightforward ? ca::straightforward_policy(inst, tree)
                                        : ca::policy_from_json(tree, ca::read_json(o.policy));
  if (o.modal) policy = ca::modal_policy(policy);
  const ca::NashConvReport rep = ca::nashconv(tree, policy, o.br_budget);
  ca::OrderedJson j = ca::to_json(rep);
  j["instance_id"] = inst.id;
  j["entropy"] = ca::policy_entropy(policy);
  if (!o.out.empty()) ca::write_json(o.out, j);
  print(j);
  return 0;
}

int cmd_sim(const Options& o) {
  const ca::GameInstance inst = ca::load_instance(o.instance);
  const ca::GameTree tree = ca::build_game_tree(inst, {false});
  const ca::Policy policy = o.straightforward ? ca::straightforward_policy(inst, tree)
                                              : ca::policy_from_json(tree, ca::read_json(o.policy));
  ca::Rng rng(ca::derive_seed(o.seed, "sim:" + inst.id, 0));
  std::vector<ca::EpisodeRecord> log;
  const ca::MetricsSummary m = ca::simulate(tree, policy, o.episodes, rng, o.out.empty() ? nullptr : &log);
  if (!o.out.empty()) {
    std::string lines;
    for (const auto& e : log) lines += ca::to_json(e).dump() + "\n";
    ca::write_text(o.out, lines);
  }
  ca::OrderedJson j = ca::to_json(m);
  j["instance_id"] = inst.id;
  print(j);
  return 0;
}

int cmd_report(const Options& o) {
  std::vector<ca::CsvRow> rows = ca::collect_runs(o.runs);
  for (auto& r : rows) r.excluded = !(r.nashconv <= o.threshold);
  const fs::path dir = o.out.empty() ? fs::path(o.runs) : fs::path(o.out);
  const fs::path csv = ca::write_report(dir, rows);
  print({{"rows", rows.size()}, {"csv", csv.string()}});
  return 0;
}

std::vector<ca::GameInstance> load_all(const std::vector<std::string>& paths) {
  if (paths.empty()) throw UsageError("at least one --instance is required");
  std::vector<ca::GameInstance> out;
  for (const auto& p : paths) out.push_back(ca::load_instance(p));
  return out;
}

int cmd_run(const Options& o) {
  ca::RunSpec spec;
  spec.instances = load_all(o.instances);
  spec.solver = solver_config(o);
  spec.seeds = seed_list(o.seeds);
  spec.episodes = o.episodes;
  spec.threshold = o.threshold;
  spec.master_seed = o.seed;
  spec.out_dir = o.out.empty() ? fs::path(default_out_root()) / "run" : fs::path(o.out);
  spec.straightforward_baseline = !o.no_baseline;
  spec.br_budget_seconds = o.br_budget;
  const ca::ExperimentResult res = ca::run_experiment(spec);
  print({{"rows", res.rows.size()}, {"failures", res.failures}, {"csv", res.csv_path.string()}});
  return res.failures.empty() ? 0 : kExitFailure;
}

int cmd_ablate(const Options& o) {
  ca::AblationSpec spec;
  spec.instances = load_all(o.instances);
  spec.seeds = seed_list(o.seeds);
  ca::SolverConfig budget;
  apply_budget(o.budget, budget);
  if (budget.iterations <= 0) throw UsageError("ablate needs an iteration --budget");
  spec.iterations = budget.iterations;
  spec.num_checkpoints = o.checkpoints;
  spec.tremble_epsilon = o.tremble;
  spec.master_seed = o.seed;
  const fs::path path = o.out.empty() ? fs::path(default_out_root()) / "ablation.jsonl" : fs::path(o.out);
  std::string lines;
  const auto records = ca::ablate(spec);
  for (const auto& r : records) lines += r.dump() + "\n";
  ca::write_text(path, lines);
  print({{"records", records.size()}, {"path", path.string()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clock auction equilibrium solver"};
  app.require_subcommand(1);
  Options o;

  auto add_out = [&](CLI::App* c, const std::string& what) {
    c->add_option("--out", o.out, what + " (default under $CLOCKAUCTION_OUT or ./out)");
  };
  auto add_solver = [&](CLI::App* c) {
    c->add_option("--budget", o.budget, "iterations, or wall clock such as 30s, 10m")->capture_default_str();
    c->add_option("--tremble", o.tremble, "opponent tremble probability during training")->capture_default_str();
    c->add_flag("--no-penalty", o.no_penalty, "train without per-round secondary rewards");
  };

  auto* gen = app.add_subcommand("gen", "sample instance files");
  gen->add_option("--family", o.family, "2p or 3p")->capture_default_str();
  gen->add_option("--types", o.types, "types per bidder")->capture_default_str();
  gen->add_option("--samples", o.samples, "value profiles to draw")->capture_default_str();
  gen->add_option("--rule", o.rule, "dbb, dbl or both")->capture_default_str();
  gen->add_option("--seed", o.seed, "master seed")->capture_default_str();
  add_out(gen, "output directory");

  auto* solve = app.add_subcommand("solve", "train ES-MCCFR on an instance");
  solve->add_option("--instance", o.instance, "instance file")->required()->check(CLI::ExistingFile);
  solve->add_option("--seed", o.seed, "solver seed")->capture_default_str();
  solve->add_option("--checkpoint-every", o.checkpoint_every, "iterations between checkpoints");
  add_solver(solve);
  add_out(solve, "output directory");

  auto* eval = app.add_subcommand("eval", "exact NashConv of a policy");
  eval->add_option("--instance", o.instance, "instance file")->required()->check(CLI::ExistingFile);
  auto* eval_policy = eval->add_option("--policy", o.policy, "policy file")->check(CLI::ExistingFile);
  auto* eval_sf = eval->add_flag("--straightforward", o.straightforward, "evaluate straightforward bidding");
  eval_policy->excludes(eval_sf);
  eval->add_flag("--modal", o.modal, "round to the modal pure policy first");
  eval->add_option("--br-budget", o.br_budget, "seconds per best response")->capture_default_str();
  add_out(eval, "report file");

  auto* sim = app.add_subcommand("sim", "simulate episodes of a policy");
  sim->add_option("--instance", o.instance, "instance file")->required()->check(CLI::ExistingFile);
  auto* sim_policy = sim->add_option("--policy", o.policy, "policy file")->check(CLI::ExistingFile);
  auto* sim_sf = sim->add_flag("--straightforward", o.straightforward, "simulate straightforward bidding");
  sim_policy->excludes(sim_sf);
  sim->add_option("--episodes", o.episodes, "episode count")->capture_default_str();
  sim->add_option("--seed", o.seed, "simulation seed")->capture_default_str();
  add_out(sim, "JSONL episode log");

  auto* report = app.add_subcommand("report", "rebuild the CSV from a run directory");
  report->add_option("--runs", o.runs, "run directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--threshold", o.threshold, "NashConv exclusion threshold")->capture_default_str();
  add_out(report, "output directory (default: the run directory)");

  auto* run = app.add_subcommand("run", "train, verify and simulate a batch");
  run->add_option("--instance", o.instances, "instance files")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", o.seeds, "seeds per instance")->capture_default_str();
  run->add_option("--seed", o.seed, "master seed")->capture_default_str();
  run->add_option("--episodes", o.episodes, "episodes per run")->capture_default_str();
  run->add_option("--threshold", o.threshold, "NashConv exclusion threshold")->capture_default_str();
  run->add_option("--br-budget", o.br_budget, "seconds per best response")->capture_default_str();
  run->add_flag("--no-baseline", o.no_baseline, "skip the straightforward-bidding rows");
  add_solver(run);
  add_out(run, "output directory");

  auto* abl = app.add_subcommand("ablate", "2x2 grid over secondary rewards and trembling");
  abl->add_option("--instance", o.instances, "instance files")->required()->check(CLI::ExistingFile);
  abl->add_option("--seeds", o.seeds, "seeds per instance")->capture_default_str();
  abl->add_option("--seed", o.seed, "master seed")->capture_default_str();
  abl->add_option("--checkpoints", o.checkpoints, "NashConv evaluations per run")->capture_default_str();
  abl->add_option("--budget", o.budget, "iterations")->capture_default_str();
  abl->add_option("--tremble", o.tremble, "tremble probability when trembling")->capture_default_str();
  add_out(abl, "JSONL output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*solve) return cmd_solve(o);
    if (*eval) {
      if (o.policy.empty() && !o.straightforward) throw UsageError("eval needs --policy or --straightforward");
      return cmd_eval(o);
    }
    if (*sim) {
      if (o.policy.empty() && !o.straightforward) throw UsageError("sim needs --policy or --straightforward");
      return cmd_sim(o);
    }
    if (*report) return cmd_report(o);
    if (*run) return cmd_run(o);
    if (*abl) return cmd_ablate(o);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const ca::Error& e) {
    return report_error(std::string(ca::to_string(e.kind())), e.what(), kExitFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitFailure);
  }
  return kExitUsage;
}
