// plantroute: validate configs, run closed-loop scenarios, sweep beta and
// emit the bundled test-case configs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "plantroute/config_text.hpp"
#include "plantroute/harness.hpp"
#include "plantroute/sequences.hpp"
#include "plantroute/topology.hpp"

using namespace plantroute;

namespace {

struct Overrides {
  std::optional<double> beta;
  std::optional<int> horizon;
  std::optional<long long> steps;
  std::optional<long long> warmup;
  std::optional<std::string> controller;
  std::optional<std::string> output;
  std::optional<long long> budget;
  std::optional<bool> prune;
  std::optional<bool> timing;
  std::optional<int> workers;
  std::optional<int> random_initial;
  std::optional<std::uint64_t> seed;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--beta", o.beta, "Command weight in the stage cost");
  cmd->add_option("--horizon", o.horizon, "Prediction horizon N");
  cmd->add_option("--steps", o.steps, "Simulated steps T");
  cmd->add_option("--warmup", o.warmup, "Steps discarded before steady-state metrics");
  cmd->add_option("--controller", o.controller, "greedy or mpc")->check(CLI::IsMember({"greedy", "mpc"}));
  cmd->add_option("--budget", o.budget, "Cap on scored joint assignments per step");
  cmd->add_option("--prune", o.prune, "Collapse rollout-equivalent candidates (true/false)");
  cmd->add_option("--timing", o.timing, "Log solver wall time (true/false)");
  cmd->add_option("--workers", o.workers, "Threads for candidate scoring");
  cmd->add_option("--random-initial", o.random_initial, "Replace initial parts by N random placements");
  cmd->add_option("--seed", o.seed, "Seed for --random-initial");
}

ScenarioConfig scenario_from(const std::string& path, const Overrides& o) {
  ScenarioConfig cfg = path.empty() ? example_scenario() : load_scenario(path);
  if (o.beta) cfg.mpc.cost.beta = *o.beta;
  if (o.horizon) cfg.mpc.horizon = *o.horizon;
  if (o.steps) cfg.steps = *o.steps;
  if (o.warmup) cfg.warmup = *o.warmup;
  if (o.controller) cfg.controller = *o.controller == "mpc" ? ControllerKind::kMpc : ControllerKind::kGreedy;
  if (o.output) cfg.output_path = *o.output;
  if (o.budget) cfg.mpc.search_budget = *o.budget;
  if (o.prune) cfg.mpc.prune = *o.prune;
  if (o.timing) cfg.record_timing = *o.timing;
  if (o.workers) cfg.mpc.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.random_initial) {
    auto res = load_resources(cfg);
    std::mt19937_64 rng(cfg.seed);
    cfg.initial = sample_initial_parts(res.sequences, *o.random_initial, rng);
  }
  return cfg;
}

void print_metrics(const Metrics& m, const std::optional<Lockout>& lockout) {
  std::printf("steady-state window      %lld steps\n", m.window);
  std::printf("throughput               %.4f parts/step\n", m.throughput);
  std::printf("commands per step        %.4f\n", m.mean_commands);
  std::printf("parts in plant           mean %.2f, max %d\n", m.mean_parts, m.max_parts);
  std::printf("solver time per step     mean %.3f ms, max %.3f ms\n", m.mean_solver_ms, m.max_solver_ms);
  std::printf("finished parts           %lld\n", m.finished);
  if (lockout)
    std::printf("lockout                  since step %lld with %d parts\n", lockout->since, lockout->parts);
}

int cmd_validate(const std::string& scenario, const std::string& topology_path,
                 const std::string& sequences_path) {
  int problems = 0;
  std::optional<PlantTopology> topology;
  std::string topo_src = topology_path;
  std::string seq_src = sequences_path;
  if (!scenario.empty()) {
    ScenarioConfig cfg = load_scenario(scenario);
    if (topo_src.empty()) topo_src = cfg.topology_path;
    if (seq_src.empty()) seq_src = cfg.sequences_path;
  }
  if (topo_src.empty()) {
    topo_src = "builtin:example-plant";
    if (seq_src.empty()) seq_src = "builtin:example-sequences";
  }

  topology = topo_src == "builtin:example-plant" ? build_example_plant()
                                                 : parse_topology(read_text_file(topo_src), topo_src);
  auto issues = validate_topology(*topology);
  for (const auto& issue : issues) std::cout << topo_src << ": " << issue.message << "\n";
  problems += static_cast<int>(issues.size());
  std::cout << topo_src << ": " << topology->node_count() << " nodes, " << topology->input_count()
            << " inputs, " << issues.size() << " issue(s)\n";

  if (!seq_src.empty()) {
    SequenceSet set = seq_src == "builtin:example-sequences"
                          ? build_example_sequences(*topology)
                          : load_sequences(seq_src, *topology, true);
    auto seq_issues = validate_sequence_set(set, *topology);
    for (const auto& issue : seq_issues) std::cout << seq_src << ": " << issue << "\n";
    problems += static_cast<int>(seq_issues.size());
    std::cout << seq_src << ": " << set.count() << " sequence(s), " << seq_issues.size()
              << " issue(s)\n";
  }
  if (!scenario.empty()) {
    ScenarioConfig cfg = load_scenario(scenario);
    try {
      validate_scenario(cfg, load_resources(cfg));
      std::cout << scenario << ": ok\n";
    } catch (const std::exception& e) {
      std::cout << scenario << ": " << e.what() << "\n";
      ++problems;
    }
  }
  return problems == 0 ? 0 : 1;
}

int cmd_run(const ScenarioConfig& cfg) {
  RunLog log = run_simulation(cfg);
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + cfg.output_path);
    write_csv(log, out);
  }
  const long long warmup = std::min(cfg.warmup, cfg.steps - 1);
  print_metrics(compute_metrics(log, warmup), detect_lockout(log, 100));
  return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& betas,
              const std::string& csv_path) {
  auto rows = beta_sweep(cfg, betas);
  std::printf("%8s %10s %10s %10s %6s %12s %s\n", "beta", "thruput", "cmds/step", "parts", "max",
              "solver_ms", "lockout");
  for (const auto& r : rows) {
    std::printf("%8g %10.4f %10.4f %10.2f %6d %12.3f %s\n", r.beta, r.metrics.throughput,
                r.metrics.mean_commands, r.metrics.mean_parts, r.metrics.max_parts,
                r.metrics.mean_solver_ms,
                r.lockout ? ("yes (" + std::to_string(r.lockout->parts) + " parts)").c_str() : "no");
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    write_sweep_csv(rows, out);
  }
  return 0;
}

int cmd_example(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  PlantTopology topology = build_example_plant();
  SequenceSet sequences = build_example_sequences(topology);
  ScenarioConfig cfg = example_scenario();
  cfg.topology_path = "plant.cfg";
  cfg.sequences_path = "sequences.cfg";
  cfg.output_path = "run.csv";
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
    out << body;
    std::cout << (fs::path(dir) / name).string() << "\n";
  };
  write("plant.cfg", format_topology(topology));
  write("sequences.cfg", format_sequences(sequences));
  write("scenario.cfg", format_scenario(cfg));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical routing control for discrete manufacturing plants"};
  app.require_subcommand(1);

  std::string scenario_path, topology_path, sequences_path, example_dir = "example", sweep_csv;
  std::vector<double> betas{10, 40, 70};
  Overrides run_o, sweep_o;

  auto* validate = app.add_subcommand("validate", "Check topology, sequence and scenario configs");
  validate->add_option("--scenario", scenario_path, "Scenario config");
  validate->add_option("--topology", topology_path, "Plant config");
  validate->add_option("--sequences", sequences_path, "Sequence config");

  auto* run = app.add_subcommand("run", "Run one closed-loop scenario");
  run->add_option("--scenario", scenario_path, "Scenario config (default: bundled test case)");
  run->add_option("--output", run_o.output, "CSV log path");
  add_overrides(run, run_o);

  auto* sweep = app.add_subcommand("sweep", "Run the scenario for several beta values");
  sweep->add_option("--scenario", scenario_path, "Scenario config (default: bundled test case)");
  sweep->add_option("--betas", betas, "Beta values")->delimiter(',');
  sweep->add_option("--csv", sweep_csv, "Summary CSV path");
  add_overrides(sweep, sweep_o);

  auto* example = app.add_subcommand("example", "Write the bundled test-case configs");
  example->add_option("--dir", example_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(scenario_path, topology_path, sequences_path);
    if (*run) return cmd_run(scenario_from(scenario_path, run_o));
    if (*sweep) return cmd_sweep(scenario_from(scenario_path, sweep_o), betas, sweep_csv);
    if (*example) return cmd_example(example_dir);
  } catch (const OracleFailure& e) {
    std::cerr << "oracle violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
