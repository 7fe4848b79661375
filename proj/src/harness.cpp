#include "plantroute/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "plantroute/config_text.hpp"
#include "plantroute/eulerian.hpp"
#include "plantroute/example_data.hpp"
#include "plantroute/greedy.hpp"

namespace plantroute {

namespace {

constexpr std::string_view kBuiltinPlant = "builtin:example-plant";
constexpr std::string_view kBuiltinSequences = "builtin:example-sequences";

std::string resolve_path(const std::string& value, const std::string& base_dir) {
  if (value.rfind("builtin:", 0) == 0 || base_dir.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_absolute()) return value;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text, const std::string& source,
                              const std::string& base_dir) {
  ScenarioConfig cfg;
  for (const auto& section : split_sections(text, source)) {
    if (section.name == "scenario") {
      for (const auto& line : section.lines) {
        auto [key, value] = text::key_value(line, source);
        const int ln = line.number;
        if (key == "topology") {
          cfg.topology_path = resolve_path(value, base_dir);
        } else if (key == "sequences") {
          cfg.sequences_path = resolve_path(value, base_dir);
        } else if (key == "controller") {
          if (value == "greedy") cfg.controller = ControllerKind::kGreedy;
          else if (value == "mpc") cfg.controller = ControllerKind::kMpc;
          else throw ConfigError(source, ln, "controller must be greedy or mpc");
        } else if (key == "steps") {
          cfg.steps = text::parse_int(value, source, ln);
        } else if (key == "warmup") {
          cfg.warmup = text::parse_int(value, source, ln);
        } else if (key == "arrivals") {
          auto tokens = text::split_ws(value);
          if (tokens.empty()) throw ConfigError(source, ln, "arrivals needs a value");
          if (tokens[0] == "always" && tokens.size() == 1) {
            cfg.arrivals.pattern = {true};
          } else if (tokens[0] == "never" && tokens.size() == 1) {
            cfg.arrivals.pattern.clear();
          } else if (tokens[0] == "pattern" && tokens.size() > 1) {
            cfg.arrivals.pattern.clear();
            for (std::size_t i = 1; i < tokens.size(); ++i)
              cfg.arrivals.pattern.push_back(text::parse_bool(tokens[i], source, ln));
          } else {
            throw ConfigError(source, ln, "arrivals must be always, never or pattern <0/1 ...>");
          }
        } else if (key == "new_part") {
          auto tokens = text::split_ws(value);
          if (tokens.size() != 2) throw ConfigError(source, ln, "new_part expects '<seq> <pos>'");
          cfg.mpc.new_part = {static_cast<int>(text::parse_int(tokens[0], source, ln)),
                              static_cast<int>(text::parse_int(tokens[1], source, ln))};
        } else if (key == "seed") {
          cfg.seed = static_cast<std::uint64_t>(text::parse_int(value, source, ln));
        } else if (key == "output") {
          cfg.output_path = value.empty() ? value : resolve_path(value, base_dir);
        } else if (key == "timing") {
          cfg.record_timing = text::parse_bool(value, source, ln);
        } else if (key == "allow_invalid_sequences") {
          cfg.allow_invalid_sequences = text::parse_bool(value, source, ln);
        } else {
          throw ConfigError(source, ln, "unknown key '" + key + "' in [scenario]");
        }
      }
    } else if (section.name == "mpc") {
      for (const auto& line : section.lines) {
        auto [key, value] = text::key_value(line, source);
        const int ln = line.number;
        if (key == "horizon") {
          cfg.mpc.horizon = static_cast<int>(text::parse_int(value, source, ln));
        } else if (key == "cost") {
          if (value == "remaining+commands") cfg.mpc.cost.kind = StageCost::Kind::kRemainingPlusCommands;
          else if (value == "age+commands") cfg.mpc.cost.kind = StageCost::Kind::kAgePlusCommands;
          else throw ConfigError(source, ln, "cost must be remaining+commands or age+commands");
        } else if (key == "beta") {
          cfg.mpc.cost.beta = text::parse_double(value, source, ln);
        } else if (key == "budget") {
          if (value == "none") cfg.mpc.search_budget.reset();
          else cfg.mpc.search_budget = text::parse_int(value, source, ln);
        } else if (key == "prune") {
          cfg.mpc.prune = text::parse_bool(value, source, ln);
        } else if (key == "predict_arrivals") {
          cfg.predict_arrivals = text::parse_bool(value, source, ln);
        } else if (key == "workers") {
          cfg.mpc.workers = static_cast<int>(text::parse_int(value, source, ln));
        } else {
          throw ConfigError(source, ln, "unknown key '" + key + "' in [mpc]");
        }
      }
    } else if (section.name == "initial") {
      for (const auto& line : section.lines) {
        auto tokens = text::split_ws(line.text);
        if (tokens.size() != 3) throw ConfigError(source, line.number, "expected '<node> <seq> <pos>'");
        cfg.initial.push_back({static_cast<NodeId>(text::parse_int(tokens[0], source, line.number)),
                               static_cast<int>(text::parse_int(tokens[1], source, line.number)),
                               static_cast<int>(text::parse_int(tokens[2], source, line.number))});
      }
    } else {
      throw ConfigError(source, section.header_line, "unknown section [" + section.name + "]");
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  auto base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_text_file(path), path, base);
}

std::string format_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "topology = " << cfg.topology_path << "\n"
     << "sequences = " << cfg.sequences_path << "\n"
     << "controller = " << (cfg.controller == ControllerKind::kMpc ? "mpc" : "greedy") << "\n"
     << "steps = " << cfg.steps << "\n"
     << "warmup = " << cfg.warmup << "\n";
  if (cfg.arrivals.pattern.empty()) {
    os << "arrivals = never\n";
  } else if (cfg.arrivals.pattern == std::vector<bool>{true}) {
    os << "arrivals = always\n";
  } else {
    os << "arrivals = pattern";
    for (bool b : cfg.arrivals.pattern) os << ' ' << (b ? 1 : 0);
    os << "\n";
  }
  os << "new_part = " << cfg.mpc.new_part.seq << " " << cfg.mpc.new_part.pos << "\n"
     << "seed = " << cfg.seed << "\n";
  if (!cfg.output_path.empty()) os << "output = " << cfg.output_path << "\n";
  os << "timing = " << (cfg.record_timing ? "on" : "off") << "\n";
  if (cfg.allow_invalid_sequences) os << "allow_invalid_sequences = on\n";
  os << "\n[mpc]\n"
     << "horizon = " << cfg.mpc.horizon << "\n"
     << "cost = "
     << (cfg.mpc.cost.kind == StageCost::Kind::kRemainingPlusCommands ? "remaining+commands"
                                                                      : "age+commands")
     << "\n"
     << "beta = " << format_double(cfg.mpc.cost.beta) << "\n"
     << "budget = " << (cfg.mpc.search_budget ? std::to_string(*cfg.mpc.search_budget) : "none") << "\n"
     << "prune = " << (cfg.mpc.prune ? "on" : "off") << "\n"
     << "predict_arrivals = " << (cfg.predict_arrivals ? "on" : "off") << "\n"
     << "workers = " << cfg.mpc.workers << "\n";
  if (!cfg.initial.empty()) {
    os << "\n[initial]\n";
    for (const auto& p : cfg.initial) os << p.node << " " << p.seq << " " << p.pos << "\n";
  }
  return os.str();
}

ScenarioConfig example_scenario(double beta) {
  ScenarioConfig cfg;
  cfg.controller = ControllerKind::kMpc;
  cfg.mpc.horizon = 50;
  cfg.mpc.cost = {StageCost::Kind::kRemainingPlusCommands, beta};
  cfg.arrivals.pattern = {true};
  cfg.steps = 300;
  cfg.warmup = 50;
  cfg.initial = {{10, 1, 1}};
  return cfg;
}

ScenarioResources load_resources(const ScenarioConfig& config) {
  PlantTopology topology = config.topology_path == kBuiltinPlant
                               ? build_example_plant()
                               : load_topology(config.topology_path);
  if (config.topology_path == kBuiltinPlant) {
    if (auto issues = validate_topology(topology); !issues.empty())
      throw ConfigError(config.topology_path, 0, issues.front().message);
  }
  SequenceSet sequences =
      config.sequences_path == kBuiltinSequences
          ? parse_sequences(example_sequences_config(), std::string(kBuiltinSequences))
          : load_sequences(config.sequences_path, topology, true);
  if (!config.allow_invalid_sequences) {
    auto issues = validate_sequence_set(sequences, topology);
    if (!issues.empty()) {
      std::string msg = "invalid sequences:";
      for (const auto& issue : issues) msg += "\n  " + issue;
      throw ConfigError(config.sequences_path, 0, msg);
    }
  }
  return {std::move(topology), std::move(sequences)};
}

void validate_scenario(const ScenarioConfig& config, const ScenarioResources& res) {
  if (config.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (config.warmup < 0) throw std::invalid_argument("warmup must be >= 0");
  if (config.controller == ControllerKind::kMpc) config.mpc.validate();
  const auto& np = config.mpc.new_part;
  SequenceEntry start = entry(res.sequences, np.seq, np.pos);
  if (start.node != res.topology.loading_node())
    throw std::invalid_argument("new parts must start on the loading node " +
                                std::to_string(res.topology.loading_node()) + ", sequence " +
                                std::to_string(np.seq) + " position " + std::to_string(np.pos) +
                                " is node " + std::to_string(start.node));
  std::set<NodeId> used;
  for (const auto& p : config.initial) {
    SequenceEntry e = entry(res.sequences, p.seq, p.pos);
    if (e.node != p.node)
      throw std::invalid_argument("initial part on node " + std::to_string(p.node) +
                                  " but sequence " + std::to_string(p.seq) + " position " +
                                  std::to_string(p.pos) + " is node " + std::to_string(e.node));
    if (!used.insert(p.node).second)
      throw std::invalid_argument("two initial parts on node " + std::to_string(p.node));
  }
}

std::vector<double> RunLog::throughput_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& r : steps) out.push_back(static_cast<double>(r.finished) / static_cast<double>(r.k + 1));
  return out;
}

std::vector<double> RunLog::rolling_commands(std::size_t window) const {
  std::vector<double> out;
  out.reserve(steps.size());
  long long sum = 0;
  window = std::max<std::size_t>(window, 1);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    sum += steps[i].commands;
    if (i >= window) sum -= steps[i - window].commands;
    out.push_back(static_cast<double>(sum) / static_cast<double>(std::min(i + 1, window)));
  }
  return out;
}

OracleFailure::OracleFailure(long long k, NodeId node, const std::string& detail)
    : std::runtime_error("step " + std::to_string(k) + ", node " + std::to_string(node) + ": " + detail),
      step_(k),
      node_(node) {}

RunLog run_simulation(const ScenarioConfig& config) {
  return run_simulation(config, load_resources(config));
}

RunLog run_simulation(const ScenarioConfig& config, const ScenarioResources& res) {
  validate_scenario(config, res);
  const auto& topology = res.topology;
  const auto& sequences = res.sequences;

  LagrangianState parts;
  EulerianState plant = EulerianState::empty(topology);
  JobTracker jobs;
  for (const auto& p : config.initial) {
    parts.parts.push_back({p.seq, p.pos, 0, parts.next_id++});
    plant.set(p.node, true);
    if (topology.is_machine(p.node)) {
      // Treat the entries already spent on the machine as elapsed job time.
      int before = 0;
      while (p.pos - before - 1 >= 1 &&
             sequences.node_unchecked(p.seq, p.pos - before - 1) == p.node)
        ++before;
      jobs[p.node] = -static_cast<long long>(before);
    }
  }

  FhocpConfig mpc = config.mpc;
  RunLog log;
  log.steps.reserve(static_cast<std::size_t>(config.steps));

  for (long long k = 0; k < config.steps; ++k) {
    const bool arrival = config.arrivals.at(k);
    StepRecord rec;
    rec.k = k;

    LagrangianState allocated = parts;
    if (config.controller == ControllerKind::kMpc) {
      if (config.predict_arrivals) {
        mpc.arrival_prediction.assign(static_cast<std::size_t>(mpc.horizon), false);
        for (int o = 0; o < mpc.horizon; ++o)
          mpc.arrival_prediction[static_cast<std::size_t>(o)] = config.arrivals.at(k + o);
      }
      auto t0 = std::chrono::steady_clock::now();
      MpcStep step = mpc_step(parts, arrival, k, jobs, mpc, topology, sequences);
      auto t1 = std::chrono::steady_clock::now();
      for (std::size_t i = 0; i < parts.parts.size(); ++i) {
        auto before = entry(sequences, parts.parts[i].seq, parts.parts[i].pos);
        auto after = entry(sequences, step.rewritten.parts[i].seq, step.rewritten.parts[i].pos);
        if (!(before == after))
          throw OracleFailure(k, before.node, "reallocation moved part " +
                                                  std::to_string(parts.parts[i].id) +
                                                  " off its node or goal");
      }
      allocated = std::move(step.rewritten);
      rec.evaluations = step.solution.evaluations;
      rec.predicted_cost = step.solution.predicted_cost;
      rec.incumbent_cost = step.solution.incumbent_cost;
      if (config.record_timing)
        rec.solver_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }

    ClosedLoopStep next = closed_loop_step(allocated, arrival, topology, sequences, mpc.new_part);
    const InputVector& input = next.input;

    auto violations = check_constraints(plant, input, jobs, k, topology);
    if (!violations.empty())
      throw OracleFailure(k, violations.front().node, describe(violations.front()) + " [inputs: " +
                                                          input.describe() + "]");
    EulerianState stepped;
    try {
      stepped = euler_step(plant, input, topology);
    } catch (const InfeasibleInput& e) {
      throw OracleFailure(k, e.node(), e.what());
    }
    jobs = update_job_tracker(jobs, plant, input, k, topology);

    auto occupancy = lagrangian_occupancy(next.next, sequences, topology);
    for (NodeId h = 1; h <= topology.node_count(); ++h) {
      if (occupancy[static_cast<std::size_t>(h - 1)] != stepped.occupancy[static_cast<std::size_t>(h - 1)])
        throw OracleFailure(k, h, "node occupancy disagrees with part positions");
    }
    if (stepped.finished != plant.finished + next.unloaded)
      throw OracleFailure(k, topology.unloading_node(), "finished-part count disagrees with unloads");

    plant = std::move(stepped);
    parts = std::move(next.next);
    rec.parts = parts.part_count();
    rec.finished = plant.finished;
    rec.commands = input.active_count();
    log.steps.push_back(rec);
  }
  return log;
}

Metrics compute_metrics(const RunLog& log, long long warmup) {
  const auto total = static_cast<long long>(log.steps.size());
  if (warmup < 0 || warmup >= total) throw std::invalid_argument("warmup must be in [0, T)");
  Metrics m;
  m.window = total - warmup;
  const long long finished_before = warmup == 0 ? 0 : log.steps[static_cast<std::size_t>(warmup - 1)].finished;
  long long commands = 0;
  long long parts = 0;
  double solver = 0.0;
  for (long long i = warmup; i < total; ++i) {
    const auto& r = log.steps[static_cast<std::size_t>(i)];
    commands += r.commands;
    parts += r.parts;
    solver += r.solver_ms;
    m.max_parts = std::max(m.max_parts, r.parts);
    m.max_solver_ms = std::max(m.max_solver_ms, r.solver_ms);
  }
  const auto w = static_cast<double>(m.window);
  m.finished = log.steps.back().finished;
  m.throughput = static_cast<double>(m.finished - finished_before) / w;
  m.mean_commands = static_cast<double>(commands) / w;
  m.mean_parts = static_cast<double>(parts) / w;
  m.mean_solver_ms = solver / w;
  return m;
}

std::optional<Lockout> detect_lockout(const RunLog& log, long long min_steps) {
  if (log.steps.empty()) return std::nullopt;
  const auto& last = log.steps.back();
  std::size_t first = log.steps.size() - 1;
  while (first > 0 && log.steps[first - 1].finished == last.finished &&
         log.steps[first - 1].parts == last.parts)
    --first;
  const auto stretch = static_cast<long long>(log.steps.size() - first);
  if (stretch < min_steps) return std::nullopt;
  return Lockout{log.steps[first].k, last.parts, last.finished};
}

std::vector<SweepRow> beta_sweep(const ScenarioConfig& config, std::span<const double> betas) {
  if (config.controller != ControllerKind::kMpc)
    throw std::invalid_argument("beta sweep requires the mpc controller");
  ScenarioResources res = load_resources(config);
  std::vector<SweepRow> rows;
  for (double beta : betas) {
    ScenarioConfig run = config;
    run.mpc.cost.beta = beta;
    RunLog log = run_simulation(run, res);
    SweepRow row{beta, compute_metrics(log, config.warmup),
                 detect_lockout(log, std::max<long long>(1, config.steps - config.warmup))};
    rows.push_back(row);
  }
  return rows;
}

void write_csv(const RunLog& log, std::ostream& out) {
  out << "k,n_parts,n_finished,n_commands,solver_evals,solver_ms\n";
  char ms[32];
  for (const auto& r : log.steps) {
    std::snprintf(ms, sizeof ms, "%.3f", r.solver_ms);
    out << r.k << ',' << r.parts << ',' << r.finished << ',' << r.commands << ','
        << r.evaluations << ',' << ms << '\n';
  }
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "beta,throughput,mean_commands,mean_parts,max_parts,mean_solver_ms,max_solver_ms,"
         "lockout,lockout_parts\n";
  char buf[256];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%g,%.4f,%.4f,%.3f,%d,%.3f,%.3f,%d,%d\n", row.beta,
                  row.metrics.throughput, row.metrics.mean_commands, row.metrics.mean_parts,
                  row.metrics.max_parts, row.metrics.mean_solver_ms, row.metrics.max_solver_ms,
                  row.lockout ? 1 : 0, row.lockout ? row.lockout->parts : 0);
    out << buf;
  }
}

std::vector<InitialPart> sample_initial_parts(const SequenceSet& sequences, int count,
                                              std::mt19937_64& rng) {
  std::vector<InitialPart> out;
  std::set<NodeId> used;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count && attempts < count * 200) {
    ++attempts;
    std::uniform_int_distribution<int> pick_seq(1, sequences.count());
    int s = pick_seq(rng);
    std::uniform_int_distribution<int> pick_pos(1, sequences.length_unchecked(s));
    int p = pick_pos(rng);
    NodeId h = sequences.node_unchecked(s, p);
    if (!used.insert(h).second) continue;
    out.push_back({h, s, p});
  }
  return out;
}

}  // namespace plantroute
