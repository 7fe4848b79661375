#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plantroute/allocator.hpp"
#include "plantroute/sequences.hpp"
#include "plantroute/topology.hpp"

namespace plantroute {

enum class ControllerKind { kGreedy, kMpc };

/// a(k) as a repeating 0/1 pattern. Empty pattern = never.
struct ArrivalPolicy {
  std::vector<bool> pattern{true};

  bool at(long long k) const {
    if (pattern.empty() || k < 0) return false;
    return pattern[static_cast<std::size_t>(k % static_cast<long long>(pattern.size()))];
  }
};

struct InitialPart {
  NodeId node = 0;
  int seq = 1;
  int pos = 1;
};

struct ScenarioConfig {
  /// File paths, or "builtin:example-plant" / "builtin:example-sequences".
  std::string topology_path = "builtin:example-plant";
  std::string sequences_path = "builtin:example-sequences";
  ControllerKind controller = ControllerKind::kMpc;
  FhocpConfig mpc;
  /// Feed the real arrival pattern to the predictions instead of a(o|k)=0.
  bool predict_arrivals = false;
  ArrivalPolicy arrivals;
  long long steps = 300;
  long long warmup = 50;
  std::vector<InitialPart> initial;
  /// Only used to draw random initial placements.
  std::uint64_t seed = 0;
  std::string output_path;
  /// When off, solver_ms is logged as 0 so that logs are reproducible.
  bool record_timing = true;
  bool allow_invalid_sequences = false;
};

ScenarioConfig parse_scenario(std::string_view text, const std::string& source,
                              const std::string& base_dir = "");
ScenarioConfig load_scenario(const std::string& path);
std::string format_scenario(const ScenarioConfig& config);

/// Bundled test-case scenario: a(k) = 1, one part on node 10, N = 50.
ScenarioConfig example_scenario(double beta = 40.0);

struct ScenarioResources {
  PlantTopology topology;
  SequenceSet sequences;
};

/// Loads (and validates) the topology and sequence set a scenario names.
ScenarioResources load_resources(const ScenarioConfig& config);

/// Checks T, warmup, initial placements and the new-part spec against the
/// resources. Throws std::invalid_argument.
void validate_scenario(const ScenarioConfig& config, const ScenarioResources& resources);

/// Row k: commands applied at step k and the plant counts once they took
/// effect (time k+1).
struct StepRecord {
  long long k = 0;
  int parts = 0;
  long long finished = 0;
  int commands = 0;
  long long evaluations = 0;
  double solver_ms = 0.0;
  // Not written to CSV.
  double predicted_cost = 0.0;
  double incumbent_cost = 0.0;
};

struct RunLog {
  std::vector<StepRecord> steps;

  /// N_f(k+1) / (k+1) per row.
  std::vector<double> throughput_series() const;
  /// Trailing mean of commands per step over `window` rows.
  std::vector<double> rolling_commands(std::size_t window) const;
};

/// Oracle rejection or Eulerian/Lagrangian mismatch during a run.
class OracleFailure : public std::runtime_error {
 public:
  OracleFailure(long long k, NodeId node, const std::string& detail);
  long long step() const { return step_; }
  NodeId node() const { return node_; }

 private:
  long long step_;
  NodeId node_;
};

/// Closed-loop simulation under the configured controller. Every applied
/// input is checked against the constraint oracle and the node occupancy is
/// stepped in parallel and reconciled with the part states.
RunLog run_simulation(const ScenarioConfig& config);
RunLog run_simulation(const ScenarioConfig& config, const ScenarioResources& resources);

struct Metrics {
  long long window = 0;
  double throughput = 0.0;     // finished parts per step after warmup
  double mean_commands = 0.0;  // per step after warmup
  double mean_parts = 0.0;
  int max_parts = 0;
  double mean_solver_ms = 0.0;
  double max_solver_ms = 0.0;
  long long finished = 0;      // at the end of the run
};

/// Steady-state summary over rows [warmup, T). Throws if warmup >= T.
Metrics compute_metrics(const RunLog& log, long long warmup);

struct Lockout {
  long long since = 0;  // first row of the final stalled stretch
  int parts = 0;
  long long finished = 0;
};

/// Final stretch of at least `min_steps` rows with no finished part and a
/// constant part count.
std::optional<Lockout> detect_lockout(const RunLog& log, long long min_steps);

struct SweepRow {
  double beta = 0.0;
  Metrics metrics;
  std::optional<Lockout> lockout;
};

std::vector<SweepRow> beta_sweep(const ScenarioConfig& config, std::span<const double> betas);

void write_csv(const RunLog& log, std::ostream& out);
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

/// Up to `count` parts on distinct nodes at uniformly drawn sequence
/// positions. Machine placements are accepted as-is; the run derives their
/// job start from the position inside the machine run.
std::vector<InitialPart> sample_initial_parts(const SequenceSet& sequences, int count,
                                              std::mt19937_64& rng);

}  // namespace plantroute
