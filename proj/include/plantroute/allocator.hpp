#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plantroute/eulerian.hpp"
#include "plantroute/greedy.hpp"
#include "plantroute/part_state.hpp"
#include "plantroute/sequences.hpp"
#include "plantroute/topology.hpp"

namespace plantroute {

/// A (sequence, position) pair the allocator may assign to a part.
struct Allocation {
  int seq = 1;
  int pos = 1;

  friend auto operator<=>(const Allocation&, const Allocation&) = default;
};

/// Allocations consistent with a part's node, goal and, on a machine, the
/// node history back to the start of its job. Sorted; always contains the
/// part's current allocation.
struct CompatibilityRecord {
  std::int64_t part_id = 0;
  Allocation incumbent;
  std::vector<Allocation> candidates;
};

CompatibilityRecord compatibility_set(const PartState& part, const SequenceSet& sequences,
                                      const JobTracker& jobs, long long k,
                                      const PlantTopology& topology);

/// Stage cost selector. kRemainingPlusCommands is
///   l = sum_i r_i + beta * (active commands in U);
/// kAgePlusCommands replaces the remaining-steps sum with the sum of the
/// parts' elapsed times.
struct StageCost {
  enum class Kind { kRemainingPlusCommands, kAgePlusCommands };
  Kind kind = Kind::kRemainingPlusCommands;
  double beta = 0.0;
};

double remaining_stage_cost(const LagrangianState& predicted, const InputVector& input,
                       double beta, const SequenceSet& sequences);

struct FhocpConfig {
  int horizon = 50;
  /// a(o|k) for o = 0..horizon-1; empty means "no arrivals predicted".
  std::vector<bool> arrival_prediction;
  StageCost cost;
  /// Cap on scored joint assignments (incumbent included); unset = exhaustive.
  std::optional<long long> search_budget;
  /// Collapse candidates whose rollouts are provably identical.
  bool prune = false;
  /// Threads for candidate scoring; 0 picks PLANTROUTE_WORKERS or the
  /// hardware concurrency.
  int workers = 0;
  NewPartSpec new_part;

  /// Throws std::invalid_argument on horizon < 1, beta < 0, a(o|k) length
  /// mismatch or a non-positive budget.
  void validate() const;
};

/// Horizon totals; value = weighted sum per the cost selector. The sums run
/// over the horizon+1 predicted states and the horizon simulated inputs.
struct HorizonCost {
  long long remaining_sum = 0;
  long long age_sum = 0;
  long long commands = 0;
  double value = 0.0;
};

HorizonCost simulate_horizon(const LagrangianState& initial, const FhocpConfig& config,
                             const PlantTopology& topology, const SequenceSet& sequences);

struct FhocpSolution {
  std::vector<Allocation> assignment;  // one per part, in state order
  double predicted_cost = 0.0;
  double incumbent_cost = 0.0;
  long long evaluations = 0;
  long long joint_assignments = 0;  // size of the (possibly pruned) search space
  bool budget_exhausted = false;
};

/// Exhaustive search over the Cartesian product of candidate lists. The
/// incumbent is scored first; ties go to the incumbent, then to the
/// lexicographically smallest assignment.
FhocpSolution solve_fhocp(const LagrangianState& state,
                          std::span<const CompatibilityRecord> records,
                          const FhocpConfig& config, const PlantTopology& topology,
                          const SequenceSet& sequences);

/// Candidate lists after optional pruning; exposed for testing.
std::vector<std::vector<Allocation>> search_candidates(
    std::span<const CompatibilityRecord> records, const FhocpConfig& config,
    const SequenceSet& sequences);

LagrangianState apply_assignment(const LagrangianState& state,
                                 std::span<const Allocation> assignment);

struct MpcStep {
  InputVector input;
  LagrangianState rewritten;
  FhocpSolution solution;
};

/// Model predictive path allocation for step k: compatibility sets, FHOCP
/// solve, reallocation, then the greedy policy with the real arrival flag.
MpcStep mpc_step(const LagrangianState& state, bool arrival, long long k,
                 const JobTracker& jobs, const FhocpConfig& config,
                 const PlantTopology& topology, const SequenceSet& sequences);

/// Worker count honoring PLANTROUTE_WORKERS when `requested` is 0.
int resolve_worker_count(int requested);

}  // namespace plantroute
