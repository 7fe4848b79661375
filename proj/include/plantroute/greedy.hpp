#pragma once

#include <span>
#include <vector>

#include "plantroute/eulerian.hpp"
#include "plantroute/part_state.hpp"
#include "plantroute/sequences.hpp"
#include "plantroute/topology.hpp"

namespace plantroute {

/// Where a freshly loaded part starts: sequence index and position.
struct NewPartSpec {
  int seq = 1;
  int pos = 1;
};

// Greedy path following, step by step. A predicted position of length+1
// means the part leaves the plant through the unloading node.

/// Advances every part by one position and one elapsed step.
std::vector<PartState> forward_propagate(const LagrangianState& state);

/// Resolves target conflicts until every node is targeted by at most one
/// part. Priority: the part already sitting on the node, then fewest
/// remaining steps, then longest time in the plant, then smallest id.
/// Losers are put back to their current position.
std::vector<PartState> resolve_conflicts(std::span<const PartState> predicted,
                                         const LagrangianState& state,
                                         const SequenceSet& sequences,
                                         const PlantTopology& topology);

/// Translates conflict-free predictions into plant commands. Loading needs
/// a = true and no part predicted on the loading node; a part unloading from
/// a node that is also the loading node keeps that node busy for the step.
InputVector emit_inputs(std::span<const PartState> corrected,
                        const LagrangianState& state, bool arrival,
                        const PlantTopology& topology, const SequenceSet& sequences);

/// kappa(X, a): forward_propagate -> resolve_conflicts -> emit_inputs.
InputVector greedy_policy(const LagrangianState& state, bool arrival,
                          const PlantTopology& topology, const SequenceSet& sequences);

struct ClosedLoopStep {
  LagrangianState next;
  InputVector input;
  int loaded = 0;
  int unloaded = 0;
};

/// One step of the closed-loop Lagrangian model: apply the greedy policy,
/// drop parts that left, append a newly loaded part.
ClosedLoopStep closed_loop_step(const LagrangianState& state, bool arrival,
                                const PlantTopology& topology,
                                const SequenceSet& sequences, NewPartSpec new_part);

/// Node currently occupied by `part`.
NodeId current_node(const SequenceSet& sequences, const PartState& part);

/// Occupancy vector (index h-1) induced by the parts; throws
/// std::logic_error if two parts share a node.
std::vector<std::uint8_t> lagrangian_occupancy(const LagrangianState& state,
                                               const SequenceSet& sequences,
                                               const PlantTopology& topology);

/// Allocation-free greedy stepping used for horizon rollouts. Holds scratch
/// buffers; one instance per thread.
class GreedyEngine {
 public:
  GreedyEngine(const PlantTopology& topology, const SequenceSet& sequences);

  struct Outcome {
    int commands = 0;  // active entries of the emitted input vector
    int unloaded = 0;
    bool loaded = false;
  };

  /// Computes predicted positions into `predicted_pos` (pos, pos+1 or
  /// length+1) without touching `parts`.
  void predict(std::span<const PartState> parts, std::vector<int>& predicted_pos);

  /// Advances `parts` in place by one closed-loop step; exited parts are
  /// removed (order preserved), a loaded part is appended.
  Outcome step(std::vector<PartState>& parts, bool arrival, NewPartSpec new_part,
               std::int64_t& next_id);

 private:
  const PlantTopology& topology_;
  const SequenceSet& sequences_;
  std::vector<int> predicted_;
  std::vector<NodeId> current_;
  std::vector<NodeId> target_;
  std::vector<int> remaining_;
  std::vector<int> demand_;  // parts targeting each node
};

}  // namespace plantroute
