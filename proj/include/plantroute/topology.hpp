#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plantroute {

/// Plant nodes are numbered 1..N. Zero is the outside of the plant and only
/// ever appears as an endpoint of the load/unload transitions.
using NodeId = int;
inline constexpr NodeId kOutside = 0;

struct Transition {
  NodeId from = 0;
  NodeId to = 0;

  friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Node graph of a plant: direct transitions, machines with job durations and
/// the loading/unloading interface. Immutable once built. The constructor
/// only normalises (sorts, rejects duplicates); use validate_topology() to
/// check structural invariants.
class PlantTopology {
 public:
  PlantTopology(int node_count, std::vector<Transition> transitions,
                std::map<NodeId, int> machines, NodeId loading_node,
                NodeId unloading_node);

  int node_count() const { return node_count_; }
  /// Sorted; includes (0, h_l) and (h_u, 0).
  std::span<const Transition> transitions() const { return transitions_; }
  std::size_t input_count() const { return transitions_.size(); }

  std::optional<std::size_t> transition_index(NodeId from, NodeId to) const;
  bool has_transition(NodeId from, NodeId to) const {
    return transition_index(from, to).has_value();
  }

  const std::map<NodeId, int>& machines() const { return machines_; }
  bool is_machine(NodeId h) const {
    return h > 0 && h <= node_count_ && machine_duration_[h] > 0;
  }
  /// Job duration L_m; throws std::domain_error when `m` is not a machine.
  int job_duration(NodeId m) const;

  NodeId loading_node() const { return loading_; }
  NodeId unloading_node() const { return unloading_; }

  bool contains_node(NodeId h) const { return h >= 1 && h <= node_count_; }

  friend bool operator==(const PlantTopology& a, const PlantTopology& b) {
    return a.node_count_ == b.node_count_ && a.transitions_ == b.transitions_ &&
           a.machines_ == b.machines_ && a.loading_ == b.loading_ &&
           a.unloading_ == b.unloading_;
  }

 private:
  int node_count_;
  std::vector<Transition> transitions_;
  std::map<NodeId, int> machines_;
  NodeId loading_;
  NodeId unloading_;
  // (node_count_+1)^2 lookup, -1 where no transition exists.
  std::vector<int> index_table_;
  std::vector<int> machine_duration_;  // 0 for non-machines
};

/// O_h: nodes directly reachable from h, possibly including 0. Sorted.
std::vector<NodeId> outgoing_set(const PlantTopology& topology, NodeId h);
/// I_h: nodes that reach h directly, possibly including 0. Sorted.
std::vector<NodeId> incoming_set(const PlantTopology& topology, NodeId h);

struct TopologyIssue {
  enum class Kind {
    kNodeCount,
    kEndpointOutOfRange,
    kSelfTransition,
    kStrayOutsideTransition,
    kMissingLoadTransition,
    kMissingUnloadTransition,
    kIoNodeOutOfRange,
    kMachineOutOfRange,
    kBadJobDuration,
    kUnreachableUnloading,
  };
  Kind kind;
  std::string message;
};

std::vector<TopologyIssue> validate_topology(const PlantTopology& topology);

/// Reads the [nodes]/[edges]/[machines]/[io] text format. The load and
/// unload transitions are implied by the [io] line. Does not validate.
PlantTopology parse_topology(std::string_view text, const std::string& source);
/// Reads and validates; issues become a ConfigError.
PlantTopology load_topology(const std::string& path);
std::string format_topology(const PlantTopology& topology);

/// The 12-node test plant: machines 11 and 12 (three steps each), node 10
/// loads and unloads. Parsed from the bundled config text.
PlantTopology build_example_plant();

}  // namespace plantroute
