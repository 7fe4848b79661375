#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "plantroute/topology.hpp"

namespace plantroute {

/// Node-occupancy view of the plant: z_h for h = 1..N plus the count of
/// finished parts.
struct EulerianState {
  std::vector<std::uint8_t> occupancy;  // index h-1 holds z_h
  long long finished = 0;

  static EulerianState empty(const PlantTopology& topology);

  bool occupied(NodeId h) const { return occupancy.at(static_cast<std::size_t>(h - 1)) != 0; }
  void set(NodeId h, bool value) { occupancy.at(static_cast<std::size_t>(h - 1)) = value ? 1 : 0; }
  int part_count() const;

  friend bool operator==(const EulerianState&, const EulerianState&) = default;
};

/// One boolean command per topology transition, keyed in topology order.
class InputVector {
 public:
  explicit InputVector(const PlantTopology& topology);

  bool get(const PlantTopology& topology, NodeId from, NodeId to) const;
  /// Throws std::domain_error if (from, to) is not a transition.
  void set(const PlantTopology& topology, NodeId from, NodeId to, bool value = true);

  const std::vector<Transition>& keys() const { return keys_; }
  const std::vector<std::uint8_t>& values() const { return values_; }
  bool value_at(std::size_t index) const { return values_[index] != 0; }
  void set_at(std::size_t index, bool value) { values_[index] = value ? 1 : 0; }

  int active_count() const;
  /// "h->j" for each active command, in key order.
  std::string describe() const;

  friend bool operator==(const InputVector&, const InputVector&) = default;

 private:
  std::vector<Transition> keys_;
  std::vector<std::uint8_t> values_;
};

/// Machine -> job start step k_m (the step at which the part is first present
/// on the machine). Entries exist only while the machine is occupied.
using JobTracker = std::map<NodeId, long long>;

/// Raised by euler_step when an input would leave some z_h outside {0,1}.
class InfeasibleInput : public std::runtime_error {
 public:
  InfeasibleInput(NodeId node, int value);
  NodeId node() const { return node_; }

 private:
  NodeId node_;
};

/// Mass-balance update z(k+1) = z(k) + v(k), N_f(k+1) = N_f(k) + u_{h_u,0}.
EulerianState euler_step(const EulerianState& state, const InputVector& input,
                         const PlantTopology& topology);

struct Violation {
  enum class Kind {
    kMultipleOutgoing,
    kMultipleIncoming,
    kMoveFromEmpty,
    kMoveIntoHeld,
    kJobUnfinished,
  };
  Kind kind;
  NodeId node;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

const char* violation_label(Violation::Kind kind);
std::string describe(const Violation& violation);

/// Job timing rule: a part first present on machine m at step k_m may not be
/// commanded out at any k <= k_m + L_m, so it occupies m for at least
/// L_m + 2 consecutive steps and the earliest departure command is issued at
/// k_m + L_m + 1.
inline bool job_blocks_departure(long long k, long long job_start, int duration) {
  return k <= job_start + duration;
}
/// Minimum number of consecutive steps (and sequence entries) a part spends
/// on a machine with job duration `duration`.
inline int min_machine_dwell(int duration) { return duration + 2; }

/// Returns every violated operational or job-timing constraint. Empty means
/// the input is feasible at step k.
std::vector<Violation> check_constraints(const EulerianState& state,
                                         const InputVector& input,
                                         const JobTracker& jobs, long long k,
                                         const PlantTopology& topology);

/// Records arrivals (k_m = k+1) and clears departures. An arrival in the same
/// step as a departure replaces the entry.
JobTracker update_job_tracker(const JobTracker& jobs, const EulerianState& state,
                              const InputVector& input, long long k,
                              const PlantTopology& topology);

}  // namespace plantroute
