#include "plantroute/eulerian.hpp"

#include <algorithm>
#include <numeric>

namespace plantroute {

EulerianState EulerianState::empty(const PlantTopology& topology) {
  EulerianState state;
  state.occupancy.assign(static_cast<std::size_t>(topology.node_count()), 0);
  return state;
}

int EulerianState::part_count() const {
  return std::accumulate(occupancy.begin(), occupancy.end(), 0);
}

InputVector::InputVector(const PlantTopology& topology)
    : keys_(topology.transitions().begin(), topology.transitions().end()),
      values_(keys_.size(), 0) {}

bool InputVector::get(const PlantTopology& topology, NodeId from, NodeId to) const {
  auto idx = topology.transition_index(from, to);
  return idx && values_[*idx] != 0;
}

void InputVector::set(const PlantTopology& topology, NodeId from, NodeId to,
                      bool value) {
  auto idx = topology.transition_index(from, to);
  if (!idx)
    throw std::domain_error("no transition " + std::to_string(from) + "->" + std::to_string(to));
  values_[*idx] = value ? 1 : 0;
}

int InputVector::active_count() const {
  return static_cast<int>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

std::string InputVector::describe() const {
  std::string out;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!values_[i]) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(keys_[i].from) + "->" + std::to_string(keys_[i].to);
  }
  return out.empty() ? "-" : out;
}

InfeasibleInput::InfeasibleInput(NodeId node, int value)
    : std::runtime_error("infeasible input: occupancy of node " + std::to_string(node) +
                         " would become " + std::to_string(value)),
      node_(node) {}

namespace {

void require_matching_keys(const InputVector& input, const PlantTopology& topology) {
  auto t = topology.transitions();
  if (!std::equal(input.keys().begin(), input.keys().end(), t.begin(), t.end()))
    throw std::invalid_argument("input vector keys do not match topology transitions");
}

// Per-node command sums for one input vector.
struct Flow {
  std::vector<int> out;  // sum_j u_{h,j}
  std::vector<int> in;   // sum_j u_{j,h}
};

Flow tally(const InputVector& input, int node_count) {
  Flow f{std::vector<int>(static_cast<std::size_t>(node_count + 1), 0),
         std::vector<int>(static_cast<std::size_t>(node_count + 1), 0)};
  for (std::size_t i = 0; i < input.keys().size(); ++i) {
    if (!input.value_at(i)) continue;
    f.out[static_cast<std::size_t>(input.keys()[i].from)] += 1;
    f.in[static_cast<std::size_t>(input.keys()[i].to)] += 1;
  }
  return f;
}

}  // namespace

EulerianState euler_step(const EulerianState& state, const InputVector& input,
                         const PlantTopology& topology) {
  require_matching_keys(input, topology);
  const int n = topology.node_count();
  Flow f = tally(input, n);
  EulerianState next = state;
  for (NodeId h = 1; h <= n; ++h) {
    int z = static_cast<int>(state.occupancy[static_cast<std::size_t>(h - 1)]) + f.in[h] - f.out[h];
    if (z != 0 && z != 1) throw InfeasibleInput(h, z);
    next.occupancy[static_cast<std::size_t>(h - 1)] = static_cast<std::uint8_t>(z);
  }
  if (input.get(topology, topology.unloading_node(), kOutside)) next.finished += 1;
  return next;
}

const char* violation_label(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kMultipleOutgoing: return "multiple-outgoing";
    case Violation::Kind::kMultipleIncoming: return "multiple-incoming";
    case Violation::Kind::kMoveFromEmpty: return "move-from-empty";
    case Violation::Kind::kMoveIntoHeld: return "move-into-held";
    case Violation::Kind::kJobUnfinished: return "job-unfinished";
  }
  return "unknown";
}

std::string describe(const Violation& violation) {
  std::string out = std::string(violation_label(violation.kind)) + " at node " +
                    std::to_string(violation.node);
  if (!violation.detail.empty()) out += ": " + violation.detail;
  return out;
}

std::vector<Violation> check_constraints(const EulerianState& state,
                                         const InputVector& input,
                                         const JobTracker& jobs, long long k,
                                         const PlantTopology& topology) {
  require_matching_keys(input, topology);
  using Kind = Violation::Kind;
  const int n = topology.node_count();
  Flow f = tally(input, n);
  std::vector<Violation> found;

  for (NodeId h = 1; h <= n; ++h) {
    const bool z = state.occupied(h);
    if (f.out[h] > 1)
      found.push_back({Kind::kMultipleOutgoing, h, std::to_string(f.out[h]) + " outgoing commands"});
    if (f.in[h] > 1)
      found.push_back({Kind::kMultipleIncoming, h, std::to_string(f.in[h]) + " incoming commands"});
    if (!z && f.out[h] > 0)
      found.push_back({Kind::kMoveFromEmpty, h, "node is empty"});
    if (z && f.out[h] == 0 && f.in[h] > 0)
      found.push_back({Kind::kMoveIntoHeld, h, "node holds its part"});
  }

  for (auto [m, duration] : topology.machines()) {
    if (!topology.contains_node(m) || !state.occupied(m) || f.out[m] == 0) continue;
    auto job = jobs.find(m);
    if (job == jobs.end()) {
      found.push_back({Kind::kJobUnfinished, m, "occupied machine has no job record"});
    } else if (job_blocks_departure(k, job->second, duration)) {
      found.push_back({Kind::kJobUnfinished, m,
                       "job started at " + std::to_string(job->second) + " not complete at step " +
                           std::to_string(k)});
    }
  }
  return found;
}

JobTracker update_job_tracker(const JobTracker& jobs, const EulerianState& state,
                              const InputVector& input, long long k,
                              const PlantTopology& topology) {
  (void)state;
  require_matching_keys(input, topology);
  Flow f = tally(input, topology.node_count());
  JobTracker next = jobs;
  for (const auto& entry : topology.machines()) {
    NodeId m = entry.first;
    if (!topology.contains_node(m)) continue;
    if (f.in[m] > 0)
      next[m] = k + 1;
    else if (f.out[m] > 0)
      next.erase(m);
  }
  return next;
}

}  // namespace plantroute
