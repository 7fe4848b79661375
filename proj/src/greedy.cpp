#include "plantroute/greedy.hpp"

#include <stdexcept>
#include <string>

namespace plantroute {

namespace {

struct Scratch {
  std::vector<NodeId>& current;
  std::vector<NodeId>& target;
  std::vector<int>& remaining;
  std::vector<int>& demand;
};

NodeId target_of(const SequenceSet& sequences, const PartState& part, int predicted_pos) {
  if (predicted_pos > sequences.length_unchecked(part.seq)) return kOutside;
  return sequences.node_unchecked(part.seq, predicted_pos);
}

// True when part a beats part b for a contested node (neither is held there).
bool outranks(const PartState& a, int ra, const PartState& b, int rb) {
  if (ra != rb) return ra < rb;
  if (a.elapsed != b.elapsed) return a.elapsed > b.elapsed;
  return a.id < b.id;
}

// Conflict resolution to fixpoint. `predicted` holds the initial one-step
// predictions on entry and the corrected ones on exit.
void resolve_in_place(std::span<const PartState> parts, const SequenceSet& sequences,
                      int node_count, std::vector<int>& predicted, Scratch s) {
  const std::size_t n = parts.size();
  s.current.resize(n);
  s.target.resize(n);
  s.remaining.resize(n);
  s.demand.assign(static_cast<std::size_t>(node_count + 1), 0);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& part = parts[i];
    s.current[i] = sequences.node_unchecked(part.seq, part.pos);
    s.remaining[i] = sequences.length_unchecked(part.seq) - part.pos;
    s.target[i] = target_of(sequences, part, predicted[i]);
    if (s.target[i] != kOutside) s.demand[static_cast<std::size_t>(s.target[i])] += 1;
  }

  // Every sweep that finds a conflict permanently holds at least one part.
  const std::size_t max_sweeps = n + 1;
  for (std::size_t sweep = 0;; ++sweep) {
    if (sweep > max_sweeps)
      throw std::logic_error("conflict resolution did not terminate");
    bool conflict = false;
    for (NodeId h = 1; h <= node_count; ++h) {
      if (s.demand[static_cast<std::size_t>(h)] < 2) continue;
      conflict = true;

      std::size_t winner = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (s.target[i] != h) continue;
        if (s.current[i] == h) {  // held on h
          winner = i;
          break;
        }
        if (winner == n || outranks(parts[i], s.remaining[i], parts[winner], s.remaining[winner]))
          winner = i;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (i == winner || s.target[i] != h) continue;
        predicted[i] = parts[i].pos;
        s.demand[static_cast<std::size_t>(h)] -= 1;
        s.target[i] = s.current[i];
        s.demand[static_cast<std::size_t>(s.current[i])] += 1;
      }
    }
    if (!conflict) break;
  }
}

void require_valid_parts(std::span<const PartState> parts, const SequenceSet& sequences) {
  for (const auto& part : parts) {
    if (!sequences.contains(part.seq) || part.pos < 1 ||
        part.pos > sequences.length_unchecked(part.seq))
      throw std::domain_error("part " + std::to_string(part.id) + " references (" +
                              std::to_string(part.seq) + "," + std::to_string(part.pos) +
                              ") outside the sequence set");
  }
}

}  // namespace

NodeId current_node(const SequenceSet& sequences, const PartState& part) {
  return entry(sequences, part.seq, part.pos).node;
}

std::vector<PartState> forward_propagate(const LagrangianState& state) {
  std::vector<PartState> out = state.parts;
  for (auto& part : out) {
    part.pos += 1;
    part.elapsed += 1;
  }
  return out;
}

std::vector<PartState> resolve_conflicts(std::span<const PartState> predicted,
                                         const LagrangianState& state,
                                         const SequenceSet& sequences,
                                         const PlantTopology& topology) {
  if (predicted.size() != state.parts.size())
    throw std::invalid_argument("prediction count does not match part count");
  require_valid_parts(state.parts, sequences);
  std::vector<int> pos(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& cur = state.parts[i];
    if (predicted[i].seq != cur.seq || predicted[i].pos < cur.pos || predicted[i].pos > cur.pos + 1)
      throw std::invalid_argument("prediction for part " + std::to_string(cur.id) +
                                  " is not a one-step advance of its state");
    pos[i] = predicted[i].pos;
  }
  std::vector<NodeId> current, target;
  std::vector<int> remaining, demand;
  resolve_in_place(state.parts, sequences, topology.node_count(), pos,
                   {current, target, remaining, demand});
  std::vector<PartState> out(predicted.begin(), predicted.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].pos = pos[i];
  return out;
}

InputVector emit_inputs(std::span<const PartState> corrected,
                        const LagrangianState& state, bool arrival,
                        const PlantTopology& topology, const SequenceSet& sequences) {
  if (corrected.size() != state.parts.size())
    throw std::invalid_argument("prediction count does not match part count");
  require_valid_parts(state.parts, sequences);
  InputVector input(topology);
  const NodeId load = topology.loading_node();
  bool load_blocked = false;
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    const auto& part = state.parts[i];
    NodeId from = sequences.node_unchecked(part.seq, part.pos);
    NodeId to = target_of(sequences, part, corrected[i].pos);
    if (to == load || (to == kOutside && from == load)) load_blocked = true;
    if (to == from) continue;
    input.set(topology, from, to);
  }
  if (arrival && !load_blocked) input.set(topology, kOutside, load);
  return input;
}

InputVector greedy_policy(const LagrangianState& state, bool arrival,
                          const PlantTopology& topology, const SequenceSet& sequences) {
  auto corrected = resolve_conflicts(forward_propagate(state), state, sequences, topology);
  return emit_inputs(corrected, state, arrival, topology, sequences);
}

ClosedLoopStep closed_loop_step(const LagrangianState& state, bool arrival,
                                const PlantTopology& topology,
                                const SequenceSet& sequences, NewPartSpec new_part) {
  auto corrected = resolve_conflicts(forward_propagate(state), state, sequences, topology);
  ClosedLoopStep out{LagrangianState{}, emit_inputs(corrected, state, arrival, topology, sequences)};
  out.next.next_id = state.next_id;
  for (const auto& part : corrected) {
    if (part.pos > sequences.length_unchecked(part.seq)) {
      out.unloaded += 1;
      continue;
    }
    out.next.parts.push_back(part);
  }
  if (out.input.get(topology, kOutside, topology.loading_node())) {
    out.next.parts.push_back({new_part.seq, new_part.pos, 0, out.next.next_id++});
    out.loaded = 1;
  }
  return out;
}

std::vector<std::uint8_t> lagrangian_occupancy(const LagrangianState& state,
                                               const SequenceSet& sequences,
                                               const PlantTopology& topology) {
  std::vector<std::uint8_t> z(static_cast<std::size_t>(topology.node_count()), 0);
  for (const auto& part : state.parts) {
    NodeId h = current_node(sequences, part);
    auto& slot = z.at(static_cast<std::size_t>(h - 1));
    if (slot) throw std::logic_error("two parts on node " + std::to_string(h));
    slot = 1;
  }
  return z;
}

GreedyEngine::GreedyEngine(const PlantTopology& topology, const SequenceSet& sequences)
    : topology_(topology), sequences_(sequences) {}

void GreedyEngine::predict(std::span<const PartState> parts, std::vector<int>& predicted_pos) {
  predicted_pos.resize(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) predicted_pos[i] = parts[i].pos + 1;
  resolve_in_place(parts, sequences_, topology_.node_count(), predicted_pos,
                   {current_, target_, remaining_, demand_});
}

GreedyEngine::Outcome GreedyEngine::step(std::vector<PartState>& parts, bool arrival,
                                         NewPartSpec new_part, std::int64_t& next_id) {
  predict(parts, predicted_);
  Outcome outcome;
  const NodeId load = topology_.loading_node();
  bool load_blocked = false;
  std::size_t keep = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    // current_/target_ were filled by predict() and reflect corrections.
    NodeId from = current_[i];
    NodeId to = target_[i];
    if (to == load || (to == kOutside && from == load)) load_blocked = true;
    if (to != from) outcome.commands += 1;
    if (to == kOutside) {
      outcome.unloaded += 1;
      continue;
    }
    PartState moved = parts[i];
    moved.pos = predicted_[i];
    moved.elapsed += 1;
    parts[keep++] = moved;
  }
  parts.resize(keep);
  if (arrival && !load_blocked) {
    parts.push_back({new_part.seq, new_part.pos, 0, next_id++});
    outcome.commands += 1;
    outcome.loaded = true;
  }
  return outcome;
}

}  // namespace plantroute
