#pragma once

// Test-side helpers: small plants, random generators and reference
// implementations written directly from the model rules. The references do
// not call into the library's greedy or search code.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "plantroute/allocator.hpp"
#include "plantroute/eulerian.hpp"
#include "plantroute/greedy.hpp"
#include "plantroute/sequences.hpp"
#include "plantroute/topology.hpp"

namespace testsupport {

using namespace plantroute;

inline Sequence seq_of(std::initializer_list<std::pair<NodeId, NodeId>> entries) {
  Sequence s;
  for (auto [h, g] : entries) s.entries.push_back({h, g});
  return s;
}

// Chain 1 -> 2 -> ... -> n with load on 1 and unload on n.
inline PlantTopology chain_plant(int n, std::map<NodeId, int> machines = {}) {
  std::vector<Transition> t{{0, 1}, {n, 0}};
  for (int h = 1; h < n; ++h) t.push_back({h, h + 1});
  return PlantTopology(n, t, std::move(machines), 1, n);
}

// ---------------------------------------------------------------- random

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}
  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))]; }
};

// Shortest path from `from` to `to` over internal transitions (BFS), both
// endpoints included. Empty if unreachable.
inline std::vector<NodeId> bfs_path(const PlantTopology& topo, NodeId from, NodeId to) {
  std::vector<NodeId> parent(static_cast<std::size_t>(topo.node_count() + 1), -1);
  std::deque<NodeId> q{from};
  parent[static_cast<std::size_t>(from)] = from;
  while (!q.empty()) {
    NodeId h = q.front();
    q.pop_front();
    if (h == to) break;
    for (const auto& t : topo.transitions()) {
      if (t.from != h || t.to == kOutside) continue;
      if (parent[static_cast<std::size_t>(t.to)] != -1) continue;
      parent[static_cast<std::size_t>(t.to)] = h;
      q.push_back(t.to);
    }
  }
  if (parent[static_cast<std::size_t>(to)] == -1) return {};
  std::vector<NodeId> path{to};
  while (path.back() != from) path.push_back(parent[static_cast<std::size_t>(path.back())]);
  std::reverse(path.begin(), path.end());
  return path;
}

// Random strongly connected plant: a Hamiltonian ring plus extra chords,
// some machines, load on node 1 and unload on a random node.
inline PlantTopology random_plant(Rng& rng, int n) {
  std::set<Transition> t;
  std::vector<NodeId> order;
  for (int h = 1; h <= n; ++h) order.push_back(h);
  std::shuffle(order.begin(), order.end(), rng.engine);
  for (int i = 0; i < n; ++i) t.insert({order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>((i + 1) % n)]});
  const int chords = rng.uniform(0, n);
  for (int c = 0; c < chords; ++c) {
    NodeId a = rng.uniform(1, n), b = rng.uniform(1, n);
    if (a != b) t.insert({a, b});
  }
  const NodeId load = 1;
  const NodeId unload = rng.uniform(1, n);
  t.insert({0, load});
  t.insert({unload, 0});
  std::map<NodeId, int> machines;
  const int machine_count = rng.uniform(0, std::min(2, n - 2));
  for (int m = 0; m < machine_count; ++m) {
    NodeId h = rng.uniform(2, n);
    if (h != unload) machines[h] = rng.uniform(1, 3);
  }
  return PlantTopology(n, {t.begin(), t.end()}, machines, load, unload);
}

// Random walk from the loading node that ends on the unloading node. Holds
// are sprinkled in; every machine visit lasts at least L + 2 entries.
inline Sequence random_sequence(Rng& rng, const PlantTopology& topo, int walk_moves) {
  std::vector<NodeId> nodes{topo.loading_node()};
  for (int i = 0; i < walk_moves; ++i) {
    std::vector<NodeId> next;
    for (const auto& t : topo.transitions())
      if (t.from == nodes.back() && t.to != kOutside) next.push_back(t.to);
    if (next.empty()) break;
    nodes.push_back(rng.pick(next));
  }
  auto tail = bfs_path(topo, nodes.back(), topo.unloading_node());
  nodes.insert(nodes.end(), tail.begin() + 1, tail.end());

  Sequence s;
  NodeId goal = rng.uniform(0, topo.node_count());
  for (NodeId h : nodes) {
    if (rng.coin(0.1)) goal = rng.uniform(0, topo.node_count());
    int copies = topo.is_machine(h) ? topo.job_duration(h) + 2 + rng.uniform(0, 1)
                                    : 1 + (rng.coin(0.4) ? rng.uniform(1, 2) : 0);
    for (int c = 0; c < copies; ++c) s.entries.push_back({h, goal});
  }
  return s;
}

inline SequenceSet random_sequence_set(Rng& rng, const PlantTopology& topo, int count) {
  std::vector<Sequence> v;
  for (int i = 0; i < count; ++i) v.push_back(random_sequence(rng, topo, rng.uniform(0, 3 * topo.node_count())));
  return SequenceSet(std::move(v));
}

struct PlacedState {
  LagrangianState state;
  JobTracker jobs;
};

// Up to `count` parts on distinct nodes. A part placed inside a machine run
// gets a job start that matches the entries it has already spent there.
inline PlacedState random_placement(Rng& rng, const SequenceSet& set, const PlantTopology& topo,
                                    int count, long long k) {
  PlacedState out;
  std::set<NodeId> used;
  for (int attempt = 0; attempt < 50 * count && out.state.part_count() < count; ++attempt) {
    int s = rng.uniform(1, set.count());
    int p = rng.uniform(1, set.length_unchecked(s));
    NodeId h = set.node_unchecked(s, p);
    if (used.count(h)) continue;
    used.insert(h);
    out.state.parts.push_back({s, p, rng.uniform(0, 40), out.state.next_id++});
    if (topo.is_machine(h)) {
      int before = 0;
      while (p - before - 1 >= 1 && set.node_unchecked(s, p - before - 1) == h) ++before;
      out.jobs[h] = k - before;
    }
  }
  return out;
}

inline EulerianState occupancy_of(const LagrangianState& state, const SequenceSet& set,
                                  const PlantTopology& topo, long long finished = 0) {
  EulerianState z = EulerianState::empty(topo);
  for (const auto& p : state.parts) z.set(set.node_unchecked(p.seq, p.pos), true);
  z.finished = finished;
  return z;
}

// ------------------------------------------------------- reference greedy

struct RefStep {
  std::vector<PartState> next;  // survivors, then the loaded part
  int commands = 0;
  int unloaded = 0;
  bool loaded = false;
  std::set<Transition> moves;  // every active command
};

// One closed-loop step written straight from the rules: predict one
// position ahead, settle the lowest conflicted node, repeat.
inline RefStep ref_step(const std::vector<PartState>& parts, bool arrival, const SequenceSet& set,
                        const PlantTopology& topo, NewPartSpec fresh, std::int64_t& next_id) {
  const std::size_t n = parts.size();
  std::vector<int> pred(n);
  for (std::size_t i = 0; i < n; ++i) pred[i] = parts[i].pos + 1;
  auto here = [&](std::size_t i) { return set.node_unchecked(parts[i].seq, parts[i].pos); };
  auto target = [&](std::size_t i) {
    return pred[i] > set.length_unchecked(parts[i].seq) ? kOutside : set.node_unchecked(parts[i].seq, pred[i]);
  };
  auto rem = [&](std::size_t i) { return set.length_unchecked(parts[i].seq) - parts[i].pos; };

  for (;;) {
    std::map<NodeId, std::vector<std::size_t>> wants;
    for (std::size_t i = 0; i < n; ++i)
      if (target(i) != kOutside) wants[target(i)].push_back(i);
    auto conflicted = std::find_if(wants.begin(), wants.end(), [](const auto& kv) { return kv.second.size() > 1; });
    if (conflicted == wants.end()) break;
    const NodeId h = conflicted->first;
    const auto& who = conflicted->second;
    std::size_t win = who.front();
    auto held = std::find_if(who.begin(), who.end(), [&](std::size_t i) { return here(i) == h; });
    if (held != who.end()) {
      win = *held;
    } else {
      for (std::size_t i : who) {
        auto key = [&](std::size_t j) { return std::make_tuple(rem(j), -parts[j].elapsed, parts[j].id); };
        if (key(i) < key(win)) win = i;
      }
    }
    for (std::size_t i : who)
      if (i != win) pred[i] = parts[i].pos;
  }

  RefStep out;
  std::set<NodeId> busy_next;
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId from = here(i), to = target(i);
    busy_next.insert(to == kOutside ? from : to);
    if (to != from) out.moves.insert({from, to});
    if (to == kOutside) {
      out.unloaded += 1;
      continue;
    }
    PartState moved = parts[i];
    moved.pos = pred[i];
    moved.elapsed += 1;
    out.next.push_back(moved);
  }
  if (arrival && !busy_next.count(topo.loading_node())) {
    out.moves.insert({kOutside, topo.loading_node()});
    out.next.push_back({fresh.seq, fresh.pos, 0, next_id++});
    out.loaded = true;
  }
  out.commands = static_cast<int>(out.moves.size());
  return out;
}

// Horizon cost by plain rollout: states 0..N, inputs 0..N-1.
inline double ref_horizon_cost(std::vector<PartState> parts, const FhocpConfig& cfg,
                               const SequenceSet& set, const PlantTopology& topo) {
  long long remaining = 0, age = 0, commands = 0;
  std::int64_t ids = 1'000'000'000;
  for (int o = 0; o <= cfg.horizon; ++o) {
    for (const auto& p : parts) {
      remaining += set.length_unchecked(p.seq) - p.pos;
      age += p.elapsed;
    }
    if (o == cfg.horizon) break;
    bool a = !cfg.arrival_prediction.empty() && cfg.arrival_prediction[static_cast<std::size_t>(o)];
    RefStep st = ref_step(parts, a, set, topo, cfg.new_part, ids);
    commands += st.commands;
    parts = st.next;
  }
  const long long base = cfg.cost.kind == StageCost::Kind::kRemainingPlusCommands ? remaining : age;
  return static_cast<double>(base) + cfg.cost.beta * static_cast<double>(commands);
}

// Candidates by linear scan: same (node, goal); on a machine the node
// history back to the job start must match and the remaining run must
// still cover the job.
inline std::vector<Allocation> ref_candidates(const PartState& part, const SequenceSet& set,
                                              const JobTracker& jobs, long long k,
                                              const PlantTopology& topo) {
  const SequenceEntry here = entry(set, part.seq, part.pos);
  std::vector<Allocation> out;
  for (int s = 1; s <= set.count(); ++s) {
    for (int p = 1; p <= set.length_unchecked(s); ++p) {
      if (s == part.seq && p == part.pos) {
        out.push_back({s, p});
        continue;
      }
      if (!(entry(set, s, p) == here)) continue;
      if (topo.is_machine(here.node)) {
        const long long start = jobs.at(here.node);
        bool ok = true;
        for (long long j = 1; j <= k - start; ++j) {
          if (part.pos - j < 1) break;
          if (p - j < 1 || set.node_unchecked(s, static_cast<int>(p - j)) !=
                               set.node_unchecked(part.seq, static_cast<int>(part.pos - j))) {
            ok = false;
            break;
          }
        }
        int run = 0;
        while (p + run <= set.length_unchecked(s) && set.node_unchecked(s, p + run) == here.node) ++run;
        if (run < start + topo.job_duration(here.node) + 2 - k) ok = false;
        if (!ok) continue;
      }
      out.push_back({s, p});
    }
  }
  return out;
}

struct RefOptimum {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<Allocation> assignment;
  long long enumerated = 0;
};

// Every joint assignment in lexicographic order; the incumbent wins ties,
// then the first minimum met.
inline RefOptimum ref_solve(const LagrangianState& state, const std::vector<std::vector<Allocation>>& lists,
                            const FhocpConfig& cfg, const SequenceSet& set, const PlantTopology& topo) {
  RefOptimum best;
  std::vector<Allocation> incumbent;
  for (const auto& p : state.parts) incumbent.push_back({p.seq, p.pos});
  std::vector<std::size_t> digit(lists.size(), 0);
  std::vector<PartState> parts = state.parts;
  for (;;) {
    std::vector<Allocation> a;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      a.push_back(lists[i][digit[i]]);
      parts[i].seq = a.back().seq;
      parts[i].pos = a.back().pos;
    }
    double c = ref_horizon_cost(parts, cfg, set, topo);
    best.enumerated += 1;
    if (c < best.cost) {
      best.cost = c;
      best.assignment = a;
    }
    std::size_t d = lists.size();
    while (d > 0) {
      --d;
      if (++digit[d] < lists[d].size()) break;
      digit[d] = 0;
      if (d == 0) {
        d = lists.size() + 1;
        break;
      }
    }
    if (lists.empty() || d == lists.size() + 1) break;
  }
  if (ref_horizon_cost(state.parts, cfg, set, topo) == best.cost) best.assignment = incumbent;
  return best;
}

}  // namespace testsupport
