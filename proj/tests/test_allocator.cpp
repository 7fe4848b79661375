#include <algorithm>

#include "doctest.h"
#include "plantroute/allocator.hpp"
#include "support.hpp"

using namespace plantroute;
using namespace testsupport;

namespace {

LagrangianState state_of(std::vector<PartState> parts) {
  LagrangianState x;
  x.parts = std::move(parts);
  for (const auto& p : x.parts) x.next_id = std::max(x.next_id, p.id + 1);
  return x;
}

std::vector<CompatibilityRecord> records_for(const LagrangianState& x, const SequenceSet& set,
                                             const JobTracker& jobs, long long k, const PlantTopology& topo) {
  std::vector<CompatibilityRecord> out;
  for (const auto& p : x.parts) out.push_back(compatibility_set(p, set, jobs, k, topo));
  return out;
}

long long product(const std::vector<CompatibilityRecord>& records) {
  long long n = 1;
  for (const auto& r : records) n *= static_cast<long long>(r.candidates.size());
  return n;
}

Sequence displayed_path() {
  return seq_of({{10, 12}, {1, 12}, {2, 12}, {3, 12}, {4, 12}, {6, 12}, {12, 12},
                 {12, 0}, {6, 0}, {7, 0}, {8, 0}, {9, 0}, {1, 0}, {10, 0}});
}

}  // namespace

TEST_CASE("compatibility on the bundled path matches a linear scan") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set = build_example_sequences(topo);
  for (int p = 1; p <= set.length_unchecked(1); ++p) {
    PartState part{1, p, 0, 1};
    if (topo.is_machine(set.node_unchecked(1, p))) continue;
    auto rec = compatibility_set(part, set, {}, 0, topo);
    CHECK(rec.incumbent == Allocation{1, p});
    CHECK(rec.candidates == ref_candidates(part, set, {}, 0, topo));
    CHECK(std::is_sorted(rec.candidates.begin(), rec.candidates.end()));
    for (const auto& c : rec.candidates) CHECK(entry(set, c.seq, c.pos) == entry(set, 1, p));
  }
  // Node 3 with goal 12 shows up at four positions.
  CHECK(compatibility_set({1, 7, 0, 1}, set, {}, 0, topo).candidates.size() == 4);
}

TEST_CASE("compatibility: a unique entry yields only the incumbent") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set({displayed_path()});
  auto rec = compatibility_set({1, 3, 0, 1}, set, {}, 0, topo);
  CHECK(rec.candidates == std::vector<Allocation>{{1, 3}});
}

TEST_CASE("compatibility inside a machine job keeps the job history") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set = build_example_sequences(topo);
  int first12 = 1;
  while (set.node_unchecked(1, first12) != 12) ++first12;

  // Sequence 2 shifts the machine run one entry later; sequence 3 is a
  // different path through the same machine run.
  Sequence alt = set.sequence(1);
  alt.entries.insert(alt.entries.begin() + (first12 - 1), alt.entries[static_cast<std::size_t>(first12 - 2)]);
  Sequence other = seq_of({{10, 12}, {1, 12}, {2, 12}, {3, 12}, {4, 12}, {6, 12}, {12, 12}, {12, 12},
                           {12, 12}, {12, 12}, {12, 11}, {6, 0}, {7, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0},
                           {7, 0}, {8, 0}, {9, 0}, {1, 0}, {10, 0}});
  SequenceSet three({set.sequence(1), alt, other});

  // One step into the job: arrived at k = 4, now k = 5, on the 2nd entry.
  const long long k = 5;
  JobTracker jobs{{12, 4}};
  PartState part{1, first12 + 1, 20, 1};
  auto rec = compatibility_set(part, three, jobs, k, topo);
  CHECK(rec.candidates == ref_candidates(part, three, jobs, k, topo));
  for (const auto& c : rec.candidates) {
    CHECK(three.node_unchecked(c.seq, c.pos) == 12);
    CHECK(three.node_unchecked(c.seq, c.pos - 1) == 12);
    CHECK(entry(three, c.seq, c.pos).goal == 12);
  }
  CHECK(rec.candidates.size() >= 2);

  // Missing job record on an occupied machine is a logic error.
  CHECK_THROWS_AS(compatibility_set(part, three, {}, k, topo), std::logic_error);
}

TEST_CASE("property: machine candidates never shorten a running job") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    PlantTopology topo = random_plant(rng, rng.uniform(3, 9));
    if (topo.machines().empty()) continue;
    SequenceSet set = random_sequence_set(rng, topo, 4);
    PlacedState placed = random_placement(rng, set, topo, topo.node_count(), 10);
    for (const auto& part : placed.state.parts) {
      NodeId h = set.node_unchecked(part.seq, part.pos);
      auto rec = compatibility_set(part, set, placed.jobs, 10, topo);
      CHECK(rec.candidates == ref_candidates(part, set, placed.jobs, 10, topo));
      CHECK(std::find(rec.candidates.begin(), rec.candidates.end(), rec.incumbent) != rec.candidates.end());
      if (!topo.is_machine(h)) continue;
      const long long start = placed.jobs.at(h);
      for (const auto& c : rec.candidates) {
        int run = 0;
        while (c.pos + run <= set.length_unchecked(c.seq) && set.node_unchecked(c.seq, c.pos + run) == h) ++run;
        // Departure command lands at step 10 + run - 1 at the earliest.
        CHECK(10 + run - 1 >= start + topo.job_duration(h) + 1);
      }
    }
  }
}

TEST_CASE("stage cost") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set({displayed_path()});
  CHECK(remaining_stage_cost(LagrangianState{}, InputVector(topo), 5.0, set) == 0.0);
  InputVector one(topo);
  one.set(topo, 1, 2);
  auto x = state_of({{1, 3, 0, 1}});
  CHECK(remaining_stage_cost(x, one, 5.0, set) == 16.0);
  CHECK(remaining_stage_cost(x, one, 0.0, set) == 11.0);
}

TEST_CASE("simulate_horizon hand traces") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set({displayed_path()});
  FhocpConfig cfg;
  cfg.horizon = 50;
  CHECK(simulate_horizon(LagrangianState{}, cfg, topo, set).value == 0.0);

  cfg.horizon = 2;
  cfg.cost.beta = 0.0;
  auto last = state_of({{1, 14, 0, 1}});
  HorizonCost c = simulate_horizon(last, cfg, topo, set);
  CHECK(c.value == 0.0);
  CHECK(c.commands == 1);

  // r = 2, 1, 0 over three states; moves 9->1 and 1->10.
  cfg.cost.beta = 5.0;
  auto two_left = state_of({{1, 12, 0, 1}});
  HorizonCost d = simulate_horizon(two_left, cfg, topo, set);
  CHECK(d.remaining_sum == 3);
  CHECK(d.commands == 2);
  CHECK(d.value == 13.0);

  cfg.cost.kind = StageCost::Kind::kAgePlusCommands;
  auto aged = state_of({{1, 12, 7, 1}});
  CHECK(simulate_horizon(aged, cfg, topo, set).value == 7 + 8 + 9 + 5.0 * 2);

  // Arrival predictions add loaded parts to the rollout.
  cfg.cost = {StageCost::Kind::kRemainingPlusCommands, 0.0};
  cfg.arrival_prediction = {true, false};
  cfg.new_part = {1, 1};
  HorizonCost e = simulate_horizon(LagrangianState{}, cfg, topo, set);
  // Loaded at o = 0 (r = 13 at o = 1), then 10->1 (r = 12 at o = 2).
  CHECK(e.remaining_sum == 25);
  CHECK(e.commands == 2);

  cfg.arrival_prediction = {true};
  CHECK_THROWS_AS(simulate_horizon(LagrangianState{}, cfg, topo, set), std::invalid_argument);
}

TEST_CASE("FhocpConfig validation") {
  FhocpConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.horizon = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon = 3;
  cfg.cost.beta = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.cost.beta = 1;
  cfg.search_budget = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("solve_fhocp: singleton candidates return the incumbent after one evaluation") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set({displayed_path()});
  auto x = state_of({{1, 3, 0, 1}, {1, 9, 0, 2}});
  auto recs = records_for(x, set, {}, 0, topo);
  FhocpConfig cfg;
  auto sol = solve_fhocp(x, recs, cfg, topo, set);
  CHECK(sol.evaluations == 1);
  CHECK(sol.assignment == std::vector<Allocation>{{1, 3}, {1, 9}});
  CHECK(sol.predicted_cost == sol.incumbent_cost);

  auto empty = solve_fhocp(LagrangianState{}, {}, cfg, topo, set);
  CHECK(empty.assignment.empty());
}

TEST_CASE("solve_fhocp: with a large beta the wait-shifted candidate wins") {
  // Chain 1..4; holding twice on node 2 offers a wait-in-place shift. The
  // part sits on the second entry of node 2; shifting it back to the
  // first entry delays its moves past a short horizon.
  const PlantTopology topo = chain_plant(4);
  SequenceSet set({seq_of({{1, 0}, {2, 0}, {2, 0}, {3, 0}, {4, 0}})});
  auto x = state_of({{1, 3, 0, 1}});
  auto recs = records_for(x, set, {}, 0, topo);
  REQUIRE(recs[0].candidates == std::vector<Allocation>{{1, 2}, {1, 3}});
  FhocpConfig cfg;
  cfg.horizon = 1;
  cfg.cost.beta = 100.0;
  auto sol = solve_fhocp(x, recs, cfg, topo, set);
  CHECK(sol.assignment == std::vector<Allocation>{{1, 2}});
  CHECK(sol.evaluations == 2);
  cfg.cost.beta = 0.0;
  CHECK(solve_fhocp(x, recs, cfg, topo, set).assignment == std::vector<Allocation>{{1, 3}});
}

TEST_CASE("property: solve_fhocp matches brute-force re-enumeration exactly") {
  Rng rng(4242);
  int instances = 0;
  for (int trial = 0; instances < 120 && trial < 2000; ++trial) {
    const bool bundled = trial % 2 == 0;
    PlantTopology topo = bundled ? build_example_plant() : random_plant(rng, rng.uniform(3, 9));
    SequenceSet set = bundled ? build_example_sequences(topo) : random_sequence_set(rng, topo, rng.uniform(1, 3));
    const long long k = 20;
    PlacedState placed = random_placement(rng, set, topo, rng.uniform(1, bundled ? 6 : 5), k);
    auto recs = records_for(placed.state, set, placed.jobs, k, topo);
    if (product(recs) > 10000) continue;
    ++instances;

    FhocpConfig cfg;
    cfg.horizon = rng.uniform(1, 12);
    cfg.cost.beta = rng.pick(std::vector<double>{0.0, 0.5, 1.0, 3.0, 6.0, 40.0});
    if (rng.coin(0.2)) cfg.cost.kind = StageCost::Kind::kAgePlusCommands;
    if (rng.coin(0.3)) {
      cfg.arrival_prediction.resize(static_cast<std::size_t>(cfg.horizon));
      for (std::size_t o = 0; o < cfg.arrival_prediction.size(); ++o) cfg.arrival_prediction[o] = rng.coin(0.5);
    }
    cfg.workers = rng.uniform(1, 3);

    std::vector<std::vector<Allocation>> lists;
    for (std::size_t i = 0; i < recs.size(); ++i)
      lists.push_back(ref_candidates(placed.state.parts[i], set, placed.jobs, k, topo));
    RefOptimum oracle = ref_solve(placed.state, lists, cfg, set, topo);
    FhocpSolution sol = solve_fhocp(placed.state, recs, cfg, topo, set);

    CHECK(sol.predicted_cost == oracle.cost);
    CHECK(sol.assignment == oracle.assignment);
    CHECK(sol.evaluations == oracle.enumerated);
    CHECK(sol.joint_assignments == oracle.enumerated);
    CHECK(sol.predicted_cost <= sol.incumbent_cost);
    CHECK_FALSE(sol.budget_exhausted);
    // The predicted cost is what a plain rollout of the answer gives.
    CHECK(ref_horizon_cost(apply_assignment(placed.state, sol.assignment).parts, cfg, set, topo) == sol.predicted_cost);

    // Pruning keeps the optimum value.
    FhocpConfig pruned = cfg;
    pruned.prune = true;
    auto recs2 = records_for(placed.state, set, placed.jobs, k, topo);
    auto psol = solve_fhocp(placed.state, recs2, pruned, topo, set);
    CHECK(psol.predicted_cost == sol.predicted_cost);
    CHECK(psol.joint_assignments <= sol.joint_assignments);
  }
  CHECK(instances == 120);
}

TEST_CASE("search budget stops early and never does worse than the incumbent") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set = build_example_sequences(topo);
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    PlacedState placed = random_placement(rng, set, topo, 5, 0);
    auto recs = records_for(placed.state, set, placed.jobs, 0, topo);
    FhocpConfig cfg;
    cfg.horizon = 10;
    cfg.cost.beta = 2.0;
    cfg.search_budget = 1;
    auto one = solve_fhocp(placed.state, recs, cfg, topo, set);
    CHECK(one.evaluations == 1);
    CHECK(one.predicted_cost == one.incumbent_cost);
    CHECK(one.budget_exhausted == (product(recs) > 1));

    cfg.search_budget = 7;
    auto some = solve_fhocp(placed.state, recs, cfg, topo, set);
    CHECK(some.evaluations <= 7);
    CHECK(some.predicted_cost <= some.incumbent_cost);
    // Result lies in the candidate lists.
    for (std::size_t i = 0; i < recs.size(); ++i)
      CHECK(std::find(recs[i].candidates.begin(), recs[i].candidates.end(), some.assignment[i]) != recs[i].candidates.end());
  }
}

TEST_CASE("prune keeps the incumbent as its class representative") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set = build_example_sequences(topo);
  FhocpConfig cfg;
  cfg.horizon = 3;
  cfg.prune = true;
  for (int p = 1; p <= set.length_unchecked(1); ++p) {
    if (topo.is_machine(set.node_unchecked(1, p))) continue;
    auto rec = compatibility_set({1, p, 0, 1}, set, {}, 0, topo);
    auto lists = search_candidates(std::span(&rec, 1), cfg, set);
    CHECK(std::find(lists[0].begin(), lists[0].end(), rec.incumbent) != lists[0].end());
    CHECK(lists[0].size() <= rec.candidates.size());
  }
}

TEST_CASE("mpc_step keeps parts on their node and goal and emits feasible inputs") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set = build_example_sequences(topo);
  FhocpConfig cfg;
  cfg.horizon = 8;
  cfg.cost.beta = 3.0;

  auto empty = mpc_step(LagrangianState{}, false, 0, {}, cfg, topo, set);
  CHECK(empty.input.active_count() == 0);
  CHECK(empty.solution.assignment.empty());

  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    PlacedState placed = random_placement(rng, set, topo, rng.uniform(1, 5), 0);
    auto step = mpc_step(placed.state, rng.coin(), 0, placed.jobs, cfg, topo, set);
    REQUIRE(step.rewritten.part_count() == placed.state.part_count());
    for (std::size_t i = 0; i < placed.state.parts.size(); ++i) {
      const auto& before = placed.state.parts[i];
      const auto& after = step.rewritten.parts[i];
      CHECK(entry(set, before.seq, before.pos) == entry(set, after.seq, after.pos));
      CHECK(before.elapsed == after.elapsed);
      CHECK(before.id == after.id);
    }
    CHECK(check_constraints(occupancy_of(placed.state, set, topo), step.input, placed.jobs, 0, topo).empty());
  }
}

TEST_CASE("beta = 0, single part, unique entries: MPC follows the greedy rollout") {
  const PlantTopology topo = build_example_plant();
  SequenceSet set({seq_of({{10, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {6, 0}, {7, 0}, {8, 0}, {9, 0}, {1, 1}, {10, 1}})});
  FhocpConfig cfg;
  cfg.horizon = 5;
  LagrangianState mpc = state_of({{1, 1, 0, 1}});
  LagrangianState greedy = mpc;
  JobTracker jobs;
  for (long long k = 0; k < 12; ++k) {
    auto step = mpc_step(mpc, false, k, jobs, cfg, topo, set);
    auto next_mpc = closed_loop_step(step.rewritten, false, topo, set, {1, 1});
    auto next_greedy = closed_loop_step(greedy, false, topo, set, {1, 1});
    CHECK(next_mpc.input == next_greedy.input);
    CHECK(next_mpc.next == next_greedy.next);
    mpc = next_mpc.next;
    greedy = next_greedy.next;
  }
  CHECK(mpc.part_count() == 0);
}

TEST_CASE("worker count resolution") {
  CHECK(resolve_worker_count(3) == 3);
  CHECK(resolve_worker_count(0) >= 1);
}
