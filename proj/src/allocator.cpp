#include "plantroute/allocator.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace plantroute {

CompatibilityRecord compatibility_set(const PartState& part, const SequenceSet& sequences,
                                      const JobTracker& jobs, long long k,
                                      const PlantTopology& topology) {
  const SequenceEntry here = entry(sequences, part.seq, part.pos);
  CompatibilityRecord record;
  record.part_id = part.id;
  record.incumbent = {part.seq, part.pos};

  const bool on_machine = topology.is_machine(here.node);
  long long history = 0;
  long long min_run = 0;  // entries of the machine still required from pos on
  if (on_machine) {
    auto job = jobs.find(here.node);
    if (job == jobs.end())
      throw std::logic_error("machine " + std::to_string(here.node) +
                             " is occupied but has no job record");
    history = k - job->second;
    if (history < 0)
      throw std::logic_error("job on machine " + std::to_string(here.node) + " starts after step " +
                             std::to_string(k));
    // Earliest legal departure command is issued at start + L + 1.
    min_run = job->second + topology.job_duration(here.node) + 2 - k;
  }

  for (int s = 1; s <= sequences.count(); ++s) {
    const auto& entries = sequences.sequence(s).entries;
    const int len = static_cast<int>(entries.size());
    for (int p = 1; p <= len; ++p) {
      const Allocation candidate{s, p};
      if (candidate == record.incumbent) {
        record.candidates.push_back(candidate);
        continue;
      }
      if (!(entries[static_cast<std::size_t>(p - 1)] == here)) continue;
      if (on_machine) {
        bool match = true;
        // History is compared as far back as the incumbent sequence reaches.
        for (long long j = 1; j <= history && part.pos - j >= 1; ++j) {
          const long long pc = p - j;
          if (pc < 1 ||
              entries[static_cast<std::size_t>(pc - 1)].node !=
                  sequences.node_unchecked(part.seq, static_cast<int>(part.pos - j))) {
            match = false;
            break;
          }
        }
        if (!match) continue;
        int run = 0;
        while (p + run <= len && entries[static_cast<std::size_t>(p + run - 1)].node == here.node) ++run;
        if (run < min_run) continue;
      }
      record.candidates.push_back(candidate);
    }
  }
  return record;
}

double remaining_stage_cost(const LagrangianState& predicted, const InputVector& input,
                       double beta, const SequenceSet& sequences) {
  long long r = 0;
  for (const auto& part : predicted.parts) r += remaining_steps(sequences, part);
  return static_cast<double>(r) + beta * static_cast<double>(input.active_count());
}

void FhocpConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(cost.beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!arrival_prediction.empty() &&
      arrival_prediction.size() != static_cast<std::size_t>(horizon))
    throw std::invalid_argument("arrival prediction length must equal the horizon");
  if (search_budget && *search_budget < 1)
    throw std::invalid_argument("search budget must be >= 1");
}

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PLANTROUTE_WORKERS")) {
    int value = std::atoi(env);
    if (value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

double cost_value(const StageCost& cost, long long remaining, long long age, long long commands) {
  const long long base =
      cost.kind == StageCost::Kind::kRemainingPlusCommands ? remaining : age;
  return static_cast<double>(base) + cost.beta * static_cast<double>(commands);
}

// Per-part lower bound on the cost still to come in a rollout under the
// remaining+commands cost: table[s][pos][left] is the cheapest way a part at
// (s, pos) can spend `left` steps when every step either advances it one
// position or leaves it blocked. Other parts only ever add to this.
class RemainingBound {
 public:
  RemainingBound(const SequenceSet& sequences, int horizon, double beta)
      : horizon_(horizon), offsets_(static_cast<std::size_t>(sequences.count()) + 2, 0) {
    for (int s = 1; s <= sequences.count(); ++s)
      offsets_[static_cast<std::size_t>(s) + 1] =
          offsets_[static_cast<std::size_t>(s)] + sequences.length_unchecked(s);
    table_.assign(static_cast<std::size_t>(offsets_.back()) * static_cast<std::size_t>(horizon + 1), 0.0);
    for (int s = 1; s <= sequences.count(); ++s) {
      const int len = sequences.length_unchecked(s);
      for (int left = 1; left <= horizon; ++left) {
        for (int pos = 1; pos <= len; ++pos) {
          const double r = len - pos;
          double best = r + at(s, pos, left - 1);
          if (pos == len) {
            best = std::min(best, beta);
          } else {
            const bool moves = sequences.node_unchecked(s, pos + 1) != sequences.node_unchecked(s, pos);
            best = std::min(best, (r - 1) + (moves ? beta : 0.0) + at(s, pos + 1, left - 1));
          }
          cell(s, pos, left) = best;
        }
      }
    }
  }

  double at(int s, int pos, int left) const {
    return table_[index(s, pos, left)];
  }

 private:
  std::size_t index(int s, int pos, int left) const {
    return (static_cast<std::size_t>(offsets_[static_cast<std::size_t>(s)] + pos - 1)) *
               static_cast<std::size_t>(horizon_ + 1) +
           static_cast<std::size_t>(left);
  }
  double& cell(int s, int pos, int left) { return table_[index(s, pos, left)]; }

  int horizon_;
  std::vector<int> offsets_;
  std::vector<double> table_;
};

// Reusable horizon rollout; one per worker thread.
class Rollout {
 public:
  Rollout(const FhocpConfig& config, const PlantTopology& topology,
          const SequenceSet& sequences, const RemainingBound* bound = nullptr)
      : config_(config), sequences_(sequences), engine_(topology, sequences), table_(bound) {}

  HorizonCost run(std::span<const PartState> initial) {
    HorizonCost total;
    run_bounded(initial, std::numeric_limits<double>::infinity(), total);
    return total;
  }

  // Stops as soon as the cost already accrued plus a lower bound on the rest
  // reaches `bound`; returns false in that case. All cost terms are
  // nonnegative, so an abandoned rollout can never score below `bound`.
  bool run_bounded(std::span<const PartState> initial, double bound, HorizonCost& total) {
    parts_.assign(initial.begin(), initial.end());
    std::int64_t next_id = std::numeric_limits<std::int64_t>::max() / 2;
    total = HorizonCost{};
    const bool by_age = config_.cost.kind == StageCost::Kind::kAgePlusCommands;
    const bool bounded = bound < std::numeric_limits<double>::infinity();
    for (int o = 0; o <= config_.horizon; ++o) {
      long long future = 0;
      double future_table = 0.0;
      const int left = config_.horizon - o;  // steps after this state
      for (const auto& part : parts_) {
        const long long r = sequences_.length_unchecked(part.seq) - part.pos;
        total.remaining_sum += r;
        total.age_sum += part.elapsed;
        if (!bounded) continue;
        if (table_ && !by_age) {
          future_table += table_->at(part.seq, part.pos, left);
        } else {
          // Present for at least min(r, left) more states, with remaining
          // >= r - t and age = elapsed + t at offset t.
          const long long t = std::min<long long>(r, left);
          future += by_age ? t * part.elapsed + t * (t + 1) / 2 : t * r - t * (t + 1) / 2;
        }
      }
      if (o == config_.horizon) break;
      if (bounded) {
        const long long base = by_age ? total.age_sum : total.remaining_sum;
        const double floor = static_cast<double>(base + future) +
                             config_.cost.beta * static_cast<double>(total.commands) +
                             future_table * (1.0 - 1e-12);
        if (floor >= bound) return false;
      }
      const bool arrival = !config_.arrival_prediction.empty() &&
                           config_.arrival_prediction[static_cast<std::size_t>(o)];
      total.commands += engine_.step(parts_, arrival, config_.new_part, next_id).commands;
    }
    total.value = cost_value(config_.cost, total.remaining_sum, total.age_sum, total.commands);
    return total.value < bound;
  }

 private:
  const FhocpConfig& config_;
  const SequenceSet& sequences_;
  GreedyEngine engine_;
  const RemainingBound* table_;
  std::vector<PartState> parts_;
};

// Two candidates of one part give identical rollouts when they share the
// remaining length and every node reachable within the horizon.
bool rollout_equivalent(const Allocation& a, const Allocation& b, int horizon,
                        const SequenceSet& sequences) {
  const int ra = sequences.length_unchecked(a.seq) - a.pos;
  const int rb = sequences.length_unchecked(b.seq) - b.pos;
  if (ra != rb) return false;
  const int reach = std::min(horizon, ra);
  for (int d = 0; d <= reach; ++d)
    if (sequences.node_unchecked(a.seq, a.pos + d) != sequences.node_unchecked(b.seq, b.pos + d))
      return false;
  return true;
}

struct Best {
  double cost = std::numeric_limits<double>::infinity();
  long long rank = std::numeric_limits<long long>::max();  // -1 = incumbent

  void offer(double c, long long r) {
    if (c < cost || (c == cost && r < rank)) {
      cost = c;
      rank = r;
    }
  }
};

}  // namespace

HorizonCost simulate_horizon(const LagrangianState& initial, const FhocpConfig& config,
                             const PlantTopology& topology, const SequenceSet& sequences) {
  config.validate();
  for (const auto& part : initial.parts) (void)remaining_steps(sequences, part);
  Rollout rollout(config, topology, sequences);
  return rollout.run(initial.parts);
}

std::vector<std::vector<Allocation>> search_candidates(
    std::span<const CompatibilityRecord> records, const FhocpConfig& config,
    const SequenceSet& sequences) {
  std::vector<std::vector<Allocation>> lists;
  lists.reserve(records.size());
  for (const auto& record : records) {
    if (!config.prune) {
      lists.push_back(record.candidates);
      continue;
    }
    std::vector<Allocation> kept;
    for (const auto& candidate : record.candidates) {
      auto same = std::find_if(kept.begin(), kept.end(), [&](const Allocation& k) {
        return rollout_equivalent(k, candidate, config.horizon, sequences);
      });
      if (same == kept.end())
        kept.push_back(candidate);
      else if (candidate == record.incumbent)
        *same = candidate;  // the incumbent represents its class
    }
    std::sort(kept.begin(), kept.end());
    lists.push_back(std::move(kept));
  }
  return lists;
}

LagrangianState apply_assignment(const LagrangianState& state,
                                 std::span<const Allocation> assignment) {
  if (assignment.size() != state.parts.size())
    throw std::invalid_argument("assignment size does not match part count");
  LagrangianState out = state;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out.parts[i].seq = assignment[i].seq;
    out.parts[i].pos = assignment[i].pos;
  }
  return out;
}

FhocpSolution solve_fhocp(const LagrangianState& state,
                          std::span<const CompatibilityRecord> records,
                          const FhocpConfig& config, const PlantTopology& topology,
                          const SequenceSet& sequences) {
  config.validate();
  const std::size_t n = state.parts.size();
  if (records.size() != n) throw std::invalid_argument("one compatibility record per part required");

  FhocpSolution solution;
  if (n == 0) {
    solution.joint_assignments = 1;
    return solution;
  }

  std::vector<Allocation> incumbent(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (records[i].part_id != state.parts[i].id)
      throw std::invalid_argument("compatibility records are not in state order");
    incumbent[i] = {state.parts[i].seq, state.parts[i].pos};
  }

  auto lists = search_candidates(records, config, sequences);
  std::vector<long long> radix(n);
  std::vector<long long> incumbent_digit(n, -1);
  long long total = 1;
  bool overflow = false;
  for (std::size_t i = 0; i < n; ++i) {
    auto it = std::lower_bound(lists[i].begin(), lists[i].end(), incumbent[i]);
    if (it == lists[i].end() || !(*it == incumbent[i]))
      throw std::logic_error("incumbent allocation missing from its candidate list");
    incumbent_digit[i] = it - lists[i].begin();
    radix[i] = static_cast<long long>(lists[i].size());
    if (total > std::numeric_limits<long long>::max() / radix[i])
      overflow = true;
    else
      total *= radix[i];
  }
  if (overflow && !config.search_budget)
    throw std::runtime_error("joint assignment space overflows; set a search budget");
  if (overflow) total = std::numeric_limits<long long>::max();
  solution.joint_assignments = total;

  long long incumbent_index = 0;
  if (!overflow)
    for (std::size_t i = 0; i < n; ++i) incumbent_index = incumbent_index * radix[i] + incumbent_digit[i];

  // Lexicographic indices [0, limit) are scored, minus the incumbent which
  // is always scored first.
  long long limit = total;
  if (config.search_budget) {
    const long long others = *config.search_budget - 1;
    limit = std::min(total, (incumbent_index < others && !overflow) ? others + 1 : others);
  }

  auto decode = [&](long long index, std::vector<PartState>& parts) {
    for (std::size_t d = n; d-- > 0;) {
      const auto& a = lists[d][static_cast<std::size_t>(index % radix[d])];
      index /= radix[d];
      parts[d].seq = a.seq;
      parts[d].pos = a.pos;
    }
  };

  Rollout first(config, topology, sequences);
  const double incumbent_cost = first.run(state.parts).value;
  solution.incumbent_cost = incumbent_cost;

  const int workers = static_cast<int>(
      std::min<long long>(resolve_worker_count(config.workers), std::max(1LL, limit / 64)));
  std::vector<Best> best(static_cast<std::size_t>(workers));
  std::vector<long long> scored(static_cast<std::size_t>(workers), 0);

  const RemainingBound table(sequences, config.horizon, config.cost.beta);
  auto work = [&](int w) {
    Rollout rollout(config, topology, sequences, &table);
    std::vector<PartState> parts = state.parts;
    HorizonCost cost;
    auto& mine = best[static_cast<std::size_t>(w)];
    // Contiguous slices keep the per-worker scan in lexicographic order, so
    // a later index never wins a tie and only strict improvements matter.
    const long long begin = limit * w / workers;
    const long long end = limit * (w + 1) / workers;
    for (long long index = begin; index < end; ++index) {
      if (index == incumbent_index && !overflow) continue;
      decode(index, parts);
      if (rollout.run_bounded(parts, std::min(incumbent_cost, mine.cost), cost))
        mine.offer(cost.value, index);
      scored[static_cast<std::size_t>(w)] += 1;
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  Best overall;
  overall.offer(incumbent_cost, -1);
  long long evaluations = 1;
  for (int w = 0; w < workers; ++w) {
    overall.offer(best[static_cast<std::size_t>(w)].cost, best[static_cast<std::size_t>(w)].rank);
    evaluations += scored[static_cast<std::size_t>(w)];
  }

  solution.evaluations = evaluations;
  solution.budget_exhausted = overflow || evaluations < total;
  solution.predicted_cost = overall.cost;
  if (overall.rank < 0) {
    solution.assignment = incumbent;
  } else {
    std::vector<PartState> parts = state.parts;
    decode(overall.rank, parts);
    solution.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) solution.assignment[i] = {parts[i].seq, parts[i].pos};
  }
  return solution;
}

MpcStep mpc_step(const LagrangianState& state, bool arrival, long long k,
                 const JobTracker& jobs, const FhocpConfig& config,
                 const PlantTopology& topology, const SequenceSet& sequences) {
  std::vector<CompatibilityRecord> records;
  records.reserve(state.parts.size());
  for (const auto& part : state.parts)
    records.push_back(compatibility_set(part, sequences, jobs, k, topology));

  FhocpSolution solution = solve_fhocp(state, records, config, topology, sequences);
  LagrangianState rewritten = state.parts.empty() ? state : apply_assignment(state, solution.assignment);
  InputVector input = greedy_policy(rewritten, arrival, topology, sequences);
  return {std::move(input), std::move(rewritten), std::move(solution)};
}

}  // namespace plantroute
