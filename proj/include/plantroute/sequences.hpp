#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plantroute/part_state.hpp"
#include "plantroute/topology.hpp"

namespace plantroute {

struct SequenceEntry {
  NodeId node = 0;
  NodeId goal = 0;  // 0 means "outside"

  friend bool operator==(const SequenceEntry&, const SequenceEntry&) = default;
};

/// A precomputed path: consecutive entries either repeat the node (hold) or
/// follow a direct transition (move). Positions are 1-based.
struct Sequence {
  std::vector<SequenceEntry> entries;

  int length() const { return static_cast<int>(entries.size()); }
  friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Sequences indexed 1..count(). Immutable once built.
class SequenceSet {
 public:
  SequenceSet() = default;
  explicit SequenceSet(std::vector<Sequence> sequences);

  int count() const { return static_cast<int>(sequences_.size()); }
  bool contains(int s) const { return s >= 1 && s <= count(); }
  /// Throws std::domain_error for an index outside 1..count().
  const Sequence& sequence(int s) const;
  const std::vector<Sequence>& all() const { return sequences_; }

  // Unchecked accessors for the hot paths (s, p already validated).
  int length_unchecked(int s) const { return lengths_[static_cast<std::size_t>(s)]; }
  NodeId node_unchecked(int s, int p) const {
    return nodes_[offsets_[static_cast<std::size_t>(s)] + static_cast<std::size_t>(p)];
  }

  friend bool operator==(const SequenceSet& a, const SequenceSet& b) {
    return a.sequences_ == b.sequences_;
  }

 private:
  std::vector<Sequence> sequences_;
  // Flattened node column; offsets_[s] + p addresses entry p of sequence s.
  std::vector<NodeId> nodes_;
  std::vector<std::size_t> offsets_;
  std::vector<int> lengths_;
};

/// (S(s)^(1,p), S(s)^(2,p)). Throws std::domain_error when out of range.
SequenceEntry entry(const SequenceSet& set, int s, int p);

/// r = card(S(s)) - p. Throws std::domain_error for an invalid reference.
int remaining_steps(const SequenceSet& set, const PartState& part);

struct SequenceIssue {
  enum class Kind {
    kEmpty,
    kNodeOutOfRange,
    kGoalOutOfRange,
    kInvalidMove,
    kShortMachineDwell,
    kDoesNotEndAtUnloading,
  };
  Kind kind;
  int position;  // 1-based; 0 for whole-sequence issues
  std::string message;
};

std::vector<SequenceIssue> validate_sequence(const Sequence& sequence,
                                             const PlantTopology& topology);

/// Reads `[sequence]` blocks of "h : g" entries (several "h:g" tokens per
/// line are also accepted). Blocks are numbered 1, 2, ... in file order; an
/// explicit `[sequence N]` must match that numbering. Does not validate.
SequenceSet parse_sequences(std::string_view text, const std::string& source);

/// Parses and validates every sequence against `topology`. Sequences with
/// issues are rejected with a ConfigError unless `allow_invalid` is set.
SequenceSet load_sequences(const std::string& path, const PlantTopology& topology,
                           bool allow_invalid = false);

/// Validates all sequences; issues are prefixed with the sequence index.
std::vector<std::string> validate_sequence_set(const SequenceSet& set,
                                               const PlantTopology& topology);

std::string format_sequences(const SequenceSet& set);

/// The single master path used on the example plant: machine 12, then
/// machine 11, then out through node 10, with repeated loop passes over
/// nodes 2..7 and duplicated entries that let a part wait in place.
SequenceSet build_example_sequences(const PlantTopology& topology);

}  // namespace plantroute
