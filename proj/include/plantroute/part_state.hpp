#pragma once

#include <cstdint>
#include <vector>

namespace plantroute {

/// Lagrangian state of one part: the sequence it follows, its 1-based
/// position on that sequence and the steps elapsed since it was loaded.
struct PartState {
  int seq = 1;
  int pos = 1;
  long long elapsed = 0;
  std::int64_t id = 0;  // stable across steps; used for logging and tie-breaks

  friend bool operator==(const PartState&, const PartState&) = default;
};

/// All parts currently in the plant, in insertion order.
struct LagrangianState {
  std::vector<PartState> parts;
  std::int64_t next_id = 1;

  int part_count() const { return static_cast<int>(parts.size()); }
  friend bool operator==(const LagrangianState&, const LagrangianState&) = default;
};

}  // namespace plantroute
