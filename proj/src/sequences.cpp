#include "plantroute/sequences.hpp"

#include <sstream>
#include <stdexcept>

#include "plantroute/config_text.hpp"
#include "plantroute/eulerian.hpp"
#include "plantroute/example_data.hpp"

namespace plantroute {

SequenceSet::SequenceSet(std::vector<Sequence> sequences)
    : sequences_(std::move(sequences)) {
  // Index 0 is a dummy so that s and p can be used directly.
  offsets_.assign(sequences_.size() + 1, 0);
  lengths_.assign(sequences_.size() + 1, 0);
  nodes_.push_back(0);
  for (std::size_t s = 0; s < sequences_.size(); ++s) {
    offsets_[s + 1] = nodes_.size() - 1;  // so offsets_[s] + 1 is the first entry
    lengths_[s + 1] = sequences_[s].length();
    for (const auto& e : sequences_[s].entries) nodes_.push_back(e.node);
  }
}

const Sequence& SequenceSet::sequence(int s) const {
  if (!contains(s))
    throw std::domain_error("sequence index " + std::to_string(s) + " outside 1.." +
                            std::to_string(count()));
  return sequences_[static_cast<std::size_t>(s - 1)];
}

SequenceEntry entry(const SequenceSet& set, int s, int p) {
  const Sequence& seq = set.sequence(s);
  if (p < 1 || p > seq.length())
    throw std::domain_error("position " + std::to_string(p) + " outside 1.." +
                            std::to_string(seq.length()) + " of sequence " + std::to_string(s));
  return seq.entries[static_cast<std::size_t>(p - 1)];
}

int remaining_steps(const SequenceSet& set, const PartState& part) {
  const Sequence& seq = set.sequence(part.seq);
  if (part.pos < 1 || part.pos > seq.length())
    throw std::domain_error("part " + std::to_string(part.id) + " has position " +
                            std::to_string(part.pos) + " outside sequence " +
                            std::to_string(part.seq));
  return seq.length() - part.pos;
}

std::vector<SequenceIssue> validate_sequence(const Sequence& sequence,
                                             const PlantTopology& topology) {
  using Kind = SequenceIssue::Kind;
  std::vector<SequenceIssue> issues;
  const auto& e = sequence.entries;
  const int n = sequence.length();
  if (n == 0) {
    issues.push_back({Kind::kEmpty, 0, "sequence is empty"});
    return issues;
  }

  bool nodes_ok = true;
  for (int p = 1; p <= n; ++p) {
    const auto& cur = e[static_cast<std::size_t>(p - 1)];
    if (!topology.contains_node(cur.node)) {
      nodes_ok = false;
      issues.push_back({Kind::kNodeOutOfRange, p, "node " + std::to_string(cur.node) + " is not a plant node"});
    }
    if (cur.goal != kOutside && !topology.contains_node(cur.goal))
      issues.push_back({Kind::kGoalOutOfRange, p, "goal " + std::to_string(cur.goal) + " is neither 0 nor a plant node"});
  }
  if (!nodes_ok) return issues;

  for (int p = 1; p < n; ++p) {
    NodeId a = e[static_cast<std::size_t>(p - 1)].node;
    NodeId b = e[static_cast<std::size_t>(p)].node;
    if (a != b && !topology.has_transition(a, b))
      issues.push_back({Kind::kInvalidMove, p,
                        "no transition " + std::to_string(a) + "->" + std::to_string(b)});
  }

  for (int p = 1; p <= n;) {
    NodeId h = e[static_cast<std::size_t>(p - 1)].node;
    int run = 1;
    while (p + run <= n && e[static_cast<std::size_t>(p + run - 1)].node == h) ++run;
    if (topology.is_machine(h)) {
      int need = min_machine_dwell(topology.job_duration(h));
      if (run < need)
        issues.push_back({Kind::kShortMachineDwell, p,
                          "machine " + std::to_string(h) + " held for " + std::to_string(run) +
                              " entries, needs " + std::to_string(need)});
    }
    p += run;
  }

  if (e.back().node != topology.unloading_node())
    issues.push_back({Kind::kDoesNotEndAtUnloading, n,
                      "last node " + std::to_string(e.back().node) + " is not the unloading node " +
                          std::to_string(topology.unloading_node())});
  return issues;
}

namespace {

SequenceEntry parse_entry(std::string_view token, const std::string& source, int line) {
  auto colon = token.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError(source, line, "expected 'h : g', got '" + std::string(token) + "'");
  return {static_cast<NodeId>(text::parse_int(text::trim(token.substr(0, colon)), source, line)),
          static_cast<NodeId>(text::parse_int(text::trim(token.substr(colon + 1)), source, line))};
}

}  // namespace

SequenceSet parse_sequences(std::string_view text, const std::string& source) {
  std::vector<Sequence> sequences;
  for (const auto& section : split_sections(text, source)) {
    if (section.name != "sequence")
      throw ConfigError(source, section.header_line, "unknown section [" + section.name + "]");
    const int expected = static_cast<int>(sequences.size()) + 1;
    if (!section.argument.empty()) {
      auto idx = text::parse_int(section.argument, source, section.header_line);
      if (idx != expected)
        throw ConfigError(source, section.header_line,
                          "sequence index " + std::to_string(idx) + " out of order, expected " +
                              std::to_string(expected));
    }
    Sequence seq;
    for (const auto& line : section.lines) {
      auto tokens = text::split_ws(line.text);
      if (tokens.size() == 3 && tokens[1] == ":") {
        seq.entries.push_back(parse_entry(tokens[0] + ":" + tokens[2], source, line.number));
        continue;
      }
      for (const auto& token : tokens) seq.entries.push_back(parse_entry(token, source, line.number));
    }
    if (seq.entries.empty())
      throw ConfigError(source, section.header_line, "sequence " + std::to_string(expected) + " is empty");
    sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) throw ConfigError(source, 0, "no [sequence] blocks");
  return SequenceSet(std::move(sequences));
}

std::vector<std::string> validate_sequence_set(const SequenceSet& set,
                                               const PlantTopology& topology) {
  std::vector<std::string> out;
  for (int s = 1; s <= set.count(); ++s)
    for (const auto& issue : validate_sequence(set.sequence(s), topology))
      out.push_back("sequence " + std::to_string(s) + " position " + std::to_string(issue.position) +
                    ": " + issue.message);
  return out;
}

SequenceSet load_sequences(const std::string& path, const PlantTopology& topology,
                           bool allow_invalid) {
  SequenceSet set = parse_sequences(read_text_file(path), path);
  if (!allow_invalid) {
    auto issues = validate_sequence_set(set, topology);
    if (!issues.empty()) {
      std::string msg = "invalid sequences:";
      for (const auto& issue : issues) msg += "\n  " + issue;
      throw ConfigError(path, 0, msg);
    }
  }
  return set;
}

std::string format_sequences(const SequenceSet& set) {
  std::ostringstream os;
  for (int s = 1; s <= set.count(); ++s) {
    if (s > 1) os << "\n";
    os << "[sequence " << s << "]\n";
    const auto& entries = set.sequence(s).entries;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      os << entries[i].node << ":" << entries[i].goal;
      os << ((i + 1) % 8 == 0 || i + 1 == entries.size() ? "\n" : " ");
    }
  }
  return os.str();
}

SequenceSet build_example_sequences(const PlantTopology& topology) {
  SequenceSet set = parse_sequences(example_sequences_config(), "builtin:example-sequences");
  auto issues = validate_sequence_set(set, topology);
  if (!issues.empty())
    throw std::invalid_argument("bundled sequences do not fit this topology: " + issues.front());
  return set;
}

}  // namespace plantroute
