#include "plantroute/topology.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "plantroute/config_text.hpp"
#include "plantroute/example_data.hpp"

namespace plantroute {

PlantTopology::PlantTopology(int node_count, std::vector<Transition> transitions,
                             std::map<NodeId, int> machines, NodeId loading_node,
                             NodeId unloading_node)
    : node_count_(node_count),
      transitions_(std::move(transitions)),
      machines_(std::move(machines)),
      loading_(loading_node),
      unloading_(unloading_node) {
  if (node_count_ < 0) throw std::invalid_argument("negative node count");
  std::sort(transitions_.begin(), transitions_.end());
  if (std::adjacent_find(transitions_.begin(), transitions_.end()) != transitions_.end())
    throw std::invalid_argument("duplicate transition");

  const auto width = static_cast<std::size_t>(node_count_ + 1);
  index_table_.assign(width * width, -1);
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    const auto& t = transitions_[i];
    if (t.from < 0 || t.from > node_count_ || t.to < 0 || t.to > node_count_) continue;
    index_table_[static_cast<std::size_t>(t.from) * width + static_cast<std::size_t>(t.to)] =
        static_cast<int>(i);
  }
  machine_duration_.assign(width, 0);
  for (auto [m, duration] : machines_)
    if (m >= 1 && m <= node_count_) machine_duration_[m] = std::max(duration, 0);
}

std::optional<std::size_t> PlantTopology::transition_index(NodeId from,
                                                           NodeId to) const {
  if (from < 0 || from > node_count_ || to < 0 || to > node_count_) return std::nullopt;
  const auto width = static_cast<std::size_t>(node_count_ + 1);
  int idx = index_table_[static_cast<std::size_t>(from) * width + static_cast<std::size_t>(to)];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

int PlantTopology::job_duration(NodeId m) const {
  auto it = machines_.find(m);
  if (it == machines_.end())
    throw std::domain_error("node " + std::to_string(m) + " is not a machine");
  return it->second;
}

namespace {

void require_node(const PlantTopology& topology, NodeId h) {
  if (!topology.contains_node(h))
    throw std::domain_error("unknown node id " + std::to_string(h));
}

}  // namespace

std::vector<NodeId> outgoing_set(const PlantTopology& topology, NodeId h) {
  require_node(topology, h);
  std::vector<NodeId> out;
  for (const auto& t : topology.transitions())
    if (t.from == h) out.push_back(t.to);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> incoming_set(const PlantTopology& topology, NodeId h) {
  require_node(topology, h);
  std::vector<NodeId> in;
  for (const auto& t : topology.transitions())
    if (t.to == h) in.push_back(t.from);
  std::sort(in.begin(), in.end());
  return in;
}

std::vector<TopologyIssue> validate_topology(const PlantTopology& topology) {
  using Kind = TopologyIssue::Kind;
  std::vector<TopologyIssue> issues;
  auto add = [&](Kind kind, std::string message) {
    issues.push_back({kind, std::move(message)});
  };
  auto edge_str = [](const Transition& t) {
    return "(" + std::to_string(t.from) + "," + std::to_string(t.to) + ")";
  };

  const int n = topology.node_count();
  if (n < 1) add(Kind::kNodeCount, "plant must have at least one node");

  const NodeId load = topology.loading_node();
  const NodeId unload = topology.unloading_node();
  const bool io_ok = topology.contains_node(load) && topology.contains_node(unload);
  if (!topology.contains_node(load))
    add(Kind::kIoNodeOutOfRange, "loading node " + std::to_string(load) + " outside 1.." + std::to_string(n));
  if (!topology.contains_node(unload))
    add(Kind::kIoNodeOutOfRange, "unloading node " + std::to_string(unload) + " outside 1.." + std::to_string(n));

  for (const auto& t : topology.transitions()) {
    if (t.from < 0 || t.from > n || t.to < 0 || t.to > n) {
      add(Kind::kEndpointOutOfRange, "transition " + edge_str(t) + " has an endpoint outside 0.." + std::to_string(n));
      continue;
    }
    if (t.from == t.to) {
      add(Kind::kSelfTransition, "self-transition " + edge_str(t));
      continue;
    }
    const bool is_load = t.from == kOutside && t.to == load;
    const bool is_unload = t.to == kOutside && t.from == unload;
    if ((t.from == kOutside || t.to == kOutside) && !is_load && !is_unload)
      add(Kind::kStrayOutsideTransition, "transition " + edge_str(t) + " touches the outside but is not the load/unload transition");
  }
  if (io_ok && !topology.has_transition(kOutside, load))
    add(Kind::kMissingLoadTransition, "missing load transition (0," + std::to_string(load) + ")");
  if (io_ok && !topology.has_transition(unload, kOutside))
    add(Kind::kMissingUnloadTransition, "missing unload transition (" + std::to_string(unload) + ",0)");

  for (auto [m, duration] : topology.machines()) {
    if (!topology.contains_node(m))
      add(Kind::kMachineOutOfRange, "machine " + std::to_string(m) + " outside 1.." + std::to_string(n));
    if (duration < 1)
      add(Kind::kBadJobDuration, "machine " + std::to_string(m) + " has job duration " + std::to_string(duration) + " < 1");
  }

  if (io_ok) {
    std::vector<char> seen(static_cast<std::size_t>(n + 1), 0);
    std::deque<NodeId> frontier{load};
    seen[load] = 1;
    while (!frontier.empty()) {
      NodeId h = frontier.front();
      frontier.pop_front();
      for (const auto& t : topology.transitions()) {
        if (t.from != h || t.to < 1 || t.to > n || seen[t.to]) continue;
        seen[t.to] = 1;
        frontier.push_back(t.to);
      }
    }
    if (!seen[unload])
      add(Kind::kUnreachableUnloading, "unloading node " + std::to_string(unload) + " is not reachable from loading node " + std::to_string(load));
  }
  return issues;
}

PlantTopology parse_topology(std::string_view text, const std::string& source) {
  auto sections = split_sections(text, source);
  std::optional<int> node_count;
  std::vector<Transition> edges;
  std::map<Transition, int> edge_lines;
  std::map<NodeId, int> machines;
  std::optional<NodeId> load;
  std::optional<NodeId> unload;

  for (const auto& section : sections) {
    if (section.name == "nodes") {
      for (const auto& line : section.lines) {
        if (node_count)
          throw ConfigError(source, line.number, "node count given twice");
        std::string value = line.text;
        if (value.find('=') != std::string::npos) {
          auto [key, v] = text::key_value(line, source);
          if (key != "count") throw ConfigError(source, line.number, "unknown key '" + key + "' in [nodes]");
          value = v;
        }
        node_count = static_cast<int>(text::parse_int(value, source, line.number));
      }
    } else if (section.name == "edges") {
      for (const auto& line : section.lines) {
        auto arrow = line.text.find("->");
        if (arrow == std::string::npos)
          throw ConfigError(source, line.number, "expected 'h -> j'");
        Transition t{
            static_cast<NodeId>(text::parse_int(text::trim(line.text.substr(0, arrow)), source, line.number)),
            static_cast<NodeId>(text::parse_int(text::trim(line.text.substr(arrow + 2)), source, line.number))};
        if (auto [it, inserted] = edge_lines.emplace(t, line.number); !inserted)
          throw ConfigError(source, line.number,
                            "duplicate edge (first given on line " + std::to_string(it->second) + ")");
        edges.push_back(t);
      }
    } else if (section.name == "machines") {
      for (const auto& line : section.lines) {
        auto colon = line.text.find(':');
        if (colon == std::string::npos)
          throw ConfigError(source, line.number, "expected 'm : L'");
        auto m = static_cast<NodeId>(text::parse_int(text::trim(line.text.substr(0, colon)), source, line.number));
        auto duration = static_cast<int>(text::parse_int(text::trim(line.text.substr(colon + 1)), source, line.number));
        if (!machines.emplace(m, duration).second)
          throw ConfigError(source, line.number, "machine " + std::to_string(m) + " listed twice");
      }
    } else if (section.name == "io") {
      for (const auto& line : section.lines) {
        for (const auto& token : text::split_ws(line.text)) {
          auto eq = token.find('=');
          if (eq == std::string::npos)
            throw ConfigError(source, line.number, "expected load=h or unload=h");
          std::string key = token.substr(0, eq);
          auto value = static_cast<NodeId>(text::parse_int(token.substr(eq + 1), source, line.number));
          if (key == "load") {
            if (load) throw ConfigError(source, line.number, "loading node given twice");
            load = value;
          } else if (key == "unload") {
            if (unload) throw ConfigError(source, line.number, "unloading node given twice");
            unload = value;
          } else {
            throw ConfigError(source, line.number, "unknown io key '" + key + "'");
          }
        }
      }
    } else {
      throw ConfigError(source, section.header_line, "unknown section [" + section.name + "]");
    }
  }

  if (!node_count) throw ConfigError(source, 0, "missing [nodes] count");
  if (!load || !unload) throw ConfigError(source, 0, "missing load=/unload= in [io]");

  for (Transition implied : {Transition{kOutside, *load}, Transition{*unload, kOutside}})
    if (!edge_lines.contains(implied)) edges.push_back(implied);

  return PlantTopology(*node_count, std::move(edges), std::move(machines), *load, *unload);
}

PlantTopology load_topology(const std::string& path) {
  PlantTopology topology = parse_topology(read_text_file(path), path);
  auto issues = validate_topology(topology);
  if (!issues.empty()) {
    std::string msg = "invalid topology:";
    for (const auto& issue : issues) msg += "\n  " + issue.message;
    throw ConfigError(path, 0, msg);
  }
  return topology;
}

std::string format_topology(const PlantTopology& topology) {
  std::ostringstream os;
  os << "[nodes]\n" << topology.node_count() << "\n\n[edges]\n";
  for (const auto& t : topology.transitions()) {
    if (t.from == kOutside && t.to == topology.loading_node()) continue;
    if (t.to == kOutside && t.from == topology.unloading_node()) continue;
    os << t.from << " -> " << t.to << "\n";
  }
  os << "\n[machines]\n";
  for (auto [m, duration] : topology.machines()) os << m << " : " << duration << "\n";
  os << "\n[io]\nload=" << topology.loading_node()
     << " unload=" << topology.unloading_node() << "\n";
  return os.str();
}

PlantTopology build_example_plant() {
  return parse_topology(example_plant_config(), "builtin:example-plant");
}

}  // namespace plantroute
