#include "mapel/comms.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mapel/errors.hpp"

namespace mapel {

std::string_view to_string(CommKind k) { return k == CommKind::P2PSR ? "p2psr" : "rsr"; }

CommKind comm_kind_from_string(std::string_view s) {
  if (s == "p2psr") return CommKind::P2PSR;
  if (s == "rsr") return CommKind::RSR;
  throw ConfigError("unknown topology kind '" + std::string(s) + "'");
}

int Topology::degree(int agent) const {
  return static_cast<int>(std::count_if(message_edges.begin(), message_edges.end(),
                                        [agent](const auto& e) { return e.first == agent || e.second == agent; }));
}

Topology build_topology(CommKind kind, int n, Rng& rng) {
  Topology t;
  t.kind = kind;
  t.n_agents = n;
  t.temporal_edges = n;
  t.ring.resize(static_cast<std::size_t>(n));
  std::iota(t.ring.begin(), t.ring.end(), 0);
  if (kind == CommKind::RSR) rng.shuffle(std::span<int>(t.ring));

  if (kind == CommKind::P2PSR || n <= 3) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) t.message_edges.emplace_back(i, j);
    }
    return t;
  }
  for (int k = 0; k < n; ++k) {
    const int a = t.ring[static_cast<std::size_t>(k)];
    const int b = t.ring[static_cast<std::size_t>((k + 1) % n)];
    t.message_edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(t.message_edges.begin(), t.message_edges.end());
  return t;
}

int report_width(CommKind kind, int n) {
  if (n <= 1) return 0;
  return kind == CommKind::P2PSR ? n - 1 : 2;
}

std::uint8_t report_flag(const Observation& observation, std::span<const Coord> targets) {
  if (observation.popcount(Plane::Opponents) > 0) return 1;
  for (Coord t : targets) {
    if (observation.at(Plane::Visibility, t)) return 1;
  }
  return 0;
}

std::uint8_t report_flag(const Observation& observation) {
  const auto vis = observation.plane(Plane::Visibility);
  const auto opp = observation.plane(Plane::Opponents);
  const auto tgt = observation.plane(Plane::Target);
  for (std::size_t i = 0; i < vis.size(); ++i) {
    if (opp[i] != 0 || (tgt[i] != 0 && vis[i] != 0)) return 1;
  }
  return 0;
}

std::vector<std::uint8_t> gather(const Topology& topology, std::span<const std::uint8_t> flags, int agent) {
  const int n = topology.n_agents;
  if (agent < 0 || agent >= n) throw UnknownAgent("agent " + std::to_string(agent) + " not in topology");
  if (static_cast<int>(flags.size()) != n) throw ShapeMismatch("flag vector length differs from team size");
  std::vector<std::uint8_t> out;
  if (n <= 1) return out;
  if (topology.kind == CommKind::P2PSR) {
    for (int i = 0; i < n; ++i) {
      if (i != agent) out.push_back(flags[static_cast<std::size_t>(i)]);
    }
    return out;
  }
  const auto& ring = topology.ring;
  const auto pos = static_cast<int>(std::find(ring.begin(), ring.end(), agent) - ring.begin());
  const int pred = ring[static_cast<std::size_t>((pos + n - 1) % n)];
  const int succ = ring[static_cast<std::size_t>((pos + 1) % n)];
  out.push_back(flags[static_cast<std::size_t>(pred)]);
  out.push_back(flags[static_cast<std::size_t>(succ)]);
  return out;
}

}  // namespace mapel
