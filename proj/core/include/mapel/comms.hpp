#pragma once

// Situation-report topologies over a team and the per-step binary flags
// exchanged along them.

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "mapel/rng.hpp"
#include "mapel/sensing.hpp"

namespace mapel {

enum class CommKind : std::uint8_t { P2PSR, RSR };

std::string_view to_string(CommKind k);
CommKind comm_kind_from_string(std::string_view s);

struct Topology {
  CommKind kind = CommKind::P2PSR;
  int n_agents = 0;
  /// Unordered message edges, stored as (low, high) and sorted.
  std::vector<std::pair<int, int>> message_edges;
  /// One self-loop per agent carrying its recurrent state across steps.
  int temporal_edges = 0;
  /// Ring order; identity for P2PSR.
  std::vector<int> ring;

  int degree(int agent) const;
};

/// P2PSR: complete graph. RSR: a uniformly random cycle, drawn once per
/// episode; for n <= 3 its edge set coincides with the complete graph.
Topology build_topology(CommKind kind, int n, Rng& rng);

/// Width of the gathered report vector an agent receives.
int report_width(CommKind kind, int n);

/// 1 iff an opponent or a target cell lies inside the observation space.
std::uint8_t report_flag(const Observation& observation, std::span<const Coord> targets);
std::uint8_t report_flag(const Observation& observation);

/// Flags received by `agent`: other agents in ascending id (P2PSR), or
/// (predecessor, successor) around the ring (RSR). Throws UnknownAgent.
std::vector<std::uint8_t> gather(const Topology& topology, std::span<const std::uint8_t> flags, int agent);

}  // namespace mapel
