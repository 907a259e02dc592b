#pragma once

// Greedy baseline: straight-line advance toward the target, shortest-path
// interception of whatever is visible.

#include <optional>
#include <span>
#include <vector>

#include "mapel/env.hpp"
#include "mapel/rng.hpp"
#include "mapel/sensing.hpp"

namespace mapel {

using Path = std::vector<Coord>;

/// Minimum-length 4-adjacent path over non-obstacle cells from `from` to any
/// cell of `goals`, both endpoints included. Neighbors are expanded in the
/// order Up, Down, Left, Right, which fixes tie-breaking. Agent-occupied
/// cells are passable. Returns nullopt when no goal is reachable.
std::optional<Path> bfs_shortest_path(const Grid& grid, Coord from, std::span<const Coord> goals);

/// Perpendicular distance from the center of `cell` to the line through the
/// centers of `from` and `goal`.
double distance_to_line(Coord from, Coord goal, Coord cell);

/// One straight-line step from `from` toward `goal`.
///
/// The forward neighbor closest to the from->goal line is taken when free.
/// Otherwise a uniformly random choice among the passable neighbors closest
/// to the line, never reversing along the dominant axis of travel. Returns
/// `from` when no neighbor qualifies.
Coord line_step(Coord from, Coord goal, const Grid& grid, Rng& rng);

/// What a naive agent is allowed to know.
struct NaiveView {
  const Observation& observation;
  const Grid& grid;
  Coord self;
  std::span<const Coord> teammates;
  std::span<const Coord> targets;
  /// Live opponents inside the visibility mask.
  std::span<const Coord> visible_opponents;
  Rng& rng;
};

struct NaiveViewStorage {
  std::vector<Coord> teammates;
  std::vector<Coord> visible_opponents;
};

/// Teammate positions and visible live opponents for the owner of `obs`.
/// Opponents outside the visibility mask and captured evaders are left out.
NaiveViewStorage collect_naive_knowledge(const GameState& state, const Observation& obs);

Action naive_decide(const NaiveView& view, Team role);

/// Action that moves `from` to the adjacent (or same) cell `to`.
Action action_towards(Coord from, Coord to);

}  // namespace mapel
