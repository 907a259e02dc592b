#pragma once

// Line-of-sight visibility inside an agent's sensing rectangle and the
// five-plane binary observation built from it.

#include <cstdint>
#include <span>
#include <vector>

#include "mapel/env.hpp"

namespace mapel {

/// Every cell touched by the segment joining the centers of `a` and `b`,
/// including cells touched only at a corner. Order follows the walk a -> b.
std::vector<Coord> supercover(Coord a, Coord b);

/// True iff no obstacle lies on the supercover of a -> b, ignoring `a`
/// itself. `b` blocks when it is an obstacle. Throws OutOfBounds.
bool line_of_sight(const Grid& grid, Coord a, Coord b);

struct VisibilityMask {
  AgentId owner;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> mask;  // rows * cols, row-major

  bool at(Coord c) const { return mask[static_cast<std::size_t>(c.row * cols + c.col)] != 0; }
  int count() const;
};

/// Inclusive row/column bounds of the sensing rectangle around `center`,
/// clipped to the grid.
struct SenseRect {
  int row_lo, row_hi, col_lo, col_hi;
  bool contains(Coord c) const { return c.row >= row_lo && c.row <= row_hi && c.col >= col_lo && c.col <= col_hi; }
};
SenseRect sense_rect(const GameConfig& config, const Grid& grid, Coord center);

VisibilityMask visibility_mask(const GameConfig& config, const GameState& state, AgentId agent);

enum class Plane : int { Visibility = 0, Self = 1, Teammates = 2, Target = 3, Opponents = 4 };
inline constexpr int kNumPlanes = 5;

struct Observation {
  AgentId owner;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> planes;  // kNumPlanes * rows * cols, plane-major

  std::span<const std::uint8_t> plane(Plane p) const {
    const auto n = static_cast<std::size_t>(rows * cols);
    return std::span<const std::uint8_t>(planes).subspan(static_cast<std::size_t>(p) * n, n);
  }
  bool at(Plane p, Coord c) const { return plane(p)[static_cast<std::size_t>(c.row * cols + c.col)] != 0; }
  int popcount(Plane p) const;
};

Observation observe(const GameConfig& config, const GameState& state, AgentId agent);

/// Observations of every agent of `team`, in index order.
std::vector<Observation> observe_team(const GameConfig& config, const GameState& state, Team team);

}  // namespace mapel
