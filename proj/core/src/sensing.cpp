#include "mapel/sensing.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include "mapel/errors.hpp"

namespace mapel {

std::vector<Coord> supercover(Coord a, Coord b) {
  // Integer DDA between cell centers. When the segment crosses exactly
  // through a grid corner both side cells are emitted.
  std::vector<Coord> out;
  const int dx = std::abs(b.col - a.col);
  const int dy = std::abs(b.row - a.row);
  const int sx = b.col >= a.col ? 1 : -1;
  const int sy = b.row >= a.row ? 1 : -1;
  out.reserve(static_cast<std::size_t>(dx + dy + 1));
  int x = a.col;
  int y = a.row;
  out.push_back({y, x});
  const int ddx = 2 * dx;
  const int ddy = 2 * dy;
  if (ddx >= ddy) {
    int error = dx;
    int prev = dx;
    for (int i = 0; i < dx; ++i) {
      x += sx;
      error += ddy;
      if (error > ddx) {
        y += sy;
        error -= ddx;
        if (error + prev < ddx) {
          out.push_back({y - sy, x});
        } else if (error + prev > ddx) {
          out.push_back({y, x - sx});
        } else {
          out.push_back({y - sy, x});
          out.push_back({y, x - sx});
        }
      }
      out.push_back({y, x});
      prev = error;
    }
  } else {
    int error = dy;
    int prev = dy;
    for (int i = 0; i < dy; ++i) {
      y += sy;
      error += ddx;
      if (error > ddy) {
        x += sx;
        error -= ddy;
        if (error + prev < ddy) {
          out.push_back({y, x - sx});
        } else if (error + prev > ddy) {
          out.push_back({y - sy, x});
        } else {
          out.push_back({y, x - sx});
          out.push_back({y - sy, x});
        }
      }
      out.push_back({y, x});
      prev = error;
    }
  }
  return out;
}

bool line_of_sight(const Grid& grid, Coord a, Coord b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b)) throw OutOfBounds("line_of_sight endpoint outside the grid");
  if (a == b) return true;
  const auto cells = supercover(a, b);
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (grid.at(cells[i]) == Cell::Obstacle) return false;
  }
  return true;
}

int VisibilityMask::count() const { return static_cast<int>(std::count(mask.begin(), mask.end(), 1)); }

SenseRect sense_rect(const GameConfig& config, const Grid& grid, Coord center) {
  const int half_rows = config.sense_length / 2;
  const int half_cols = config.sense_width / 2;
  return {std::max(0, center.row - half_rows), std::min(grid.rows() - 1, center.row + half_rows),
          std::max(0, center.col - half_cols), std::min(grid.cols() - 1, center.col + half_cols)};
}

namespace {

void fill_mask(const GameConfig& config, const Grid& grid, Coord pos, std::span<std::uint8_t> out) {
  const SenseRect rect = sense_rect(config, grid, pos);
  for (int r = rect.row_lo; r <= rect.row_hi; ++r) {
    for (int c = rect.col_lo; c <= rect.col_hi; ++c) {
      if (line_of_sight(grid, pos, {r, c})) out[grid.index({r, c})] = 1;
    }
  }
}

}  // namespace

VisibilityMask visibility_mask(const GameConfig& config, const GameState& state, AgentId agent) {
  const Grid& grid = *state.grid;
  VisibilityMask vm{agent, grid.rows(), grid.cols(), std::vector<std::uint8_t>(grid.size(), 0)};
  fill_mask(config, grid, state.position(agent), vm.mask);
  return vm;
}

int Observation::popcount(Plane p) const {
  const auto view = plane(p);
  return static_cast<int>(std::count(view.begin(), view.end(), 1));
}

Observation observe(const GameConfig& config, const GameState& state, AgentId agent) {
  const Grid& grid = *state.grid;
  const Coord self = state.position(agent);
  const auto n = grid.size();
  Observation obs{agent, grid.rows(), grid.cols(), std::vector<std::uint8_t>(kNumPlanes * n, 0)};
  auto plane = [&](Plane p) { return std::span<std::uint8_t>(obs.planes).subspan(static_cast<std::size_t>(p) * n, n); };

  auto vis = plane(Plane::Visibility);
  fill_mask(config, grid, self, vis);
  plane(Plane::Self)[grid.index(self)] = 1;

  const auto& mates = agent.team == Team::Pursuer ? state.pursuers : state.evaders;
  auto teammates = plane(Plane::Teammates);
  for (std::size_t i = 0; i < mates.size(); ++i) {
    if (static_cast<int>(i) != agent.index) teammates[grid.index(mates[i])] = 1;
  }

  auto target = plane(Plane::Target);
  for (Coord t : state.targets) target[grid.index(t)] = 1;

  const auto& opponents = agent.team == Team::Pursuer ? state.evaders : state.pursuers;
  auto seen = plane(Plane::Opponents);
  for (Coord o : opponents) {
    if (vis[grid.index(o)] != 0) seen[grid.index(o)] = 1;
  }
  return obs;
}

std::vector<Observation> observe_team(const GameConfig& config, const GameState& state, Team team) {
  const auto count = team == Team::Pursuer ? state.pursuers.size() : state.evaders.size();
  std::vector<Observation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(observe(config, state, {team, static_cast<int>(i)}));
  return out;
}

}  // namespace mapel
