#include "mapel/naive.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>

namespace mapel {

std::optional<Path> bfs_shortest_path(const Grid& grid, Coord from, std::span<const Coord> goals) {
  if (!grid.passable(from)) return std::nullopt;
  std::vector<std::uint8_t> is_goal(grid.size(), 0);
  for (Coord g : goals) {
    if (grid.in_bounds(g)) is_goal[grid.index(g)] = 1;
  }
  constexpr auto kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> parent(grid.size(), kUnseen);
  std::deque<Coord> frontier{from};
  parent[grid.index(from)] = grid.index(from);
  while (!frontier.empty()) {
    const Coord c = frontier.front();
    frontier.pop_front();
    if (is_goal[grid.index(c)] != 0) {
      Path path;
      for (std::size_t i = grid.index(c);; i = parent[i]) {
        path.push_back(grid.coord(i));
        if (i == grid.index(from)) break;
      }
      return Path(path.rbegin(), path.rend());
    }
    for (Action a : kMoveActions) {
      const Coord n = apply(c, a);
      if (grid.passable(n) && parent[grid.index(n)] == kUnseen) {
        parent[grid.index(n)] = grid.index(c);
        frontier.push_back(n);
      }
    }
  }
  return std::nullopt;
}

double distance_to_line(Coord from, Coord goal, Coord cell) {
  const double dr = goal.row - from.row;
  const double dc = goal.col - from.col;
  const double len = std::hypot(dr, dc);
  if (len == 0.0) return std::hypot(cell.row - from.row, cell.col - from.col);
  return std::abs(dr * (cell.col - from.col) - dc * (cell.row - from.row)) / len;
}

namespace {

constexpr double kTie = 1e-9;

Coord pick_closest(std::span<const Coord> cells, Coord from, Coord goal, Rng& rng) {
  double best = std::numeric_limits<double>::infinity();
  for (Coord c : cells) best = std::min(best, distance_to_line(from, goal, c));
  std::vector<Coord> tied;
  for (Coord c : cells) {
    if (distance_to_line(from, goal, c) <= best + kTie) tied.push_back(c);
  }
  return tied.size() == 1 ? tied.front() : tied[rng.below(tied.size())];
}

}  // namespace

Coord line_step(Coord from, Coord goal, const Grid& grid, Rng& rng) {
  if (from == goal) return from;
  const int dr = goal.row - from.row;
  const int dc = goal.col - from.col;
  const int dist = manhattan(from, goal);

  std::vector<Coord> forward;
  for (Action a : kMoveActions) {
    const Coord n = apply(from, a);
    if (grid.in_bounds(n) && manhattan(n, goal) < dist) forward.push_back(n);
  }
  if (!forward.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (Coord c : forward) best = std::min(best, distance_to_line(from, goal, c));
    std::vector<Coord> free;
    for (Coord c : forward) {
      if (distance_to_line(from, goal, c) <= best + kTie && grid.passable(c)) free.push_back(c);
    }
    if (!free.empty()) return free.size() == 1 ? free.front() : free[rng.below(free.size())];
  }

  // Detour: never step backwards along the dominant axis.
  Coord reverse = from;
  if (std::abs(dr) > std::abs(dc)) {
    reverse = {from.row - (dr > 0 ? 1 : -1), from.col};
  } else if (std::abs(dc) > std::abs(dr)) {
    reverse = {from.row, from.col - (dc > 0 ? 1 : -1)};
  }
  std::vector<Coord> detours;
  for (Action a : kMoveActions) {
    const Coord n = apply(from, a);
    if (n != reverse && grid.passable(n)) detours.push_back(n);
  }
  if (detours.empty()) return from;
  return pick_closest(detours, from, goal, rng);
}

NaiveViewStorage collect_naive_knowledge(const GameState& state, const Observation& obs) {
  NaiveViewStorage out;
  const AgentId self = obs.owner;
  const auto& mates = self.team == Team::Pursuer ? state.pursuers : state.evaders;
  for (std::size_t i = 0; i < mates.size(); ++i) {
    if (static_cast<int>(i) != self.index) out.teammates.push_back(mates[i]);
  }
  if (self.team == Team::Pursuer) {
    for (std::size_t e = 0; e < state.evaders.size(); ++e) {
      if (!state.evader_captured[e] && obs.at(Plane::Opponents, state.evaders[e])) {
        out.visible_opponents.push_back(state.evaders[e]);
      }
    }
  } else {
    for (Coord p : state.pursuers) {
      if (obs.at(Plane::Opponents, p)) out.visible_opponents.push_back(p);
    }
  }
  return out;
}

Action action_towards(Coord from, Coord to) {
  if (to.row == from.row - 1 && to.col == from.col) return Action::Up;
  if (to.row == from.row + 1 && to.col == from.col) return Action::Down;
  if (to.row == from.row && to.col == from.col - 1) return Action::Left;
  if (to.row == from.row && to.col == from.col + 1) return Action::Right;
  return Action::Stay;
}

Action naive_decide(const NaiveView& view, Team role) {
  const Observation& obs = view.observation;
  bool target_visible = false;
  for (Coord t : view.targets) target_visible = target_visible || obs.at(Plane::Visibility, t);

  std::optional<Path> best;
  auto consider = [&](std::span<const Coord> goals) {
    auto path = bfs_shortest_path(view.grid, view.self, goals);
    if (path && (!best || path->size() < best->size())) best = std::move(path);
  };
  if (target_visible) consider(view.targets);
  if (role == Team::Pursuer) {
    for (const Coord& opponent : view.visible_opponents) consider(std::span<const Coord>(&opponent, 1));
  }
  if (best) return best->size() > 1 ? action_towards(view.self, (*best)[1]) : Action::Stay;

  const auto to_target = bfs_shortest_path(view.grid, view.self, view.targets);
  const Coord goal = to_target ? to_target->back() : view.targets.front();
  return action_towards(view.self, line_step(view.self, goal, view.grid, view.rng));
}

}  // namespace mapel
