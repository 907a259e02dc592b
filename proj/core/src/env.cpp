#include "mapel/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "mapel/errors.hpp"
#include "mapel/rng.hpp"

namespace mapel {

namespace {

constexpr int kMaxPlacementAttempts = 1000;
constexpr int kMaxRectangleRedraws = 100;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
    case Action::Stay: return "stay";
  }
  return "?";
}

std::string_view to_string(GameStatus s) {
  switch (s) {
    case GameStatus::Ongoing: return "ongoing";
    case GameStatus::EvadersWinTarget: return "evaders_win_target";
    case GameStatus::PursuersWinTarget: return "pursuers_win_target";
    case GameStatus::PursuersWinCaptureAll: return "pursuers_win_capture_all";
    case GameStatus::Draw: return "draw";
  }
  return "?";
}

GameStatus status_from_string(std::string_view s) {
  for (int i = 0; i < kNumStatuses; ++i) {
    const auto status = static_cast<GameStatus>(i);
    if (to_string(status) == s) return status;
  }
  throw CorruptRecord("unknown game status '" + std::string(s) + "'");
}

void GameConfig::validate() const {
  require(width >= 4 && height >= 4, "grid must be at least 4x4");
  require(n_pursuers >= 1 && n_evaders >= 1, "each team needs at least one agent");
  require(sense_length >= 1 && sense_length % 2 == 1, "sense_length must be odd and >= 1");
  require(sense_width >= 1 && sense_width % 2 == 1, "sense_width must be odd and >= 1");
  require(speed == 1, "speed is fixed at 1 cell per step");
  require(target_size >= 1, "target_size must be >= 1");
  require(obstacle_count >= 0, "obstacle_count must be >= 0");
  require(obstacle_min >= 1 && obstacle_min <= obstacle_max, "obstacle size range must satisfy 1 <= min <= max");
  require(obstacle_max <= std::min(width, height), "obstacle_max exceeds the grid");
  require(max_steps >= 1, "max_steps must be >= 1");
  require(n_pursuers <= 2 * height && n_evaders <= 2 * height, "team does not fit in its spawn band");
}

Coord GameState::position(AgentId id) const {
  const auto& list = id.team == Team::Pursuer ? pursuers : evaders;
  if (id.index < 0 || id.index >= static_cast<int>(list.size())) {
    throw UnknownAgent("agent index " + std::to_string(id.index) + " out of range");
  }
  return list[static_cast<std::size_t>(id.index)];
}

bool GameState::is_live(AgentId id) const {
  position(id);
  return id.team == Team::Pursuer || !evader_captured[static_cast<std::size_t>(id.index)];
}

int GameState::live_evaders() const {
  return static_cast<int>(std::count(evader_captured.begin(), evader_captured.end(), false));
}

bool operator==(const GameState& a, const GameState& b) {
  const bool grids_equal = (a.grid == b.grid) || (a.grid && b.grid && *a.grid == *b.grid);
  return grids_equal && a.targets == b.targets && a.pursuers == b.pursuers && a.evaders == b.evaders &&
         a.evader_captured == b.evader_captured && a.step == b.step && a.status == b.status;
}

std::vector<Coord> target_footprint(Coord origin, int target_size) {
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(target_size))));
  std::vector<Coord> cells;
  cells.reserve(static_cast<std::size_t>(target_size));
  for (int i = 0; i < target_size; ++i) cells.push_back({origin.row + i / side, origin.col + i % side});
  return cells;
}

std::vector<bool> reachable_from(const Grid& grid, Coord start) {
  std::vector<bool> seen(grid.size(), false);
  if (!grid.passable(start)) return seen;
  std::deque<Coord> frontier{start};
  seen[grid.index(start)] = true;
  while (!frontier.empty()) {
    const Coord c = frontier.front();
    frontier.pop_front();
    for (Action a : kMoveActions) {
      const Coord n = apply(c, a);
      if (grid.passable(n) && !seen[grid.index(n)]) {
        seen[grid.index(n)] = true;
        frontier.push_back(n);
      }
    }
  }
  return seen;
}

namespace {

// Top-left corners whose footprint fits and whose centroid lies inside the
// (rows/4 x cols/4) box around the grid center, in cell-center coordinates.
std::vector<Coord> target_origins(const GameConfig& config) {
  const double center_row = config.height / 2.0;
  const double center_col = config.width / 2.0;
  const double half_rows = config.height / 8.0;
  const double half_cols = config.width / 8.0;
  std::vector<Coord> origins;
  for (int r = 0; r < config.height; ++r) {
    for (int c = 0; c < config.width; ++c) {
      const auto cells = target_footprint({r, c}, config.target_size);
      double sr = 0.0;
      double sc = 0.0;
      bool fits = true;
      for (Coord cell : cells) {
        fits = fits && cell.row < config.height && cell.col < config.width;
        sr += cell.row + 0.5;
        sc += cell.col + 0.5;
      }
      sr /= static_cast<double>(cells.size());
      sc /= static_cast<double>(cells.size());
      if (fits && std::abs(sr - center_row) <= half_rows && std::abs(sc - center_col) <= half_cols) {
        origins.push_back({r, c});
      }
    }
  }
  return origins;
}

std::vector<Coord> pick_distinct(std::vector<Coord> pool, int count, Rng& rng) {
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace

GameState new_game(const GameConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const auto origins = target_origins(config);
  if (origins.empty()) throw PlacementInfeasible("no target placement satisfies the centering constraint");

  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    auto grid = std::make_shared<Grid>(config.height, config.width);
    const Coord origin = origins[rng.below(origins.size())];
    const auto targets = target_footprint(origin, config.target_size);
    for (Coord t : targets) grid->set(t, Cell::Target);

    bool placed_all = true;
    for (int k = 0; k < config.obstacle_count && placed_all; ++k) {
      placed_all = false;
      for (int redraw = 0; redraw < kMaxRectangleRedraws; ++redraw) {
        const int h = rng.uniform_int(config.obstacle_min, config.obstacle_max);
        const int w = rng.uniform_int(config.obstacle_min, config.obstacle_max);
        const int r0 = rng.uniform_int(0, config.height - h);
        const int c0 = rng.uniform_int(0, config.width - w);
        bool overlaps_target = false;
        for (int r = r0; r < r0 + h; ++r) {
          for (int c = c0; c < c0 + w; ++c) overlaps_target = overlaps_target || grid->at({r, c}) == Cell::Target;
        }
        if (overlaps_target) continue;
        for (int r = r0; r < r0 + h; ++r) {
          for (int c = c0; c < c0 + w; ++c) grid->set({r, c}, Cell::Obstacle);
        }
        placed_all = true;
        break;
      }
    }
    if (!placed_all) continue;

    const auto reach = reachable_from(*grid, targets.front());
    std::vector<Coord> left;
    std::vector<Coord> right;
    for (int r = 0; r < config.height; ++r) {
      for (int c = 0; c < 2; ++c) {
        if (grid->at({r, c}) == Cell::Empty && reach[grid->index({r, c})]) left.push_back({r, c});
      }
      for (int c = config.width - 2; c < config.width; ++c) {
        if (grid->at({r, c}) == Cell::Empty && reach[grid->index({r, c})]) right.push_back({r, c});
      }
    }
    if (static_cast<int>(left.size()) < config.n_pursuers || static_cast<int>(right.size()) < config.n_evaders) {
      continue;
    }

    GameState state;
    state.targets = targets;
    state.pursuers = pick_distinct(std::move(left), config.n_pursuers, rng);
    state.evaders = pick_distinct(std::move(right), config.n_evaders, rng);
    state.evader_captured.assign(static_cast<std::size_t>(config.n_evaders), false);
    state.grid = std::move(grid);
    return state;
  }
  throw PlacementInfeasible("no valid obstacle layout after " + std::to_string(kMaxPlacementAttempts) +
                            " attempts; obstacle configuration is too dense");
}

std::vector<Action> legal_actions(const GameConfig& config, const GameState& state, AgentId agent) {
  const Coord pos = state.position(agent);
  if (!state.is_live(agent)) return {Action::Stay};
  std::vector<Action> out;
  for (Action a : kMoveActions) {
    if (state.grid->passable(apply(pos, a))) out.push_back(a);
  }
  if (config.connectivity == Connectivity::FourPlusStay || out.empty()) out.push_back(Action::Stay);
  return out;
}

JointRewards outcome_rewards(GameStatus status, const RewardSpec& spec, int n_pursuers, int n_evaders) {
  double pursuer_total = 0.0;
  double evader_total = 0.0;
  switch (status) {
    case GameStatus::Ongoing:
      throw NonTerminalStatus("outcome_rewards requires a terminal status");
    case GameStatus::EvadersWinTarget:
      pursuer_total = spec.pursuer_lose_target;
      evader_total = spec.evader_win;
      break;
    case GameStatus::PursuersWinTarget:
      pursuer_total = spec.pursuer_win_target;
      evader_total = spec.evader_lose_target;
      break;
    case GameStatus::PursuersWinCaptureAll:
      pursuer_total = spec.pursuer_capture_all;
      evader_total = spec.evader_all_captured;
      break;
    case GameStatus::Draw:
      break;
  }
  JointRewards out(static_cast<std::size_t>(n_pursuers), pursuer_total / n_pursuers);
  out.resize(static_cast<std::size_t>(n_pursuers + n_evaders), evader_total / n_evaders);
  return out;
}

StepResult step(const GameConfig& config, const RewardSpec& rewards, const GameState& state,
                std::span<const Action> actions) {
  if (is_terminal(state.status)) throw EpisodeFinished("step called on a finished episode");
  const auto n_p = state.pursuers.size();
  const auto n_e = state.evaders.size();
  if (actions.size() != n_p + n_e) {
    throw ActionArityMismatch("expected " + std::to_string(n_p + n_e) + " actions, got " +
                              std::to_string(actions.size()));
  }
  const Grid& grid = *state.grid;
  auto resolve = [&](Coord from, Action a) {
    if (a == Action::Stay && config.connectivity == Connectivity::Four) return from;
    const Coord to = apply(from, a);
    return grid.passable(to) ? to : from;
  };

  StepResult result;
  GameState& next = result.state;
  next.grid = state.grid;
  next.targets = state.targets;
  next.evader_captured = state.evader_captured;
  next.step = state.step + 1;
  next.pursuers.resize(n_p);
  next.evaders.resize(n_e);
  for (std::size_t i = 0; i < n_p; ++i) next.pursuers[i] = resolve(state.pursuers[i], actions[i]);
  for (std::size_t i = 0; i < n_e; ++i) {
    next.evaders[i] = state.evader_captured[i] ? state.evaders[i] : resolve(state.evaders[i], actions[n_p + i]);
  }

  // Capture: shared cell after the move, or a pursuer/evader swap.
  for (std::size_t e = 0; e < n_e; ++e) {
    if (next.evader_captured[e]) continue;
    for (std::size_t p = 0; p < n_p; ++p) {
      const bool same_cell = next.pursuers[p] == next.evaders[e];
      const bool swapped = next.pursuers[p] == state.evaders[e] && next.evaders[e] == state.pursuers[p];
      if (same_cell || swapped) {
        next.evader_captured[e] = true;
        break;
      }
    }
  }

  auto on_target = [&](Coord c) { return grid.at(c) == Cell::Target; };
  bool evader_on_target = false;
  for (std::size_t e = 0; e < n_e; ++e) evader_on_target = evader_on_target || (!next.evader_captured[e] && on_target(next.evaders[e]));
  const bool pursuer_on_target = std::any_of(next.pursuers.begin(), next.pursuers.end(), on_target);

  if (evader_on_target) {
    next.status = GameStatus::EvadersWinTarget;
  } else if (pursuer_on_target) {
    next.status = GameStatus::PursuersWinTarget;
  } else if (next.live_evaders() == 0) {
    next.status = GameStatus::PursuersWinCaptureAll;
  } else if (next.step >= config.max_steps) {
    next.status = GameStatus::Draw;
  } else {
    next.status = GameStatus::Ongoing;
  }
  result.status = next.status;
  result.rewards = is_terminal(next.status)
                       ? outcome_rewards(next.status, rewards, static_cast<int>(n_p), static_cast<int>(n_e))
                       : JointRewards(n_p + n_e, 0.0);
  return result;
}

}  // namespace mapel
