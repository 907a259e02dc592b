#pragma once

// Pursuit-evasion game world: grid, agents, synchronous transition function,
// termination detection and reward distribution.

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace mapel {

enum class Cell : std::uint8_t { Empty, Obstacle, Target };

/// Grid coordinate, origin top-left, row-major.
struct Coord {
  int row = 0;
  int col = 0;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

constexpr int manhattan(Coord a, Coord b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols) : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows * cols), Cell::Empty) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(Coord c) const { return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_; }
  std::size_t index(Coord c) const { return static_cast<std::size_t>(c.row * cols_ + c.col); }
  Coord coord(std::size_t i) const { return {static_cast<int>(i) / cols_, static_cast<int>(i) % cols_}; }

  Cell at(Coord c) const { return cells_[index(c)]; }
  void set(Coord c, Cell v) { cells_[index(c)] = v; }
  /// In bounds and not an obstacle.
  bool passable(Coord c) const { return in_bounds(c) && at(c) != Cell::Obstacle; }

  std::span<const Cell> cells() const { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Cell> cells_;
};

enum class Action : std::uint8_t { Up, Down, Left, Right, Stay };
inline constexpr int kNumActions = 5;
inline constexpr std::array<Action, 4> kMoveActions = {Action::Up, Action::Down, Action::Left, Action::Right};

/// Destination of `a` from `from`, ignoring the grid.
constexpr Coord apply(Coord from, Action a) {
  switch (a) {
    case Action::Up: return {from.row - 1, from.col};
    case Action::Down: return {from.row + 1, from.col};
    case Action::Left: return {from.row, from.col - 1};
    case Action::Right: return {from.row, from.col + 1};
    case Action::Stay: break;
  }
  return from;
}

std::string_view to_string(Action a);

enum class Connectivity : std::uint8_t { Four, FourPlusStay };

/// Number of actions a policy chooses among under `c`.
constexpr int action_count(Connectivity c) { return c == Connectivity::Four ? 4 : 5; }

enum class GameStatus : std::uint8_t { Ongoing, EvadersWinTarget, PursuersWinTarget, PursuersWinCaptureAll, Draw };
inline constexpr int kNumStatuses = 5;

constexpr bool is_terminal(GameStatus s) { return s != GameStatus::Ongoing; }
std::string_view to_string(GameStatus s);
GameStatus status_from_string(std::string_view s);

enum class Team : std::uint8_t { Pursuer, Evader };

struct AgentId {
  Team team = Team::Pursuer;
  int index = 0;
  friend constexpr bool operator==(const AgentId&, const AgentId&) = default;
};

struct GameConfig {
  int width = 32;    // columns
  int height = 32;   // rows
  int n_pursuers = 2;
  int n_evaders = 2;
  int sense_length = 9;  // vertical extent of the sensing rectangle
  int sense_width = 9;   // horizontal extent of the sensing rectangle
  int speed = 1;
  int target_size = 4;
  int obstacle_count = 10;
  int obstacle_min = 1;
  int obstacle_max = 4;
  int max_steps = 512;
  Connectivity connectivity = Connectivity::FourPlusStay;
  std::uint64_t seed = 0;

  int agent_count() const { return n_pursuers + n_evaders; }
  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

/// Team-total rewards per outcome.
struct RewardSpec {
  double evader_win = 0.5;
  double pursuer_lose_target = -0.5;
  double pursuer_win_target = 0.5;
  double evader_lose_target = -0.5;
  double pursuer_capture_all = 1.0;
  double evader_all_captured = -1.0;
};

struct GameState {
  std::shared_ptr<const Grid> grid;
  std::vector<Coord> targets;
  std::vector<Coord> pursuers;
  std::vector<Coord> evaders;
  std::vector<bool> evader_captured;
  int step = 0;
  GameStatus status = GameStatus::Ongoing;

  Coord position(AgentId id) const;
  bool is_live(AgentId id) const;
  int live_evaders() const;

  /// Deep comparison (grid contents, not pointer identity).
  friend bool operator==(const GameState& a, const GameState& b);
};

/// Per-agent values ordered pursuers first, then evaders.
using JointRewards = std::vector<double>;

struct StepResult {
  GameState state;
  JointRewards rewards;
  GameStatus status = GameStatus::Ongoing;
};

/// Spawns a fresh game. Throws PlacementInfeasible when no valid layout is
/// found within a bounded number of attempts.
GameState new_game(const GameConfig& config, std::uint64_t seed);

std::vector<Action> legal_actions(const GameConfig& config, const GameState& state, AgentId agent);

/// Applies one synchronous joint move. `actions` holds one entry per agent,
/// pursuers first; captured evaders' entries are ignored.
StepResult step(const GameConfig& config, const RewardSpec& rewards, const GameState& state,
                std::span<const Action> actions);

/// Terminal payout divided equally within each team.
JointRewards outcome_rewards(GameStatus status, const RewardSpec& spec, int n_pursuers, int n_evaders);

/// Cells of the target footprint with top-left corner `origin`.
std::vector<Coord> target_footprint(Coord origin, int target_size);

/// Cells reachable from `start` by 4-adjacent moves over non-obstacle cells.
std::vector<bool> reachable_from(const Grid& grid, Coord start);

}  // namespace mapel
