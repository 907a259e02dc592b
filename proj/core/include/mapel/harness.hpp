#pragma once

// Episode loop, greedy evaluation and controller construction.
//
// Seeds: an episode with seed s lays out its world with new_game(config, s)
// and draws its topologies from derive_seed(s, 1); pursuer and evader
// controllers draw from derive_seed(s, 2) and derive_seed(s, 3). Evaluation
// episode i of a run with base seed b uses s = b + i.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "mapel/checkpoint.hpp"
#include "mapel/config.hpp"
#include "mapel/env.hpp"
#include "mapel/policy.hpp"
#include "mapel/record.hpp"

namespace mapel {

/// Stages of one decision step, in the order the loop runs them. Each
/// stage except Step fires once per team, pursuers first.
enum class StepPhase : std::uint8_t { Observe, Flag, Gather, Act, Step };

struct PhaseEvent {
  StepPhase phase;
  int step;         // state.step the stage operates on
  Team team;        // unused for Step
  const std::vector<std::uint8_t>* flags = nullptr;              // Flag, Gather, Act
  const std::vector<std::vector<std::uint8_t>>* gathered = nullptr;  // Gather, Act
  const std::vector<Observation>* observations = nullptr;        // all but Step
};

struct EpisodeOptions {
  RewardSpec rewards;
  bool record = false;
  std::function<void(const PhaseEvent&)> hook;
};

struct EpisodeResult {
  GameStatus status = GameStatus::Ongoing;
  JointRewards rewards;
  int steps = 0;
  std::optional<EpisodeRecord> record;
};

/// Plays one episode to a terminal status. Throws ActionArityMismatch when a
/// controller returns the wrong number of actions.
EpisodeResult run_episode(const GameConfig& config, TeamController& pursuers, TeamController& evaders,
                          std::uint64_t seed, const EpisodeOptions& options = {});

struct EvalReport {
  int episodes = 0;
  double avg_pursuer_reward = 0.0;  // per agent
  double avg_evader_reward = 0.0;
  double avg_steps = 0.0;
  std::array<int, kNumStatuses> outcomes{};  // indexed by GameStatus

  int count(GameStatus s) const { return outcomes[static_cast<std::size_t>(s)]; }
  int pursuer_wins() const { return count(GameStatus::PursuersWinTarget) + count(GameStatus::PursuersWinCaptureAll); }
  int complete_wins() const { return count(GameStatus::PursuersWinCaptureAll); }
  double complete_win_rate() const { return episodes ? static_cast<double>(complete_wins()) / episodes : 0.0; }

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Plays `episodes` episodes with seeds base_seed + i. Controllers are used
/// as given; learned ones should already be greedy. Throws ConfigError when
/// episodes < 1.
EvalReport evaluate(const GameConfig& config, TeamController& pursuers, TeamController& evaders, int episodes,
                    std::uint64_t base_seed, const RewardSpec& rewards = {});

/// Network shapes implied by a run.
nn::RecurrentQShape recurrent_shape(const GameConfig& game, const TrainConfig& train, Team team, CommKind kind);
nn::JointQShape joint_shape(const GameConfig& game, const TrainConfig& train, Team team);

CommKind comm_kind_of(Method method);

/// Controller for a checkpoint's trained team at the given epsilon.
/// Throws ShapeMismatch when the tensors do not fit the run.
std::unique_ptr<TeamController> controller_from_checkpoint(const Checkpoint& checkpoint, double epsilon = 0.0);

/// NaiveController for Method::Naive; ConfigError for learned methods.
std::unique_ptr<TeamController> scripted_controller(Method method);

}  // namespace mapel
