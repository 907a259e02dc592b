#pragma once

// Team controllers: one object decides the actions of every agent of a team
// for one episode at a time.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "mapel/comms.hpp"
#include "mapel/env.hpp"
#include "mapel/nn.hpp"
#include "mapel/qlearning.hpp"
#include "mapel/sensing.hpp"

namespace mapel {

enum class Method : std::uint8_t { Naive, MaDqn, MapelP2psr, MapelRsr };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);
std::string_view to_string(Team t);
Team team_from_string(std::string_view s);

/// Everything a team sees at one decision point. Flags and gathered vectors
/// are computed from this step's observations (zero-delay delivery).
struct TeamStepInput {
  const GameConfig& config;
  const GameState& state;
  Team team;
  std::span<const Observation> observations;
  std::span<const std::uint8_t> flags;
  std::span<const std::vector<std::uint8_t>> gathered;
};

class TeamController {
 public:
  virtual ~TeamController() = default;
  /// Topology the harness builds for this team each episode.
  virtual CommKind comm_kind() const { return CommKind::P2PSR; }
  virtual void begin_episode(const GameState& /*initial*/, const Topology& /*topology*/) {}
  /// One action per agent of the team, in index order.
  virtual std::vector<Action> act(const TeamStepInput& input, Rng& rng) = 0;
  virtual void end_episode(GameStatus /*status*/, std::span<const double> /*team_rewards*/) {}
};

class NaiveController final : public TeamController {
 public:
  std::vector<Action> act(const TeamStepInput& input, Rng& rng) override;
};

/// Every agent stays put.
class StayController final : public TeamController {
 public:
  std::vector<Action> act(const TeamStepInput& input, Rng& rng) override;
};

/// Per-agent trajectory data of one episode for a recurrent learner.
struct RecurrentEpisode {
  int agents = 0;
  int length = 0;
  std::vector<PackedPlanes> observations;           // [t * agents + i]
  std::vector<std::vector<std::uint8_t>> reports;   // [t * agents + i]
  std::vector<int> actions;                         // [t * agents + i]
  std::vector<float> final_rewards;                 // [i]
};

/// Team trajectory data of one episode for the joint learner.
struct JointEpisode {
  int agents = 0;
  int length = 0;
  std::vector<PackedPlanes> frames;  // [t * agents + i]
  std::vector<int> joint_actions;    // [t]
  float final_reward = 0.0f;         // per agent
};

/// Shared, read-only network snapshot used by rollouts.
template <class Shape>
struct NetworkSnapshot {
  Shape shape;
  nn::ParamSet<float> params;
};

using RecurrentSnapshot = NetworkSnapshot<nn::RecurrentQShape>;
using JointSnapshot = NetworkSnapshot<nn::JointQShape>;

/// Per-agent recurrent Q policy with situation-report inputs. Agents share
/// parameters and keep separate hidden states.
class RecurrentPolicy final : public TeamController {
 public:
  RecurrentPolicy(std::shared_ptr<const RecurrentSnapshot> net, CommKind kind, double epsilon,
                  std::shared_ptr<RecurrentEpisode> trace = nullptr);

  CommKind comm_kind() const override { return kind_; }
  void begin_episode(const GameState& initial, const Topology& topology) override;
  std::vector<Action> act(const TeamStepInput& input, Rng& rng) override;
  void end_episode(GameStatus status, std::span<const double> team_rewards) override;

  const nn::Matrix<float>& hidden() const { return hidden_; }
  /// Q values of the last decision, one row per agent.
  const nn::Matrix<float>& last_q() const { return last_q_; }

 private:
  std::shared_ptr<const RecurrentSnapshot> net_;
  CommKind kind_;
  double epsilon_;
  std::shared_ptr<RecurrentEpisode> trace_;
  nn::Matrix<float> hidden_;
  nn::Matrix<float> last_q_;
};

/// Joint-action Q policy over a channel-stacked observation history.
class JointPolicy final : public TeamController {
 public:
  JointPolicy(std::shared_ptr<const JointSnapshot> net, int history_length, double epsilon,
              std::shared_ptr<JointEpisode> trace = nullptr);

  void begin_episode(const GameState& initial, const Topology& topology) override;
  std::vector<Action> act(const TeamStepInput& input, Rng& rng) override;
  void end_episode(GameStatus status, std::span<const double> team_rewards) override;

 private:
  std::shared_ptr<const JointSnapshot> net_;
  int history_length_;
  double epsilon_;
  std::shared_ptr<JointEpisode> trace_;
  std::vector<PackedPlanes> frames_;  // this episode, [t * agents + i]
};

/// Writes the plane values of `obs` as floats into `row`.
void write_observation(const Observation& obs, float* row);

/// Stacked history input for the joint network at step `t`: channel block
/// (h * agents + i) holds agent i's planes from step t - (history - 1 - h);
/// steps before 0 are zero.
void write_history(std::span<const PackedPlanes> frames, int agents, int t, int history, int plane_size, float* row);

/// Maps a policy output index to an Action under the connectivity's action set.
constexpr Action action_from_index(int index) { return static_cast<Action>(index); }

}  // namespace mapel
