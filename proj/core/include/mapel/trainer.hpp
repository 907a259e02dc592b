#pragma once

// Training runs: rollouts with the current epsilon, replay, gradient
// updates against a periodically synced target network, per-epoch metrics
// and checkpoints.
//
// Output directory layout:
//   run.txt                        canonical run text
//   metrics.csv                    one row per epoch, header below
//   checkpoint_init.bin            untrained network
//   checkpoint_epoch_NNNN.bin      after every checkpoint_every epochs
//   checkpoint_final.bin
//
// metrics.csv header:
//   epoch,episodes,avg_reward,evaders_target,pursuers_target,capture_all,
//   draws,complete_win_rate,mean_loss,epsilon,lr
// avg_reward is the trained team's mean per-agent episode reward; epsilon is
// the value at the epoch's first episode; mean_loss is 0 when no update ran.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mapel/checkpoint.hpp"
#include "mapel/config.hpp"
#include "mapel/policy.hpp"

namespace mapel {

struct EpochMetrics {
  int epoch = 0;
  int episodes = 0;
  double avg_reward = 0.0;
  int evaders_target = 0;
  int pursuers_target = 0;
  int capture_all = 0;
  int draws = 0;
  double complete_win_rate = 0.0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
  double lr = 0.0;
};

std::string metrics_header();
std::string metrics_row(const EpochMetrics& m);

/// Replay, networks and optimizer of one trained team.
class Learner {
 public:
  virtual ~Learner() = default;
  /// Epsilon-greedy controller over the current parameters that traces its
  /// episode for store().
  virtual std::unique_ptr<TeamController> rollout(double epsilon) = 0;
  /// Moves the last traced episode into replay.
  virtual void store() = 0;
  virtual bool ready() const = 0;
  /// One gradient step on a sampled batch; returns the loss.
  virtual double update(Rng& rng, double lr) = 0;
  virtual const nn::ParamSet<float>& params() const = 0;
  virtual const AdamState<float>& optimizer() const = 0;
  virtual long updates() const = 0;
};

/// Learner for `method` training `team` with weights drawn from init_seed.
std::unique_ptr<Learner> make_learner(Method method, const GameConfig& game, const TrainConfig& train, Team team,
                                      std::uint64_t init_seed);

struct TrainSetup {
  RewardSpec rewards;
  /// Opponent team; naive when empty.
  std::function<std::unique_ptr<TeamController>()> opponent;
  /// Write run.txt, metrics.csv and checkpoints into run.out_dir.
  bool write_files = true;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochMetrics> metrics;
  Checkpoint initial;
  Checkpoint final;
  long env_steps = 0;
  long updates = 0;
  std::string final_checkpoint_path;  // empty unless files were written
};

/// Validates the run (team sizes 2..5 included) and trains with defaults.
/// Throws NonFiniteLoss on divergence; checkpoints already written remain.
TrainResult train(const RunConfig& run);

/// As train(run) but with a custom setup; only the game and training
/// configs are validated, so any team sizes are accepted.
TrainResult train(const RunConfig& run, const TrainSetup& setup);

}  // namespace mapel
