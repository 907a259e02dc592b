#include "mapel/trainer.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "mapel/errors.hpp"
#include "mapel/harness.hpp"

namespace mapel {

namespace {

using nn::Matrix;

constexpr std::uint64_t kInitStream = 5;
constexpr std::uint64_t kReplayStream = 7;
constexpr std::uint64_t kEpisodeStreamBase = 1000;

float max_row(const Matrix<float>& q, Eigen::Index row) { return q.row(row).maxCoeff(); }

class RecurrentLearner final : public Learner {
 public:
  RecurrentLearner(const nn::RecurrentQShape& shape, const TrainConfig& train, CommKind kind, std::uint64_t seed)
      : shape_(shape), train_(train), kind_(kind), replay_(static_cast<std::size_t>(train.replay_episodes)) {
    Rng rng(seed);
    params_ = nn::init_recurrent_params<float>(shape_, rng);
    target_ = params_;
    adam_ = adam_init(params_);
  }

  std::unique_ptr<TeamController> rollout(double epsilon) override {
    auto snap = std::make_shared<RecurrentSnapshot>(RecurrentSnapshot{shape_, params_});
    trace_ = std::make_shared<RecurrentEpisode>();
    return std::make_unique<RecurrentPolicy>(std::move(snap), kind_, epsilon, trace_);
  }

  void store() override {
    if (trace_ && trace_->length > 0) replay_.push(std::move(trace_));
    trace_.reset();
  }

  bool ready() const override { return replay_.size() > 0; }

  double update(Rng& rng, double lr) override {
    const int T = train_.tbptt_length;
    const int B = train_.batch_size;
    const int D = shape_.encoder.input_dim();
    const int R = shape_.report_width;

    nn::SequenceBatch<float> batch;
    batch.length = T;
    batch.batch = B;
    batch.observations = Matrix<float>::Zero(T * B, D);
    batch.reports = Matrix<float>::Zero(T * B, R);
    batch.actions.assign(static_cast<std::size_t>(T * B), 0);
    batch.targets.assign(static_cast<std::size_t>(T * B), 0.0f);
    batch.mask.assign(static_cast<std::size_t>(T * B), 0.0f);
    Matrix<float> next_obs = Matrix<float>::Zero((T + 1) * B, D);
    Matrix<float> next_reports = Matrix<float>::Zero((T + 1) * B, R);

    struct Pick {
      std::shared_ptr<const RecurrentEpisode> ep;
      int agent, start, len;
    };
    std::vector<Pick> picks;
    picks.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      auto ep = replay_.sample(rng);
      const int agent = static_cast<int>(rng.below(static_cast<std::uint64_t>(ep->agents)));
      const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(ep->length)));
      const int len = std::min(T, ep->length - start);
      for (int k = 0; k <= len && start + k < ep->length; ++k) {
        const auto idx = static_cast<std::size_t>((start + k) * ep->agents + agent);
        const auto& obs = ep->observations[idx];
        const auto& rep = ep->reports[idx];
        const Eigen::Index row = static_cast<Eigen::Index>(k) * B + b;
        obs.unpack_into(next_obs.row(row).data());
        for (int j = 0; j < R; ++j) next_reports(row, j) = rep[static_cast<std::size_t>(j)];
        if (k < len) {
          batch.observations.row(row) = next_obs.row(row);
          batch.reports.row(row) = next_reports.row(row);
          batch.actions[static_cast<std::size_t>(row)] = ep->actions[idx];
          batch.mask[static_cast<std::size_t>(row)] = 1.0f;
        }
      }
      picks.push_back({std::move(ep), agent, start, len});
    }

    std::vector<int> next_lengths;
    next_lengths.reserve(picks.size());
    for (const auto& p : picks) next_lengths.push_back(std::min(p.len + 1, p.ep->length - p.start));
    const Matrix<float> q_next =
        nn::recurrent_sequence_q<float>(shape_, target_, next_obs, next_reports, T + 1, B, next_lengths);
    for (int b = 0; b < B; ++b) {
      const auto& p = picks[static_cast<std::size_t>(b)];
      for (int k = 0; k < p.len; ++k) {
        const bool done = p.start + k == p.ep->length - 1;
        const double reward = done ? p.ep->final_rewards[static_cast<std::size_t>(p.agent)] : 0.0;
        const double next = done ? 0.0 : max_row(q_next, static_cast<Eigen::Index>(k + 1) * B + b);
        batch.targets[static_cast<std::size_t>(k * B + b)] =
            static_cast<float>(td_target(reward, done, train_.gamma, next));
      }
    }

    auto lg = nn::recurrent_loss_and_grads<float>(shape_, params_, batch);
    apply_update(params_, lg.grads, adam_, lr);
    after_update();
    return lg.loss;
  }

  const nn::ParamSet<float>& params() const override { return params_; }
  const AdamState<float>& optimizer() const override { return adam_; }
  long updates() const override { return updates_; }

 private:
  void after_update() {
    ++updates_;
    if (updates_ % train_.target_sync == 0) target_ = params_;
  }

  nn::RecurrentQShape shape_;
  TrainConfig train_;
  CommKind kind_;
  nn::ParamSet<float> params_;
  nn::ParamSet<float> target_;
  AdamState<float> adam_;
  ReplayBuffer<std::shared_ptr<const RecurrentEpisode>> replay_;
  std::shared_ptr<RecurrentEpisode> trace_;
  long updates_ = 0;
};

class JointLearner final : public Learner {
 public:
  JointLearner(const nn::JointQShape& shape, const TrainConfig& train, int plane_size, std::uint64_t seed)
      : shape_(shape), train_(train), plane_size_(plane_size),
        replay_(static_cast<std::size_t>(train.replay_transitions)) {
    Rng rng(seed);
    params_ = nn::init_joint_params<float>(shape_, rng);
    target_ = params_;
    adam_ = adam_init(params_);
  }

  std::unique_ptr<TeamController> rollout(double epsilon) override {
    auto snap = std::make_shared<JointSnapshot>(JointSnapshot{shape_, params_});
    trace_ = std::make_shared<JointEpisode>();
    return std::make_unique<JointPolicy>(std::move(snap), train_.history_length, epsilon, trace_);
  }

  void store() override {
    if (!trace_ || trace_->length == 0) return;
    std::shared_ptr<const JointEpisode> ep = std::move(trace_);
    for (int t = 0; t < ep->length; ++t) replay_.push({ep, t});
    trace_.reset();
  }

  bool ready() const override { return replay_.size() > 0; }

  double update(Rng& rng, double lr) override {
    const int B = train_.batch_size;
    const int D = shape_.encoder.input_dim();
    nn::JointBatch<float> batch;
    batch.inputs = Matrix<float>::Zero(B, D);
    batch.actions.resize(static_cast<std::size_t>(B));
    batch.targets.resize(static_cast<std::size_t>(B));
    Matrix<float> next = Matrix<float>::Zero(B, D);
    std::vector<Ref> refs;
    refs.reserve(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      Ref r = replay_.sample(rng);
      const auto& ep = *r.episode;
      write_history(ep.frames, ep.agents, r.t, train_.history_length, plane_size_, batch.inputs.row(b).data());
      if (r.t + 1 < ep.length) {
        write_history(ep.frames, ep.agents, r.t + 1, train_.history_length, plane_size_, next.row(b).data());
      }
      batch.actions[static_cast<std::size_t>(b)] = ep.joint_actions[static_cast<std::size_t>(r.t)];
      refs.push_back(std::move(r));
    }
    const Matrix<float> q_next = nn::joint_q<float>(shape_, target_, next);
    for (int b = 0; b < B; ++b) {
      const auto& r = refs[static_cast<std::size_t>(b)];
      const bool done = r.t == r.episode->length - 1;
      const double reward = done ? r.episode->final_reward : 0.0;
      batch.targets[static_cast<std::size_t>(b)] =
          static_cast<float>(td_target(reward, done, train_.gamma, done ? 0.0 : max_row(q_next, b)));
    }
    auto lg = nn::joint_loss_and_grads<float>(shape_, params_, batch);
    apply_update(params_, lg.grads, adam_, lr);
    ++updates_;
    if (updates_ % train_.target_sync == 0) target_ = params_;
    return lg.loss;
  }

  const nn::ParamSet<float>& params() const override { return params_; }
  const AdamState<float>& optimizer() const override { return adam_; }
  long updates() const override { return updates_; }

 private:
  struct Ref {
    std::shared_ptr<const JointEpisode> episode;
    int t = 0;
  };

  nn::JointQShape shape_;
  TrainConfig train_;
  int plane_size_;
  nn::ParamSet<float> params_;
  nn::ParamSet<float> target_;
  AdamState<float> adam_;
  ReplayBuffer<Ref> replay_;
  std::shared_ptr<JointEpisode> trace_;
  long updates_ = 0;
};

// Update batches allocate multi-megabyte temporaries; by default glibc maps
// and unmaps each one, which costs more than the arithmetic.
void keep_large_buffers_resident() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)once;
#endif
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

Checkpoint make_checkpoint(const RunConfig& run, int epoch, const Learner& learner) {
  Checkpoint c;
  c.run = run;
  c.config_hash = config_hash(run);
  c.epoch = epoch;
  c.params = learner.params();
  c.optimizer = learner.optimizer();
  return c;
}

std::string checkpoint_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::string metrics_header() {
  return "epoch,episodes,avg_reward,evaders_target,pursuers_target,capture_all,draws,complete_win_rate,mean_loss,"
         "epsilon,lr";
}

std::string metrics_row(const EpochMetrics& m) {
  char lr[32];
  std::snprintf(lr, sizeof(lr), "%.8g", m.lr);
  return std::to_string(m.epoch) + "," + std::to_string(m.episodes) + "," + format_double(m.avg_reward) + "," +
         std::to_string(m.evaders_target) + "," + std::to_string(m.pursuers_target) + "," +
         std::to_string(m.capture_all) + "," + std::to_string(m.draws) + "," + format_double(m.complete_win_rate) +
         "," + format_double(m.mean_loss) + "," + format_double(m.epsilon) + "," + lr;
}

std::unique_ptr<Learner> make_learner(Method method, const GameConfig& game, const TrainConfig& train, Team team,
                                      std::uint64_t init_seed) {
  switch (method) {
    case Method::MaDqn:
      return std::make_unique<JointLearner>(joint_shape(game, train, team), train,
                                            kNumPlanes * game.height * game.width, init_seed);
    case Method::MapelP2psr:
    case Method::MapelRsr: {
      const CommKind kind = comm_kind_of(method);
      return std::make_unique<RecurrentLearner>(recurrent_shape(game, train, team, kind), train, kind, init_seed);
    }
    case Method::Naive: break;
  }
  throw ConfigError("the naive method has nothing to learn");
}

TrainResult train(const RunConfig& run) {
  run.validate();
  return train(run, TrainSetup{});
}

TrainResult train(const RunConfig& run, const TrainSetup& setup) {
  run.game.validate();
  run.train.validate();
  keep_large_buffers_resident();
  const TrainConfig& tc = run.train;

  auto learner = make_learner(run.method, run.game, tc, run.team, derive_seed(run.seed, kInitStream));
  auto opponent = setup.opponent ? setup.opponent() : std::make_unique<NaiveController>();
  Rng replay_rng(derive_seed(run.seed, kReplayStream));

  const long total_episodes = static_cast<long>(tc.epochs) * tc.episodes_per_epoch;
  const EpsilonSchedule eps_schedule{tc.epsilon_start, tc.epsilon_end,
                                     std::max(1L, static_cast<long>(tc.epsilon_decay_fraction *
                                                                    static_cast<double>(total_episodes)))};
  const LrSchedule lr_schedule{tc.lr, tc.lr_decay_every, tc.lr_decay_factor};

  TrainResult result;
  result.initial = make_checkpoint(run, 0, *learner);
  std::ofstream metrics;
  if (setup.write_files) {
    std::filesystem::create_directories(run.out_dir);
    std::ofstream(checkpoint_path(run.out_dir, "run.txt"), std::ios::binary) << run_text(run);
    write_checkpoint(checkpoint_path(run.out_dir, "checkpoint_init.bin"), result.initial);
    metrics.open(checkpoint_path(run.out_dir, "metrics.csv"), std::ios::binary);
    metrics << metrics_header() << '\n' << std::flush;
  }

  EpisodeOptions options;
  options.rewards = setup.rewards;
  const std::size_t own_offset = run.team == Team::Pursuer ? 0 : static_cast<std::size_t>(run.game.n_pursuers);
  long global_episode = 0;
  long update_credit = 0;

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.episodes = tc.episodes_per_epoch;
    m.lr = lr_at(epoch, lr_schedule);
    m.epsilon = epsilon_at(global_episode, eps_schedule);
    double reward_sum = 0.0;
    double loss_sum = 0.0;
    long loss_count = 0;

    for (int e = 0; e < tc.episodes_per_epoch; ++e, ++global_episode) {
      auto policy = learner->rollout(epsilon_at(global_episode, eps_schedule));
      TeamController& p = run.team == Team::Pursuer ? *policy : *opponent;
      TeamController& v = run.team == Team::Pursuer ? *opponent : *policy;
      const auto ep = run_episode(run.game, p, v, derive_seed(run.seed, kEpisodeStreamBase + global_episode), options);
      learner->store();

      reward_sum += ep.rewards[own_offset];
      switch (ep.status) {
        case GameStatus::EvadersWinTarget: ++m.evaders_target; break;
        case GameStatus::PursuersWinTarget: ++m.pursuers_target; break;
        case GameStatus::PursuersWinCaptureAll: ++m.capture_all; break;
        case GameStatus::Draw: ++m.draws; break;
        case GameStatus::Ongoing: break;
      }

      const long before = result.env_steps;
      result.env_steps += ep.steps;
      const long eligible = result.env_steps - std::max<long>(before, tc.warmup_steps);
      if (eligible <= 0 || !learner->ready()) continue;
      update_credit += eligible * tc.updates_per_step;
      const long n = update_credit / tc.steps_per_update;
      update_credit -= n * tc.steps_per_update;
      for (long u = 0; u < n; ++u) {
        loss_sum += learner->update(replay_rng, m.lr);
        ++loss_count;
      }
    }

    m.avg_reward = reward_sum / tc.episodes_per_epoch;
    m.complete_win_rate = static_cast<double>(m.capture_all) / tc.episodes_per_epoch;
    m.mean_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    result.metrics.push_back(m);
    if (setup.write_files) {
      metrics << metrics_row(m) << '\n' << std::flush;
      if ((epoch + 1) % tc.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "checkpoint_epoch_%04d.bin", epoch);
        write_checkpoint(checkpoint_path(run.out_dir, name), make_checkpoint(run, epoch + 1, *learner));
      }
    }
    if (setup.on_epoch) setup.on_epoch(m);
  }

  result.updates = learner->updates();
  result.final = make_checkpoint(run, tc.epochs, *learner);
  if (setup.write_files) {
    result.final_checkpoint_path = checkpoint_path(run.out_dir, "checkpoint_final.bin");
    write_checkpoint(result.final_checkpoint_path, result.final);
  }
  return result;
}

}  // namespace mapel
