#include "mapel/harness.hpp"

#include "mapel/errors.hpp"

namespace mapel {

namespace {

struct TeamStage {
  std::vector<Observation> observations;
  std::vector<std::uint8_t> flags;
  std::vector<std::vector<std::uint8_t>> gathered;
};

void notify(const EpisodeOptions& options, PhaseEvent e) {
  if (options.hook) options.hook(e);
}

// Observe, flag and gather for one team.
TeamStage sense(const GameConfig& config, const GameState& state, Team team, const Topology& topology,
                const EpisodeOptions& options) {
  TeamStage s;
  s.observations = observe_team(config, state, team);
  notify(options, {StepPhase::Observe, state.step, team, nullptr, nullptr, &s.observations});
  s.flags.reserve(s.observations.size());
  for (const auto& o : s.observations) s.flags.push_back(report_flag(o));
  notify(options, {StepPhase::Flag, state.step, team, &s.flags, nullptr, &s.observations});
  for (int i = 0; i < topology.n_agents; ++i) s.gathered.push_back(gather(topology, s.flags, i));
  notify(options, {StepPhase::Gather, state.step, team, &s.flags, &s.gathered, &s.observations});
  return s;
}

std::vector<Action> decide(const GameConfig& config, const GameState& state, Team team, TeamController& controller,
                           const TeamStage& s, Rng& rng, const EpisodeOptions& options) {
  const TeamStepInput input{config, state, team, s.observations, s.flags, s.gathered};
  auto actions = controller.act(input, rng);
  if (actions.size() != s.observations.size()) {
    throw ActionArityMismatch("controller for " + std::string(to_string(team)) + " returned " +
                              std::to_string(actions.size()) + " actions for " +
                              std::to_string(s.observations.size()) + " agents");
  }
  notify(options, {StepPhase::Act, state.step, team, &s.flags, &s.gathered, &s.observations});
  return actions;
}

TeamTopologyRecord topology_record(const Topology& t) { return {t.kind, t.ring}; }

}  // namespace

EpisodeResult run_episode(const GameConfig& config, TeamController& pursuers, TeamController& evaders,
                          std::uint64_t seed, const EpisodeOptions& options) {
  GameState state = new_game(config, seed);
  Rng topology_rng(derive_seed(seed, 1));
  Rng pursuer_rng(derive_seed(seed, 2));
  Rng evader_rng(derive_seed(seed, 3));
  const Topology pursuer_topology = build_topology(pursuers.comm_kind(), config.n_pursuers, topology_rng);
  const Topology evader_topology = build_topology(evaders.comm_kind(), config.n_evaders, topology_rng);
  pursuers.begin_episode(state, pursuer_topology);
  evaders.begin_episode(state, evader_topology);

  EpisodeResult result;
  if (options.record) {
    EpisodeRecord r;
    r.config = config;
    r.rewards = options.rewards;
    r.config_hash = fnv1a(to_config_text(config, TrainConfig{}));
    r.seed = seed;
    r.pursuer_topology = topology_record(pursuer_topology);
    r.evader_topology = topology_record(evader_topology);
    r.initial_pursuers = state.pursuers;
    r.initial_evaders = state.evaders;
    result.record = std::move(r);
  }

  JointRewards rewards(static_cast<std::size_t>(config.agent_count()), 0.0);
  std::vector<Action> joint;
  joint.reserve(rewards.size());
  while (!is_terminal(state.status)) {
    const TeamStage ps = sense(config, state, Team::Pursuer, pursuer_topology, options);
    const TeamStage es = sense(config, state, Team::Evader, evader_topology, options);
    joint = decide(config, state, Team::Pursuer, pursuers, ps, pursuer_rng, options);
    const auto ea = decide(config, state, Team::Evader, evaders, es, evader_rng, options);
    joint.insert(joint.end(), ea.begin(), ea.end());

    StepResult next = step(config, options.rewards, state, joint);
    state = std::move(next.state);
    rewards = std::move(next.rewards);
    notify(options, {StepPhase::Step, state.step, Team::Pursuer, nullptr, nullptr, nullptr});

    if (result.record) {
      RecordStep rs;
      rs.step = state.step;
      rs.actions = joint;
      rs.flags = ps.flags;
      rs.flags.insert(rs.flags.end(), es.flags.begin(), es.flags.end());
      rs.gathered = ps.gathered;
      rs.gathered.insert(rs.gathered.end(), es.gathered.begin(), es.gathered.end());
      rs.pursuers = state.pursuers;
      rs.evaders = state.evaders;
      rs.captured = state.evader_captured;
      rs.status = state.status;
      result.record->steps.push_back(std::move(rs));
    }
  }

  const auto np = static_cast<std::ptrdiff_t>(config.n_pursuers);
  pursuers.end_episode(state.status, std::span<const double>(rewards.data(), static_cast<std::size_t>(np)));
  evaders.end_episode(state.status,
                      std::span<const double>(rewards.data() + np, rewards.size() - static_cast<std::size_t>(np)));
  result.status = state.status;
  result.steps = state.step;
  result.rewards = std::move(rewards);
  if (result.record) {
    result.record->status = result.status;
    result.record->final_rewards = result.rewards;
  }
  return result;
}

EvalReport evaluate(const GameConfig& config, TeamController& pursuers, TeamController& evaders, int episodes,
                    std::uint64_t base_seed, const RewardSpec& rewards) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  EvalReport report;
  EpisodeOptions options;
  options.rewards = rewards;
  double pursuer_sum = 0.0;
  double evader_sum = 0.0;
  double steps = 0.0;
  for (int i = 0; i < episodes; ++i) {
    const auto r = run_episode(config, pursuers, evaders, base_seed + static_cast<std::uint64_t>(i), options);
    report.outcomes[static_cast<std::size_t>(r.status)] += 1;
    // Shares are equal within a team, so agent 0 of each team is the per-agent reward.
    pursuer_sum += r.rewards[0];
    evader_sum += r.rewards[static_cast<std::size_t>(config.n_pursuers)];
    steps += r.steps;
  }
  report.episodes = episodes;
  report.avg_pursuer_reward = pursuer_sum / episodes;
  report.avg_evader_reward = evader_sum / episodes;
  report.avg_steps = steps / episodes;
  return report;
}

nn::RecurrentQShape recurrent_shape(const GameConfig& game, const TrainConfig& train, Team team, CommKind kind) {
  nn::RecurrentQShape s;
  s.encoder = {kNumPlanes, game.height, game.width, train.conv1_maps, train.conv2_maps};
  s.report_width = report_width(kind, team == Team::Pursuer ? game.n_pursuers : game.n_evaders);
  s.hidden = train.hidden_size;
  s.actions = action_count(game.connectivity);
  return s;
}

nn::JointQShape joint_shape(const GameConfig& game, const TrainConfig& train, Team team) {
  nn::JointQShape s;
  s.agents = team == Team::Pursuer ? game.n_pursuers : game.n_evaders;
  s.encoder = {kNumPlanes * s.agents * train.history_length, game.height, game.width, train.conv1_maps,
               train.conv2_maps};
  s.actions = action_count(game.connectivity);
  s.hidden = train.hidden_size;
  return s;
}

CommKind comm_kind_of(Method method) { return method == Method::MapelRsr ? CommKind::RSR : CommKind::P2PSR; }

std::unique_ptr<TeamController> controller_from_checkpoint(const Checkpoint& checkpoint, double epsilon) {
  const RunConfig& run = checkpoint.run;
  switch (run.method) {
    case Method::MaDqn: {
      auto snap = std::make_shared<JointSnapshot>();
      snap->shape = joint_shape(run.game, run.train, run.team);
      snap->params = checkpoint.params;
      nn::check_joint_params(snap->shape, snap->params);
      return std::make_unique<JointPolicy>(std::move(snap), run.train.history_length, epsilon);
    }
    case Method::MapelP2psr:
    case Method::MapelRsr: {
      const CommKind kind = comm_kind_of(run.method);
      auto snap = std::make_shared<RecurrentSnapshot>();
      snap->shape = recurrent_shape(run.game, run.train, run.team, kind);
      snap->params = checkpoint.params;
      nn::check_recurrent_params(snap->shape, snap->params);
      return std::make_unique<RecurrentPolicy>(std::move(snap), kind, epsilon);
    }
    case Method::Naive: break;
  }
  throw ConfigError("checkpoint does not hold a learned method");
}

std::unique_ptr<TeamController> scripted_controller(Method method) {
  if (method != Method::Naive) throw ConfigError("only the naive method is scripted");
  return std::make_unique<NaiveController>();
}

}  // namespace mapel
