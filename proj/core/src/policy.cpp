#include "mapel/policy.hpp"

#include <algorithm>
#include <string>

#include "mapel/errors.hpp"
#include "mapel/naive.hpp"

namespace mapel {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::MaDqn: return "ma-dqn";
    case Method::MapelP2psr: return "mapel-p2psr";
    case Method::MapelRsr: return "mapel-rsr";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::Naive, Method::MaDqn, Method::MapelP2psr, Method::MapelRsr}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown method '" + std::string(s) + "'");
}

std::string_view to_string(Team t) { return t == Team::Pursuer ? "pursuers" : "evaders"; }

Team team_from_string(std::string_view s) {
  if (s == "pursuers") return Team::Pursuer;
  if (s == "evaders") return Team::Evader;
  throw ConfigError("unknown team '" + std::string(s) + "'");
}

std::vector<Action> NaiveController::act(const TeamStepInput& input, Rng& rng) {
  std::vector<Action> out;
  out.reserve(input.observations.size());
  for (const Observation& obs : input.observations) {
    if (!input.state.is_live(obs.owner)) {
      out.push_back(Action::Stay);
      continue;
    }
    const auto known = collect_naive_knowledge(input.state, obs);
    const NaiveView view{obs,
                         *input.state.grid,
                         input.state.position(obs.owner),
                         known.teammates,
                         input.state.targets,
                         known.visible_opponents,
                         rng};
    out.push_back(naive_decide(view, input.team));
  }
  return out;
}

std::vector<Action> StayController::act(const TeamStepInput& input, Rng& /*rng*/) {
  return std::vector<Action>(input.observations.size(), Action::Stay);
}

void write_observation(const Observation& obs, float* row) {
  std::transform(obs.planes.begin(), obs.planes.end(), row, [](std::uint8_t v) { return static_cast<float>(v); });
}

void write_history(std::span<const PackedPlanes> frames, int agents, int t, int history, int plane_size, float* row) {
  for (int h = 0; h < history; ++h) {
    const int src = t - (history - 1 - h);
    for (int i = 0; i < agents; ++i) {
      float* dst = row + static_cast<std::ptrdiff_t>(h * agents + i) * plane_size;
      if (src < 0) {
        std::fill(dst, dst + plane_size, 0.0f);
      } else {
        frames[static_cast<std::size_t>(src * agents + i)].unpack_into(dst);
      }
    }
  }
}

RecurrentPolicy::RecurrentPolicy(std::shared_ptr<const RecurrentSnapshot> net, CommKind kind, double epsilon,
                                 std::shared_ptr<RecurrentEpisode> trace)
    : net_(std::move(net)), kind_(kind), epsilon_(epsilon), trace_(std::move(trace)) {}

void RecurrentPolicy::begin_episode(const GameState& /*initial*/, const Topology& topology) {
  hidden_ = nn::Matrix<float>::Zero(topology.n_agents, net_->shape.hidden);
  if (trace_) {
    *trace_ = RecurrentEpisode{};
    trace_->agents = topology.n_agents;
  }
}

std::vector<Action> RecurrentPolicy::act(const TeamStepInput& input, Rng& rng) {
  const auto& shape = net_->shape;
  const auto n = static_cast<Eigen::Index>(input.observations.size());
  nn::Matrix<float> obs(n, shape.encoder.input_dim());
  nn::Matrix<float> reports(n, shape.report_width);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = input.observations[static_cast<std::size_t>(i)];
    if (static_cast<int>(o.planes.size()) != shape.encoder.input_dim()) {
      throw ShapeMismatch("observation size does not match the network input");
    }
    write_observation(o, obs.row(i).data());
    const auto& g = input.gathered[static_cast<std::size_t>(i)];
    if (static_cast<int>(g.size()) != shape.report_width) throw ShapeMismatch("report width does not match the network");
    for (int k = 0; k < shape.report_width; ++k) reports(i, k) = g[static_cast<std::size_t>(k)];
  }
  auto step = nn::recurrent_step<float>(shape, net_->params, obs, hidden_, reports);
  hidden_ = std::move(step.hidden);
  last_q_ = std::move(step.q);

  std::vector<Action> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::span<const float> q(last_q_.row(i).data(), static_cast<std::size_t>(shape.actions));
    const int a = select_action(q, epsilon_, rng);
    out.push_back(action_from_index(a));
    if (trace_) {
      const auto& o = input.observations[static_cast<std::size_t>(i)];
      trace_->observations.push_back(PackedPlanes::pack(o.planes));
      trace_->reports.push_back(input.gathered[static_cast<std::size_t>(i)]);
      trace_->actions.push_back(a);
    }
  }
  if (trace_) trace_->length += 1;
  return out;
}

void RecurrentPolicy::end_episode(GameStatus /*status*/, std::span<const double> team_rewards) {
  if (!trace_) return;
  trace_->final_rewards.assign(team_rewards.begin(), team_rewards.end());
}

JointPolicy::JointPolicy(std::shared_ptr<const JointSnapshot> net, int history_length, double epsilon,
                         std::shared_ptr<JointEpisode> trace)
    : net_(std::move(net)), history_length_(history_length), epsilon_(epsilon), trace_(std::move(trace)) {}

void JointPolicy::begin_episode(const GameState& /*initial*/, const Topology& topology) {
  frames_.clear();
  if (trace_) {
    *trace_ = JointEpisode{};
    trace_->agents = topology.n_agents;
  }
}

std::vector<Action> JointPolicy::act(const TeamStepInput& input, Rng& rng) {
  const auto& shape = net_->shape;
  const int agents = static_cast<int>(input.observations.size());
  if (agents != shape.agents) throw ShapeMismatch("team size does not match the joint network");
  const int plane_size = kNumPlanes * input.state.grid->rows() * input.state.grid->cols();
  for (const auto& o : input.observations) frames_.push_back(PackedPlanes::pack(o.planes));
  const int t = static_cast<int>(frames_.size()) / agents - 1;

  nn::Matrix<float> x(1, shape.encoder.input_dim());
  if (x.cols() != static_cast<Eigen::Index>(plane_size) * agents * history_length_) {
    throw ShapeMismatch("history stack does not match the joint network input");
  }
  write_history(frames_, agents, t, history_length_, plane_size, x.data());
  const nn::Matrix<float> q = nn::joint_q<float>(shape, net_->params, x);
  const int joint = select_action(std::span<const float>(q.data(), static_cast<std::size_t>(q.cols())), epsilon_, rng);
  const auto per_agent = decode_joint_action(joint, agents, shape.actions);

  if (trace_) {
    for (int i = 0; i < agents; ++i) trace_->frames.push_back(frames_[static_cast<std::size_t>(t * agents + i)]);
    trace_->joint_actions.push_back(joint);
    trace_->length += 1;
  }
  std::vector<Action> out;
  for (int a : per_agent) out.push_back(action_from_index(a));
  return out;
}

void JointPolicy::end_episode(GameStatus /*status*/, std::span<const double> team_rewards) {
  if (trace_ && !team_rewards.empty()) trace_->final_reward = static_cast<float>(team_rewards.front());
}

}  // namespace mapel
