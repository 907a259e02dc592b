#include "mapel/qlearning.hpp"

#include <algorithm>
#include <cmath>

namespace mapel {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(lr > 0.0, "lr must be positive");
  require(lr_decay_every >= 1, "lr_decay_every must be >= 1");
  require(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "lr_decay_factor must lie in (0, 1]");
  require(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0,
          "epsilon endpoints must lie in [0, 1]");
  require(epsilon_decay_fraction > 0.0 && epsilon_decay_fraction <= 1.0, "epsilon_decay_fraction must lie in (0, 1]");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1 && episodes_per_epoch >= 1, "epochs and episodes_per_epoch must be >= 1");
  require(target_sync >= 1, "target_sync must be >= 1");
  require(tbptt_length >= 1, "tbptt_length must be >= 1");
  require(replay_transitions >= 1 && replay_episodes >= 1, "replay capacities must be >= 1");
  require(history_length >= 1, "history_length must be >= 1");
  require(hidden_size >= 1 && conv1_maps >= 1 && conv2_maps >= 1, "network sizes must be >= 1");
  require(updates_per_step >= 0, "updates_per_step must be >= 0");
  require(steps_per_update >= 1, "steps_per_update must be >= 1");
  require(warmup_steps >= 0, "warmup_steps must be >= 0");
  require(checkpoint_every >= 1, "checkpoint_every must be >= 1");
}

int argmax(std::span<const float> q) {
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

int select_action(std::span<const float> q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.bernoulli(epsilon)) return static_cast<int>(rng.below(q.size()));
  return argmax(q);
}

double td_target(double reward, bool done, double gamma, double max_next_q) {
  return done ? reward : reward + gamma * max_next_q;
}

double epsilon_at(long global_step, const EpsilonSchedule& s) {
  if (global_step <= 0) return s.start;
  if (global_step >= s.decay_steps) return s.end;
  const double frac = static_cast<double>(global_step) / static_cast<double>(s.decay_steps);
  return s.start + (s.end - s.start) * frac;
}

double lr_at(int epoch, const LrSchedule& s) {
  return s.base * std::pow(s.factor, std::max(0, epoch) / s.decay_every);
}

template <class T>
AdamState<T> adam_init(const nn::ParamSet<T>& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

template <class T>
void apply_update(nn::ParamSet<T>& params, const nn::ParamSet<T>& grads, AdamState<T>& state, double lr,
                  const AdamConfig& c) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    throw ShapeMismatch("parameter, gradient and moment shapes differ");
  }
  state.step += 1;
  const T b1 = static_cast<T>(c.beta1);
  const T b2 = static_cast<T>(c.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(c.beta1, static_cast<double>(state.step)));
  const T correction2 = static_cast<T>(1.0 - std::pow(c.beta2, static_cast<double>(state.step)));
  const T step_size = static_cast<T>(lr) / correction1;
  const T eps = static_cast<T>(c.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads.value(i).array();
    auto m = state.m.value(i).array();
    auto v = state.v.value(i).array();
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g * g;
    params.value(i).array() -= step_size * m / ((v / correction2).sqrt() + eps);
  }
}

template AdamState<float> adam_init<float>(const nn::ParamSet<float>&);
template AdamState<double> adam_init<double>(const nn::ParamSet<double>&);
template void apply_update<float>(nn::ParamSet<float>&, const nn::ParamSet<float>&, AdamState<float>&, double,
                                  const AdamConfig&);
template void apply_update<double>(nn::ParamSet<double>&, const nn::ParamSet<double>&, AdamState<double>&, double,
                                   const AdamConfig&);

int encode_joint_action(std::span<const int> actions, int radix) {
  int index = 0;
  for (int a : actions) {
    if (a < 0 || a >= radix) throw ShapeMismatch("action outside the radix");
    index = index * radix + a;
  }
  return index;
}

std::vector<int> decode_joint_action(int index, int agents, int radix) {
  std::vector<int> out(static_cast<std::size_t>(agents));
  for (int i = agents - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = index % radix;
    index /= radix;
  }
  if (index != 0) throw ShapeMismatch("joint action index out of range");
  return out;
}

PackedPlanes PackedPlanes::pack(std::span<const std::uint8_t> planes) {
  PackedPlanes p;
  p.bits = static_cast<int>(planes.size());
  p.words.assign((planes.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < planes.size(); ++i) {
    if (planes[i] != 0) p.words[i >> 6] |= 1ULL << (i & 63);
  }
  return p;
}

}  // namespace mapel
