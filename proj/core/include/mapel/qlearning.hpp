#pragma once

// Value-function machinery shared by the joint (MA-DQN) and per-agent
// recurrent (MAPEL) learners.

#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "mapel/env.hpp"
#include "mapel/errors.hpp"
#include "mapel/nn.hpp"
#include "mapel/rng.hpp"
#include "mapel/sensing.hpp"

namespace mapel {

struct TrainConfig {
  double gamma = 0.99;
  double lr = 0.001;
  int lr_decay_every = 200;  // epochs
  double lr_decay_factor = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  double epsilon_decay_fraction = 0.5;  // of all training episodes
  int batch_size = 64;
  int epochs = 400;
  int episodes_per_epoch = 500;
  int target_sync = 1000;  // gradient updates
  int tbptt_length = 8;
  int replay_transitions = 100000;
  int replay_episodes = 10000;
  int history_length = 5;
  int hidden_size = 128;
  int conv1_maps = 16;
  int conv2_maps = 32;
  int updates_per_step = 1;
  int steps_per_update = 1;  // environment steps per updates_per_step updates
  int warmup_steps = 64;  // environment steps before the first update
  int checkpoint_every = 10;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Epsilon-greedy: uniform index with probability epsilon, otherwise the
/// argmax with ties broken toward the lowest index.
int select_action(std::span<const float> q, double epsilon, Rng& rng);
int argmax(std::span<const float> q);

/// Bellman regression target: r when done, else r + gamma * max_next_q.
double td_target(double reward, bool done, double gamma, double max_next_q);

struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  long decay_steps = 1;
};

/// Linear from start to end over decay_steps, then held at end.
double epsilon_at(long global_step, const EpsilonSchedule& schedule);

struct LrSchedule {
  double base = 0.001;
  int decay_every = 200;
  double factor = 0.1;
};

/// Step decay: base * factor^(epoch / decay_every).
double lr_at(int epoch, const LrSchedule& schedule);

template <class T>
struct AdamState {
  nn::ParamSet<T> m;
  nn::ParamSet<T> v;
  long step = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class T>
AdamState<T> adam_init(const nn::ParamSet<T>& params);

/// One bias-corrected adaptive-moment step, in place. Throws ShapeMismatch.
template <class T>
void apply_update(nn::ParamSet<T>& params, const nn::ParamSet<T>& grads, AdamState<T>& state, double lr,
                  const AdamConfig& config = {});

/// Mixed-radix joint action index, agent 0 most significant.
int encode_joint_action(std::span<const int> actions, int radix);
std::vector<int> decode_joint_action(int index, int agents, int radix);

/// Fixed-capacity ring buffer with uniform sampling with replacement.
/// Appends and samples are serialized by an internal mutex.
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void push(T item) {
    std::lock_guard lock(mutex_);
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }

  /// Index of a uniformly chosen stored item.
  std::size_t sample_index(Rng& rng) const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(rng.below(items_.size()));
  }

  T sample(Rng& rng) const {
    std::lock_guard lock(mutex_);
    return items_[static_cast<std::size_t>(rng.below(items_.size()))];
  }

  const T& at(std::size_t i) const {
    std::lock_guard lock(mutex_);
    return items_[i];
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<T> items_;
  mutable std::mutex mutex_;
};

/// Observation planes packed one bit per cell.
struct PackedPlanes {
  std::vector<std::uint64_t> words;
  int bits = 0;

  static PackedPlanes pack(std::span<const std::uint8_t> planes);
  /// Writes the unpacked values into `out` (length `bits`).
  template <class T>
  void unpack_into(T* out) const {
    for (int i = 0; i < bits; ++i) out[i] = static_cast<T>((words[static_cast<std::size_t>(i >> 6)] >> (i & 63)) & 1ULL);
  }
  friend bool operator==(const PackedPlanes&, const PackedPlanes&) = default;
};

}  // namespace mapel
