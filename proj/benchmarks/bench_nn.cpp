#include <benchmark/benchmark.h>

#include "mapel/harness.hpp"
#include "mapel/nn.hpp"

using namespace mapel;
using nn::Matrix;

namespace {

nn::RecurrentQShape shape_for(int side) {
  GameConfig g;
  g.width = side;
  g.height = side;
  return recurrent_shape(g, TrainConfig{}, Team::Pursuer, CommKind::P2PSR);
}

Matrix<float> sparse_planes(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix<float> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(0.1) ? 1.0f : 0.0f;
  return m;
}

// Per-step forward for a team of two.
void BM_ForwardQ(benchmark::State& state) {
  const auto shape = shape_for(static_cast<int>(state.range(0)));
  Rng rng(3);
  const auto params = nn::init_recurrent_params<float>(shape, rng);
  const auto obs = sparse_planes(2, shape.encoder.input_dim(), rng);
  const Matrix<float> reports = Matrix<float>::Ones(2, shape.report_width);
  Matrix<float> h = Matrix<float>::Zero(2, shape.hidden);
  for (auto _ : state) {
    auto out = nn::recurrent_step<float>(shape, params, obs, h, reports);
    benchmark::DoNotOptimize(out.q.data());
  }
}
BENCHMARK(BM_ForwardQ)->Arg(16)->Arg(32);

// One training batch: 64 sequences of `length` steps.
void BM_LossAndGrads(benchmark::State& state) {
  const auto shape = shape_for(static_cast<int>(state.range(0)));
  const int length = static_cast<int>(state.range(1));
  Rng rng(5);
  const auto params = nn::init_recurrent_params<float>(shape, rng);
  nn::SequenceBatch<float> b;
  b.length = length;
  b.batch = 64;
  const auto rows = static_cast<Eigen::Index>(length) * 64;
  b.observations = sparse_planes(rows, shape.encoder.input_dim(), rng);
  b.reports = Matrix<float>::Zero(rows, shape.report_width);
  b.actions.assign(static_cast<std::size_t>(rows), 1);
  b.targets.assign(static_cast<std::size_t>(rows), 0.5f);
  b.mask.assign(static_cast<std::size_t>(rows), 1.0f);
  for (auto _ : state) {
    auto lg = nn::recurrent_loss_and_grads<float>(shape, params, b);
    benchmark::DoNotOptimize(lg.loss);
  }
}
BENCHMARK(BM_LossAndGrads)->Args({16, 8})->Args({16, 4})->Args({32, 8})->Unit(benchmark::kMillisecond);

void BM_SequenceQ(benchmark::State& state) {
  const auto shape = shape_for(16);
  Rng rng(5);
  const auto params = nn::init_recurrent_params<float>(shape, rng);
  const auto obs = sparse_planes(9 * 64, shape.encoder.input_dim(), rng);
  const Matrix<float> reports = Matrix<float>::Zero(9 * 64, shape.report_width);
  for (auto _ : state) benchmark::DoNotOptimize(nn::recurrent_sequence_q<float>(shape, params, obs, reports, 9, 64));
}
BENCHMARK(BM_SequenceQ)->Unit(benchmark::kMillisecond);

void BM_JointLossAndGrads(benchmark::State& state) {
  GameConfig g;
  g.width = g.height = 16;
  const auto shape = joint_shape(g, TrainConfig{}, Team::Pursuer);
  Rng rng(9);
  const auto params = nn::init_joint_params<float>(shape, rng);
  nn::JointBatch<float> b;
  b.inputs = sparse_planes(64, shape.encoder.input_dim(), rng);
  b.actions.assign(64, 3);
  b.targets.assign(64, 0.1f);
  for (auto _ : state) benchmark::DoNotOptimize(nn::joint_loss_and_grads<float>(shape, params, b).loss);
}
BENCHMARK(BM_JointLossAndGrads)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
