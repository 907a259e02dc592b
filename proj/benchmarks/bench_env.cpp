#include <benchmark/benchmark.h>

#include "mapel/env.hpp"
#include "mapel/naive.hpp"
#include "mapel/policy.hpp"
#include "mapel/sensing.hpp"

using namespace mapel;

namespace {

GameConfig grid_config(int side) {
  GameConfig c;
  c.width = side;
  c.height = side;
  return c;
}

void BM_EnvStep(benchmark::State& state) {
  const auto config = grid_config(static_cast<int>(state.range(0)));
  const RewardSpec rewards;
  Rng rng(1);
  GameState s = new_game(config, 1);
  std::vector<Action> actions(static_cast<std::size_t>(config.agent_count()));
  for (auto _ : state) {
    for (auto& a : actions) a = static_cast<Action>(rng.below(kNumActions));
    auto next = step(config, rewards, s, actions);
    s = is_terminal(next.state.status) ? new_game(config, rng.next()) : std::move(next.state);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_EnvStep)->Arg(16)->Arg(32);

void BM_Visibility(benchmark::State& state) {
  const auto config = grid_config(static_cast<int>(state.range(0)));
  const GameState s = new_game(config, 7);
  for (auto _ : state) benchmark::DoNotOptimize(visibility_mask(config, s, {Team::Pursuer, 0}));
}
BENCHMARK(BM_Visibility)->Arg(16)->Arg(32);

void BM_ObserveTeam(benchmark::State& state) {
  const auto config = grid_config(32);
  const GameState s = new_game(config, 7);
  for (auto _ : state) benchmark::DoNotOptimize(observe_team(config, s, Team::Pursuer));
}
BENCHMARK(BM_ObserveTeam);

void BM_Bfs(benchmark::State& state) {
  const auto config = grid_config(32);
  const GameState s = new_game(config, 11);
  for (auto _ : state) benchmark::DoNotOptimize(bfs_shortest_path(*s.grid, s.evaders[0], s.targets));
}
BENCHMARK(BM_Bfs);

void BM_NaiveEpisode(benchmark::State& state) {
  const auto config = grid_config(static_cast<int>(state.range(0)));
  NaiveController naive;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    GameState s = new_game(config, ++seed);
    Rng rng(seed);
    std::vector<Action> joint;
    while (!is_terminal(s.status)) {
      joint.clear();
      for (Team team : {Team::Pursuer, Team::Evader}) {
        const auto obs = observe_team(config, s, team);
        const TeamStepInput in{config, s, team, obs, {}, {}};
        const auto a = naive.act(in, rng);
        joint.insert(joint.end(), a.begin(), a.end());
      }
      s = step(config, {}, s, joint).state;
    }
    benchmark::DoNotOptimize(s.status);
  }
}
BENCHMARK(BM_NaiveEpisode)->Arg(16)->Arg(32);

}  // namespace
