// Acceptance suite: one PASS/FAIL line per criterion.
//
//   mapel_acceptance [--only N]... [--allow-fail N]... [--out DIR]
//
// Exit status is 0 when every gated criterion that ran passed, ignoring those
// named by --allow-fail (still printed as FAIL, with a note). Criterion 9 is
// informational and always reports INFO.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "mapel/comms.hpp"
#include "mapel/config.hpp"
#include "mapel/env.hpp"
#include "mapel/harness.hpp"
#include "mapel/naive.hpp"
#include "mapel/nn.hpp"
#include "mapel/policy.hpp"
#include "mapel/record.hpp"
#include "mapel/sensing.hpp"
#include "mapel/trainer.hpp"

using namespace mapel;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  bool gated = true;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Random grid with independent obstacle cells.
Grid random_grid(int rows, int cols, double density, Rng& rng) {
  Grid g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (rng.uniform01() < density) g.set({r, c}, Cell::Obstacle);
    }
  }
  return g;
}

Coord random_cell(const Grid& g, Rng& rng) {
  return {static_cast<int>(rng.below(static_cast<std::uint64_t>(g.rows()))),
          static_cast<int>(rng.below(static_cast<std::uint64_t>(g.cols())))};
}

Coord random_free_cell(const Grid& g, Rng& rng) {
  for (;;) {
    const Coord c = random_cell(g, rng);
    if (g.passable(c)) return c;
  }
}

// 1. Invariants over naive-vs-naive play on 32x32.
Verdict env_invariants() {
  const auto t0 = Clock::now();
  GameConfig config;  // 32x32, 2v2
  const RewardSpec rewards;
  NaiveController pursuers, evaders;
  EpisodeOptions options;
  options.record = true;
  long violations = 0, steps = 0;
  const int episodes = 10000;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = 500000 + static_cast<std::uint64_t>(i);
    const auto result = run_episode(config, pursuers, evaders, seed, options);
    const auto& rec = *result.record;
    const GameState init = new_game(config, seed);
    const Grid& grid = *init.grid;
    auto prev_p = init.pursuers;
    auto prev_e = init.evaders;
    std::vector<bool> prev_cap(init.evaders.size(), false);
    int prev_step = 0;
    for (std::size_t k = 0; k < rec.steps.size(); ++k) {
      const auto& s = rec.steps[k];
      const bool last = k + 1 == rec.steps.size();
      if (s.step != prev_step + 1) ++violations;
      if (is_terminal(s.status) != last) ++violations;
      for (std::size_t a = 0; a < s.pursuers.size(); ++a) {
        if (!grid.passable(s.pursuers[a])) ++violations;
        if (manhattan(s.pursuers[a], prev_p[a]) > 1) ++violations;
      }
      for (std::size_t a = 0; a < s.evaders.size(); ++a) {
        if (!grid.passable(s.evaders[a])) ++violations;
        if (manhattan(s.evaders[a], prev_e[a]) > 1) ++violations;
        if (prev_cap[a] && (!s.captured[a] || s.evaders[a] != prev_e[a])) ++violations;
      }
      prev_p = s.pursuers;
      prev_e = s.evaders;
      prev_cap = s.captured;
      prev_step = s.step;
    }
    steps += static_cast<long>(rec.steps.size());
    if (!is_terminal(result.status) || result.steps > config.max_steps) ++violations;
    if (result.status == GameStatus::Draw && result.steps != config.max_steps) ++violations;
    double pt = 0, et = 0;
    for (int a = 0; a < config.n_pursuers; ++a) pt += result.rewards[static_cast<std::size_t>(a)];
    for (int a = 0; a < config.n_evaders; ++a) et += result.rewards[static_cast<std::size_t>(config.n_pursuers + a)];
    if (std::abs(pt + et) > 1e-12) ++violations;
  }
  const double t = seconds_since(t0);
  return {violations == 0 && t <= 120.0,
          fmt("%d episodes, %ld steps, %ld violations, %.1fs (limit 120s)", episodes, steps, violations, t)};
}

// 2. BFS against flood fill.
Verdict bfs_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2);
  int agree = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const Grid g = random_grid(32, 32, 0.05 + 0.35 * rng.uniform01(), rng);
    const Coord from = random_free_cell(g, rng);
    std::vector<Coord> goals;
    const int n_goals = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < n_goals; ++k) goals.push_back(random_free_cell(g, rng));
    const auto dist = oracle::flood_distances(g, goals);
    const int want = dist[g.index(from)];
    const auto path = bfs_shortest_path(g, from, goals);
    bool ok;
    if (want == std::numeric_limits<int>::max()) {
      ok = !path.has_value();
    } else {
      ok = path && static_cast<int>(path->size()) - 1 == want && path->front() == from &&
           std::find(goals.begin(), goals.end(), path->back()) != goals.end();
      for (std::size_t k = 1; ok && k < path->size(); ++k) {
        ok = g.passable((*path)[k]) && manhattan((*path)[k], (*path)[k - 1]) == 1;
      }
    }
    agree += ok;
  }
  const double t = seconds_since(t0);
  return {agree == trials && t <= 60.0, fmt("%d/%d agree, %.1fs (limit 60s)", agree, trials, t)};
}

// 3. Line of sight against dense sampling.
Verdict los_oracle() {
  const auto t0 = Clock::now();
  Rng rng(3);
  int agree = 0, symmetric = 0, pairs = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const int side = 4 + static_cast<int>(rng.below(29));
    const Grid g = random_grid(side, side, 0.3 * rng.uniform01(), rng);
    const Coord a = random_free_cell(g, rng);
    const Coord b = random_cell(g, rng);
    const auto cells = supercover(a, b);
    const std::set<Coord> got(cells.begin(), cells.end());
    const bool same = got == oracle::touched_cells(a, b) &&
                      line_of_sight(g, a, b) == oracle::sampled_line_of_sight(g, a, b);
    agree += same;
    if (g.passable(b)) {
      ++pairs;
      symmetric += line_of_sight(g, a, b) == line_of_sight(g, b, a);
    }
  }
  // Every pair of free cells on a few small grids.
  int all_pairs = 0, all_symmetric = 0;
  for (int k = 0; k < 10; ++k) {
    const Grid g = random_grid(12, 12, 0.25, rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (std::size_t j = i + 1; j < g.size(); ++j) {
        const Coord a = g.coord(i), b = g.coord(j);
        if (!g.passable(a) || !g.passable(b)) continue;
        ++all_pairs;
        all_symmetric += line_of_sight(g, a, b) == line_of_sight(g, b, a);
      }
    }
  }
  const double t = seconds_since(t0);
  return {agree == trials && symmetric == pairs && all_symmetric == all_pairs && t <= 60.0,
          fmt("%d/%d agree, symmetric %d/%d sampled + %d/%d exhaustive, %.1fs (limit 60s)", agree, trials,
              symmetric, pairs, all_symmetric, all_pairs, t)};
}

// 4. Topology edge counts.
Verdict topology_counts() {
  Rng rng(4);
  int bad = 0;
  for (int n = 2; n <= 16; ++n) {
    if (build_topology(CommKind::P2PSR, n, rng).message_edges.size() != static_cast<std::size_t>(n * (n - 1) / 2)) {
      ++bad;
    }
    if (n >= 3 && build_topology(CommKind::RSR, n, rng).message_edges.size() != static_cast<std::size_t>(n)) ++bad;
  }
  return {bad == 0, fmt("n = 2..16, %d mismatches", bad)};
}

// 5. Analytic gradients against central differences.
Verdict gradient_check() {
  const auto t0 = Clock::now();
  Rng rng(5);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const bool joint = k % 2 == 1;
    nn::ConvShape enc;
    enc.channels = joint ? 10 : 5;
    enc.rows = 4 + static_cast<int>(rng.below(3));
    enc.cols = 4 + static_cast<int>(rng.below(3));
    enc.maps1 = 2 + static_cast<int>(rng.below(2));
    enc.maps2 = 2 + static_cast<int>(rng.below(2));
    if (!joint) {
      nn::RecurrentQShape shape{enc, static_cast<int>(rng.below(3)), 3 + static_cast<int>(rng.below(3)), 5};
      const auto params = nn::init_recurrent_params<double>(shape, rng);
      nn::SequenceBatch<double> batch;
      batch.length = 3;
      batch.batch = 2;
      const int rows = batch.length * batch.batch;
      batch.observations = nn::Matrix<double>(rows, enc.input_dim());
      for (Eigen::Index i = 0; i < batch.observations.size(); ++i) {
        batch.observations.data()[i] = rng.uniform01() < 0.3 ? 1.0 : 0.0;
      }
      batch.reports = nn::Matrix<double>(rows, shape.report_width);
      for (Eigen::Index i = 0; i < batch.reports.size(); ++i) batch.reports.data()[i] = rng.uniform01() < 0.5;
      for (int r = 0; r < rows; ++r) {
        batch.actions.push_back(static_cast<int>(rng.below(5)));
        batch.targets.push_back(2.0 * rng.uniform01() - 1.0);
        batch.mask.push_back(r == 5 ? 0.0 : 1.0);  // second sequence one step short
      }
      const auto analytic = nn::recurrent_loss_and_grads(shape, params, batch);
      const double e = oracle::max_gradient_error(params, analytic.grads, [&](const nn::ParamSet<double>& p) {
        return nn::recurrent_loss_and_grads(shape, p, batch).loss;
      });
      worst = std::max(worst, e);
    } else {
      nn::JointQShape shape{enc, 2, 4, 3 + static_cast<int>(rng.below(3))};
      const auto params = nn::init_joint_params<double>(shape, rng);
      nn::JointBatch<double> batch;
      batch.inputs = nn::Matrix<double>(4, enc.input_dim());
      for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) batch.inputs.data()[i] = rng.uniform01() < 0.3;
      for (int r = 0; r < 4; ++r) {
        batch.actions.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(shape.outputs()))));
        batch.targets.push_back(2.0 * rng.uniform01() - 1.0);
      }
      const auto analytic = nn::joint_loss_and_grads(shape, params, batch);
      const double e = oracle::max_gradient_error(params, analytic.grads, [&](const nn::ParamSet<double>& p) {
        return nn::joint_loss_and_grads(shape, p, batch).loss;
      });
      worst = std::max(worst, e);
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-4 && t <= 60.0, fmt("max relative error %.3g (limit 1e-4), %.1fs", worst, t)};
}

// 6. One pursuer, empty 5x5, stationary target and evader.
Verdict trivial_mdp() {
  const auto t0 = Clock::now();
  RunConfig run;
  run.game.width = run.game.height = 5;
  run.game.n_pursuers = 1;
  run.game.n_evaders = 1;
  run.game.target_size = 1;
  run.game.obstacle_count = 0;
  run.game.obstacle_min = run.game.obstacle_max = 1;
  run.game.sense_length = run.game.sense_width = 9;
  run.game.max_steps = 20;
  run.method = Method::MaDqn;
  run.seed = 6;
  auto& tr = run.train;
  tr.gamma = 0.9;
  tr.history_length = 1;
  tr.hidden_size = 64;
  tr.batch_size = 32;
  tr.target_sync = 200;
  tr.epochs = 60;
  tr.episodes_per_epoch = 100;
  tr.epsilon_decay_fraction = 0.6;
  tr.lr = 1e-3;
  tr.steps_per_update = 1;

  TrainSetup setup;
  setup.write_files = false;
  setup.rewards.pursuer_capture_all = 0.0;
  setup.rewards.evader_all_captured = 0.0;
  setup.opponent = [] { return std::make_unique<StayController>(); };
  const auto result = train(run, setup);

  auto greedy = controller_from_checkpoint(result.final, 0.0);
  StayController stay;
  int optimal = 0;
  const int episodes = 100;
  for (int i = 0; i < episodes; ++i) {
    const std::uint64_t seed = 900000 + static_cast<std::uint64_t>(i);
    const GameState init = new_game(run.game, seed);
    const auto path = bfs_shortest_path(*init.grid, init.pursuers[0], init.targets);
    const auto ep = run_episode(run.game, *greedy, stay, seed, {setup.rewards});
    if (path && ep.status == GameStatus::PursuersWinTarget && ep.steps == static_cast<int>(path->size()) - 1) {
      ++optimal;
    }
  }
  const double t = seconds_since(t0);
  return {optimal >= 95 && result.env_steps <= 50000 && t <= 600.0,
          fmt("%d/100 optimal (need 95), %ld env steps (limit 50000), %.1fs (limit 600s)", optimal, result.env_steps,
              t)};
}

double mean_reward(const Checkpoint& ckpt, const GameConfig& game, int episodes, std::uint64_t base) {
  auto learned = controller_from_checkpoint(ckpt, 0.0);
  NaiveController naive;
  return evaluate(game, *learned, naive, episodes, base).avg_pursuer_reward;
}

// 7. Desk-scale learning signal.
Verdict desk_learning(const fs::path& out) {
  const auto t0 = Clock::now();
  RunConfig run = desk_profile();
  run.method = Method::MapelP2psr;
  run.seed = 7;
  run.out_dir = (out / "desk").string();
  const auto result = train(run);
  const std::uint64_t base = 7000000;
  const double before = mean_reward(result.initial, run.game, 500, base);
  const double after = mean_reward(result.final, run.game, 500, base);
  const double t = seconds_since(t0);
  return {after - before >= 0.1 && t <= 1800.0,
          fmt("untrained %.4f, final %.4f, gain %.4f (need 0.1), %.0fs (limit 1800s)", before, after, after - before,
              t)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 8. Same (config, seed) twice gives identical metrics bytes.
Verdict reproducibility(const fs::path& out) {
  RunConfig run = desk_profile();
  run.game.width = run.game.height = 8;
  run.game.obstacle_count = 2;
  run.game.obstacle_max = 2;
  run.train.epochs = 3;
  run.train.episodes_per_epoch = 10;
  run.train.hidden_size = 32;
  run.train.batch_size = 8;
  run.seed = 8;
  std::string bytes[2];
  for (int k = 0; k < 2; ++k) {
    run.out_dir = (out / ("repro_" + std::to_string(k))).string();
    train(run);
    bytes[k] = slurp(fs::path(run.out_dir) / "metrics.csv");
  }
  return {!bytes[0].empty() && bytes[0] == bytes[1],
          fmt("%zu vs %zu bytes, %s", bytes[0].size(), bytes[1].size(), bytes[0] == bytes[1] ? "identical" : "differ")};
}

// 9. 4v4 P2PSR against RSR at a reduced budget; reported only.
Verdict topology_comparison(const fs::path& out) {
  double rate[2] = {0, 0};
  double reward[2] = {0, 0};
  const Method methods[2] = {Method::MapelP2psr, Method::MapelRsr};
  for (int k = 0; k < 2; ++k) {
    RunConfig run = desk_profile();
    run.game.n_pursuers = run.game.n_evaders = 4;
    run.train.epochs = 10;
    run.train.episodes_per_epoch = 50;
    run.method = methods[k];
    run.seed = 9;
    run.out_dir = (out / std::string(to_string(methods[k]))).string();
    const auto result = train(run);
    auto learned = controller_from_checkpoint(result.final, 0.0);
    NaiveController naive;
    const auto report = evaluate(run.game, *learned, naive, 200, 9000000);
    rate[k] = report.complete_win_rate();
    reward[k] = report.avg_pursuer_reward;
  }
  Verdict v;
  v.gated = false;
  v.pass = rate[0] >= rate[1];
  v.detail = fmt("complete wins P2PSR %.3f vs RSR %.3f, reward %.4f vs %.4f (%s)", rate[0], rate[1], reward[0],
                 reward[1], v.pass ? "P2PSR ahead or level" : "RSR ahead");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::vector<int> only;
  std::string out = "acceptance_out";
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 9));
  std::vector<int> allowed;
  app.add_option("--allow-fail", allowed, "known failures that do not set the exit status")->check(CLI::Range(1, 9));
  app.add_option("--out", out, "scratch directory for training runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(out);
  fs::create_directories(dir);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"environment invariants", env_invariants},
      {"BFS oracle", bfs_oracle},
      {"line-of-sight oracle", los_oracle},
      {"topology edge counts", topology_counts},
      {"gradient check", gradient_check},
      {"trivial MDP convergence", trivial_mdp},
      {"desk-scale learning signal", [&] { return desk_learning(dir); }},
      {"reproducibility", [&] { return reproducibility(dir); }},
      {"4v4 P2PSR vs RSR (not gated)", [&] { return topology_comparison(dir); }},
  };
  bool ok = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const char* tag = !v.gated ? "INFO" : (v.pass ? "PASS" : "FAIL");
    const bool known = std::find(allowed.begin(), allowed.end(), id) != allowed.end();
    std::printf("[%s] %d. %s: %s%s\n", tag, id, criteria[i].first, v.detail.c_str(),
                v.gated && !v.pass && known ? " (known failure, not counted)" : "");
    std::fflush(stdout);
    if (v.gated && !v.pass && !known) ok = false;
  }
  return ok ? 0 : 1;
}
