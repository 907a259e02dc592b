#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mapel/errors.hpp"
#include "mapel/harness.hpp"
#include "mapel/naive.hpp"
#include "mapel/record.hpp"
#include "mapel/trainer.hpp"
#include "support.hpp"

using namespace mapel;

namespace {

GameConfig small_game(int side = 12) {
  GameConfig c;
  c.width = c.height = side;
  c.obstacle_count = 2;
  c.obstacle_max = 3;
  c.target_size = 2;
  c.sense_length = c.sense_width = 5;
  c.max_steps = 64;
  return c;
}

RunConfig tiny_run(const std::string& out, std::uint64_t seed) {
  RunConfig run;
  run.game = small_game(8);
  run.game.seed = seed;
  run.seed = seed;
  run.out_dir = out;
  run.train.epochs = 2;
  run.train.episodes_per_epoch = 5;
  run.train.hidden_size = 16;
  run.train.conv1_maps = 4;
  run.train.conv2_maps = 4;
  run.train.batch_size = 4;
  run.train.warmup_steps = 8;
  run.train.history_length = 2;
  run.train.tbptt_length = 4;
  return run;
}

class WrongArity final : public TeamController {
 public:
  std::vector<Action> act(const TeamStepInput&, Rng&) override { return {Action::Stay}; }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("stages run in order, pursuers first, every step") {
  const GameConfig c = small_game();
  NaiveController p, e;
  std::vector<std::pair<StepPhase, Team>> events;
  std::vector<int> steps_seen;
  EpisodeOptions opt;
  opt.hook = [&](const PhaseEvent& ev) {
    events.emplace_back(ev.phase, ev.team);
    if (ev.phase == StepPhase::Step) steps_seen.push_back(ev.step);
    if (ev.phase != StepPhase::Step) CHECK(ev.observations != nullptr);
    if (ev.phase == StepPhase::Gather || ev.phase == StepPhase::Act) {
      REQUIRE(ev.gathered != nullptr);
      REQUIRE(ev.flags != nullptr);
      CHECK(ev.gathered->size() == ev.flags->size());
    }
  };
  const auto r = run_episode(c, p, e, 11, opt);
  REQUIRE(r.steps >= 1);
  CHECK(events.size() == static_cast<std::size_t>(r.steps) * 9);
  // Both teams sense first, then both act, then one joint move.
  const std::vector<std::pair<StepPhase, Team>> expected{
      {StepPhase::Observe, Team::Pursuer}, {StepPhase::Flag, Team::Pursuer}, {StepPhase::Gather, Team::Pursuer},
      {StepPhase::Observe, Team::Evader},  {StepPhase::Flag, Team::Evader},  {StepPhase::Gather, Team::Evader},
      {StepPhase::Act, Team::Pursuer},     {StepPhase::Act, Team::Evader}};
  for (int s = 0; s < r.steps; ++s) {
    const std::size_t base = static_cast<std::size_t>(s) * 9;
    for (std::size_t k = 0; k < expected.size(); ++k) CHECK(events[base + k] == expected[k]);
    CHECK(events[base + 8].first == StepPhase::Step);
    CHECK(steps_seen[static_cast<std::size_t>(s)] == s + 1);
  }
}

TEST_CASE("two idle teams draw with zero rewards") {
  GameConfig c = small_game();
  c.max_steps = 30;
  StayController p, e;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_episode(c, p, e, seed);
    CHECK(r.status == GameStatus::Draw);
    CHECK(r.steps == 30);
    for (double x : r.rewards) CHECK(x == 0.0);
  }
}

TEST_CASE("controllers returning the wrong number of actions are rejected") {
  const GameConfig c = small_game();
  WrongArity p;
  NaiveController e;
  CHECK_THROWS_AS(run_episode(c, p, e, 1), ActionArityMismatch);
}

TEST_CASE("evaluate is deterministic and its counts add up") {
  const GameConfig c = small_game();
  NaiveController p, e;
  const auto a = evaluate(c, p, e, 150, 4000);
  const auto b = evaluate(c, p, e, 150, 4000);
  CHECK(a == b);
  int total = 0;
  for (int n : a.outcomes) total += n;
  CHECK(total == 150);
  CHECK(a.count(GameStatus::Ongoing) == 0);
  CHECK(a.avg_pursuer_reward >= -1.0);
  CHECK(a.avg_pursuer_reward <= 1.0);
  // Team payouts cancel: P * avg_p + E * avg_e = 0.
  CHECK(c.n_pursuers * a.avg_pursuer_reward + c.n_evaders * a.avg_evader_reward == doctest::Approx(0.0));
  // The average is the outcome mix weighted by per-agent payouts.
  const RewardSpec spec;
  const double expected = (a.count(GameStatus::PursuersWinTarget) * spec.pursuer_win_target +
                           a.count(GameStatus::EvadersWinTarget) * spec.pursuer_lose_target +
                           a.count(GameStatus::PursuersWinCaptureAll) * spec.pursuer_capture_all) /
                          (150.0 * c.n_pursuers);
  CHECK(a.avg_pursuer_reward == doctest::Approx(expected));
  CHECK_THROWS_AS(evaluate(c, p, e, 0, 1), ConfigError);
}

TEST_CASE("scripted controllers") {
  CHECK(scripted_controller(Method::Naive) != nullptr);
  CHECK_THROWS_AS(scripted_controller(Method::MaDqn), ConfigError);
}

}  // TEST_SUITE

TEST_SUITE("record") {

TEST_CASE("records round-trip and resimulate") {
  const GameConfig c = small_game();
  NaiveController p, e;
  EpisodeOptions opt;
  opt.record = true;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto r = run_episode(c, p, e, 70000 + seed, opt);
    REQUIRE(r.record);
    const auto& rec = *r.record;
    CHECK(static_cast<int>(rec.steps.size()) == r.steps);
    CHECK(rec.status == r.status);
    const std::string text = serialize_record(rec);
    const auto back = parse_record(text);
    CHECK(back.steps == rec.steps);
    CHECK(back.config == rec.config);
    CHECK(back.seed == rec.seed);
    CHECK(back.final_rewards == rec.final_rewards);
    CHECK(serialize_record(back) == text);
    const auto states = resimulate(back);
    REQUIRE(states.size() == rec.steps.size() + 1);
    CHECK(states.back().status == r.status);
  }
}

TEST_CASE("tampered records are caught") {
  const GameConfig c = small_game();
  NaiveController p, e;
  EpisodeOptions opt;
  opt.record = true;
  auto rec = *run_episode(c, p, e, 5, opt).record;
  REQUIRE(!rec.steps.empty());
  rec.steps.back().status = rec.steps.back().status == GameStatus::Draw ? GameStatus::EvadersWinTarget
                                                                        : GameStatus::Draw;
  CHECK_THROWS_AS(resimulate(rec), CorruptRecord);
  CHECK_THROWS_AS(parse_record(std::string("{\"type\":\"step\"}\n")), CorruptRecord);
  CHECK_THROWS_AS(parse_record(std::string("not json\n")), CorruptRecord);
}

TEST_CASE("text frames: one per state, captured evaders pinned as x") {
  // Hand-driven episode: pursuer 0 walks onto evader 0, then everyone idles.
  const GameConfig c = small_game();
  bool checked = false;
  for (std::uint64_t seed = 0; seed < 200 && !checked; ++seed) {
    GameState s = new_game(c, seed);
    const auto path = bfs_shortest_path(*s.grid, s.pursuers[0], std::vector<Coord>{s.evaders[0]});
    if (!path || path->size() < 2) continue;
    EpisodeRecord rec;
    rec.config = c;
    rec.seed = seed;
    rec.initial_pursuers = s.pursuers;
    rec.initial_evaders = s.evaders;
    std::size_t k = 1;
    int captured_at = -1;
    for (int extra = 0; !is_terminal(s.status) && extra < 3;) {
      std::vector<Action> joint(static_cast<std::size_t>(c.agent_count()), Action::Stay);
      if (k < path->size()) {
        const Coord from = (*path)[k - 1], to = (*path)[k];
        joint[0] = to.row < from.row ? Action::Up : to.row > from.row ? Action::Down
                 : to.col < from.col ? Action::Left : Action::Right;
        ++k;
      } else {
        ++extra;
      }
      s = step(c, {}, s, joint).state;
      RecordStep st;
      st.step = s.step;
      st.actions = joint;
      st.pursuers = s.pursuers;
      st.evaders = s.evaders;
      st.captured = s.evader_captured;
      st.status = s.status;
      rec.steps.push_back(st);
      if (captured_at < 0 && s.evader_captured[0]) captured_at = s.step;
    }
    if (captured_at < 0 || is_terminal(s.status)) continue;
    const auto frames = render_text(rec);
    REQUIRE(frames.size() == rec.steps.size() + 1);
    const Coord at = rec.steps.back().evaders[0];
    const std::size_t off =
        static_cast<std::size_t>(at.row) * (static_cast<std::size_t>(c.width) + 1) + static_cast<std::size_t>(at.col);
    for (std::size_t f = 0; f < frames.size(); ++f) {
      const char want = static_cast<int>(f) >= captured_at ? 'x' : 'E';
      // A pursuer standing on the evader may take the glyph; only the idle frames are strict.
      if (static_cast<int>(f) > captured_at) CHECK(frames[f][off] == want);
      if (static_cast<int>(f) < captured_at) CHECK(frames[f][off] != 'x');
    }
    for (std::size_t f = static_cast<std::size_t>(captured_at); f < rec.steps.size(); ++f) {
      CHECK(rec.steps[f].evaders[0] == at);
    }
    checked = true;
  }
  CHECK(checked);
}

TEST_CASE("image frames") {
  const GameConfig c = small_game();
  NaiveController p, e;
  EpisodeOptions opt;
  opt.record = true;
  const auto rec = *run_episode(c, p, e, 3, opt).record;
  const auto images = render_images(rec, 4);
  REQUIRE(images.size() == rec.steps.size() + 1);
  for (const auto& im : images) {
    CHECK(im.width == 4 * c.width);
    CHECK(im.height == 4 * c.height);
    CHECK(im.rgb.size() == static_cast<std::size_t>(im.width * im.height * 3));
  }
  // Every pixel of one cell shares a colour.
  const auto& im = images.front();
  const Coord pc = rec.initial_pursuers.front();
  const std::size_t first = (static_cast<std::size_t>(pc.row * 4) * static_cast<std::size_t>(im.width) +
                             static_cast<std::size_t>(pc.col * 4)) * 3;
  for (int dy = 0; dy < 4; ++dy) {
    for (int dx = 0; dx < 4; ++dx) {
      const std::size_t at = (static_cast<std::size_t>(pc.row * 4 + dy) * static_cast<std::size_t>(im.width) +
                              static_cast<std::size_t>(pc.col * 4 + dx)) * 3;
      for (int ch = 0; ch < 3; ++ch) CHECK(im.rgb[at + static_cast<std::size_t>(ch)] == im.rgb[first + static_cast<std::size_t>(ch)]);
    }
  }
  CHECK(im.to_ppm().rfind("P6", 0) == 0);
}

}  // TEST_SUITE

TEST_SUITE("trainer") {

TEST_CASE("metrics rows, learning-rate decay and files") {
  const auto dir = std::filesystem::temp_directory_path() / "mapel_test_metrics";
  std::filesystem::remove_all(dir);
  RunConfig run = tiny_run(dir.string(), 3);
  run.train.epochs = 201;
  run.train.episodes_per_epoch = 1;
  run.train.updates_per_step = 0;
  run.train.checkpoint_every = 100;
  run.game.max_steps = 8;
  const auto result = train(run);
  REQUIRE(result.metrics.size() == 201);
  CHECK(result.updates == 0);
  CHECK(result.metrics[0].lr == doctest::Approx(0.001));
  CHECK(result.metrics[199].lr == doctest::Approx(0.001));
  CHECK(result.metrics[200].lr == doctest::Approx(0.0001));
  for (const auto& m : result.metrics) {
    CHECK(m.evaders_target + m.pursuers_target + m.capture_all + m.draws == m.episodes);
    CHECK(m.mean_loss == 0.0);
  }
  std::ifstream in(dir / "metrics.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == metrics_header());
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 201);
  CHECK(std::filesystem::exists(dir / "run.txt"));
  CHECK(std::filesystem::exists(dir / "checkpoint_init.bin"));
  CHECK(std::filesystem::exists(dir / "checkpoint_epoch_0099.bin"));
  CHECK(std::filesystem::exists(dir / "checkpoint_epoch_0199.bin"));
  CHECK(std::filesystem::exists(dir / "checkpoint_final.bin"));
  // With no updates the final weights are the initial ones.
  CHECK(read_checkpoint((dir / "checkpoint_final.bin").string()).params.value(0) == result.initial.params.value(0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic per seed") {
  for (Method m : {Method::MapelP2psr, Method::MapelRsr, Method::MaDqn}) {
    RunConfig a = tiny_run("unused", 5);
    a.method = m;
    TrainSetup setup;
    setup.write_files = false;
    const auto r1 = train(a, setup);
    const auto r2 = train(a, setup);
    CHECK(r1.updates > 0);
    CHECK(r1.updates == r2.updates);
    CHECK(r1.env_steps == r2.env_steps);
    CHECK(serialize_checkpoint(r1.final) == serialize_checkpoint(r2.final));
    RunConfig b = a;
    b.seed = b.game.seed = 6;
    CHECK(serialize_checkpoint(train(b, setup).final) != serialize_checkpoint(r1.final));
  }
}

TEST_CASE("checkpoints rebuild a controller") {
  RunConfig run = tiny_run("unused", 7);
  TrainSetup setup;
  setup.write_files = false;
  const auto r = train(run, setup);
  auto ctl = controller_from_checkpoint(r.final);
  NaiveController e;
  const auto rep1 = evaluate(run.game, *ctl, e, 10, 100);
  auto ctl2 = controller_from_checkpoint(parse_checkpoint(serialize_checkpoint(r.final)));
  CHECK(evaluate(run.game, *ctl2, e, 10, 100) == rep1);
  Checkpoint broken = r.final;
  broken.run.train.hidden_size += 1;
  CHECK_THROWS_AS(controller_from_checkpoint(broken), ShapeMismatch);
}

TEST_CASE("run validation happens before training") {
  RunConfig run = tiny_run("unused", 1);
  run.game.n_pursuers = 1;
  CHECK_THROWS_AS(train(run), ConfigError);
}

}  // TEST_SUITE
