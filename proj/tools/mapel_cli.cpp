// mapel: train, evaluate and replay pursuit-evasion agents.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 training diverged.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "mapel/checkpoint.hpp"
#include "mapel/config.hpp"
#include "mapel/errors.hpp"
#include "mapel/harness.hpp"
#include "mapel/record.hpp"
#include "mapel/trainer.hpp"

namespace {

using namespace mapel;

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct TrainArgs {
  std::string scenario = "2v2";
  std::string team = "pursuers";
  std::string method = "mapel-p2psr";
  std::string profile = "desk";
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "run";
};

struct EvalArgs {
  std::string checkpoint;
  std::string opponent = "naive";
  std::string scenario = "2v2";
  std::string config;
  int episodes = 100;
  std::uint64_t seed = 0;
  std::string record;
  bool json = false;
};

struct ReplayArgs {
  std::string record;
  std::string format = "text";
  std::string out = "frames";
  int cell_px = 8;
};

RunConfig base_profile(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "full") return RunConfig{};
  throw ConfigError("unknown profile '" + name + "' (desk or full)");
}

int run_train(const TrainArgs& a) {
  RunConfig run = base_profile(a.profile);
  if (!a.config.empty()) load_config_file(a.config, run.game, run.train);
  std::tie(run.game.n_pursuers, run.game.n_evaders) = parse_scenario(a.scenario);
  run.team = team_from_string(a.team);
  run.method = method_from_string(a.method);
  run.game.seed = a.seed;
  run.seed = a.seed;
  run.out_dir = a.out;
  run.validate();

  std::printf("%s\n", metrics_header().c_str());
  TrainSetup setup;
  setup.on_epoch = [](const EpochMetrics& m) { std::printf("%s\n", metrics_row(m).c_str()); std::fflush(stdout); };
  const auto result = train(run, setup);
  std::printf("checkpoint %s (%ld env steps, %ld updates)\n", result.final_checkpoint_path.c_str(), result.env_steps,
              result.updates);
  return 0;
}

void print_report(const EvalReport& r, bool json) {
  if (json) {
    std::printf(
        "{\"episodes\":%d,\"avg_pursuer_reward\":%.6f,\"avg_evader_reward\":%.6f,\"avg_steps\":%.3f,"
        "\"evaders_target\":%d,\"pursuers_target\":%d,\"capture_all\":%d,\"draws\":%d,\"complete_win_rate\":%.6f}\n",
        r.episodes, r.avg_pursuer_reward, r.avg_evader_reward, r.avg_steps, r.count(GameStatus::EvadersWinTarget),
        r.count(GameStatus::PursuersWinTarget), r.count(GameStatus::PursuersWinCaptureAll), r.count(GameStatus::Draw),
        r.complete_win_rate());
    return;
  }
  std::printf("episodes                  %d\n", r.episodes);
  std::printf("avg pursuer reward        %.4f\n", r.avg_pursuer_reward);
  std::printf("avg evader reward         %.4f\n", r.avg_evader_reward);
  std::printf("avg steps                 %.2f\n", r.avg_steps);
  for (int s = 1; s < kNumStatuses; ++s) {
    const auto status = static_cast<GameStatus>(s);
    std::printf("%-26s%d\n", std::string(to_string(status)).c_str(), r.count(status));
  }
  std::printf("complete win rate         %.4f\n", r.complete_win_rate());
}

int run_eval(const EvalArgs& a) {
  if (a.episodes < 1) throw ConfigError("--episodes must be >= 1");
  const auto opponent = scripted_controller(method_from_string(a.opponent));
  GameConfig game;
  std::unique_ptr<TeamController> learned;
  Team learned_team = Team::Pursuer;
  if (!a.checkpoint.empty()) {
    const Checkpoint ck = read_checkpoint(a.checkpoint);
    game = ck.run.game;
    learned_team = ck.run.team;
    learned = controller_from_checkpoint(ck, 0.0);
  } else {
    RunConfig run = desk_profile();
    if (!a.config.empty()) load_config_file(a.config, run.game, run.train);
    std::tie(run.game.n_pursuers, run.game.n_evaders) = parse_scenario(a.scenario);
    game = run.game;
    learned = scripted_controller(Method::Naive);
  }
  game.validate();
  TeamController& p = learned_team == Team::Pursuer ? *learned : *opponent;
  TeamController& e = learned_team == Team::Pursuer ? *opponent : *learned;
  const EvalReport report = evaluate(game, p, e, a.episodes, a.seed);
  print_report(report, a.json);

  if (!a.record.empty()) {
    EpisodeOptions options;
    options.record = true;
    const auto ep = run_episode(game, p, e, a.seed, options);
    std::ofstream out(a.record, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + a.record + "'");
    write_record(out, *ep.record);
  }
  return 0;
}

int run_replay(const ReplayArgs& a) {
  std::ifstream in(a.record, std::ios::binary);
  if (!in) throw ConfigError("cannot open record '" + a.record + "'");
  const EpisodeRecord record = parse_record(in);
  resimulate(record);
  if (a.format == "text") {
    const auto frames = render_text(record);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      std::printf("step %zu\n%s\n", k, frames[k].c_str());
    }
    std::printf("%s\n", std::string(to_string(record.status)).c_str());
  } else if (a.format == "image-frames") {
    std::filesystem::create_directories(a.out);
    const auto images = render_images(record, a.cell_px);
    for (std::size_t k = 0; k < images.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04zu.ppm", k);
      std::ofstream(std::filesystem::path(a.out) / name, std::ios::binary) << images[k].to_ppm();
    }
    std::printf("%zu frames written to %s\n", images.size(), a.out.c_str());
  } else {
    throw ConfigError("--format must be text or image-frames");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pursuit-evasion simulator and multi-agent Q-learning harness"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train one team against naive opponents");
  train_cmd->add_option("--scenario", ta.scenario, "Team sizes, e.g. 2v2")->capture_default_str();
  train_cmd->add_option("--team", ta.team, "Trained team")->check(CLI::IsMember({"pursuers", "evaders"}))
      ->capture_default_str();
  train_cmd->add_option("--method", ta.method, "naive|ma-dqn|mapel-p2psr|mapel-rsr")->capture_default_str();
  train_cmd->add_option("--profile", ta.profile, "Base settings before --config: desk or full")->capture_default_str();
  train_cmd->add_option("--config", ta.config, "key = value overrides");
  train_cmd->add_option("--seed", ta.seed)->capture_default_str();
  train_cmd->add_option("--out", ta.out, "Output directory")->capture_default_str();

  EvalArgs ea;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation; naive vs naive without --checkpoint");
  eval_cmd->add_option("--checkpoint", ea.checkpoint);
  eval_cmd->add_option("--opponent", ea.opponent)->capture_default_str();
  eval_cmd->add_option("--scenario", ea.scenario, "Team sizes without a checkpoint")->capture_default_str();
  eval_cmd->add_option("--config", ea.config, "Game settings without a checkpoint");
  eval_cmd->add_option("--episodes", ea.episodes)->capture_default_str();
  eval_cmd->add_option("--seed", ea.seed, "Episode i uses seed + i")->capture_default_str();
  eval_cmd->add_option("--record", ea.record, "Also write the record of the episode with the base seed");
  eval_cmd->add_flag("--json", ea.json, "One JSON object instead of a table");

  ReplayArgs ra;
  auto* replay_cmd = app.add_subcommand("replay", "Verify and render an episode record");
  replay_cmd->add_option("--record", ra.record)->required();
  replay_cmd->add_option("--format", ra.format, "text or image-frames")->capture_default_str();
  replay_cmd->add_option("--out", ra.out, "Directory for image frames")->capture_default_str();
  replay_cmd->add_option("--cell-px", ra.cell_px)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train_cmd) return run_train(ta);
    if (*eval_cmd) return run_eval(ea);
    if (*replay_cmd) return run_replay(ra);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NonFiniteLoss& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
