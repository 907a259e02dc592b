#include "mapel/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include "mapel/errors.hpp"

namespace mapel {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Field {
  std::string key;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

template <class T>
Field number_field(std::string key, T& ref) {
  return {key, [&ref, key](std::string_view v) { ref = parse_number<T>(key, v); },
          [&ref]() {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(ref);
            } else {
              return std::to_string(ref);
            }
          }};
}

std::vector<Field> fields(GameConfig& g, TrainConfig& t) {
  std::vector<Field> f;
  f.push_back(number_field("width", g.width));
  f.push_back(number_field("height", g.height));
  f.push_back(number_field("n_pursuers", g.n_pursuers));
  f.push_back(number_field("n_evaders", g.n_evaders));
  f.push_back(number_field("sense_length", g.sense_length));
  f.push_back(number_field("sense_width", g.sense_width));
  f.push_back(number_field("speed", g.speed));
  f.push_back(number_field("target_size", g.target_size));
  f.push_back(number_field("obstacle_count", g.obstacle_count));
  f.push_back(number_field("obstacle_min", g.obstacle_min));
  f.push_back(number_field("obstacle_max", g.obstacle_max));
  f.push_back(number_field("max_steps", g.max_steps));
  f.push_back({"connectivity",
               [&g](std::string_view v) {
                 if (v == "four") {
                   g.connectivity = Connectivity::Four;
                 } else if (v == "four-plus-stay") {
                   g.connectivity = Connectivity::FourPlusStay;
                 } else {
                   throw ConfigError("connectivity must be 'four' or 'four-plus-stay'");
                 }
               },
               [&g]() { return std::string(g.connectivity == Connectivity::Four ? "four" : "four-plus-stay"); }});
  f.push_back(number_field("seed", g.seed));
  f.push_back(number_field("gamma", t.gamma));
  f.push_back(number_field("lr", t.lr));
  f.push_back(number_field("lr_decay_every", t.lr_decay_every));
  f.push_back(number_field("lr_decay_factor", t.lr_decay_factor));
  f.push_back(number_field("epsilon_start", t.epsilon_start));
  f.push_back(number_field("epsilon_end", t.epsilon_end));
  f.push_back(number_field("epsilon_decay_fraction", t.epsilon_decay_fraction));
  f.push_back(number_field("batch_size", t.batch_size));
  f.push_back(number_field("epochs", t.epochs));
  f.push_back(number_field("episodes_per_epoch", t.episodes_per_epoch));
  f.push_back(number_field("target_sync", t.target_sync));
  f.push_back(number_field("tbptt_length", t.tbptt_length));
  f.push_back(number_field("replay_transitions", t.replay_transitions));
  f.push_back(number_field("replay_episodes", t.replay_episodes));
  f.push_back(number_field("history_length", t.history_length));
  f.push_back(number_field("hidden_size", t.hidden_size));
  f.push_back(number_field("conv1_maps", t.conv1_maps));
  f.push_back(number_field("conv2_maps", t.conv2_maps));
  f.push_back(number_field("updates_per_step", t.updates_per_step));
  f.push_back(number_field("steps_per_update", t.steps_per_update));
  f.push_back(number_field("warmup_steps", t.warmup_steps));
  f.push_back(number_field("checkpoint_every", t.checkpoint_every));
  return f;
}

// Calls `fn(key, value, line_number)` for every non-blank, non-comment line.
template <class Fn>
void for_each_entry(std::string_view text, Fn&& fn) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    fn(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
  }
}

}  // namespace

void RunConfig::validate() const {
  game.validate();
  train.validate();
  if (game.n_pursuers < 2 || game.n_pursuers > 5 || game.n_evaders < 2 || game.n_evaders > 5) {
    throw ConfigError("team sizes must lie in 2..5");
  }
  if (method == Method::Naive) throw ConfigError("the trained team needs a learned method");
  const int size = team == Team::Pursuer ? game.n_pursuers : game.n_evaders;
  if (method == Method::MapelRsr && size < 2) throw ConfigError("mapel-rsr requires at least two agents");
}

RunConfig desk_profile() {
  RunConfig run;
  run.game.width = 16;
  run.game.height = 16;
  run.game.obstacle_count = 4;
  run.game.obstacle_max = 3;
  run.train.epochs = 30;
  run.train.episodes_per_epoch = 100;
  return run;
}

std::pair<int, int> parse_scenario(std::string_view text) {
  const auto v = text.find('v');
  if (v == std::string_view::npos) throw ConfigError("scenario must look like '2v2'");
  return {parse_number<int>("scenario", text.substr(0, v)), parse_number<int>("scenario", text.substr(v + 1))};
}

void apply_config_text(std::string_view text, GameConfig& game, TrainConfig& train) {
  auto table = fields(game, train);
  for_each_entry(text, [&](std::string_view key, std::string_view value, int line_no) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    it->set(value);
  });
}

void load_config_file(const std::string& path, GameConfig& game, TrainConfig& train) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(buf.str(), game, train);
}

std::string to_config_text(const GameConfig& game, const TrainConfig& train) {
  GameConfig g = game;
  TrainConfig t = train;
  std::string out;
  for (const auto& f : fields(g, t)) out += f.key + " = " + f.get() + "\n";
  return out;
}

std::string run_text(const RunConfig& run) {
  return to_config_text(run.game, run.train) + "team = " + std::string(to_string(run.team)) +
         "\nmethod = " + std::string(to_string(run.method)) + "\n";
}

RunConfig parse_run_text(std::string_view text) {
  RunConfig run;
  std::string rest;
  for_each_entry(text, [&](std::string_view key, std::string_view value, int) {
    if (key == "team") {
      run.team = team_from_string(value);
    } else if (key == "method") {
      run.method = method_from_string(value);
    } else {
      rest += std::string(key) + " = " + std::string(value) + "\n";
    }
  });
  apply_config_text(rest, run.game, run.train);
  run.seed = run.game.seed;
  return run;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& run) { return fnv1a(run_text(run)); }

}  // namespace mapel
