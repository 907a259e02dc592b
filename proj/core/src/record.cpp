#include "mapel/record.hpp"

#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "mapel/errors.hpp"
#include "mapel/qlearning.hpp"
#include "mapel/config.hpp"

namespace mapel {

using nlohmann::json;

namespace {

constexpr int kRecordVersion = 1;

json coords_json(const std::vector<Coord>& cs) {
  json out = json::array();
  for (Coord c : cs) out.push_back({c.row, c.col});
  return out;
}

std::vector<Coord> coords_from(const json& j) {
  std::vector<Coord> out;
  for (const auto& c : j) out.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  return out;
}

Action action_from_string(const std::string& s) {
  for (int i = 0; i < kNumActions; ++i) {
    if (to_string(static_cast<Action>(i)) == s) return static_cast<Action>(i);
  }
  throw CorruptRecord("unknown action '" + s + "'");
}

json topology_json(const TeamTopologyRecord& t) { return {{"kind", std::string(to_string(t.kind))}, {"ring", t.ring}}; }

TeamTopologyRecord topology_from(const json& j) {
  return {comm_kind_from_string(j.at("kind").get<std::string>()), j.at("ring").get<std::vector<int>>()};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void write_record(std::ostream& out, const EpisodeRecord& r) {
  const std::string text = to_config_text(r.config, TrainConfig{});
  json config = json::object();
  // Game keys only; the training block starts at "gamma".
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    if (key == "gamma") break;
    config[key] = value;
  }
  json header = {{"type", "header"},
                 {"version", kRecordVersion},
                 {"config", config},
                 {"rewards",
                  {{"evader_win", r.rewards.evader_win},
                   {"pursuer_lose_target", r.rewards.pursuer_lose_target},
                   {"pursuer_win_target", r.rewards.pursuer_win_target},
                   {"evader_lose_target", r.rewards.evader_lose_target},
                   {"pursuer_capture_all", r.rewards.pursuer_capture_all},
                   {"evader_all_captured", r.rewards.evader_all_captured}}},
                 {"config_hash", hex64(r.config_hash)},
                 {"seed", r.seed},
                 {"topology", {{"pursuers", topology_json(r.pursuer_topology)}, {"evaders", topology_json(r.evader_topology)}}},
                 {"initial", {{"pursuers", coords_json(r.initial_pursuers)}, {"evaders", coords_json(r.initial_evaders)}}}};
  out << header.dump() << '\n';
  for (const auto& s : r.steps) {
    json actions = json::array();
    for (Action a : s.actions) actions.push_back(std::string(to_string(a)));
    json captured = json::array();
    for (bool c : s.captured) captured.push_back(c ? 1 : 0);
    json step = {{"type", "step"},
                 {"step", s.step},
                 {"actions", actions},
                 {"flags", s.flags},
                 {"gathered", s.gathered},
                 {"pursuers", coords_json(s.pursuers)},
                 {"evaders", coords_json(s.evaders)},
                 {"captured", captured},
                 {"status", std::string(to_string(s.status))}};
    out << step.dump() << '\n';
  }
  json end = {{"type", "end"}, {"status", std::string(to_string(r.status))}, {"rewards", r.final_rewards}};
  out << end.dump() << '\n';
}

std::string serialize_record(const EpisodeRecord& record) {
  std::ostringstream out;
  write_record(out, record);
  return out.str();
}

EpisodeRecord parse_record(std::istream& in) {
  EpisodeRecord r;
  bool have_header = false;
  bool have_end = false;
  std::string line;
  int line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      if (have_end) throw CorruptRecord("content after the end line");
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        if (have_header) throw CorruptRecord("duplicate header");
        if (j.at("version").get<int>() != kRecordVersion) throw CorruptRecord("unsupported record version");
        std::string text;
        for (const auto& [key, value] : j.at("config").items()) text += key + " = " + value.get<std::string>() + "\n";
        TrainConfig unused;
        apply_config_text(text, r.config, unused);
        const auto& rw = j.at("rewards");
        r.rewards = {rw.at("evader_win").get<double>(),          rw.at("pursuer_lose_target").get<double>(),
                     rw.at("pursuer_win_target").get<double>(),  rw.at("evader_lose_target").get<double>(),
                     rw.at("pursuer_capture_all").get<double>(), rw.at("evader_all_captured").get<double>()};
        r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        r.seed = j.at("seed").get<std::uint64_t>();
        r.pursuer_topology = topology_from(j.at("topology").at("pursuers"));
        r.evader_topology = topology_from(j.at("topology").at("evaders"));
        r.initial_pursuers = coords_from(j.at("initial").at("pursuers"));
        r.initial_evaders = coords_from(j.at("initial").at("evaders"));
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw CorruptRecord("step before header");
        RecordStep s;
        s.step = j.at("step").get<int>();
        for (const auto& a : j.at("actions")) s.actions.push_back(action_from_string(a.get<std::string>()));
        s.flags = j.at("flags").get<std::vector<std::uint8_t>>();
        s.gathered = j.at("gathered").get<std::vector<std::vector<std::uint8_t>>>();
        s.pursuers = coords_from(j.at("pursuers"));
        s.evaders = coords_from(j.at("evaders"));
        for (const auto& c : j.at("captured")) s.captured.push_back(c.get<int>() != 0);
        s.status = status_from_string(j.at("status").get<std::string>());
        r.steps.push_back(std::move(s));
      } else if (type == "end") {
        if (!have_header) throw CorruptRecord("end before header");
        r.status = status_from_string(j.at("status").get<std::string>());
        r.final_rewards = j.at("rewards").get<JointRewards>();
        have_end = true;
      } else {
        throw CorruptRecord("unknown line type '" + type + "'");
      }
    }
  } catch (const CorruptRecord&) {
    throw;
  } catch (const std::exception& e) {
    throw CorruptRecord("line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header || !have_end) throw CorruptRecord("record is missing its header or end line");
  return r;
}

EpisodeRecord parse_record(const std::string& text) {
  std::istringstream in(text);
  return parse_record(in);
}

std::vector<GameState> resimulate(const EpisodeRecord& r) {
  std::vector<GameState> states;
  GameState s = new_game(r.config, r.seed);
  if (s.pursuers != r.initial_pursuers || s.evaders != r.initial_evaders) {
    throw CorruptRecord("initial positions do not match the seed");
  }
  states.push_back(s);
  for (const auto& rs : r.steps) {
    if (is_terminal(s.status)) throw CorruptRecord("steps recorded after a terminal state");
    auto next = step(r.config, r.rewards, s, rs.actions);
    s = std::move(next.state);
    if (s.pursuers != rs.pursuers || s.evaders != rs.evaders || s.evader_captured != rs.captured ||
        s.status != rs.status || s.step != rs.step) {
      throw CorruptRecord("recorded step " + std::to_string(rs.step) + " disagrees with the simulation");
    }
    states.push_back(s);
  }
  if (s.status != r.status) throw CorruptRecord("recorded terminal status disagrees with the simulation");
  if (is_terminal(s.status)) {
    const auto expect = outcome_rewards(s.status, r.rewards, r.config.n_pursuers, r.config.n_evaders);
    if (expect != r.final_rewards) throw CorruptRecord("recorded rewards disagree with the outcome");
  }
  return states;
}

namespace {

// Grid plus per-frame positions; the grid comes from the seed.
struct Frames {
  std::shared_ptr<const Grid> grid;
  std::vector<std::vector<Coord>> pursuers;
  std::vector<std::vector<Coord>> evaders;
  std::vector<std::vector<bool>> captured;
};

Frames collect_frames(const EpisodeRecord& r) {
  const GameState initial = new_game(r.config, r.seed);
  if (initial.pursuers != r.initial_pursuers || initial.evaders != r.initial_evaders) {
    throw CorruptRecord("initial positions do not match the seed");
  }
  Frames f;
  f.grid = initial.grid;
  f.pursuers.push_back(r.initial_pursuers);
  f.evaders.push_back(r.initial_evaders);
  f.captured.push_back(initial.evader_captured);
  for (const auto& s : r.steps) {
    if (s.pursuers.size() != r.initial_pursuers.size() || s.evaders.size() != r.initial_evaders.size() ||
        s.captured.size() != r.initial_evaders.size()) {
      throw CorruptRecord("step " + std::to_string(s.step) + " has the wrong number of agents");
    }
    for (Coord c : s.pursuers) {
      if (!f.grid->in_bounds(c)) throw CorruptRecord("pursuer position out of bounds");
    }
    for (Coord c : s.evaders) {
      if (!f.grid->in_bounds(c)) throw CorruptRecord("evader position out of bounds");
    }
    f.pursuers.push_back(s.pursuers);
    f.evaders.push_back(s.evaders);
    f.captured.push_back(s.captured);
  }
  return f;
}

}  // namespace

std::vector<std::string> render_text(const EpisodeRecord& r) {
  const Frames f = collect_frames(r);
  const Grid& g = *f.grid;
  std::vector<std::string> out;
  for (std::size_t k = 0; k < f.pursuers.size(); ++k) {
    std::vector<char> cells(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Cell c = g.cells()[i];
      cells[i] = c == Cell::Obstacle ? '#' : (c == Cell::Target ? 'T' : '.');
    }
    for (std::size_t e = 0; e < f.evaders[k].size(); ++e) {
      if (!f.captured[k][e]) cells[g.index(f.evaders[k][e])] = 'E';
    }
    for (Coord p : f.pursuers[k]) cells[g.index(p)] = 'P';
    for (std::size_t e = 0; e < f.evaders[k].size(); ++e) {
      if (f.captured[k][e]) cells[g.index(f.evaders[k][e])] = 'x';
    }
    std::string frame;
    for (int row = 0; row < g.rows(); ++row) {
      frame.append(cells.begin() + row * g.cols(), cells.begin() + (row + 1) * g.cols());
      frame += '\n';
    }
    out.push_back(std::move(frame));
  }
  return out;
}

std::string Image::to_ppm() const {
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(rgb.begin(), rgb.end());
  return out;
}

std::vector<Image> render_images(const EpisodeRecord& r, int cell_px) {
  struct Rgb {
    std::uint8_t r, g, b;
  };
  constexpr Rgb kEmpty{255, 255, 255};
  constexpr Rgb kObstacle{0, 0, 0};
  constexpr Rgb kTarget{220, 30, 30};
  constexpr Rgb kPursuer{30, 170, 60};
  constexpr Rgb kEvader{40, 80, 230};
  constexpr Rgb kCaptured{10, 20, 90};

  const Frames f = collect_frames(r);
  const Grid& g = *f.grid;
  std::vector<Image> out;
  for (std::size_t k = 0; k < f.pursuers.size(); ++k) {
    std::vector<Rgb> cells(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Cell c = g.cells()[i];
      cells[i] = c == Cell::Obstacle ? kObstacle : (c == Cell::Target ? kTarget : kEmpty);
    }
    for (std::size_t e = 0; e < f.evaders[k].size(); ++e) {
      if (!f.captured[k][e]) cells[g.index(f.evaders[k][e])] = kEvader;
    }
    for (Coord p : f.pursuers[k]) cells[g.index(p)] = kPursuer;
    for (std::size_t e = 0; e < f.evaders[k].size(); ++e) {
      if (f.captured[k][e]) cells[g.index(f.evaders[k][e])] = kCaptured;
    }
    Image img{g.cols() * cell_px, g.rows() * cell_px, {}};
    img.rgb.resize(static_cast<std::size_t>(img.width * img.height * 3));
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const Rgb c = cells[g.index({y / cell_px, x / cell_px})];
        const auto o = static_cast<std::size_t>((y * img.width + x) * 3);
        img.rgb[o] = c.r;
        img.rgb[o + 1] = c.g;
        img.rgb[o + 2] = c.b;
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace mapel
