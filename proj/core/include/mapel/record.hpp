#pragma once

// Replayable episode traces: line-delimited JSON, one object per line.
//
//   {"type":"header", "version":1, "config":{...}, "rewards":{...},
//    "config_hash":"<16 hex>", "seed":N, "topology":{"pursuers":{...},
//    "evaders":{...}}, "initial":{"pursuers":[[r,c],...], ...}}
//   {"type":"step", "step":1, "actions":[...], "flags":[...],
//    "gathered":[[...],...], "pursuers":[[r,c],...], "evaders":[...],
//    "captured":[...], "status":"ongoing"}
//   ...
//   {"type":"end", "status":"...", "rewards":[...]}
//
// Per-agent arrays list pursuers first, then evaders. Flags and gathered
// vectors come from the observations the actions were chosen on; positions
// are after the move.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mapel/comms.hpp"
#include "mapel/env.hpp"

namespace mapel {

struct RecordStep {
  int step = 0;
  std::vector<Action> actions;
  std::vector<std::uint8_t> flags;
  std::vector<std::vector<std::uint8_t>> gathered;
  std::vector<Coord> pursuers;
  std::vector<Coord> evaders;
  std::vector<bool> captured;
  GameStatus status = GameStatus::Ongoing;

  friend bool operator==(const RecordStep&, const RecordStep&) = default;
};

struct TeamTopologyRecord {
  CommKind kind = CommKind::P2PSR;
  std::vector<int> ring;
  friend bool operator==(const TeamTopologyRecord&, const TeamTopologyRecord&) = default;
};

struct EpisodeRecord {
  GameConfig config;
  RewardSpec rewards;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  TeamTopologyRecord pursuer_topology;
  TeamTopologyRecord evader_topology;
  std::vector<Coord> initial_pursuers;
  std::vector<Coord> initial_evaders;
  std::vector<RecordStep> steps;
  GameStatus status = GameStatus::Ongoing;
  JointRewards final_rewards;
};

void write_record(std::ostream& out, const EpisodeRecord& record);
std::string serialize_record(const EpisodeRecord& record);
/// Throws CorruptRecord on malformed input.
EpisodeRecord parse_record(std::istream& in);
EpisodeRecord parse_record(const std::string& text);

/// Re-runs (config, seed, recorded actions) and returns every state,
/// starting with the initial one. Throws CorruptRecord when a recorded
/// position, capture flag or status disagrees with the simulation.
std::vector<GameState> resimulate(const EpisodeRecord& record);

enum class RenderFormat { Text, ImageFrames };

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  /// Binary PPM (P6).
  std::string to_ppm() const;
};

/// One frame per state (steps + 1). Text glyphs: '.' empty, '#' obstacle,
/// 'T' target, 'P' pursuer, 'E' evader, 'x' captured evader.
std::vector<std::string> render_text(const EpisodeRecord& record);

/// One raster per state: evaders blue, pursuers green, target red,
/// obstacles black, captured evaders dark blue; `cell_px` pixels per cell.
std::vector<Image> render_images(const EpisodeRecord& record, int cell_px = 8);

}  // namespace mapel
