#pragma once

// Flat `key = value` configuration files and the run description.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "mapel/env.hpp"
#include "mapel/policy.hpp"
#include "mapel/qlearning.hpp"

namespace mapel {

struct RunConfig {
  GameConfig game;
  TrainConfig train;
  Team team = Team::Pursuer;
  Method method = Method::MapelP2psr;
  std::string out_dir = "run";
  std::uint64_t seed = 0;

  /// Team sizes 2..5, a learned method for the trained team, and
  /// mapel-rsr only with at least two agents. Throws ConfigError.
  void validate() const;
};

/// 16x16 grid, 30 epochs x 100 episodes.
RunConfig desk_profile();

/// Parses "PvE", e.g. "2v2" -> (2, 2). Throws ConfigError.
std::pair<int, int> parse_scenario(std::string_view text);

/// Applies `key = value` lines. Blank lines and '#' comments are skipped;
/// unknown keys and malformed values throw ConfigError.
void apply_config_text(std::string_view text, GameConfig& game, TrainConfig& train);
void load_config_file(const std::string& path, GameConfig& game, TrainConfig& train);

/// Every GameConfig and TrainConfig field in declaration order, one
/// `key = value` per line. Round-trips through apply_config_text.
std::string to_config_text(const GameConfig& game, const TrainConfig& train);

/// Canonical text of a run: config text plus team and method.
std::string run_text(const RunConfig& run);
RunConfig parse_run_text(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t config_hash(const RunConfig& run);

}  // namespace mapel
