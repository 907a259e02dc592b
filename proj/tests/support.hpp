#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mapel/env.hpp"

namespace support {

using namespace mapel;

// Grid from rows of '.', '#', 'T'.
inline std::shared_ptr<Grid> grid_from(const std::vector<std::string>& rows) {
  auto g = std::make_shared<Grid>(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int r = 0; r < g->rows(); ++r) {
    for (int c = 0; c < g->cols(); ++c) {
      const char ch = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      g->set({r, c}, ch == '#' ? Cell::Obstacle : (ch == 'T' ? Cell::Target : Cell::Empty));
    }
  }
  return g;
}

inline GameState make_state(std::shared_ptr<Grid> grid, std::vector<Coord> pursuers, std::vector<Coord> evaders) {
  GameState s;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (grid->cells()[i] == Cell::Target) s.targets.push_back(grid->coord(i));
  }
  s.grid = std::move(grid);
  s.pursuers = std::move(pursuers);
  s.evaders = std::move(evaders);
  s.evader_captured.assign(s.evaders.size(), false);
  return s;
}

inline GameConfig config_for(const GameState& s) {
  GameConfig c;
  c.height = s.grid->rows();
  c.width = s.grid->cols();
  c.n_pursuers = static_cast<int>(s.pursuers.size());
  c.n_evaders = static_cast<int>(s.evaders.size());
  c.target_size = std::max<int>(1, static_cast<int>(s.targets.size()));
  c.obstacle_count = 0;
  return c;
}

inline GameConfig open_config(int side, int p, int e) {
  GameConfig c;
  c.width = side;
  c.height = side;
  c.n_pursuers = p;
  c.n_evaders = e;
  c.obstacle_count = 0;
  return c;
}

}  // namespace support
