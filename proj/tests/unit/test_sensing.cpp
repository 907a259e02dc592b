#include <doctest.h>

#include <set>

#include "mapel/errors.hpp"
#include "mapel/sensing.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mapel;
using support::grid_from;
using support::make_state;

namespace {

GameConfig sense_config(const GameState& s, int l, int w) {
  auto c = support::config_for(s);
  c.sense_length = l;
  c.sense_width = w;
  return c;
}

}  // namespace

TEST_SUITE("sensing") {

TEST_CASE("line_of_sight basics") {
  const auto g = grid_from({".......", "...#...", ".......", "......T"});
  CHECK(line_of_sight(*g, {0, 0}, {0, 6}));
  CHECK_FALSE(line_of_sight(*g, {1, 0}, {1, 6}));
  CHECK(line_of_sight(*g, {2, 2}, {2, 2}));
  // The far endpoint blocks when it is itself an obstacle.
  CHECK_FALSE(line_of_sight(*g, {1, 1}, {1, 3}));
  CHECK_THROWS_AS(line_of_sight(*g, {0, 0}, {9, 9}), OutOfBounds);
}

TEST_CASE("supercover includes both side cells at an exact corner crossing") {
  const auto cells = supercover({0, 0}, {2, 2});
  const std::set<Coord> got(cells.begin(), cells.end());
  CHECK(got == std::set<Coord>{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}});
  CHECK(cells.front() == Coord{0, 0});
  CHECK(cells.back() == Coord{2, 2});
  // So a diagonal squeeze between two obstacles is blocked.
  const auto g = grid_from({".#..", "#...", "....", "...T"});
  CHECK_FALSE(line_of_sight(*g, {0, 0}, {1, 1}));
}

TEST_CASE("supercover and line_of_sight agree with the sampling oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    Grid g(12, 12);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (rng.bernoulli(0.2)) g.set(g.coord(i), Cell::Obstacle);
    }
    const Coord a{rng.uniform_int(0, 11), rng.uniform_int(0, 11)};
    const Coord b{rng.uniform_int(0, 11), rng.uniform_int(0, 11)};
    const auto cells = supercover(a, b);
    CHECK(std::set<Coord>(cells.begin(), cells.end()) == oracle::touched_cells(a, b));
    if (g.passable(a)) CHECK(line_of_sight(g, a, b) == oracle::sampled_line_of_sight(g, a, b));
    if (g.passable(a) && g.passable(b)) CHECK(line_of_sight(g, a, b) == line_of_sight(g, b, a));
  }
}

TEST_CASE("open field, interior agent, 5x5 rectangle gives 25 cells") {
  const auto g = grid_from({"..........", "..........", "..........", "..........", "..........", "..........",
                            "..........", "........TT", "........TT", ".........."});
  const auto s = make_state(g, {{4, 4}}, {{0, 9}});
  const auto m = visibility_mask(sense_config(s, 5, 5), s, {Team::Pursuer, 0});
  CHECK(m.count() == 25);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 10; ++c) CHECK(m.at({r, c}) == (std::abs(r - 4) <= 2 && std::abs(c - 4) <= 2));
  }
}

TEST_CASE("a solid wall just east of the agent hides everything beyond it") {
  const auto g = grid_from({"....#.....", "....#.....", "....#.....", "....#.....", "....#.....", "....#.....",
                            "....#.....", "....#...TT", "....#...TT", "....#....."});
  const auto s = make_state(g, {{4, 3}}, {{4, 6}});
  const auto cfg = sense_config(s, 7, 7);
  const auto m = visibility_mask(cfg, s, {Team::Pursuer, 0});
  for (int r = 0; r < 10; ++r) {
    for (int c = 4; c < 10; ++c) CHECK_FALSE(m.at({r, c}));
  }
  const auto obs = observe(cfg, s, {Team::Pursuer, 0});
  CHECK(obs.popcount(Plane::Opponents) == 0);
}

TEST_CASE("rectangle is clipped at a corner") {
  const auto g = grid_from({"......", "......", "......", "....TT", "....TT", "......"});
  const auto s = make_state(g, {{0, 0}}, {{5, 5}});
  const auto m = visibility_mask(sense_config(s, 5, 3), s, {Team::Pursuer, 0});
  // rows 0..2, cols 0..1
  CHECK(m.count() == 6);
  CHECK(m.at({2, 1}));
  CHECK_FALSE(m.at({0, 2}));
  CHECK_FALSE(m.at({3, 0}));
}

TEST_CASE("sense_length is the vertical extent") {
  const auto g = grid_from({"........", "........", "........", "........", "........", "......TT", "......TT",
                            "........"});
  const auto s = make_state(g, {{4, 4}}, {{0, 7}});
  const auto r = sense_rect(sense_config(s, 5, 3), *g, {4, 4});
  CHECK(r.row_lo == 2);
  CHECK(r.row_hi == 6);
  CHECK(r.col_lo == 3);
  CHECK(r.col_hi == 5);
}

TEST_CASE("observation planes") {
  GameConfig c;
  c.n_pursuers = 3;
  c.n_evaders = 3;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto s = new_game(c, seed);
    for (Team team : {Team::Pursuer, Team::Evader}) {
      for (int i = 0; i < 3; ++i) {
        const AgentId id{team, i};
        const auto obs = observe(c, s, id);
        CHECK(obs.popcount(Plane::Self) == 1);
        CHECK(obs.at(Plane::Self, s.position(id)));
        CHECK(obs.popcount(Plane::Teammates) == 2);
        CHECK(obs.popcount(Plane::Target) == c.target_size);
        CHECK(obs.at(Plane::Visibility, s.position(id)));
        const auto vis = obs.plane(Plane::Visibility);
        const auto opp = obs.plane(Plane::Opponents);
        for (std::size_t k = 0; k < opp.size(); ++k) {
          if (opp[k]) CHECK(vis[k]);
        }
        const auto rect = sense_rect(c, *s.grid, s.position(id));
        for (std::size_t k = 0; k < vis.size(); ++k) {
          if (vis[k]) CHECK(rect.contains(s.grid->coord(k)));
        }
      }
    }
  }
}

TEST_CASE("captured evaders remain visible to pursuers") {
  const auto g = grid_from({"........", "........", "........", "........", "........", "......TT", "......TT",
                            "........"});
  auto s = make_state(g, {{2, 2}}, {{2, 4}, {7, 0}});
  s.evader_captured[0] = true;
  const auto obs = observe(sense_config(s, 5, 5), s, {Team::Pursuer, 0});
  CHECK(obs.at(Plane::Opponents, {2, 4}));
  CHECK_FALSE(obs.at(Plane::Opponents, {7, 0}));
}

TEST_CASE("unknown agents are rejected") {
  const auto s = new_game(GameConfig{}, 3);
  CHECK_THROWS_AS(visibility_mask(GameConfig{}, s, {Team::Evader, 7}), UnknownAgent);
  CHECK_THROWS_AS(observe(GameConfig{}, s, {Team::Pursuer, -1}), UnknownAgent);
}

TEST_CASE("adding an obstacle never enlarges a mask") {
  Rng rng(12);
  GameConfig c;
  c.width = c.height = 16;
  c.obstacle_count = 4;
  c.obstacle_max = 3;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = new_game(c, seed);
    const AgentId id{Team::Pursuer, 0};
    const auto before = visibility_mask(c, s, id);
    auto g = std::make_shared<Grid>(*s.grid);
    for (int k = 0; k < 5; ++k) {
      const Coord x{rng.uniform_int(0, 15), rng.uniform_int(0, 15)};
      if (g->at(x) == Cell::Empty && x != s.position(id)) g->set(x, Cell::Obstacle);
    }
    s.grid = g;
    const auto after = visibility_mask(c, s, id);
    for (std::size_t k = 0; k < after.mask.size(); ++k) {
      if (after.mask[k]) CHECK(before.mask[k]);
    }
  }
}

}  // TEST_SUITE
