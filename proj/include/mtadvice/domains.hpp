#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mtadvice/mdp.hpp"

namespace mtadvice {

struct Domain {
  std::string name;
  TabularMDP mdp;
  State start = 0;
  std::optional<State> goal;
  std::vector<std::string> state_labels;
};

/// '#' wall, '.' free, 'S' start, 'G' goal. Row 0 is the top of the map.
struct GridWorldSpec {
  std::vector<std::string> map;
  double intended_prob = 0.8;

  /// 11x11 four-room layout: vertical wall in column 5 (doors at rows 2 and 8),
  /// horizontal walls in row 5 left and row 6 right (doors at columns 2 and 8).
  static GridWorldSpec four_rooms();
};

/// Actions: 0 = north, 1 = south, 2 = west, 3 = east. The remaining
/// probability mass is split evenly over the other three directions and a
/// blocked move leaves the agent in place. Reward 0 at the goal (absorbing),
/// -1 elsewhere.
Domain build_grid_world(const GridWorldSpec& spec = GridWorldSpec::four_rooms());

/// States 0..n. Action 0 ("a") advances, action 1 ("b") resets to 0, both
/// paying -1. State n has only action 0: reward +1, stays with probability
/// 0.9 and returns to 0 otherwise.
Domain build_combination_lock(std::size_t n);

/// Column-height model of Block Dude. Heights count occupied cells from the
/// floor; blocks stack on top of terrain and always settle under gravity.
struct BlockDudeSpec {
  int width = 25;
  int rows = 3;
  std::vector<int> terrain;
  std::vector<int> blocks;
  int start_column = 0;
  int start_facing = 1;
  int goal_column = 0;
  std::size_t state_cap = 200'000;

  /// Two walls of height 2, one block in front of each.
  static BlockDudeSpec level1();
};

enum class BlockDudeAction : Action { left = 0, right = 1, up = 2, pick_place = 3 };

/// States are enumerated breadth-first from the start configuration
/// (state 0). Every configuration with the agent on the goal column collapses
/// into one absorbing goal state. Reward +1 in the goal state, -1 elsewhere.
/// Throws std::runtime_error if the enumeration exceeds spec.state_cap.
Domain build_block_dude(const BlockDudeSpec& spec = BlockDudeSpec::level1());

/// n states; every action jumps to a uniformly random state. Each exploration
/// step is then an independent uniform draw over the state set.
Domain build_uniform_mixing(std::size_t n);

/// "grid-world", "combination-lock" (uses lock_n) or "block-dude".
Domain build_domain(const std::string& id, std::size_t lock_n = 5);

/// ASCII rendering of the grid map with an optional marker per state.
std::vector<std::string> render_grid(const GridWorldSpec& spec, const std::vector<char>& marks = {});

}  // namespace mtadvice
