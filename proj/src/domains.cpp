#include "mtadvice/domains.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>

namespace mtadvice {

GridWorldSpec GridWorldSpec::four_rooms() {
  GridWorldSpec spec;
  spec.map = {
      ".....#....G",
      ".....#.....",
      "...........",
      ".....#.....",
      ".....#.....",
      "##.###.....",
      ".....####.#",
      ".....#.....",
      "...........",
      ".....#.....",
      "S....#.....",
  };
  return spec;
}

Domain build_grid_world(const GridWorldSpec& spec) {
  if (spec.map.empty()) throw std::invalid_argument("grid world: empty map");
  if (!(spec.intended_prob >= 0.0 && spec.intended_prob <= 1.0))
    throw std::invalid_argument("grid world: intended probability outside [0, 1]");
  const int height = static_cast<int>(spec.map.size());
  const int width = static_cast<int>(spec.map.front().size());
  std::map<std::pair<int, int>, State> index;
  Domain d;
  d.name = "grid-world";
  std::optional<State> start;
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(spec.map[r].size()) != width) throw std::invalid_argument("grid world: ragged map");
    for (int c = 0; c < width; ++c) {
      const char ch = spec.map[r][c];
      if (ch == '#') continue;
      const State s = index.size();
      index[{r, c}] = s;
      d.state_labels.push_back("(" + std::to_string(r) + "," + std::to_string(c) + ")");
      if (ch == 'S') start = s;
      if (ch == 'G') d.goal = s;
    }
  }
  if (!start || !d.goal) throw std::invalid_argument("grid world: map needs one 'S' and one 'G'");
  d.start = *start;

  constexpr int dr[4] = {-1, 1, 0, 0};
  constexpr int dc[4] = {0, 0, -1, 1};
  const double slip = (1.0 - spec.intended_prob) / 3.0;
  std::vector<std::vector<Transition>> rows;
  std::vector<double> rewards;
  std::vector<std::pair<int, int>> cells(index.size());
  for (const auto& [cell, s] : index) cells[s] = cell;
  for (State s = 0; s < cells.size(); ++s) {
    const auto [r, c] = cells[s];
    for (int a = 0; a < 4; ++a) {
      std::vector<Transition> row;
      if (s == *d.goal) {
        row.push_back({s, 1.0});
        rewards.push_back(0.0);
      } else {
        for (int dir = 0; dir < 4; ++dir) {
          const double p = dir == a ? spec.intended_prob : slip;
          if (p == 0.0) continue;
          auto it = index.find({r + dr[dir], c + dc[dir]});
          row.push_back({it == index.end() ? s : it->second, p});
        }
        rewards.push_back(-1.0);
      }
      rows.push_back(std::move(row));
    }
  }
  d.mdp = TabularMDP(StateActionLayout(std::vector<std::size_t>(cells.size(), 4)), std::move(rows),
                     std::move(rewards));
  return d;
}

Domain build_combination_lock(std::size_t n) {
  if (n < 1) throw std::invalid_argument("combination lock: n must be >= 1");
  std::vector<std::size_t> actions(n + 1, 2);
  actions[n] = 1;
  std::vector<std::vector<Transition>> rows;
  std::vector<double> rewards;
  Domain d;
  d.name = "combination-lock";
  for (State s = 0; s < n; ++s) {
    rows.push_back({{s + 1, 1.0}});
    rewards.push_back(-1.0);
    rows.push_back({{0, 1.0}});
    rewards.push_back(-1.0);
    d.state_labels.push_back(std::to_string(s));
  }
  rows.push_back({{0, 0.1}, {n, 0.9}});
  rewards.push_back(1.0);
  d.state_labels.push_back(std::to_string(n));
  d.mdp = TabularMDP(StateActionLayout(std::move(actions)), std::move(rows), std::move(rewards));
  d.start = 0;
  return d;
}

BlockDudeSpec BlockDudeSpec::level1() {
  BlockDudeSpec spec;
  spec.width = 25;
  spec.rows = 3;
  spec.terrain.assign(25, 0);
  spec.terrain[0] = 3;
  spec.terrain[8] = 2;
  spec.terrain[16] = 2;
  spec.blocks = {4, 12};
  spec.start_column = 2;
  spec.start_facing = 1;
  spec.goal_column = 20;
  return spec;
}

namespace {

struct DudeState {
  int x = 0;
  int facing = 1;
  bool holding = false;
  std::vector<int> blocks;  // sorted columns of the blocks on the ground

  std::vector<int> key() const {
    std::vector<int> k{x, facing, holding ? 1 : 0};
    k.insert(k.end(), blocks.begin(), blocks.end());
    return k;
  }
};

class DudeWorld {
 public:
  explicit DudeWorld(const BlockDudeSpec& spec) : spec_(spec) {}

  int height(const DudeState& st, int x) const {
    return spec_.terrain[x] + static_cast<int>(std::count(st.blocks.begin(), st.blocks.end(), x));
  }
  bool inside(int x) const { return x >= 0 && x < spec_.width; }
  bool fits(int level, bool holding) const { return level + (holding ? 1 : 0) <= spec_.rows - 1; }

  DudeState apply(const DudeState& st, BlockDudeAction action) const {
    DudeState out = st;
    const int y = height(st, st.x);
    switch (action) {
      case BlockDudeAction::left:
      case BlockDudeAction::right: {
        const int dir = action == BlockDudeAction::left ? -1 : 1;
        out.facing = dir;
        const int nx = st.x + dir;
        if (inside(nx) && height(st, nx) <= y) out.x = nx;
        break;
      }
      case BlockDudeAction::up: {
        const int nx = st.x + st.facing;
        if (inside(nx) && height(st, nx) == y + 1 && fits(y + 1, st.holding)) out.x = nx;
        break;
      }
      case BlockDudeAction::pick_place: {
        const int nx = st.x + st.facing;
        if (!inside(nx)) break;
        const int h = height(st, nx);
        if (!st.holding) {
          const bool top_is_block = h > spec_.terrain[nx];
          if (top_is_block && (h == y + 1 || h == y + 2) && fits(y, true)) {
            out.blocks.erase(std::find(out.blocks.begin(), out.blocks.end(), nx));
            out.holding = true;
          }
        } else if (h <= y + 1) {
          out.blocks.push_back(nx);
          std::sort(out.blocks.begin(), out.blocks.end());
          out.holding = false;
        }
        break;
      }
    }
    return out;
  }

 private:
  const BlockDudeSpec& spec_;
};

}  // namespace

Domain build_block_dude(const BlockDudeSpec& spec) {
  if (spec.width < 2 || static_cast<int>(spec.terrain.size()) != spec.width)
    throw std::invalid_argument("block dude: terrain must have one height per column");
  if (spec.start_column < 0 || spec.start_column >= spec.width || spec.goal_column < 0 ||
      spec.goal_column >= spec.width || spec.start_column == spec.goal_column)
    throw std::invalid_argument("block dude: bad start/goal column");
  for (int b : spec.blocks)
    if (b < 0 || b >= spec.width) throw std::invalid_argument("block dude: block outside the maze");

  DudeWorld world(spec);
  DudeState init;
  init.x = spec.start_column;
  init.facing = spec.start_facing >= 0 ? 1 : -1;
  init.blocks = spec.blocks;
  std::sort(init.blocks.begin(), init.blocks.end());
  if (!world.fits(world.height(init, init.x), false))
    throw std::invalid_argument("block dude: start position does not fit in the maze");

  constexpr std::size_t no_goal = static_cast<std::size_t>(-1);
  std::size_t goal = no_goal;
  std::map<std::vector<int>, State> index;
  std::vector<DudeState> states;
  std::vector<std::array<State, 4>> successors;
  std::deque<State> frontier;

  auto intern = [&](const DudeState& st) -> State {
    if (st.x == spec.goal_column) {
      if (goal == no_goal) {
        goal = states.size();
        states.push_back(st);
        successors.push_back({});
      }
      return goal;
    }
    auto [it, inserted] = index.emplace(st.key(), states.size());
    if (inserted) {
      if (states.size() >= spec.state_cap) throw std::runtime_error("block dude: state cap exceeded");
      states.push_back(st);
      successors.push_back({});
      frontier.push_back(it->second);
    }
    return it->second;
  };

  intern(init);
  while (!frontier.empty()) {
    const State s = frontier.front();
    frontier.pop_front();
    for (Action a = 0; a < 4; ++a) {
      const DudeState next = world.apply(states[s], static_cast<BlockDudeAction>(a));
      const State t = intern(next);
      successors[s][a] = t;
    }
  }
  if (goal == no_goal) throw std::runtime_error("block dude: goal unreachable from the start");
  for (Action a = 0; a < 4; ++a) successors[goal][a] = goal;

  Domain d;
  d.name = "block-dude";
  d.start = 0;
  d.goal = goal;
  std::vector<std::vector<Transition>> rows;
  std::vector<double> rewards;
  for (State s = 0; s < states.size(); ++s) {
    for (Action a = 0; a < 4; ++a) {
      rows.push_back({{successors[s][a], 1.0}});
      rewards.push_back(s == goal ? 1.0 : -1.0);
    }
    if (s == goal) {
      d.state_labels.push_back("goal");
    } else {
      const auto& st = states[s];
      std::string label = "x=" + std::to_string(st.x) + (st.facing > 0 ? " >" : " <") +
                          (st.holding ? " holding" : "") + " blocks=";
      for (int b : st.blocks) label += std::to_string(b) + ";";
      d.state_labels.push_back(label);
    }
  }
  d.mdp = TabularMDP(StateActionLayout(std::vector<std::size_t>(states.size(), 4)), std::move(rows),
                     std::move(rewards));
  return d;
}

Domain build_uniform_mixing(std::size_t n) {
  if (n < 1) throw std::invalid_argument("uniform mixing: n must be >= 1");
  std::vector<std::vector<Transition>> rows;
  std::vector<double> rewards;
  Domain d;
  d.name = "uniform-mixing";
  for (State s = 0; s < n; ++s) {
    std::vector<Transition> row;
    for (State t = 0; t < n; ++t) row.push_back({t, 1.0 / static_cast<double>(n)});
    rows.push_back(std::move(row));
    rewards.push_back(0.0);
    d.state_labels.push_back(std::to_string(s));
  }
  d.mdp = TabularMDP(StateActionLayout(std::vector<std::size_t>(n, 1)), std::move(rows), std::move(rewards));
  return d;
}

Domain build_domain(const std::string& id, std::size_t lock_n) {
  if (id == "grid-world") return build_grid_world();
  if (id == "combination-lock") return build_combination_lock(lock_n);
  if (id == "block-dude") return build_block_dude();
  throw std::invalid_argument("unknown domain '" + id + "'");
}

std::vector<std::string> render_grid(const GridWorldSpec& spec, const std::vector<char>& marks) {
  std::vector<std::string> out = spec.map;
  State s = 0;
  for (auto& line : out)
    for (char& ch : line) {
      if (ch == '#') continue;
      if (s < marks.size()) ch = marks[s];
      ++s;
    }
  return out;
}

}  // namespace mtadvice
