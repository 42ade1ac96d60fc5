#pragma once

#include <cstdint>
#include <vector>

#include "mtadvice/mdp.hpp"

namespace mtadvice {

/// Per-step log of an advice run. Entry t describes the step taken in
/// states[t]; every vector has one entry per step except iteration_starts.
struct RewardTrace {
  std::vector<double> rewards;
  std::vector<State> states;
  std::vector<Action> actions;
  /// Action the learned policy proposed, whether or not it was executed.
  std::vector<Action> student_actions;
  std::vector<std::uint8_t> fired_by_teacher;
  /// First step index of every iteration.
  std::vector<std::size_t> iteration_starts;

  std::size_t size() const { return rewards.size(); }
  /// [first, last) step range of iteration i.
  std::pair<std::size_t, std::size_t> iteration_range(std::size_t i) const;
};

}  // namespace mtadvice
