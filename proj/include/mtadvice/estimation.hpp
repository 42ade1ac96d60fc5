#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mtadvice/mdp.hpp"

namespace mtadvice {

/// Visit counters N(s,a,s') and N(s,a), with snapshots taken at iteration
/// boundaries so per-iteration visit deltas v_i(s,a) can be recovered.
class TransitionCounts {
 public:
  TransitionCounts() = default;
  explicit TransitionCounts(StateActionLayout layout);

  void record(State s, Action a, State next);

  std::uint64_t count(State s, Action a, State next) const;
  std::uint64_t pair_count(State s, Action a) const { return pairs_[layout_.pair(s, a)]; }
  std::uint64_t pair_count_at(std::size_t pair) const { return pairs_[pair]; }
  std::uint64_t count_at(std::size_t pair, State next) const;
  std::uint64_t total_steps() const { return total_; }

  /// Successors observed for the pair, in first-seen order.
  std::span<const State> support_at(std::size_t pair) const { return support_[pair]; }

  const StateActionLayout& layout() const { return layout_; }
  std::size_t num_states() const { return layout_.num_states(); }

  /// Marks the start of a new iteration (stores N_i).
  void begin_iteration();
  std::size_t num_iterations() const { return snapshots_.size(); }
  /// Pair counts N_i at the start of iteration i (0-based).
  const std::vector<std::uint64_t>& snapshot(std::size_t i) const { return snapshots_.at(i); }
  /// v_i(s,a) = N_{i+1}(s,a) - N_i(s,a), flat by pair. The newest iteration
  /// is measured against the live counters.
  std::vector<std::uint64_t> visits_in_iteration(std::size_t i) const;

  /// Restores counters from raw triple counts (checkpoint/resume).
  static TransitionCounts from_triples(StateActionLayout layout,
                                       const std::vector<std::vector<std::vector<std::uint64_t>>>& triples);
  std::vector<std::vector<std::vector<std::uint64_t>>> dense_triples() const;

 private:
  StateActionLayout layout_;
  std::vector<std::uint64_t> triples_;  // pair-major, |S| entries per pair
  std::vector<std::uint64_t> pairs_;
  std::vector<std::vector<State>> support_;
  std::vector<std::vector<std::uint64_t>> snapshots_;
  std::uint64_t total_ = 0;
};

/// N(s,a,s') / max{N(s,a), 1}.
double empirical_transition(const TransitionCounts& counts, State s, Action a, State next);

/// sqrt(12 |S| log(2 |A| t / delta) / max{n, 1}) with |A| the largest action count.
double confidence_radius(std::size_t num_states, std::size_t num_actions, std::uint64_t n,
                         std::uint64_t t, double delta);
double confidence_radius(const TransitionCounts& counts, State s, Action a, std::uint64_t t,
                         double delta);

/// L1 balls around the empirical model, one per (s, a).
class ConfidenceSet {
 public:
  static ConfidenceSet build(const TransitionCounts& counts, std::uint64_t t, double delta);
  /// Ball of the given radii around an explicit centre model.
  static ConfidenceSet around(const TabularMDP& centre, std::vector<double> radii,
                              std::uint64_t t = 1, double delta = 0.5);

  const StateActionLayout& layout() const { return layout_; }
  std::size_t num_states() const { return layout_.num_states(); }
  /// Empirical row; empty when the pair has never been visited.
  std::span<const Transition> empirical_row(std::size_t pair) const { return rows_[pair]; }
  double radius(std::size_t pair) const { return radii_[pair]; }
  std::uint64_t time() const { return t_; }
  double delta() const { return delta_; }

  /// True iff every row of the candidate is within its L1 radius.
  /// Throws std::invalid_argument on a shape mismatch.
  bool contains(const TabularMDP& candidate, double slack = 1e-12) const;
  double l1_distance(std::size_t pair, std::span<const Transition> row) const;

 private:
  StateActionLayout layout_;
  std::vector<std::vector<Transition>> rows_;
  std::vector<double> radii_;
  std::uint64_t t_ = 1;
  double delta_ = 0.5;
};

}  // namespace mtadvice
