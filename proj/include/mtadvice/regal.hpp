#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "mtadvice/estimation.hpp"
#include "mtadvice/mdp.hpp"

namespace mtadvice {

struct RegalParams {
  /// Ceiling H on the span of the optimistic bias. May be +infinity.
  double span_ceiling = 1000.0;
  double delta = 0.8;
  double planner_tol = 1e-6;
  std::size_t max_sweeps = 200'000;
  double aperiodicity = 0.5;
};

struct StepRecord {
  State state;
  Action action;
  State next;
  double reward;
};

using EpisodeDataset = std::vector<StepRecord>;

struct OptimisticPlan {
  /// Model assembled from the maximising in-set row of every pair.
  TabularMDP selected;
  /// Optimistic gain and the (truncated) bias; span(bias) <= H.
  GainBias optimistic;
  DeterministicPolicy policy;
  std::size_t sweeps = 0;
  double residual = 0.0;
  /// Gain estimate after every sweep.
  std::vector<double> gain_trace;
};

/// Maximiser of p . u over the L1 ball of radius r around `centre`
/// intersected with the simplex: shift up to r/2 mass onto `best` and take it
/// from the lowest-valued successors first (ties: lowest state index).
/// An empty centre is an unvisited pair and yields the point mass on `best`.
void optimistic_row(std::span<const Transition> centre, double radius, std::span<const double> u,
                    State best, std::vector<Transition>& out);

/// Span-truncated extended value iteration over the confidence set.
/// Throws ConvergenceError when the sweep budget runs out.
OptimisticPlan constrained_optimistic_plan(const ConfidenceSet& cs, std::span<const double> rewards,
                                           const RegalParams& params);

/// Folds the dataset into `counts`, rebuilds the confidence set at t = T and
/// returns the policy of the optimistic model.
DeterministicPolicy regal_c(const EpisodeDataset& dataset, TransitionCounts& counts, std::uint64_t T,
                            const RegalParams& params, std::span<const double> rewards,
                            OptimisticPlan* plan_out = nullptr);

/// "sweep,gain" rows.
void write_planner_trace_csv(const OptimisticPlan& plan, std::ostream& out);

}  // namespace mtadvice
