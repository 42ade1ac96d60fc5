#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mtadvice {

using State = std::size_t;
using Action = std::size_t;
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Uniform integer in [0, n). Rejection-sampled so results do not depend on
/// the standard library's distribution implementation.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Flat indexing of (state, action) pairs when the number of actions varies
/// from state to state.
class StateActionLayout {
 public:
  StateActionLayout() = default;
  explicit StateActionLayout(std::vector<std::size_t> actions_per_state);

  std::size_t num_states() const { return actions_.size(); }
  std::size_t num_actions(State s) const;
  std::size_t max_actions() const { return max_actions_; }
  std::size_t num_pairs() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<std::size_t>& actions_per_state() const { return actions_; }

  /// Flat index of (s, a). Throws std::out_of_range on invalid indices.
  std::size_t pair(State s, Action a) const;
  bool valid(State s, Action a) const { return s < actions_.size() && a < actions_[s]; }

  bool operator==(const StateActionLayout& other) const { return actions_ == other.actions_; }

 private:
  std::vector<std::size_t> actions_;
  std::vector<std::size_t> offsets_;
  std::size_t max_actions_ = 0;
};

struct Transition {
  State next;
  double prob;

  bool operator==(const Transition&) const = default;
};

/// Finite average-reward MDP with sparse transition rows.
///
/// Construction only checks shapes and index ranges; whether the rows are
/// stochastic is reported by validate() so malformed models can still be
/// inspected.
class TabularMDP {
 public:
  TabularMDP() = default;
  TabularMDP(StateActionLayout layout, std::vector<std::vector<Transition>> rows,
             std::vector<double> rewards);

  /// P[s][a][s'] and R[s][a]; zero entries are dropped.
  static TabularMDP from_dense(const std::vector<std::vector<std::vector<double>>>& transitions,
                               const std::vector<std::vector<double>>& rewards);

  const StateActionLayout& layout() const { return layout_; }
  std::size_t num_states() const { return layout_.num_states(); }
  std::size_t num_actions(State s) const { return layout_.num_actions(s); }
  std::size_t max_actions() const { return layout_.max_actions(); }

  std::span<const Transition> row(State s, Action a) const { return row_at(layout_.pair(s, a)); }
  std::span<const Transition> row_at(std::size_t pair) const;
  double prob(State s, Action a, State next) const;
  double reward(State s, Action a) const { return rewards_[layout_.pair(s, a)]; }
  std::span<const double> rewards() const { return rewards_; }
  double max_abs_reward() const;

  /// P_{s,a}^T v.
  double expected_next(std::size_t pair, std::span<const double> v) const;

  std::vector<std::vector<std::vector<double>>> dense_transitions() const;
  std::vector<std::vector<double>> dense_rewards() const;

 private:
  StateActionLayout layout_;
  std::vector<std::size_t> row_offsets_;
  std::vector<Transition> entries_;
  std::vector<double> rewards_;
};

struct DeterministicPolicy {
  std::vector<Action> action_of;

  Action operator()(State s) const { return action_of.at(s); }
  std::size_t size() const { return action_of.size(); }
  bool operator==(const DeterministicPolicy&) const = default;
};

/// Throws std::invalid_argument unless the policy covers every state with a
/// valid action.
void check_policy(const StateActionLayout& layout, const DeterministicPolicy& policy);

/// Optimal gain, bias re-centred so that min(bias) == 0, and its span.
struct GainBias {
  double gain = 0.0;
  std::vector<double> bias;
  double span = 0.0;
};

struct Rollout {
  std::vector<State> states;  // one longer than actions
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::uint64_t rng_seed = 0;
};

struct RowViolation {
  State state;
  Action action;
  double row_sum;
  bool negative_entry;
};

struct ValidationReport {
  std::vector<RowViolation> violations;
  bool weakly_communicating = false;
  std::vector<State> recurrent_class;
  std::vector<State> transient_states;

  bool ok() const { return violations.empty() && weakly_communicating; }
};

/// Row-stochasticity and communication-structure report. Never throws.
///
/// The communication check decomposes the any-action transition graph into
/// strongly connected components. The model counts as weakly communicating
/// when exactly one component is closed; that component is the recurrent
/// class and every other state can leave towards it.
ValidationReport validate(const TabularMDP& mdp);

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, std::size_t iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  std::size_t iterations() const { return iterations_; }

 private:
  double residual_;
  std::size_t iterations_;
};

struct PlannerOptions {
  double tol = 1e-9;
  std::size_t max_iters = 1'000'000;
  /// Self-loop weight of the aperiodicity transform P' = tau I + (1 - tau) P.
  /// Gain is unchanged and the bias is rescaled back by (1 - tau).
  double aperiodicity = 0.5;
  /// Starting value vector V^0; zeros when empty.
  std::vector<double> initial;
};

struct PlanResult {
  GainBias gain_bias;
  DeterministicPolicy policy;
  std::size_t iterations = 0;
  double residual = 0.0;
};

double span(std::span<const double> h);

/// Relative value iteration with span-based stopping.
/// Greedy ties go to the lowest action index.
PlanResult relative_value_iteration(const TabularMDP& mdp, const PlannerOptions& options = {});
PlanResult relative_value_iteration(const TabularMDP& mdp, double tol, std::size_t max_iters);

/// max_s |h(s) + gain - max_a {R(s,a) + P_{s,a}^T h}|.
double bellman_residual(const TabularMDP& mdp, const GainBias& gb);

/// Index of the maximising action with ties broken to the lowest index.
Action greedy_action(const TabularMDP& mdp, State s, std::span<const double> h);

/// Per-state long-run average reward of a fixed policy. Handles multichain
/// policies: entry s is the gain of the chain started at s.
std::vector<double> policy_gain_vector(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                       double tol = 1e-10, std::size_t max_iters = 10'000'000);

double evaluate_policy_average_reward(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                      double tol = 1e-10, State start = 0);

/// Exact expected reward accumulated over the first `horizon` steps
/// (t = 0 .. horizon-1) from `start`.
double expected_return(const TabularMDP& mdp, const DeterministicPolicy& policy, State start,
                       std::uint64_t horizon);

/// Samples s' ~ P[s][a][.] and returns it with R(s, a).
std::pair<State, double> step(const TabularMDP& mdp, State s, Action a, Rng& rng);

Rollout rollout(const TabularMDP& mdp, const DeterministicPolicy& policy, State start,
                std::size_t steps, std::uint64_t seed);

}  // namespace mtadvice
