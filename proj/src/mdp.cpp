#include "mtadvice/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mtadvice {

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % range);
}

StateActionLayout::StateActionLayout(std::vector<std::size_t> actions_per_state)
    : actions_(std::move(actions_per_state)) {
  if (actions_.empty()) throw std::invalid_argument("layout: at least one state required");
  offsets_.reserve(actions_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t n : actions_) {
    if (n == 0) throw std::invalid_argument("layout: every state needs at least one action");
    offsets_.push_back(offsets_.back() + n);
    max_actions_ = std::max(max_actions_, n);
  }
}

std::size_t StateActionLayout::num_actions(State s) const {
  if (s >= actions_.size()) throw std::out_of_range("state index out of range");
  return actions_[s];
}

std::size_t StateActionLayout::pair(State s, Action a) const {
  if (!valid(s, a)) throw std::out_of_range("state/action index out of range");
  return offsets_[s] + a;
}

TabularMDP::TabularMDP(StateActionLayout layout, std::vector<std::vector<Transition>> rows,
                       std::vector<double> rewards)
    : layout_(std::move(layout)), rewards_(std::move(rewards)) {
  const std::size_t pairs = layout_.num_pairs();
  if (rows.size() != pairs || rewards_.size() != pairs)
    throw std::invalid_argument("TabularMDP: rows/rewards do not match the layout");
  for (double r : rewards_)
    if (!std::isfinite(r)) throw std::invalid_argument("TabularMDP: non-finite reward");

  row_offsets_.reserve(pairs + 1);
  row_offsets_.push_back(0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(),
              [](const Transition& a, const Transition& b) { return a.next < b.next; });
    std::vector<Transition> merged;
    for (const Transition& t : row) {
      if (t.next >= layout_.num_states())
        throw std::invalid_argument("TabularMDP: successor index out of range");
      if (!std::isfinite(t.prob)) throw std::invalid_argument("TabularMDP: non-finite probability");
      if (!merged.empty() && merged.back().next == t.next)
        merged.back().prob += t.prob;
      else
        merged.push_back(t);
    }
    entries_.insert(entries_.end(), merged.begin(), merged.end());
    row_offsets_.push_back(entries_.size());
  }
}

TabularMDP TabularMDP::from_dense(const std::vector<std::vector<std::vector<double>>>& transitions,
                                  const std::vector<std::vector<double>>& rewards) {
  if (transitions.size() != rewards.size())
    throw std::invalid_argument("from_dense: transition and reward tables disagree on |S|");
  const std::size_t n = transitions.size();
  std::vector<std::size_t> actions;
  std::vector<std::vector<Transition>> rows;
  std::vector<double> flat_rewards;
  for (std::size_t s = 0; s < n; ++s) {
    if (transitions[s].size() != rewards[s].size())
      throw std::invalid_argument("from_dense: action counts disagree");
    actions.push_back(transitions[s].size());
    for (std::size_t a = 0; a < transitions[s].size(); ++a) {
      const auto& dense = transitions[s][a];
      if (dense.size() != n) throw std::invalid_argument("from_dense: row length must equal |S|");
      std::vector<Transition> row;
      for (std::size_t next = 0; next < n; ++next)
        if (dense[next] != 0.0) row.push_back({next, dense[next]});
      rows.push_back(std::move(row));
      flat_rewards.push_back(rewards[s][a]);
    }
  }
  return TabularMDP(StateActionLayout(std::move(actions)), std::move(rows), std::move(flat_rewards));
}

std::span<const Transition> TabularMDP::row_at(std::size_t pair) const {
  return {entries_.data() + row_offsets_[pair], row_offsets_[pair + 1] - row_offsets_[pair]};
}

double TabularMDP::prob(State s, Action a, State next) const {
  for (const Transition& t : row(s, a))
    if (t.next == next) return t.prob;
  return 0.0;
}

double TabularMDP::max_abs_reward() const {
  double m = 0.0;
  for (double r : rewards_) m = std::max(m, std::abs(r));
  return m;
}

double TabularMDP::expected_next(std::size_t pair, std::span<const double> v) const {
  double acc = 0.0;
  for (const Transition& t : row_at(pair)) acc += t.prob * v[t.next];
  return acc;
}

std::vector<std::vector<std::vector<double>>> TabularMDP::dense_transitions() const {
  const std::size_t n = num_states();
  std::vector<std::vector<std::vector<double>>> out(n);
  for (State s = 0; s < n; ++s) {
    out[s].assign(num_actions(s), std::vector<double>(n, 0.0));
    for (Action a = 0; a < num_actions(s); ++a)
      for (const Transition& t : row(s, a)) out[s][a][t.next] = t.prob;
  }
  return out;
}

std::vector<std::vector<double>> TabularMDP::dense_rewards() const {
  std::vector<std::vector<double>> out(num_states());
  for (State s = 0; s < num_states(); ++s)
    for (Action a = 0; a < num_actions(s); ++a) out[s].push_back(reward(s, a));
  return out;
}

void check_policy(const StateActionLayout& layout, const DeterministicPolicy& policy) {
  if (policy.size() != layout.num_states())
    throw std::invalid_argument("policy does not cover every state");
  for (State s = 0; s < policy.size(); ++s)
    if (policy.action_of[s] >= layout.num_actions(s))
      throw std::invalid_argument("policy action out of range at state " + std::to_string(s));
}

namespace {

// Iterative Tarjan over the graph with an edge s -> s' whenever some action
// reaches s' with positive probability.
std::vector<std::size_t> strongly_connected_components(const TabularMDP& mdp,
                                                       std::size_t& count) {
  const std::size_t n = mdp.num_states();
  std::vector<std::vector<State>> succ(n);
  for (State s = 0; s < n; ++s) {
    for (Action a = 0; a < mdp.num_actions(s); ++a)
      for (const Transition& t : mdp.row(s, a))
        if (t.prob > 0.0) succ[s].push_back(t.next);
    std::sort(succ[s].begin(), succ[s].end());
    succ[s].erase(std::unique(succ[s].begin(), succ[s].end()), succ[s].end());
  }

  constexpr std::size_t unset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unset), low(n, 0), comp(n, unset);
  std::vector<bool> on_stack(n, false);
  std::vector<State> stack;
  std::vector<std::pair<State, std::size_t>> frames;
  std::size_t next_index = 0;
  count = 0;

  for (State root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, edge] = frames.back();
      if (edge < succ[v].size()) {
        const State w = succ[v][edge++];
        if (index[w] == unset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        State w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      const State finished = v;
      frames.pop_back();
      if (!frames.empty()) {
        State parent = frames.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

}  // namespace

ValidationReport validate(const TabularMDP& mdp) {
  ValidationReport report;
  for (State s = 0; s < mdp.num_states(); ++s) {
    for (Action a = 0; a < mdp.num_actions(s); ++a) {
      double sum = 0.0;
      bool negative = false;
      for (const Transition& t : mdp.row(s, a)) {
        sum += t.prob;
        if (t.prob < 0.0 || t.prob > 1.0) negative = true;
      }
      if (negative || std::abs(sum - 1.0) > 1e-12) report.violations.push_back({s, a, sum, negative});
    }
  }

  std::size_t count = 0;
  const auto comp = strongly_connected_components(mdp, count);
  std::vector<bool> closed(count, true);
  for (State s = 0; s < mdp.num_states(); ++s)
    for (Action a = 0; a < mdp.num_actions(s); ++a)
      for (const Transition& t : mdp.row(s, a))
        if (t.prob > 0.0 && comp[t.next] != comp[s]) closed[comp[s]] = false;

  const auto closed_count = std::count(closed.begin(), closed.end(), true);
  report.weakly_communicating = closed_count == 1;
  for (State s = 0; s < mdp.num_states(); ++s) {
    if (closed_count == 1 && closed[comp[s]])
      report.recurrent_class.push_back(s);
    else
      report.transient_states.push_back(s);
  }
  return report;
}

double span(std::span<const double> h) {
  if (h.empty()) throw std::invalid_argument("span of an empty vector");
  auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  return *hi - *lo;
}

Action greedy_action(const TabularMDP& mdp, State s, std::span<const double> h) {
  const auto& layout = mdp.layout();
  Action best = 0;
  double best_q = -std::numeric_limits<double>::infinity();
  for (Action a = 0; a < layout.num_actions(s); ++a) {
    const std::size_t p = layout.pair(s, a);
    const double q = mdp.rewards()[p] + mdp.expected_next(p, h);
    if (a == 0 || q > best_q + 1e-12 * (1.0 + std::abs(best_q))) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

PlanResult relative_value_iteration(const TabularMDP& mdp, double tol, std::size_t max_iters) {
  PlannerOptions options;
  options.tol = tol;
  options.max_iters = max_iters;
  return relative_value_iteration(mdp, options);
}

PlanResult relative_value_iteration(const TabularMDP& mdp, const PlannerOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("relative_value_iteration: tol must be > 0");
  const double tau = options.aperiodicity;
  if (!(tau >= 0.0 && tau < 1.0))
    throw std::invalid_argument("relative_value_iteration: aperiodicity must lie in [0, 1)");

  const auto& layout = mdp.layout();
  const std::size_t n = mdp.num_states();
  std::vector<double> v(n, 0.0), next(n, 0.0), diff(n, 0.0);
  if (!options.initial.empty()) {
    if (options.initial.size() != n) throw std::invalid_argument("relative_value_iteration: initial values need one entry per state");
    v = options.initial;
  }
  double residual = std::numeric_limits<double>::infinity();

  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    for (State s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (Action a = 0; a < layout.num_actions(s); ++a) {
        const std::size_t p = layout.pair(s, a);
        best = std::max(best, mdp.rewards()[p] + (1.0 - tau) * mdp.expected_next(p, v));
      }
      next[s] = best + tau * v[s];
      diff[s] = next[s] - v[s];
    }
    residual = span(diff);
    if (residual < options.tol) {
      auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
      PlanResult result;
      result.gain_bias.gain = 0.5 * (*lo + *hi);
      const double base = *std::min_element(next.begin(), next.end());
      result.gain_bias.bias.resize(n);
      for (State s = 0; s < n; ++s) result.gain_bias.bias[s] = (1.0 - tau) * (next[s] - base);
      result.gain_bias.span = span(result.gain_bias.bias);
      result.policy.action_of.resize(n);
      for (State s = 0; s < n; ++s) result.policy.action_of[s] = greedy_action(mdp, s, result.gain_bias.bias);
      result.iterations = it;
      result.residual = residual;
      return result;
    }
    const double shift = next[0];
    for (State s = 0; s < n; ++s) v[s] = next[s] - shift;
  }
  throw ConvergenceError("relative value iteration did not converge", residual, options.max_iters);
}

double bellman_residual(const TabularMDP& mdp, const GainBias& gb) {
  const auto& layout = mdp.layout();
  double worst = 0.0;
  for (State s = 0; s < mdp.num_states(); ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (Action a = 0; a < layout.num_actions(s); ++a) {
      const std::size_t p = layout.pair(s, a);
      best = std::max(best, mdp.rewards()[p] + mdp.expected_next(p, gb.bias));
    }
    worst = std::max(worst, std::abs(gb.bias[s] + gb.gain - best));
  }
  return worst;
}

std::vector<double> policy_gain_vector(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                       double tol, std::size_t max_iters) {
  check_policy(mdp.layout(), policy);
  constexpr double tau = 0.5;
  const std::size_t n = mdp.num_states();
  std::vector<std::size_t> pairs(n);
  for (State s = 0; s < n; ++s) pairs[s] = mdp.layout().pair(s, policy(s));

  std::vector<double> v(n, 0.0), next(n), diff(n), prev_diff(n, std::numeric_limits<double>::infinity());
  double change = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    for (State s = 0; s < n; ++s) {
      next[s] = mdp.rewards()[pairs[s]] + tau * v[s] + (1.0 - tau) * mdp.expected_next(pairs[s], v);
      diff[s] = next[s] - v[s];
    }
    change = 0.0;
    for (State s = 0; s < n; ++s) change = std::max(change, std::abs(diff[s] - prev_diff[s]));
    if (change < tol) return diff;
    prev_diff = diff;
    const double shift = *std::min_element(next.begin(), next.end());
    for (State s = 0; s < n; ++s) v[s] = next[s] - shift;
  }
  throw ConvergenceError("policy evaluation did not converge", change, max_iters);
}

double evaluate_policy_average_reward(const TabularMDP& mdp, const DeterministicPolicy& policy,
                                      double tol, State start) {
  if (start >= mdp.num_states()) throw std::out_of_range("start state out of range");
  return policy_gain_vector(mdp, policy, tol)[start];
}

double expected_return(const TabularMDP& mdp, const DeterministicPolicy& policy, State start,
                       std::uint64_t horizon) {
  check_policy(mdp.layout(), policy);
  const std::size_t n = mdp.num_states();
  std::vector<double> mu(n, 0.0), next(n);
  mu.at(start) = 1.0;
  double total = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (State s = 0; s < n; ++s) {
      if (mu[s] == 0.0) continue;
      total += mu[s] * mdp.reward(s, policy(s));
      for (const Transition& tr : mdp.row(s, policy(s))) next[tr.next] += mu[s] * tr.prob;
    }
    mu.swap(next);
  }
  return total;
}

std::pair<State, double> step(const TabularMDP& mdp, State s, Action a, Rng& rng) {
  const std::size_t p = mdp.layout().pair(s, a);
  const auto row = mdp.row_at(p);
  if (row.empty()) throw std::invalid_argument("step: empty transition row");
  const double u = uniform01(rng);
  double acc = 0.0;
  State chosen = row.back().next;
  for (const Transition& t : row) {
    acc += t.prob;
    if (u < acc) {
      chosen = t.next;
      break;
    }
  }
  return {chosen, mdp.rewards()[p]};
}

Rollout rollout(const TabularMDP& mdp, const DeterministicPolicy& policy, State start,
                std::size_t steps, std::uint64_t seed) {
  check_policy(mdp.layout(), policy);
  Rng rng(seed);
  Rollout out;
  out.rng_seed = seed;
  out.states.reserve(steps + 1);
  out.actions.reserve(steps);
  out.rewards.reserve(steps);
  State s = start;
  out.states.push_back(s);
  for (std::size_t t = 0; t < steps; ++t) {
    const Action a = policy(s);
    auto [next, r] = step(mdp, s, a, rng);
    out.actions.push_back(a);
    out.rewards.push_back(r);
    out.states.push_back(next);
    s = next;
  }
  return out;
}

}  // namespace mtadvice
