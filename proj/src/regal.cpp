#include "mtadvice/regal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mtadvice {

void optimistic_row(std::span<const Transition> centre, double radius, std::span<const double> u,
                    State best, std::vector<Transition>& out) {
  out.clear();
  if (centre.empty()) {
    out.push_back({best, 1.0});
    return;
  }
  out.assign(centre.begin(), centre.end());
  auto it = std::find_if(out.begin(), out.end(), [best](const Transition& t) { return t.next == best; });
  if (it == out.end()) {
    out.push_back({best, 0.0});
    it = out.end() - 1;
  }
  const double add = std::min(0.5 * radius, 1.0 - it->prob);
  if (add <= 0.0) return;
  it->prob += add;

  std::vector<std::size_t> donors;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].next != best && out[i].prob > 0.0) donors.push_back(i);
  std::sort(donors.begin(), donors.end(), [&](std::size_t a, std::size_t b) {
    if (u[out[a].next] != u[out[b].next]) return u[out[a].next] < u[out[b].next];
    return out[a].next < out[b].next;
  });
  double remaining = add;
  for (std::size_t i : donors) {
    const double take = std::min(out[i].prob, remaining);
    out[i].prob -= take;
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  std::erase_if(out, [](const Transition& t) { return t.prob <= 0.0; });
  std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) { return a.next < b.next; });
}

namespace {

State best_state(std::span<const double> u) {
  State best = 0;
  for (State s = 1; s < u.size(); ++s)
    if (u[s] > u[best]) best = s;
  return best;
}

double dot(std::span<const Transition> row, std::span<const double> u) {
  double acc = 0.0;
  for (const Transition& t : row) acc += t.prob * u[t.next];
  return acc;
}

}  // namespace

OptimisticPlan constrained_optimistic_plan(const ConfidenceSet& cs, std::span<const double> rewards,
                                           const RegalParams& params) {
  const auto& layout = cs.layout();
  if (rewards.size() != layout.num_pairs()) throw std::invalid_argument("plan: one reward per pair required");
  if (!(params.span_ceiling > 0.0)) throw std::invalid_argument("plan: span ceiling must be positive");
  if (!(params.planner_tol > 0.0)) throw std::invalid_argument("plan: tolerance must be positive");
  const double tau = params.aperiodicity;
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("plan: aperiodicity must lie in [0, 1)");

  const std::size_t n = layout.num_states();
  // The transformed model's bias is the original one divided by (1 - tau).
  const double cap = params.span_ceiling / (1.0 - tau);
  std::vector<double> u(n, 0.0), next(n), diff(n);
  std::vector<Action> greedy(n, 0);
  std::vector<Transition> row;
  OptimisticPlan plan;
  double residual = std::numeric_limits<double>::infinity();

  for (std::size_t sweep = 1; sweep <= params.max_sweeps; ++sweep) {
    const State best = best_state(u);
    for (State s = 0; s < n; ++s) {
      double best_q = -std::numeric_limits<double>::infinity();
      for (Action a = 0; a < layout.num_actions(s); ++a) {
        const std::size_t p = layout.pair(s, a);
        optimistic_row(cs.empirical_row(p), cs.radius(p), u, best, row);
        const double q = rewards[p] + tau * u[s] + (1.0 - tau) * dot(row, u);
        if (a == 0 || q > best_q + 1e-12 * (1.0 + std::abs(best_q))) {
          best_q = q;
          greedy[s] = a;
        }
      }
      next[s] = best_q;
    }
    const double lo = *std::min_element(next.begin(), next.end());
    for (State s = 0; s < n; ++s) next[s] = std::min(next[s], lo + cap);
    for (State s = 0; s < n; ++s) diff[s] = next[s] - u[s];
    auto [dmin, dmax] = std::minmax_element(diff.begin(), diff.end());
    residual = *dmax - *dmin;
    plan.gain_trace.push_back(0.5 * (*dmin + *dmax));

    if (residual < params.planner_tol) {
      std::vector<std::vector<Transition>> rows(layout.num_pairs());
      for (std::size_t p = 0; p < layout.num_pairs(); ++p)
        optimistic_row(cs.empirical_row(p), cs.radius(p), u, best, rows[p]);
      plan.selected = TabularMDP(layout, std::move(rows), std::vector<double>(rewards.begin(), rewards.end()));
      plan.optimistic.gain = plan.gain_trace.back();
      const double base = *std::min_element(next.begin(), next.end());
      plan.optimistic.bias.resize(n);
      for (State s = 0; s < n; ++s) plan.optimistic.bias[s] = (1.0 - tau) * (next[s] - base);
      plan.optimistic.span = span(plan.optimistic.bias);
      plan.policy.action_of = greedy;
      plan.sweeps = sweep;
      plan.residual = residual;
      return plan;
    }
    for (State s = 0; s < n; ++s) u[s] = next[s] - lo;
  }
  throw ConvergenceError("extended value iteration did not converge", residual, params.max_sweeps);
}

DeterministicPolicy regal_c(const EpisodeDataset& dataset, TransitionCounts& counts, std::uint64_t T,
                            const RegalParams& params, std::span<const double> rewards,
                            OptimisticPlan* plan_out) {
  if (T < 1) throw std::invalid_argument("regal_c: T must be >= 1");
  for (const StepRecord& rec : dataset) counts.record(rec.state, rec.action, rec.next);
  const ConfidenceSet cs = ConfidenceSet::build(counts, T, params.delta);
  OptimisticPlan plan = constrained_optimistic_plan(cs, rewards, params);
  DeterministicPolicy policy = plan.policy;
  if (plan_out != nullptr) *plan_out = std::move(plan);
  return policy;
}

void write_planner_trace_csv(const OptimisticPlan& plan, std::ostream& out) {
  out << "sweep,gain\n";
  out.precision(17);
  for (std::size_t i = 0; i < plan.gain_trace.size(); ++i) out << (i + 1) << ',' << plan.gain_trace[i] << '\n';
}

}  // namespace mtadvice
