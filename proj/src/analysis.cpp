#include "mtadvice/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace mtadvice {

RegretCurve cumulative_regret(std::span<const double> rewards, double gain) {
  if (!std::isfinite(gain)) throw std::invalid_argument("cumulative_regret: gain must be finite");
  RegretCurve curve;
  curve.gain = gain;
  curve.regret.reserve(rewards.size());
  double total = 0.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    total += rewards[k];
    curve.regret.push_back(gain * static_cast<double>(k + 1) - total);
  }
  return curve;
}

RegretRatio ratio_of_regrets(double regret, double baseline_regret) {
  RegretRatio out;
  out.numerator = regret;
  out.denominator = baseline_regret;
  if (baseline_regret != 0.0) out.value = regret / baseline_regret;
  return out;
}

RegretRatio regret_ratio(std::span<const double> rewards1, std::span<const double> rewards2, double gain,
                         std::size_t T) {
  if (rewards1.size() < T || rewards2.size() < T)
    throw std::invalid_argument("regret_ratio: traces shorter than the horizon");
  auto regret = [&](std::span<const double> r) {
    double sum = 0.0;
    for (std::size_t t = 0; t < T; ++t) sum += r[t];
    return gain * static_cast<double>(T) - sum;
  };
  return ratio_of_regrets(regret(rewards1), regret(rewards2));
}

BernsteinInterval empirical_bernstein(std::span<const double> samples, double delta, double r_max) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("empirical_bernstein: at least two samples required");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("empirical_bernstein: delta must lie in (0, 1)");
  double mean = 0.0;
  for (double x : samples) {
    if (std::abs(x) > r_max) throw std::invalid_argument("empirical_bernstein: sample exceeds r_max");
    mean += x;
  }
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);

  BernsteinInterval out;
  out.center = mean;
  out.n = n;
  out.delta = delta;
  out.r_max = r_max;
  out.sigma = std::sqrt(var);
  const double log_term = std::log(3.0 / delta);
  const double nn = static_cast<double>(n);
  out.half_width = out.sigma * std::sqrt(2.0 * log_term / nn) + 6.0 * r_max * log_term / nn;
  return out;
}

double transfer_gap(const ReturnEstimate& source, const ReturnEstimate& target) {
  if (source.horizon != target.horizon) throw std::invalid_argument("transfer_gap: horizons differ");
  return source.value - target.value;
}

TransferReport negative_transfer_check(const TransferInputs& in) {
  if (in.source.n == 0 || in.target.n == 0) throw std::invalid_argument("negative_transfer_check: empty interval");
  TransferReport out;
  const double base = in.gain * static_cast<double>(in.horizon);
  out.gap = in.gap;
  out.gap_condition = in.gap > in.source_expected - in.target_expected;

  const double num = base + in.gap;
  const double point_den = base - in.target.center;
  const double low_den = base - in.target.low();
  const double high_den = base - in.target.high();
  out.rho_hat = point_den != 0.0 ? (num - in.source.center) / point_den : std::numeric_limits<double>::quiet_NaN();
  if (!(low_den > 0.0)) {
    out.degenerate = true;
    out.low = out.high = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.low = (num - in.source.high()) / low_den;
  out.high = high_den > 0.0 ? (num - in.source.low()) / high_den : std::numeric_limits<double>::infinity();
  out.negative_transfer = out.low > 1.0;
  return out;
}

double one_way_diameter(const TabularMDP& mdp, std::span<const double> bias, double tol, std::size_t max_iters) {
  const std::size_t n = mdp.num_states();
  if (bias.size() != n) throw std::invalid_argument("one_way_diameter: bias has the wrong length");
  const State target = static_cast<State>(std::max_element(bias.begin(), bias.end()) - bias.begin());

  std::vector<std::vector<State>> pred(n);
  for (State s = 0; s < n; ++s)
    for (Action a = 0; a < mdp.num_actions(s); ++a)
      for (const Transition& t : mdp.row(s, a))
        if (t.prob > 0.0) pred[t.next].push_back(s);
  std::vector<std::uint8_t> reaches(n, 0);
  std::deque<State> queue{target};
  reaches[target] = 1;
  while (!queue.empty()) {
    const State s = queue.front();
    queue.pop_front();
    for (State p : pred[s])
      if (!reaches[p]) {
        reaches[p] = 1;
        queue.push_back(p);
      }
  }
  if (std::find(reaches.begin(), reaches.end(), 0) != reaches.end()) return std::numeric_limits<double>::infinity();

  std::vector<double> tau(n, 0.0), next(n, 0.0);
  for (std::size_t it = 0; it < max_iters; ++it) {
    double change = 0.0;
    for (State s = 0; s < n; ++s) {
      if (s == target) continue;
      double best = std::numeric_limits<double>::infinity();
      for (Action a = 0; a < mdp.num_actions(s); ++a)
        best = std::min(best, 1.0 + mdp.expected_next(mdp.layout().pair(s, a), tau));
      next[s] = best;
      change = std::max(change, std::abs(next[s] - tau[s]));
    }
    tau.swap(next);
    if (change < tol * (1.0 + *std::max_element(tau.begin(), tau.end())))
      return *std::max_element(tau.begin(), tau.end());
  }
  throw ConvergenceError("one_way_diameter: hitting-time iteration did not converge", 0.0, max_iters);
}

double theorem2_envelope(double num_states, double num_actions, double T, double H, double delta, double beta,
                         double rho) {
  const double at = num_actions * T;
  return (1.0 - beta + rho * beta) * H * num_states * std::sqrt(at * std::log(at / delta));
}

std::uint64_t coupon_collector_steps(std::size_t n, double delta) {
  const double nn = static_cast<double>(n);
  return static_cast<std::uint64_t>(std::ceil(nn * std::log(nn / delta)));
}

std::uint64_t cover_time(const TabularMDP& mdp, State start, Rng& rng, std::uint64_t cap) {
  const std::size_t n = mdp.num_states();
  std::vector<std::uint8_t> seen(n, 0);
  seen.at(start) = 1;
  std::size_t unseen = n - 1;
  State s = start;
  std::uint64_t steps = 0;
  while (unseen > 0) {
    if (steps >= cap) throw std::runtime_error("cover_time: step cap exceeded");
    s = step(mdp, s, uniform_index(rng, mdp.num_actions(s)), rng).first;
    ++steps;
    if (!seen[s]) {
      seen[s] = 1;
      --unseen;
    }
  }
  return steps;
}

std::vector<double> oracle_step_gaps(const TabularMDP& mdp, const GainBias& optimal) {
  std::vector<double> gaps(mdp.layout().num_pairs());
  for (State s = 0; s < mdp.num_states(); ++s)
    for (Action a = 0; a < mdp.num_actions(s); ++a) {
      const std::size_t p = mdp.layout().pair(s, a);
      const double g = optimal.gain + optimal.bias[s] - mdp.rewards()[p] - mdp.expected_next(p, optimal.bias);
      gaps[p] = std::max(g, 0.0);
    }
  return gaps;
}

double subtrace_oracle_regret(const TabularMDP& mdp, const RewardTrace& trace, std::span<const double> gaps,
                              bool teacher) {
  double total = 0.0;
  for (std::size_t t = 0; t < trace.size(); ++t)
    if ((trace.fired_by_teacher[t] != 0) == teacher) total += gaps[mdp.layout().pair(trace.states[t], trace.actions[t])];
  return total;
}

std::vector<IterationRegret> decompose_regret(const TabularMDP& mdp, const RewardTrace& trace,
                                              const TransitionCounts& counts, double gain) {
  if (counts.num_iterations() != trace.iteration_starts.size())
    throw std::invalid_argument("decompose_regret: counters and trace disagree on the iteration count");
  std::vector<IterationRegret> out;
  for (std::size_t i = 0; i < trace.iteration_starts.size(); ++i) {
    IterationRegret r;
    const auto visits = counts.visits_in_iteration(i);
    for (std::size_t p = 0; p < visits.size(); ++p)
      r.from_counts += static_cast<double>(visits[p]) * (gain - mdp.rewards()[p]);
    const auto [first, last] = trace.iteration_range(i);
    for (std::size_t t = first; t < last; ++t) {
      if (trace.fired_by_teacher[t]) {
        r.teacher += gain - trace.rewards[t];
        ++r.teacher_steps;
      } else {
        r.student += gain - trace.rewards[t];
        ++r.student_steps;
      }
    }
    out.push_back(r);
  }
  return out;
}

TwoPartBound two_part_regret_bound(const TabularMDP& mdp, const RewardTrace& trace, std::span<const double> gaps) {
  TwoPartBound out;
  const auto& layout = mdp.layout();
  double weighted_student = 0.0;
  double teacher_side = 0.0;
  bool unbounded = false;
  for (std::size_t i = 0; i < trace.iteration_starts.size(); ++i) {
    const auto [first, last] = trace.iteration_range(i);
    double student = 0.0, teacher = 0.0, proposed = 0.0;
    std::size_t n_student = 0;
    for (std::size_t t = first; t < last; ++t) {
      const double g = gaps[layout.pair(trace.states[t], trace.actions[t])];
      proposed += gaps[layout.pair(trace.states[t], trace.student_actions[t])];
      if (trace.fired_by_teacher[t]) {
        teacher += g;
      } else {
        student += g;
        ++n_student;
      }
      out.total += g;
    }
    const double steps = static_cast<double>(last - first);
    const double x = steps > 0 ? static_cast<double>(n_student) / steps : 1.0;
    const double scaled_student = n_student > 0 ? student / x : proposed;
    const double scaled_teacher = x < 1.0 ? teacher / (1.0 - x) : 0.0;
    double rho = 0.0;
    if (x < 1.0) {
      if (scaled_student > 0.0)
        rho = scaled_teacher / scaled_student;
      else if (scaled_teacher > 0.0)
        rho = std::numeric_limits<double>::infinity();
    }
    if (std::isinf(rho)) unbounded = true;
    out.student_fraction.push_back(x);
    out.student_regret.push_back(scaled_student);
    out.teacher_regret.push_back(scaled_teacher);
    out.rho.push_back(rho);
    out.max_rho = std::max(out.max_rho, rho);
    weighted_student += x * scaled_student;
    teacher_side += (1.0 - x) * scaled_student;
  }
  out.bound = unbounded ? std::numeric_limits<double>::infinity() : out.max_rho * teacher_side + weighted_student;
  return out;
}

}  // namespace mtadvice
