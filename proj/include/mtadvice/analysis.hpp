#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtadvice/advice.hpp"
#include "mtadvice/estimation.hpp"
#include "mtadvice/mdp.hpp"
#include "mtadvice/trace.hpp"

namespace mtadvice {

struct RegretCurve {
  /// regret[k] = gain * (k + 1) - (r_0 + ... + r_k).
  std::vector<double> regret;
  double gain = 0.0;
};

RegretCurve cumulative_regret(std::span<const double> rewards, double gain);

/// Ratio of two regrets. Empty when the baseline regret is zero, in which
/// case the baseline is optimal over the horizon and the ratio is undefined.
struct RegretRatio {
  std::optional<double> value;
  double numerator = 0.0;
  double denominator = 0.0;

  bool baseline_optimal() const { return !value.has_value(); }
};

RegretRatio ratio_of_regrets(double regret, double baseline_regret);

/// (gain T - sum of first T rewards of trace 1) / (same for trace 2).
/// Throws std::invalid_argument if either trace is shorter than T.
RegretRatio regret_ratio(std::span<const double> rewards1, std::span<const double> rewards2, double gain,
                         std::size_t T);

struct BernsteinInterval {
  double center = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
  double delta = 0.0;
  double r_max = 0.0;
  /// Standard deviation with the 1/n normalisation.
  double sigma = 0.0;

  double low() const { return center - half_width; }
  double high() const { return center + half_width; }
};

/// Mean of the samples with half-width
/// sigma sqrt(2 ln(3/delta) / n) + 6 r_max ln(3/delta) / n.
/// Throws std::invalid_argument if n < 2, delta is outside (0, 1) or a
/// sample exceeds r_max in magnitude.
BernsteinInterval empirical_bernstein(std::span<const double> samples, double delta, double r_max);

struct ReturnEstimate {
  double value = 0.0;
  std::uint64_t horizon = 0;
};

/// Source-task return minus target-task return of the same policy.
/// Throws std::invalid_argument when the horizons differ.
double transfer_gap(const ReturnEstimate& source, const ReturnEstimate& target);

struct TransferInputs {
  double gain = 0.0;
  std::uint64_t horizon = 0;
  /// transfer_gap of the source policy.
  double gap = 0.0;
  /// Expected T-step returns of the source policy on the source task and of
  /// the target policy on the target task.
  double source_expected = 0.0;
  double target_expected = 0.0;
  /// Intervals around the estimated returns of those same two quantities.
  BernsteinInterval source;
  BernsteinInterval target;
};

struct TransferReport {
  double rho_hat = 0.0;
  double gap = 0.0;
  /// gap > source_expected - target_expected.
  bool gap_condition = false;
  /// Lower end of the rho-hat interval exceeds 1.
  bool negative_transfer = false;
  /// low = (gain T + gap - source.high) / (gain T - target.low) and
  /// high = (gain T + gap - source.low) / (gain T - target.high), the latter
  /// +infinity when its denominator is not positive.
  double low = 0.0;
  double high = 0.0;
  /// gain T - target.low was not positive; bounds are then NaN and
  /// negative_transfer is false.
  bool degenerate = false;
};

TransferReport negative_transfer_check(const TransferInputs& in);

/// Max over start states of the minimal expected hitting time of the state
/// with the largest bias (ties: lowest index), by stochastic-shortest-path
/// value iteration. +infinity when that state is unreachable from somewhere.
double one_way_diameter(const TabularMDP& mdp, std::span<const double> bias, double tol = 1e-10,
                        std::size_t max_iters = 10'000'000);

/// (1 - beta + rho beta) H |S| sqrt(|A| T log(|A| T / delta)) with the
/// hidden constant set to 1.
double theorem2_envelope(double num_states, double num_actions, double T, double H, double delta, double beta,
                         double rho);

/// ceil(n ln(n / delta)).
std::uint64_t coupon_collector_steps(std::size_t n, double delta);

/// Steps of uniform-random exploration from `start` until every state has
/// been seen. Throws std::runtime_error past `cap` steps.
std::uint64_t cover_time(const TabularMDP& mdp, State start, Rng& rng, std::uint64_t cap);

/// gain + h(s) - R(s,a) - P_{s,a}^T h per pair, floored at 0: expected
/// regret of one step of a in s.
std::vector<double> oracle_step_gaps(const TabularMDP& mdp, const GainBias& optimal);

/// Regret of the steps whose fired-by flag matches `teacher`, measured with
/// the oracle step gaps.
double subtrace_oracle_regret(const TabularMDP& mdp, const RewardTrace& trace, std::span<const double> gaps,
                              bool teacher);

struct IterationRegret {
  /// Sum over pairs of v_i(s,a) (gain - R(s,a)) from the counter deltas.
  double from_counts = 0.0;
  double student = 0.0;
  double teacher = 0.0;
  std::uint64_t student_steps = 0;
  std::uint64_t teacher_steps = 0;

  double from_trace() const { return student + teacher; }
};

/// Per-iteration regret computed twice: from the counters and from the two
/// fired-by sub-traces of the reward log.
std::vector<IterationRegret> decompose_regret(const TabularMDP& mdp, const RewardTrace& trace,
                                              const TransitionCounts& counts, double gain);

struct TwoPartBound {
  /// Per iteration: student fraction, student regret scaled to the whole
  /// iteration, teacher regret scaled likewise, and their ratio.
  std::vector<double> student_fraction;
  std::vector<double> student_regret;
  std::vector<double> teacher_regret;
  std::vector<double> rho;
  double max_rho = 0.0;
  double total = 0.0;
  double bound = 0.0;

  bool holds(double tol = 1e-9) const { return total <= bound + tol * (1.0 + std::abs(bound)); }
};

/// Total oracle regret against max_i rho_i (sum(1 - X_i) S_i) + sum X_i S_i,
/// with X_i the student fraction of iteration i and S_i its student regret
/// extrapolated to the whole iteration. An iteration without student steps
/// uses the regret the proposed student actions would have incurred.
TwoPartBound two_part_regret_bound(const TabularMDP& mdp, const RewardTrace& trace, std::span<const double> gaps);

}  // namespace mtadvice
