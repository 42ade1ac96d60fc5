#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtadvice/advice.hpp"
#include "mtadvice/analysis.hpp"
#include "mtadvice/domains.hpp"
#include "mtadvice/io.hpp"

namespace mtadvice {

enum class Algorithm { ours, regal_no_advice, optimal_policy, best_teacher_baseline };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm algo);

struct ExperimentConfig {
  std::string domain = "combination-lock";
  std::size_t lock_n = 5;
  Algorithm algorithm = Algorithm::ours;
  TeacherKind teacher = TeacherKind::optimal;
  Construction grand_teacher = Construction::online;
  std::size_t teachers = 10;
  std::size_t iterations = 10;
  std::uint64_t steps_per_iter = 200;
  double beta_base = 0.5;
  double span_ceiling = 1000.0;
  double delta = 0.8;
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  std::size_t smoothing_window = 200;

  std::uint64_t total_steps() const { return iterations * steps_per_iter; }
  /// e.g. "ours-optimal", "regal-no-advice".
  std::string label() const;
  /// Throws std::invalid_argument on out-of-range values.
  void check() const;
};

Json config_to_json(const ExperimentConfig& config);
/// Fields absent from the document keep the values already in `base`.
ExperimentConfig config_from_json(const Json& doc, ExperimentConfig base = {});

/// The domain MDP together with its relative-VI solution.
struct PreparedDomain {
  Domain domain;
  PlanResult optimal;
};

PreparedDomain prepare_domain(const std::string& id, std::size_t lock_n = 5);

struct TrialResult {
  std::uint64_t seed = 0;
  RewardTrace trace;
  DeterministicPolicy final_policy;
  /// Long-run average reward of the final policy from the start state.
  double final_policy_gain = 0.0;
  std::vector<double> smoothed;
  RegretCurve regret;
  std::vector<IterationRecord> iterations;
  /// Only filled for runs of the advice loop.
  std::optional<TransitionCounts> counts;
};

struct ExperimentResult {
  ExperimentConfig config;
  double optimal_gain = 0.0;
  std::vector<TrialResult> trials;
  std::vector<double> mean_reward;
  std::vector<double> mean_smoothed;
  std::vector<double> mean_regret;

  /// Average reward of the last `window` steps, per trial.
  std::vector<double> final_window_means(std::size_t window) const;
};

/// Runs config.trials trials with seeds seed, seed + 1, ... and averages
/// them pointwise. A failing trial rethrows with the trial index attached.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedDomain& prepared);

/// Ours with each teacher kind, REGAL.C without advice, the optimal policy
/// and the best-teacher baseline, all sharing the other settings of `base`.
std::vector<ExperimentConfig> six_settings(const ExperimentConfig& base);

/// Mean of the last `window` values up to and including each position.
std::vector<double> trailing_mean(std::span<const double> values, std::size_t window);

/// Header "step,mean_reward,reward_trial_0,...,cumulative_regret" and one
/// row per step; cumulative_regret is the across-trial mean.
std::string results_csv(const ExperimentResult& result);
/// Line chart of the smoothed mean reward, one series per result.
std::string results_svg(std::span<const ExperimentResult> results);
/// Config, optimal gain, smoothing window and per-trial summaries.
Json summary_json(const ExperimentResult& result);

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);
void emit_svg(std::span<const ExperimentResult> results, const std::filesystem::path& path);

/// Reward trace CSV as written by results_csv, read back as per-trial
/// columns. Throws std::runtime_error on a malformed file.
std::vector<std::vector<double>> read_trial_rewards_csv(const std::filesystem::path& path);

}  // namespace mtadvice
