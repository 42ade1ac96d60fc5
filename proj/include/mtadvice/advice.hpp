#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtadvice/estimation.hpp"
#include "mtadvice/mdp.hpp"
#include "mtadvice/regal.hpp"
#include "mtadvice/trace.hpp"

namespace mtadvice {

struct TeacherPolicy {
  DeterministicPolicy advise;
  std::size_t budget = 0;
  std::size_t spent = 0;
  std::string name;

  /// Advice for s, spending one unit of budget; nullopt once exhausted.
  std::optional<Action> query(State s);
  bool exhausted() const { return spent >= budget; }
};

struct AdviceModel {
  std::vector<TeacherPolicy> teachers;

  std::size_t size() const { return teachers.size(); }
  std::vector<std::size_t> budgets() const;
};

/// Most frequent action; ties go to the lowest action index.
/// Throws std::invalid_argument on an empty list.
Action majority_vote(std::span<const Action> advices);

enum class Construction { online, offline };

struct GrandTeacher {
  DeterministicPolicy policy;
  Construction construction = Construction::offline;
  std::vector<std::size_t> queries_used;
};

struct OfflineGrandTeacher {
  GrandTeacher teacher;
  std::uint64_t steps = 0;
};

/// Explores with uniform-random actions from `start` until every state has
/// been seen, querying every teacher once per newly seen state. Once the walk
/// sits in a closed class with nothing left to see there, it is restarted
/// from `start` (e.g. after reaching an absorbing goal). Teachers
/// whose budget is spent abstain. A step_cap of 0 means 10^6 * |S|.
/// Throws std::runtime_error when the cap is hit or a state receives no vote.
OfflineGrandTeacher build_grand_teacher_offline(const TabularMDP& mdp, AdviceModel& model, Rng& rng,
                                                State start = 0, std::uint64_t step_cap = 0);

/// Lazy grand teacher: the first visit to a state queries all teachers and
/// caches the vote, later visits reuse the cache without spending budget.
class OnlineGrandTeacher {
 public:
  OnlineGrandTeacher(AdviceModel model, std::size_t num_states);

  std::optional<Action> advise(State s);
  const AdviceModel& model() const { return model_; }
  std::vector<std::size_t> queries_used() const;
  /// Cached votes so far; unvisited or unadvised states keep `fallback`.
  GrandTeacher snapshot(const DeterministicPolicy& fallback) const;

 private:
  AdviceModel model_;
  std::vector<std::optional<Action>> cache_;
  std::vector<std::uint8_t> asked_;
};

enum class TeacherKind { optimal, worst, random };

TeacherKind parse_teacher_kind(const std::string& name);
std::string to_string(TeacherKind kind);

/// Greedy with respect to R + P h* of the optimal bias. Budget 0 means |S|.
TeacherPolicy make_optimal_teacher(const TabularMDP& mdp, std::size_t budget = 0);
/// Argmin of the same one-step evaluation.
TeacherPolicy make_worst_teacher(const TabularMDP& mdp, std::size_t budget = 0);
/// Uniform action per state, drawn once.
TeacherPolicy make_random_teacher(const TabularMDP& mdp, Rng& rng, std::size_t budget = 0);
/// k teachers of one kind; random teachers are drawn independently.
AdviceModel make_teachers(const TabularMDP& mdp, TeacherKind kind, std::size_t k, Rng& rng,
                          std::size_t budget = 0);

struct MixSchedule {
  std::vector<double> betas;

  /// betas[i] = base^(i+1) for i = 0 .. m-1.
  static MixSchedule geometric(double base, std::size_t m);
  static MixSchedule constant(double beta, std::size_t m);
  void check() const;
};

struct MixOutcome {
  Action action;
  bool teacher_fired;
};

/// Teacher action with probability beta, otherwise the student's. No random
/// number is drawn when beta is exactly 0 or 1. Without teacher advice the
/// student action is used. Throws std::invalid_argument for beta outside [0, 1].
MixOutcome mixed_action(double beta, std::optional<Action> teacher, Action student, Rng& rng);

using Advisor = std::function<std::optional<Action>(State)>;

struct AdviceRunOptions {
  MixSchedule schedule = MixSchedule::geometric(0.5, 10);
  std::uint64_t steps_per_iter = 200;
  RegalParams regal;
  State start = 0;
  /// First learned policy; drawn uniformly at random when empty.
  std::optional<DeterministicPolicy> initial_policy;
};

struct IterationRecord {
  double beta = 0.0;
  std::size_t first_step = 0;
  std::uint64_t steps = 0;
  std::uint64_t teacher_steps = 0;
  DeterministicPolicy student_policy;
  double optimistic_gain = 0.0;
  std::size_t planner_sweeps = 0;
};

struct AdviceRun {
  DeterministicPolicy final_policy;
  RewardTrace trace;
  std::vector<IterationRecord> iterations;
  TransitionCounts counts;
};

/// Mixed-policy advice loop: one iteration per schedule entry, each
/// following the mixture for steps_per_iter steps and then refitting the
/// learned policy with REGAL.C on the accumulated counts.
AdviceRun multi_teacher_advice(const TabularMDP& mdp, const Advisor& advisor, const AdviceRunOptions& options,
                               Rng& rng);

/// The same loop without an advisor and with every beta set to 0.
AdviceRun regal_c_run(const TabularMDP& mdp, AdviceRunOptions options, Rng& rng);

struct BestTeacherChoice {
  std::size_t index = 0;
  DeterministicPolicy policy;
  std::vector<double> mean_rewards;
};

/// Rolls out every teacher for eval_steps and keeps the highest empirical
/// average reward (ties: lowest index). Simplified stand-in for expert
/// selection; it never does better than the best teacher.
BestTeacherChoice best_teacher_baseline(const TabularMDP& mdp, const AdviceModel& model,
                                        std::size_t eval_steps, State start, Rng& rng);

}  // namespace mtadvice
