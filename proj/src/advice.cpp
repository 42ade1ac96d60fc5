#include "mtadvice/advice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mtadvice {

std::pair<std::size_t, std::size_t> RewardTrace::iteration_range(std::size_t i) const {
  const std::size_t first = iteration_starts.at(i);
  const std::size_t last = i + 1 < iteration_starts.size() ? iteration_starts[i + 1] : rewards.size();
  return {first, last};
}

std::optional<Action> TeacherPolicy::query(State s) {
  if (exhausted()) return std::nullopt;
  const Action a = advise(s);
  ++spent;
  return a;
}

std::vector<std::size_t> AdviceModel::budgets() const {
  std::vector<std::size_t> out;
  for (const auto& t : teachers) out.push_back(t.budget);
  return out;
}

Action majority_vote(std::span<const Action> advices) {
  if (advices.empty()) throw std::invalid_argument("majority_vote: no advice given");
  std::map<Action, std::size_t> tally;
  for (Action a : advices) ++tally[a];
  Action best = tally.begin()->first;
  std::size_t votes = 0;
  for (const auto& [a, n] : tally)
    if (n > votes) {
      best = a;
      votes = n;
    }
  return best;
}

namespace {

std::optional<Action> poll(AdviceModel& model, State s) {
  std::vector<Action> votes;
  for (auto& teacher : model.teachers)
    if (auto a = teacher.query(s)) votes.push_back(*a);
  if (votes.empty()) return std::nullopt;
  return majority_vote(votes);
}

std::vector<std::size_t> spent_of(const AdviceModel& model) {
  std::vector<std::size_t> out;
  for (const auto& t : model.teachers) out.push_back(t.spent);
  return out;
}

std::size_t default_budget(const TabularMDP& mdp, std::size_t budget) {
  return budget == 0 ? mdp.num_states() : budget;
}

}  // namespace

OfflineGrandTeacher build_grand_teacher_offline(const TabularMDP& mdp, AdviceModel& model, Rng& rng,
                                                State start, std::uint64_t step_cap) {
  const std::size_t n = mdp.num_states();
  if (start >= n) throw std::out_of_range("offline grand teacher: start state out of range");
  if (step_cap == 0) step_cap = 1'000'000ULL * n;
  std::vector<std::optional<Action>> chosen(n);
  std::vector<std::uint8_t> seen(n, 0);
  std::size_t unseen = n;
  State s = start;
  std::uint64_t steps = 0;
  auto visit = [&](State x) {
    if (seen[x]) return;
    seen[x] = 1;
    --unseen;
    chosen[x] = poll(model, x);
    if (!chosen[x]) throw std::runtime_error("offline grand teacher: no teacher left to advise state " + std::to_string(x));
  };
  // A walk trapped in a fully seen closed class starts over from `start`.
  std::vector<std::uint8_t> closed(n, 0);
  for (State x : validate(mdp).recurrent_class) closed[x] = 1;
  std::size_t closed_unseen = static_cast<std::size_t>(std::count(closed.begin(), closed.end(), 1));
  auto visit_and_track = [&](State x) {
    if (!seen[x] && closed[x]) --closed_unseen;
    visit(x);
  };
  visit_and_track(s);
  while (unseen > 0) {
    if (steps >= step_cap) throw std::runtime_error("offline grand teacher: exploration step cap exceeded");
    if (closed[s] && closed_unseen == 0) s = start;
    s = step(mdp, s, uniform_index(rng, mdp.num_actions(s)), rng).first;
    ++steps;
    visit_and_track(s);
  }
  OfflineGrandTeacher out;
  out.teacher.construction = Construction::offline;
  for (State x = 0; x < n; ++x) out.teacher.policy.action_of.push_back(*chosen[x]);
  out.teacher.queries_used = spent_of(model);
  out.steps = steps;
  return out;
}

OnlineGrandTeacher::OnlineGrandTeacher(AdviceModel model, std::size_t num_states)
    : model_(std::move(model)), cache_(num_states), asked_(num_states, 0) {}

std::optional<Action> OnlineGrandTeacher::advise(State s) {
  if (s >= cache_.size()) throw std::out_of_range("online grand teacher: state out of range");
  if (!asked_[s]) {
    asked_[s] = 1;
    cache_[s] = poll(model_, s);
  }
  return cache_[s];
}

std::vector<std::size_t> OnlineGrandTeacher::queries_used() const { return spent_of(model_); }

GrandTeacher OnlineGrandTeacher::snapshot(const DeterministicPolicy& fallback) const {
  GrandTeacher g;
  g.construction = Construction::online;
  g.policy = fallback;
  g.policy.action_of.resize(cache_.size(), 0);
  for (State s = 0; s < cache_.size(); ++s)
    if (cache_[s]) g.policy.action_of[s] = *cache_[s];
  g.queries_used = queries_used();
  return g;
}

TeacherKind parse_teacher_kind(const std::string& name) {
  if (name == "optimal") return TeacherKind::optimal;
  if (name == "worst") return TeacherKind::worst;
  if (name == "random") return TeacherKind::random;
  throw std::invalid_argument("unknown teacher kind '" + name + "'");
}

std::string to_string(TeacherKind kind) {
  switch (kind) {
    case TeacherKind::optimal: return "optimal";
    case TeacherKind::worst: return "worst";
    case TeacherKind::random: return "random";
  }
  return "?";
}

TeacherPolicy make_optimal_teacher(const TabularMDP& mdp, std::size_t budget) {
  const PlanResult plan = relative_value_iteration(mdp);
  return {plan.policy, default_budget(mdp, budget), 0, "optimal"};
}

TeacherPolicy make_worst_teacher(const TabularMDP& mdp, std::size_t budget) {
  const PlanResult plan = relative_value_iteration(mdp);
  const auto& h = plan.gain_bias.bias;
  DeterministicPolicy worst;
  for (State s = 0; s < mdp.num_states(); ++s) {
    Action arg = 0;
    double lowest = 0.0;
    for (Action a = 0; a < mdp.num_actions(s); ++a) {
      const std::size_t p = mdp.layout().pair(s, a);
      const double q = mdp.rewards()[p] + mdp.expected_next(p, h);
      if (a == 0 || q < lowest - 1e-12 * (1.0 + std::abs(lowest))) {
        lowest = q;
        arg = a;
      }
    }
    worst.action_of.push_back(arg);
  }
  return {worst, default_budget(mdp, budget), 0, "worst"};
}

TeacherPolicy make_random_teacher(const TabularMDP& mdp, Rng& rng, std::size_t budget) {
  DeterministicPolicy p;
  for (State s = 0; s < mdp.num_states(); ++s) p.action_of.push_back(uniform_index(rng, mdp.num_actions(s)));
  return {p, default_budget(mdp, budget), 0, "random"};
}

AdviceModel make_teachers(const TabularMDP& mdp, TeacherKind kind, std::size_t k, Rng& rng, std::size_t budget) {
  if (k == 0) throw std::invalid_argument("make_teachers: need at least one teacher");
  AdviceModel model;
  if (kind == TeacherKind::random) {
    for (std::size_t i = 0; i < k; ++i) model.teachers.push_back(make_random_teacher(mdp, rng, budget));
    return model;
  }
  const TeacherPolicy one = kind == TeacherKind::optimal ? make_optimal_teacher(mdp, budget)
                                                         : make_worst_teacher(mdp, budget);
  model.teachers.assign(k, one);
  return model;
}

MixSchedule MixSchedule::geometric(double base, std::size_t m) {
  MixSchedule out;
  double b = 1.0;
  for (std::size_t i = 0; i < m; ++i) out.betas.push_back(b *= base);
  out.check();
  return out;
}

MixSchedule MixSchedule::constant(double beta, std::size_t m) {
  MixSchedule out{std::vector<double>(m, beta)};
  out.check();
  return out;
}

void MixSchedule::check() const {
  for (double b : betas)
    if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("mix schedule: beta outside [0, 1]");
}

MixOutcome mixed_action(double beta, std::optional<Action> teacher, Action student, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("mixed_action: beta outside [0, 1]");
  bool pick_teacher = beta == 1.0;
  if (beta > 0.0 && beta < 1.0) pick_teacher = uniform01(rng) < beta;
  if (pick_teacher && teacher) return {*teacher, true};
  return {student, false};
}

AdviceRun multi_teacher_advice(const TabularMDP& mdp, const Advisor& advisor, const AdviceRunOptions& options,
                               Rng& rng) {
  const auto& betas = options.schedule.betas;
  if (betas.empty()) throw std::invalid_argument("advice loop: at least one iteration required");
  if (options.steps_per_iter < 1) throw std::invalid_argument("advice loop: steps per iteration must be >= 1");
  options.schedule.check();
  if (options.start >= mdp.num_states()) throw std::out_of_range("advice loop: start state out of range");

  AdviceRun run;
  run.counts = TransitionCounts(mdp.layout());
  DeterministicPolicy student;
  if (options.initial_policy) {
    check_policy(mdp.layout(), *options.initial_policy);
    student = *options.initial_policy;
  } else {
    for (State s = 0; s < mdp.num_states(); ++s) student.action_of.push_back(uniform_index(rng, mdp.num_actions(s)));
  }

  auto& trace = run.trace;
  const std::size_t total = betas.size() * options.steps_per_iter;
  trace.rewards.reserve(total);
  trace.states.reserve(total);
  trace.actions.reserve(total);
  trace.student_actions.reserve(total);
  trace.fired_by_teacher.reserve(total);

  State s = options.start;
  std::uint64_t T = 0;
  EpisodeDataset data;
  for (double beta : betas) {
    IterationRecord rec;
    rec.beta = beta;
    rec.first_step = trace.size();
    rec.steps = options.steps_per_iter;
    rec.student_policy = student;
    run.counts.begin_iteration();
    trace.iteration_starts.push_back(trace.size());
    data.clear();
    for (std::uint64_t k = 0; k < options.steps_per_iter; ++k) {
      const Action proposed = student(s);
      const std::optional<Action> advice = beta > 0.0 && advisor ? advisor(s) : std::nullopt;
      const MixOutcome mix = mixed_action(beta, advice, proposed, rng);
      const auto [next, reward] = step(mdp, s, mix.action, rng);
      data.push_back({s, mix.action, next, reward});
      trace.rewards.push_back(reward);
      trace.states.push_back(s);
      trace.actions.push_back(mix.action);
      trace.student_actions.push_back(proposed);
      trace.fired_by_teacher.push_back(mix.teacher_fired ? 1 : 0);
      rec.teacher_steps += mix.teacher_fired ? 1 : 0;
      s = next;
    }
    T += options.steps_per_iter;
    OptimisticPlan plan;
    student = regal_c(data, run.counts, T, options.regal, mdp.rewards(), &plan);
    rec.optimistic_gain = plan.optimistic.gain;
    rec.planner_sweeps = plan.sweeps;
    run.iterations.push_back(std::move(rec));
  }
  run.final_policy = student;
  return run;
}

AdviceRun regal_c_run(const TabularMDP& mdp, AdviceRunOptions options, Rng& rng) {
  options.schedule = MixSchedule::constant(0.0, options.schedule.betas.size());
  return multi_teacher_advice(mdp, Advisor{}, options, rng);
}

BestTeacherChoice best_teacher_baseline(const TabularMDP& mdp, const AdviceModel& model, std::size_t eval_steps,
                                        State start, Rng& rng) {
  if (model.teachers.empty()) throw std::invalid_argument("best_teacher_baseline: no teachers");
  BestTeacherChoice out;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.teachers.size(); ++i) {
    const Rollout r = rollout(mdp, model.teachers[i].advise, start, eval_steps, rng());
    double sum = 0.0;
    for (double x : r.rewards) sum += x;
    const double mean = eval_steps == 0 ? 0.0 : sum / static_cast<double>(eval_steps);
    out.mean_rewards.push_back(mean);
    if (mean > best) {
      best = mean;
      out.index = i;
    }
  }
  out.policy = model.teachers[out.index].advise;
  return out;
}

}  // namespace mtadvice
