#include <doctest.h>

#include <cmath>

#include "mtadvice/advice.hpp"
#include "mtadvice/domains.hpp"

using namespace mtadvice;

namespace {

AdviceModel copies(const DeterministicPolicy& p, std::size_t k, std::size_t budget) {
  AdviceModel m;
  for (std::size_t i = 0; i < k; ++i) m.teachers.push_back({p, budget, 0, "fixed"});
  return m;
}

}  // namespace

TEST_CASE("majority vote") {
  CHECK(majority_vote(std::vector<Action>{0, 0, 1}) == 0);
  CHECK(majority_vote(std::vector<Action>{1}) == 1);
  CHECK(majority_vote(std::vector<Action>{0, 1}) == 0);
  CHECK(majority_vote(std::vector<Action>{3, 2, 2, 3, 1}) == 2);
  CHECK(majority_vote(std::vector<Action>{1, 1, 0}) == 1);
  CHECK_THROWS_AS(majority_vote(std::vector<Action>{}), std::invalid_argument);
}

TEST_CASE("teacher budget") {
  TeacherPolicy t{{{1, 0}}, 2, 0, "t"};
  CHECK(t.query(0) == 1);
  CHECK(t.query(1) == 0);
  CHECK(t.exhausted());
  CHECK_FALSE(t.query(0).has_value());
  CHECK(t.spent == 2);
}

TEST_CASE("offline grand teacher") {
  SUBCASE("single state") {
    const auto mdp = TabularMDP::from_dense({{{1.0}, {1.0}}}, {{0.0, 1.0}});
    Rng rng(1);
    auto model = copies({{1}}, 3, 1);
    const auto g = build_grand_teacher_offline(mdp, model, rng);
    CHECK(g.steps <= 1);
    CHECK(g.teacher.policy.action_of == std::vector<Action>{1});
    CHECK(g.teacher.queries_used == std::vector<std::size_t>{1, 1, 1});
    CHECK(g.teacher.construction == Construction::offline);
  }
  SUBCASE("identical teachers give that teacher's policy") {
    const auto d = build_combination_lock(5);
    Rng rng(2);
    auto model = make_teachers(d.mdp, TeacherKind::worst, 5, rng);
    const auto g = build_grand_teacher_offline(d.mdp, model, rng);
    CHECK(g.teacher.policy == model.teachers[0].advise);
    for (std::size_t q : g.teacher.queries_used) CHECK(q == d.mdp.num_states());
    for (const auto& t : model.teachers) CHECK(t.spent <= t.budget);
  }
  SUBCASE("too little budget leaves a state without a vote") {
    const auto d = build_combination_lock(5);
    Rng rng(3);
    auto model = make_teachers(d.mdp, TeacherKind::optimal, 3, rng, 2);
    CHECK_THROWS_AS(build_grand_teacher_offline(d.mdp, model, rng), std::runtime_error);
  }
  SUBCASE("step cap") {
    const auto d = build_combination_lock(20);
    Rng rng(3);
    auto model = make_teachers(d.mdp, TeacherKind::optimal, 1, rng);
    CHECK_THROWS_AS(build_grand_teacher_offline(d.mdp, model, rng, 0, 10), std::runtime_error);
  }
}

TEST_CASE("online grand teacher") {
  const auto d = build_grid_world();
  Rng rng(4);
  const auto model = make_teachers(d.mdp, TeacherKind::random, 7, rng);

  OnlineGrandTeacher online(model, d.mdp.num_states());
  const auto first = online.advise(10);
  CHECK(online.advise(10) == first);
  for (std::size_t q : online.queries_used()) CHECK(q == 1);

  SUBCASE("matches the offline vote") {
    AdviceModel offline_model = model;
    Rng explore(5);
    const auto offline = build_grand_teacher_offline(d.mdp, offline_model, explore, d.start);
    OnlineGrandTeacher lazy(model, d.mdp.num_states());
    for (State s = 0; s < d.mdp.num_states(); ++s) CHECK(lazy.advise(s) == offline.teacher.policy(s));
    CHECK(lazy.snapshot(DeterministicPolicy{}).policy == offline.teacher.policy);
    CHECK(lazy.queries_used() == offline.teacher.queries_used);
  }
  SUBCASE("no budget gives no advice") {
    auto broke = model;
    for (auto& t : broke.teachers) t.budget = 0;
    OnlineGrandTeacher none(broke, d.mdp.num_states());
    CHECK_FALSE(none.advise(0).has_value());
    const DeterministicPolicy fallback{std::vector<Action>(d.mdp.num_states(), 2)};
    CHECK(none.snapshot(fallback).policy == fallback);
  }
}

TEST_CASE("teacher kinds") {
  const auto d = build_combination_lock(5);
  Rng rng(6);
  const auto opt = make_optimal_teacher(d.mdp);
  CHECK(opt.advise.action_of == std::vector<Action>(6, 0));
  CHECK(opt.budget == 6);
  const auto worst = make_worst_teacher(d.mdp);
  CHECK(worst.advise.action_of == std::vector<Action>{1, 1, 1, 1, 1, 0});

  Rng a(9), b(9);
  CHECK(make_random_teacher(d.mdp, a).advise == make_random_teacher(d.mdp, b).advise);
  const auto randoms = make_teachers(d.mdp, TeacherKind::random, 10, rng, 3);
  CHECK(randoms.size() == 10);
  CHECK(randoms.budgets() == std::vector<std::size_t>(10, 3));
  bool varied = false;
  for (const auto& t : randoms.teachers) varied |= !(t.advise == randoms.teachers[0].advise);
  CHECK(varied);

  CHECK(parse_teacher_kind("worst") == TeacherKind::worst);
  CHECK(to_string(TeacherKind::random) == "random");
  CHECK_THROWS_AS(parse_teacher_kind("best"), std::invalid_argument);
}

TEST_CASE("mixing") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    CHECK(mixed_action(1.0, Action{3}, 1, rng).action == 3);
    CHECK(mixed_action(0.0, Action{3}, 1, rng).action == 1);
  }
  CHECK(mixed_action(1.0, std::nullopt, 1, rng).action == 1);
  CHECK_FALSE(mixed_action(1.0, std::nullopt, 1, rng).teacher_fired);

  Rng untouched(8), probe(8);
  mixed_action(0.0, Action{0}, 1, probe);
  mixed_action(1.0, Action{0}, 1, probe);
  CHECK(probe() == untouched());

  int fired = 0;
  for (int i = 0; i < 10'000; ++i) fired += mixed_action(0.5, Action{0}, 1, rng).teacher_fired;
  CHECK(std::abs(fired / 10'000.0 - 0.5) <= 0.02);

  CHECK_THROWS_AS(mixed_action(1.5, Action{0}, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(mixed_action(-0.1, Action{0}, 1, rng), std::invalid_argument);

  const auto sched = MixSchedule::geometric(0.5, 10);
  REQUIRE(sched.betas.size() == 10);
  CHECK(sched.betas[0] == 0.5);
  CHECK(sched.betas[9] == doctest::Approx(std::pow(0.5, 10)));
  const MixSchedule out_of_range{{0.2, 1.2}};
  CHECK_THROWS_AS(out_of_range.check(), std::invalid_argument);
}

TEST_CASE("advice loop") {
  const auto d = build_combination_lock(5);
  AdviceRunOptions options;
  options.schedule = MixSchedule::geometric(0.5, 4);
  options.steps_per_iter = 150;

  SUBCASE("zero betas reproduce plain REGAL.C") {
    AdviceRunOptions zero = options;
    zero.schedule = MixSchedule::constant(0.0, 4);
    Rng r1(21), r2(21);
    const auto teacher = make_optimal_teacher(d.mdp);
    const auto mixed = multi_teacher_advice(
        d.mdp, [&](State s) { return std::optional<Action>(teacher.advise(s)); }, zero, r1);
    const auto plain = regal_c_run(d.mdp, options, r2);
    CHECK(mixed.trace.rewards == plain.trace.rewards);
    CHECK(mixed.trace.states == plain.trace.states);
    CHECK(mixed.final_policy == plain.final_policy);
  }
  SUBCASE("beta one executes only teacher actions") {
    AdviceRunOptions one = options;
    one.schedule = MixSchedule::constant(1.0, 4);
    Rng rng(22);
    const auto worst = make_worst_teacher(d.mdp);
    const auto run = multi_teacher_advice(
        d.mdp, [&](State s) { return std::optional<Action>(worst.advise(s)); }, one, rng);
    for (std::size_t t = 0; t < run.trace.size(); ++t) {
      CHECK(run.trace.fired_by_teacher[t] == 1);
      CHECK(run.trace.actions[t] == worst.advise(run.trace.states[t]));
    }
  }
  SUBCASE("bookkeeping") {
    Rng rng(23);
    const auto run = regal_c_run(d.mdp, options, rng);
    CHECK(run.trace.size() == 600);
    CHECK(run.iterations.size() == 4);
    CHECK(run.trace.iteration_starts == std::vector<std::size_t>{0, 150, 300, 450});
    CHECK(run.counts.total_steps() == 600);
    CHECK(run.counts.num_iterations() == 4);
    for (std::size_t t = 0; t + 1 < run.trace.size(); ++t)
      CHECK(d.mdp.prob(run.trace.states[t], run.trace.actions[t], run.trace.states[t + 1]) > 0.0);
  }
  SUBCASE("determinism") {
    Rng a(24), b(24);
    OnlineGrandTeacher ga(make_teachers(d.mdp, TeacherKind::optimal, 3, a), d.mdp.num_states());
    OnlineGrandTeacher gb(make_teachers(d.mdp, TeacherKind::optimal, 3, b), d.mdp.num_states());
    const auto ra = multi_teacher_advice(d.mdp, [&](State s) { return ga.advise(s); }, options, a);
    const auto rb = multi_teacher_advice(d.mdp, [&](State s) { return gb.advise(s); }, options, b);
    CHECK(ra.trace.rewards == rb.trace.rewards);
    CHECK(ra.trace.fired_by_teacher == rb.trace.fired_by_teacher);
    CHECK(ra.final_policy == rb.final_policy);
  }
  SUBCASE("errors") {
    Rng rng(1);
    AdviceRunOptions bad = options;
    bad.schedule.betas.clear();
    CHECK_THROWS_AS(regal_c_run(d.mdp, bad, rng), std::invalid_argument);
    bad = options;
    bad.steps_per_iter = 0;
    CHECK_THROWS_AS(regal_c_run(d.mdp, bad, rng), std::invalid_argument);
  }
}

TEST_CASE("grid world with optimal teachers") {
  const auto d = build_grid_world();
  const auto exact = relative_value_iteration(d.mdp);
  Rng rng(30);
  OnlineGrandTeacher grand(make_teachers(d.mdp, TeacherKind::optimal, 10, rng), d.mdp.num_states());
  AdviceRunOptions options;
  options.start = d.start;
  const auto run = multi_teacher_advice(d.mdp, [&](State s) { return grand.advise(s); }, options, rng);
  const double g = evaluate_policy_average_reward(d.mdp, run.final_policy, 1e-10, d.start);
  CHECK(std::abs(g - exact.gain_bias.gain) <= 0.05);
}

TEST_CASE("best-teacher baseline") {
  const auto d = build_combination_lock(5);
  Rng rng(40);
  SUBCASE("picks the optimal teacher out of a mixed set") {
    AdviceModel model = make_teachers(d.mdp, TeacherKind::random, 4, rng);
    model.teachers.insert(model.teachers.begin() + 2, make_optimal_teacher(d.mdp));
    const auto pick = best_teacher_baseline(d.mdp, model, 100'000, 0, rng);
    CHECK(pick.policy.action_of == std::vector<Action>(6, 0));
  }
  SUBCASE("identical teachers: index 0") {
    const auto pick = best_teacher_baseline(d.mdp, make_teachers(d.mdp, TeacherKind::worst, 4, rng), 1000, 0, rng);
    CHECK(pick.index == 0);
  }
  SUBCASE("all-bad set never learns") {
    const auto pick = best_teacher_baseline(d.mdp, make_teachers(d.mdp, TeacherKind::worst, 4, rng), 1000, 0, rng);
    CHECK(evaluate_policy_average_reward(d.mdp, pick.policy) == doctest::Approx(-1.0));
    Rng r2(41);
    AdviceRunOptions options;
    const auto learned = regal_c_run(d.mdp, options, r2);
    CHECK(evaluate_policy_average_reward(d.mdp, learned.final_policy) > -1.0);
  }
}
