#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mtadvice/domains.hpp"
#include "mtadvice/estimation.hpp"

using namespace mtadvice;

namespace {

TabularMDP three_state_model() {
  return TabularMDP::from_dense({{{0.2, 0.5, 0.3}, {1, 0, 0}}, {{0, 0.6, 0.4}, {0, 0, 1}}, {{0.5, 0.5, 0}, {0.1, 0.1, 0.8}}},
                                {{0, 1}, {0.5, 0}, {1, 0.2}});
}

TransitionCounts sample_counts(const TabularMDP& mdp, std::size_t per_pair, Rng& rng) {
  TransitionCounts counts(mdp.layout());
  for (State s = 0; s < mdp.num_states(); ++s)
    for (Action a = 0; a < mdp.num_actions(s); ++a)
      for (std::size_t k = 0; k < per_pair; ++k) counts.record(s, a, step(mdp, s, a, rng).first);
  return counts;
}

}  // namespace

TEST_CASE("record") {
  TransitionCounts c(StateActionLayout({2, 2, 2}));
  c.record(0, 1, 2);
  CHECK(c.count(0, 1, 2) == 1);
  CHECK(c.pair_count(0, 1) == 1);
  c.record(0, 1, 2);
  CHECK(c.count(0, 1, 2) == 2);
  CHECK(c.pair_count(0, 1) == 2);
  CHECK(c.total_steps() == 2);
  CHECK_THROWS_AS(c.record(3, 0, 0), std::out_of_range);
  CHECK_THROWS_AS(c.record(0, 2, 0), std::out_of_range);
  CHECK_THROWS_AS(c.record(0, 0, 3), std::out_of_range);
}

TEST_CASE("empirical row converges to the generating row") {
  const auto mdp = three_state_model();
  Rng rng(11);
  TransitionCounts c(mdp.layout());
  for (int i = 0; i < 1000; ++i) c.record(0, 0, step(mdp, 0, 0, rng).first);
  double l1 = 0.0;
  for (State next = 0; next < 3; ++next) l1 += std::abs(empirical_transition(c, 0, 0, next) - mdp.prob(0, 0, next));
  CHECK(l1 <= 0.05);
}

TEST_CASE("empirical transition") {
  TransitionCounts c(StateActionLayout({1, 1}));
  for (int i = 0; i < 3; ++i) c.record(0, 0, 1);
  for (int i = 0; i < 7; ++i) c.record(0, 0, 0);
  CHECK(empirical_transition(c, 0, 0, 1) == doctest::Approx(0.3));
  CHECK(empirical_transition(c, 1, 0, 0) == 0.0);
  CHECK(empirical_transition(c, 1, 0, 1) == 0.0);
  for (int i = 0; i < 7; ++i) c.record(1, 0, 1);
  CHECK(empirical_transition(c, 1, 0, 1) == 1.0);
}

TEST_CASE("confidence radius") {
  const long double oracle = std::sqrt(24.0L * std::log(8.0L));
  CHECK(std::abs(confidence_radius(2, 2, 1, 1, 0.5) - static_cast<double>(oracle)) < 1e-12);
  CHECK(confidence_radius(2, 2, 1, 1, 0.5) == doctest::Approx(7.0640).epsilon(1e-4));
  CHECK(confidence_radius(5, 3, 40, 100, 0.1) / confidence_radius(5, 3, 20, 100, 0.1) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(confidence_radius(5, 3, 0, 100, 0.1) == confidence_radius(5, 3, 1, 100, 0.1));
  CHECK_THROWS_AS(confidence_radius(2, 2, 1, 0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(confidence_radius(2, 2, 1, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(confidence_radius(2, 2, 1, 1, 1.0), std::invalid_argument);

  double prev = confidence_radius(4, 2, 1, 50, 0.2);
  for (std::uint64_t n = 2; n < 100; ++n) {
    const double r = confidence_radius(4, 2, n, 50, 0.2);
    CHECK(r <= prev);
    prev = r;
  }
  CHECK(confidence_radius(4, 2, 10, 60, 0.2) >= confidence_radius(4, 2, 10, 50, 0.2));
  CHECK(confidence_radius(4, 2, 10, 50, 0.1) >= confidence_radius(4, 2, 10, 50, 0.2));

  TransitionCounts c(StateActionLayout({2, 1}));
  c.record(0, 1, 1);
  CHECK(confidence_radius(c, 0, 1, 10, 0.5) == confidence_radius(2, 2, 1, 10, 0.5));
}

TEST_CASE("counter consistency") {
  const auto d = build_combination_lock(4);
  Rng rng(5);
  TransitionCounts c(d.mdp.layout());
  State s = 0;
  for (int iter = 0; iter < 5; ++iter) {
    c.begin_iteration();
    for (int k = 0; k < 37; ++k) {
      const Action a = uniform_index(rng, d.mdp.num_actions(s));
      const State next = step(d.mdp, s, a, rng).first;
      c.record(s, a, next);
      s = next;
    }
  }
  std::uint64_t from_visits = 0;
  for (std::size_t i = 0; i < c.num_iterations(); ++i) {
    const auto v = c.visits_in_iteration(i);
    from_visits = std::accumulate(v.begin(), v.end(), from_visits);
  }
  CHECK(from_visits == c.total_steps());
  CHECK(c.total_steps() == 5 * 37);
  for (State x = 0; x < d.mdp.num_states(); ++x)
    for (Action a = 0; a < d.mdp.num_actions(x); ++a) {
      std::uint64_t sum = 0;
      for (State next = 0; next < d.mdp.num_states(); ++next) sum += c.count(x, a, next);
      CHECK(sum == c.pair_count(x, a));
    }

  const auto restored = TransitionCounts::from_triples(d.mdp.layout(), c.dense_triples());
  CHECK(restored.dense_triples() == c.dense_triples());
  CHECK(restored.total_steps() == c.total_steps());
}

TEST_CASE("confidence set") {
  const auto mdp = three_state_model();
  Rng rng(17);
  const auto counts = sample_counts(mdp, 50, rng);
  const auto cs = ConfidenceSet::build(counts, 300, 0.5);
  CHECK(cs.time() == 300);
  for (std::size_t p = 0; p < mdp.layout().num_pairs(); ++p) {
    double sum = 0.0;
    for (const auto& t : cs.empirical_row(p)) sum += t.prob;
    CHECK(sum == doctest::Approx(1.0));
    CHECK(cs.radius(p) > 0.0);
  }

  SUBCASE("empirical model is inside") {
    std::vector<std::vector<Transition>> rows;
    for (std::size_t p = 0; p < mdp.layout().num_pairs(); ++p)
      rows.emplace_back(cs.empirical_row(p).begin(), cs.empirical_row(p).end());
    const TabularMDP centre(mdp.layout(), rows, std::vector<double>(mdp.rewards().begin(), mdp.rewards().end()));
    CHECK(cs.contains(centre));
  }
  SUBCASE("row perturbed past its radius is outside") {
    const auto tight = ConfidenceSet::around(mdp, std::vector<double>(mdp.layout().num_pairs(), 0.1));
    CHECK(tight.contains(mdp));
    auto dense = mdp.dense_transitions();
    dense[1][0] = {0.0, 0.5, 0.5};  // L1 distance 0.2 from {0, 0.6, 0.4}
    CHECK_FALSE(tight.contains(TabularMDP::from_dense(dense, mdp.dense_rewards())));
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(cs.contains(build_combination_lock(2).mdp), std::invalid_argument);
  }
  SUBCASE("unvisited pairs keep an empty row") {
    TransitionCounts fresh(mdp.layout());
    const auto empty = ConfidenceSet::build(fresh, 1, 0.5);
    CHECK(empty.empirical_row(0).empty());
    CHECK(empty.contains(mdp));
  }
}

TEST_CASE("true model coverage") {
  const auto mdp = three_state_model();
  int covered = 0;
  for (int rep = 0; rep < 200; ++rep) {
    Rng rng(1000 + rep);
    const auto counts = sample_counts(mdp, 10'000 / mdp.layout().num_pairs(), rng);
    covered += ConfidenceSet::build(counts, counts.total_steps(), 0.1).contains(mdp);
  }
  CHECK(covered >= 180);
}
