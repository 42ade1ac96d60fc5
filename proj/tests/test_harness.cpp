#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mtadvice/harness.hpp"

using namespace mtadvice;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.iterations = 3;
  c.steps_per_iter = 50;
  c.trials = 2;
  c.teachers = 3;
  c.seed = 11;
  c.smoothing_window = 20;
  return c;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Balanced start/end tags, ignoring the prolog and self-closing elements.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> open;
  std::size_t pos = 0;
  bool saw_root = false;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (open.empty() || open.back() != name) return false;
      open.pop_back();
      continue;
    }
    if (open.empty() && saw_root) return false;
    saw_root = true;
    if (tag.back() == '/') continue;
    open.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return saw_root && open.empty();
}

}  // namespace

TEST_CASE("config") {
  auto c = small_config();
  c.teacher = TeacherKind::worst;
  c.algorithm = Algorithm::best_teacher_baseline;
  c.grand_teacher = Construction::offline;
  c.span_ceiling = 12.5;
  const auto back = config_from_json(Json::parse(config_to_json(c).dump()));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.label() == "best-teacher-baseline-worst");
  CHECK(ExperimentConfig{}.label() == "ours-optimal");

  ExperimentConfig defaults;
  CHECK(defaults.teachers == 10);
  CHECK(defaults.iterations == 10);
  CHECK(defaults.steps_per_iter == 200);
  CHECK(defaults.beta_base == 0.5);
  CHECK(defaults.delta == 0.8);
  CHECK(defaults.span_ceiling == 1000.0);
  CHECK(defaults.trials == 10);

  const auto partial = config_from_json(Json{{"trials", 4}}, c);
  CHECK(partial.trials == 4);
  CHECK(partial.span_ceiling == 12.5);
  CHECK_THROWS_AS(config_from_json(Json{{"trails", 4}}), std::invalid_argument);

  auto bad = small_config();
  bad.delta = 1.5;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  CHECK_THROWS_AS(parse_algorithm("ucrl"), std::invalid_argument);
  CHECK(parse_algorithm(to_string(Algorithm::regal_no_advice)) == Algorithm::regal_no_advice);
}

TEST_CASE("trailing mean") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(trailing_mean(v, 2) == std::vector<double>{1, 1.5, 2.5, 3.5});
  CHECK(trailing_mean(v, 10) == std::vector<double>{1, 1.5, 2, 2.5});
}

TEST_CASE("single trial aggregate equals the trial") {
  auto c = small_config();
  c.trials = 1;
  const auto r = run_experiment(c);
  REQUIRE(r.trials.size() == 1);
  CHECK(r.mean_reward == r.trials[0].trace.rewards);
  CHECK(r.mean_regret == r.trials[0].regret.regret);
  CHECK(r.mean_smoothed == r.trials[0].smoothed);
  CHECK(r.trials[0].seed == c.seed);
}

TEST_CASE("trial seeds and lengths") {
  const auto c = small_config();
  const auto r = run_experiment(c);
  REQUIRE(r.trials.size() == 2);
  CHECK(r.trials[1].seed == c.seed + 1);
  for (const auto& t : r.trials) {
    CHECK(t.trace.size() == c.total_steps());
    CHECK(t.smoothed.size() == c.total_steps());
    CHECK(t.regret.regret.size() == c.total_steps());
    CHECK(t.iterations.size() == c.iterations);
  }
  CHECK(r.final_window_means(10).size() == 2);
}

TEST_CASE("every algorithm runs on every domain") {
  for (const char* domain : {"combination-lock", "grid-world", "block-dude"}) {
    auto base = small_config();
    base.domain = domain;
    base.trials = 1;
    const auto prepared = prepare_domain(domain);
    for (const auto& c : six_settings(base)) {
      const auto r = run_experiment(c, prepared);
      CHECK(r.mean_reward.size() == c.total_steps());
    }
  }
}

TEST_CASE("optimal policy baseline rolls out the planner policy") {
  auto c = small_config();
  c.algorithm = Algorithm::optimal_policy;
  const auto r = run_experiment(c);
  for (const auto& t : r.trials) CHECK(t.final_policy_gain == doctest::Approx(r.optimal_gain));
}

TEST_CASE("csv and svg") {
  const auto c = small_config();
  const auto r = run_experiment(c);
  const std::string csv = results_csv(r);
  CHECK(csv == results_csv(run_experiment(c)));
  const auto rows = lines_of(csv);
  CHECK(rows.size() == c.total_steps() + 1);
  CHECK(rows[0] == "step,mean_reward,reward_trial_0,reward_trial_1,cumulative_regret");
  CHECK(rows[1].rfind("0,", 0) == 0);

  const std::vector<ExperimentResult> all{r};
  const std::string svg = results_svg(all);
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find(c.label()) != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "mtadvice_harness_test";
  std::filesystem::create_directories(dir);
  emit_csv(r, dir / "run.csv");
  const auto trials = read_trial_rewards_csv(dir / "run.csv");
  REQUIRE(trials.size() == 2);
  CHECK(trials[0].size() == c.total_steps());
  for (std::size_t t = 0; t < trials[1].size(); ++t) CHECK(trials[1][t] == r.trials[1].trace.rewards[t]);
  emit_svg(all, dir / "curves.svg");
  CHECK(std::filesystem::file_size(dir / "curves.svg") == svg.size());
  CHECK_THROWS(emit_csv(r, dir / "missing" / "x" / "run.csv"));
  std::filesystem::remove_all(dir);

  const auto summary = summary_json(r);
  CHECK(summary["smoothing_window"] == c.smoothing_window);
}
