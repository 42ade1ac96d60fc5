#include "mtadvice/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace mtadvice {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "ours") return Algorithm::ours;
  if (name == "regal-no-advice") return Algorithm::regal_no_advice;
  if (name == "optimal-policy") return Algorithm::optimal_policy;
  if (name == "best-teacher-baseline") return Algorithm::best_teacher_baseline;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::ours: return "ours";
    case Algorithm::regal_no_advice: return "regal-no-advice";
    case Algorithm::optimal_policy: return "optimal-policy";
    case Algorithm::best_teacher_baseline: return "best-teacher-baseline";
  }
  return "?";
}

std::string ExperimentConfig::label() const {
  if (algorithm == Algorithm::ours || algorithm == Algorithm::best_teacher_baseline)
    return to_string(algorithm) + "-" + to_string(teacher);
  return to_string(algorithm);
}

void ExperimentConfig::check() const {
  if (lock_n < 1) throw std::invalid_argument("config: lock_n must be >= 1");
  if (teachers < 1) throw std::invalid_argument("config: at least one teacher required");
  if (iterations < 1) throw std::invalid_argument("config: iterations must be >= 1");
  if (steps_per_iter < 1) throw std::invalid_argument("config: steps_per_iter must be >= 1");
  if (!(beta_base >= 0.0 && beta_base <= 1.0)) throw std::invalid_argument("config: beta_base must lie in [0, 1]");
  if (!(span_ceiling > 0.0)) throw std::invalid_argument("config: H must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("config: delta must lie in (0, 1)");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (smoothing_window < 1) throw std::invalid_argument("config: smoothing window must be >= 1");
}

Json config_to_json(const ExperimentConfig& c) {
  return Json{{"domain", c.domain},
              {"lock_n", c.lock_n},
              {"algorithm", to_string(c.algorithm)},
              {"teacher", to_string(c.teacher)},
              {"grand_teacher", c.grand_teacher == Construction::online ? "online" : "offline"},
              {"teachers", c.teachers},
              {"iterations", c.iterations},
              {"steps_per_iter", c.steps_per_iter},
              {"beta_base", c.beta_base},
              {"H", c.span_ceiling},
              {"delta", c.delta},
              {"trials", c.trials},
              {"seed", c.seed},
              {"smoothing_window", c.smoothing_window}};
}

ExperimentConfig config_from_json(const Json& doc, ExperimentConfig c) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::vector<std::string> known = {"domain",   "lock_n",         "algorithm", "teacher", "grand_teacher",
                                                 "teachers", "iterations",     "steps_per_iter", "beta_base", "H",
                                                 "delta",    "trials",         "seed",      "smoothing_window"};
  for (const auto& [key, value] : doc.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config: unknown key '" + key + "'");
  try {
    c.domain = doc.value("domain", c.domain);
    c.lock_n = doc.value("lock_n", c.lock_n);
    if (doc.contains("algorithm")) c.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    if (doc.contains("teacher")) c.teacher = parse_teacher_kind(doc.at("teacher").get<std::string>());
    if (doc.contains("grand_teacher")) {
      const auto g = doc.at("grand_teacher").get<std::string>();
      if (g != "online" && g != "offline") throw std::invalid_argument("config: grand_teacher must be online or offline");
      c.grand_teacher = g == "online" ? Construction::online : Construction::offline;
    }
    c.teachers = doc.value("teachers", c.teachers);
    c.iterations = doc.value("iterations", c.iterations);
    c.steps_per_iter = doc.value("steps_per_iter", c.steps_per_iter);
    c.beta_base = doc.value("beta_base", c.beta_base);
    c.span_ceiling = doc.value("H", c.span_ceiling);
    c.delta = doc.value("delta", c.delta);
    c.trials = doc.value("trials", c.trials);
    c.seed = doc.value("seed", c.seed);
    c.smoothing_window = doc.value("smoothing_window", c.smoothing_window);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

PreparedDomain prepare_domain(const std::string& id, std::size_t lock_n) {
  PreparedDomain p{build_domain(id, lock_n), {}};
  p.optimal = relative_value_iteration(p.domain.mdp);
  return p;
}

std::vector<double> trailing_mean(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("trailing_mean: window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    sum += values[t];
    if (t >= window) sum -= values[t - window];
    out[t] = sum / static_cast<double>(std::min(t + 1, window));
  }
  return out;
}

namespace {

RewardTrace trace_from_rollout(const Rollout& r, bool teacher, std::uint64_t steps_per_iter) {
  RewardTrace trace;
  trace.rewards = r.rewards;
  trace.states.assign(r.states.begin(), r.states.end() - 1);
  trace.actions = r.actions;
  trace.student_actions = r.actions;
  trace.fired_by_teacher.assign(r.rewards.size(), teacher ? 1 : 0);
  for (std::size_t t = 0; t < r.rewards.size(); t += steps_per_iter) trace.iteration_starts.push_back(t);
  return trace;
}

TrialResult run_trial(const ExperimentConfig& c, const PreparedDomain& prepared, std::uint64_t seed) {
  const TabularMDP& mdp = prepared.domain.mdp;
  const State start = prepared.domain.start;
  TrialResult trial;
  trial.seed = seed;
  Rng rng(seed);
  // Teachers come from their own stream so every setting sees the same
  // learner random numbers for a given seed.
  Rng teacher_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  AdviceRunOptions opt;
  opt.schedule = MixSchedule::geometric(c.beta_base, c.iterations);
  opt.steps_per_iter = c.steps_per_iter;
  opt.regal.span_ceiling = c.span_ceiling;
  opt.regal.delta = c.delta;
  opt.start = start;

  switch (c.algorithm) {
    case Algorithm::ours: {
      AdviceModel model = make_teachers(mdp, c.teacher, c.teachers, teacher_rng);
      AdviceRun run;
      if (c.grand_teacher == Construction::offline) {
        const GrandTeacher g = build_grand_teacher_offline(mdp, model, teacher_rng, start).teacher;
        run = multi_teacher_advice(mdp, [&g](State s) -> std::optional<Action> { return g.policy(s); }, opt, rng);
      } else {
        auto g = std::make_shared<OnlineGrandTeacher>(std::move(model), mdp.num_states());
        run = multi_teacher_advice(mdp, [g](State s) { return g->advise(s); }, opt, rng);
      }
      trial.trace = std::move(run.trace);
      trial.final_policy = std::move(run.final_policy);
      trial.iterations = std::move(run.iterations);
      trial.counts = std::move(run.counts);
      break;
    }
    case Algorithm::regal_no_advice: {
      AdviceRun run = regal_c_run(mdp, opt, rng);
      trial.trace = std::move(run.trace);
      trial.final_policy = std::move(run.final_policy);
      trial.iterations = std::move(run.iterations);
      trial.counts = std::move(run.counts);
      break;
    }
    case Algorithm::optimal_policy: {
      trial.final_policy = prepared.optimal.policy;
      trial.trace = trace_from_rollout(rollout(mdp, trial.final_policy, start, c.total_steps(), rng()), false,
                                       c.steps_per_iter);
      break;
    }
    case Algorithm::best_teacher_baseline: {
      const AdviceModel model = make_teachers(mdp, c.teacher, c.teachers, teacher_rng);
      trial.final_policy = best_teacher_baseline(mdp, model, c.steps_per_iter, start, rng).policy;
      trial.trace = trace_from_rollout(rollout(mdp, trial.final_policy, start, c.total_steps(), rng()), true,
                                       c.steps_per_iter);
      break;
    }
  }
  trial.final_policy_gain = evaluate_policy_average_reward(mdp, trial.final_policy, 1e-10, start);
  trial.smoothed = trailing_mean(trial.trace.rewards, c.smoothing_window);
  trial.regret = cumulative_regret(trial.trace.rewards, prepared.optimal.gain_bias.gain);
  return trial;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::vector<double> ExperimentResult::final_window_means(std::size_t window) const {
  std::vector<double> out;
  for (const auto& t : trials) {
    const auto& r = t.trace.rewards;
    const std::size_t w = std::min(window, r.size());
    double sum = 0.0;
    for (std::size_t i = r.size() - w; i < r.size(); ++i) sum += r[i];
    out.push_back(w == 0 ? 0.0 : sum / static_cast<double>(w));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, prepare_domain(config.domain, config.lock_n));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedDomain& prepared) {
  config.check();
  ExperimentResult result;
  result.config = config;
  result.optimal_gain = prepared.optimal.gain_bias.gain;
  for (std::size_t i = 0; i < config.trials; ++i) {
    try {
      result.trials.push_back(run_trial(config, prepared, config.seed + i));
    } catch (const std::exception& e) {
      throw std::runtime_error("trial " + std::to_string(i) + " (seed " + std::to_string(config.seed + i) +
                               ") of " + config.label() + " failed: " + e.what());
    }
  }
  const std::size_t T = config.total_steps();
  const double k = static_cast<double>(config.trials);
  result.mean_reward.assign(T, 0.0);
  result.mean_smoothed.assign(T, 0.0);
  result.mean_regret.assign(T, 0.0);
  for (const auto& t : result.trials)
    for (std::size_t s = 0; s < T; ++s) {
      result.mean_reward[s] += t.trace.rewards[s] / k;
      result.mean_smoothed[s] += t.smoothed[s] / k;
      result.mean_regret[s] += t.regret.regret[s] / k;
    }
  return result;
}

std::vector<ExperimentConfig> six_settings(const ExperimentConfig& base) {
  std::vector<ExperimentConfig> out;
  for (TeacherKind kind : {TeacherKind::optimal, TeacherKind::worst, TeacherKind::random}) {
    ExperimentConfig c = base;
    c.algorithm = Algorithm::ours;
    c.teacher = kind;
    out.push_back(c);
  }
  for (Algorithm a : {Algorithm::regal_no_advice, Algorithm::optimal_policy, Algorithm::best_teacher_baseline}) {
    ExperimentConfig c = base;
    c.algorithm = a;
    out.push_back(c);
  }
  return out;
}

std::string results_csv(const ExperimentResult& result) {
  std::string out = "step,mean_reward";
  for (std::size_t i = 0; i < result.trials.size(); ++i) out += ",reward_trial_" + std::to_string(i);
  out += ",cumulative_regret\n";
  for (std::size_t s = 0; s < result.mean_reward.size(); ++s) {
    out += std::to_string(s) + "," + fmt(result.mean_reward[s]);
    for (const auto& t : result.trials) out += "," + fmt(t.trace.rewards[s]);
    out += "," + fmt(result.mean_regret[s]) + "\n";
  }
  return out;
}

std::string results_svg(std::span<const ExperimentResult> results) {
  if (results.empty()) throw std::invalid_argument("results_svg: nothing to plot");
  constexpr double width = 800, height = 480, left = 70, right = 220, top = 30, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  std::size_t steps = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : results) {
    steps = std::max(steps, r.mean_smoothed.size());
    for (double v : r.mean_smoothed) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (steps == 0) throw std::invalid_argument("results_svg: empty curves");
  if (hi - lo < 1e-9) {
    lo -= 0.5;
    hi += 0.5;
  }
  auto x_of = [&](std::size_t s) { return left + plot_w * static_cast<double>(s) / static_cast<double>(std::max<std::size_t>(steps - 1, 1)); };
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  static const char* colours[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
      << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
      << "<g stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n"
      << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    svg << "<text x=\"" << left - 8 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << fmt(std::round(v * 1000) / 1000)
        << "</text>\n";
    const std::size_t s = (steps - 1) * static_cast<std::size_t>(i) / 4;
    svg << "<text x=\"" << x_of(s) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">" << s << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">step</text>\n"
      << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + plot_h / 2 << ")\">average reward (trailing " << results.front().config.smoothing_window
      << " steps)</text>\n</g>\n";
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& curve = results[k].mean_smoothed;
    const char* colour = colours[k % std::size(colours)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t stride = std::max<std::size_t>(1, curve.size() / 1000);
    for (std::size_t s = 0; s < curve.size(); s += stride) svg << fmt(x_of(s)) << ',' << fmt(y_of(curve[s])) << ' ';
    svg << fmt(x_of(curve.size() - 1)) << ',' << fmt(y_of(curve.back())) << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << left + plot_w + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 36 << "\" y2=\"" << ly
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << results[k].config.label() << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

Json summary_json(const ExperimentResult& result) {
  Json trials = Json::array();
  const auto windows = result.final_window_means(2 * result.config.steps_per_iter);
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    trials.push_back({{"seed", t.seed},
                      {"final_policy", policy_to_json(t.final_policy)},
                      {"final_policy_gain", t.final_policy_gain},
                      {"final_window_mean_reward", windows[i]},
                      {"cumulative_regret", t.regret.regret.empty() ? 0.0 : t.regret.regret.back()}});
  }
  return Json{{"config", config_to_json(result.config)},
              {"label", result.config.label()},
              {"optimal_gain", result.optimal_gain},
              {"smoothing_window", result.config.smoothing_window},
              {"final_window", 2 * result.config.steps_per_iter},
              {"trials", trials}};
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
  if (result.trials.empty()) throw std::invalid_argument("emit_csv: no trials");
  write_text_file(path, results_csv(result));
}

void emit_svg(std::span<const ExperimentResult> results, const std::filesystem::path& path) {
  write_text_file(path, results_svg(results));
}

std::vector<std::vector<double>> read_trial_rewards_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::size_t> columns;
  {
    std::stringstream header(line);
    std::string cell;
    for (std::size_t i = 0; std::getline(header, cell, ','); ++i)
      if (cell.rfind("reward_trial_", 0) == 0) columns.push_back(i);
  }
  if (columns.empty()) throw std::runtime_error(path.string() + ": no reward_trial_ columns");
  std::vector<std::vector<double>> trials(columns.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] >= cells.size()) throw std::runtime_error(path.string() + ": short row " + std::to_string(row));
      try {
        trials[k].push_back(std::stod(cells[columns[k]]));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": bad number on row " + std::to_string(row));
      }
    }
  }
  return trials;
}

}  // namespace mtadvice
