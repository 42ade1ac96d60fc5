#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mtadvice/analysis.hpp"
#include "mtadvice/harness.hpp"
#include "mtadvice/io.hpp"

namespace fs = std::filesystem;
using namespace mtadvice;

namespace {

struct RunFlags {
  std::string config_file;
  std::optional<std::string> domain, algo, teacher, grand_teacher;
  std::optional<std::size_t> lock_n, trials, iters, teachers;
  std::optional<std::uint64_t> seed, steps_per_iter;
  std::optional<double> beta_base, H, delta;
  std::string out = "results";
  bool suite = false;
};

ExperimentConfig resolve(const RunFlags& f) {
  ExperimentConfig c;
  if (!f.config_file.empty()) c = config_from_json(read_json_file(f.config_file));
  if (f.domain) c.domain = *f.domain;
  if (f.algo) c.algorithm = parse_algorithm(*f.algo);
  if (f.teacher) c.teacher = parse_teacher_kind(*f.teacher);
  if (f.grand_teacher) c.grand_teacher = *f.grand_teacher == "offline" ? Construction::offline : Construction::online;
  if (f.lock_n) c.lock_n = *f.lock_n;
  if (f.trials) c.trials = *f.trials;
  if (f.iters) c.iterations = *f.iters;
  if (f.teachers) c.teachers = *f.teachers;
  if (f.seed) c.seed = *f.seed;
  if (f.steps_per_iter) c.steps_per_iter = *f.steps_per_iter;
  if (f.beta_base) c.beta_base = *f.beta_base;
  if (f.H) c.span_ceiling = *f.H;
  if (f.delta) c.delta = *f.delta;
  c.check();
  return c;
}

int run_command(const RunFlags& flags) {
  const ExperimentConfig base = resolve(flags);
  const fs::path out = flags.out;
  fs::create_directories(out);
  const PreparedDomain prepared = prepare_domain(base.domain, base.lock_n);
  std::vector<ExperimentConfig> configs = flags.suite ? six_settings(base) : std::vector<ExperimentConfig>{base};
  std::vector<ExperimentResult> results;
  for (const auto& c : configs) {
    results.push_back(run_experiment(c, prepared));
    const auto& r = results.back();
    emit_csv(r, out / (c.label() + ".csv"));
    write_text_file(out / (c.label() + ".json"), summary_json(r).dump(2) + "\n");
    const auto windows = r.final_window_means(2 * c.steps_per_iter);
    double mean = 0.0;
    for (double w : windows) mean += w / static_cast<double>(windows.size());
    std::cout << c.label() << ": final-window mean reward " << mean << ", mean cumulative regret "
              << r.mean_regret.back() << " (optimal gain " << r.optimal_gain << ")\n";
  }
  write_text_file(out / "config.json", config_to_json(base).dump(2) + "\n");
  emit_svg(results, out / "curves.svg");
  return 0;
}

int build_domain_command(const std::string& id, std::size_t lock_n, const std::string& spec_file,
                         const std::string& out, bool ascii) {
  Domain d = spec_file.empty() ? build_domain(id, lock_n) : build_block_dude(block_dude_spec_from_json(read_json_file(spec_file)));
  if (ascii) {
    if (d.name != "grid-world") throw std::invalid_argument("--ascii is only available for grid-world");
    std::vector<char> marks(d.mdp.num_states(), '.');
    marks[d.start] = 'S';
    marks[*d.goal] = 'G';
    for (const auto& line : render_grid(GridWorldSpec::four_rooms(), marks)) std::cout << line << '\n';
    return 0;
  }
  const std::string text = mdp_to_json(d.mdp).dump() + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_text_file(out, text);
  return 0;
}

struct AnalyzeFlags {
  std::string source_run, transfer_run, target_run, out;
  double gain = 0.0;
  double delta = 0.1;
  double r_max = 1.0;
};

int analyze_command(const AnalyzeFlags& f) {
  auto totals = [](const std::string& path, std::size_t& horizon) {
    const auto trials = read_trial_rewards_csv(path);
    std::vector<double> out;
    horizon = trials.front().size();
    for (const auto& t : trials) {
      double sum = 0.0;
      for (double r : t) sum += r;
      out.push_back(sum);
    }
    return out;
  };
  std::size_t hs = 0, hx = 0, ht = 0;
  const auto source = totals(f.source_run, hs);
  const auto transfer = totals(f.transfer_run, hx);
  const auto target = totals(f.target_run, ht);
  if (hs != hx || hs != ht) throw std::invalid_argument("analyze: the three runs must have the same length");
  const double r_max = f.r_max * static_cast<double>(hs);

  TransferInputs in;
  in.gain = f.gain;
  in.horizon = hs;
  in.source = empirical_bernstein(source, f.delta, r_max);
  in.target = empirical_bernstein(target, f.delta, r_max);
  const BernsteinInterval moved = empirical_bernstein(transfer, f.delta, r_max);
  in.gap = transfer_gap({in.source.center, hs}, {moved.center, hx});
  in.source_expected = in.source.center;
  in.target_expected = in.target.center;
  const TransferReport rep = negative_transfer_check(in);

  auto interval = [](const BernsteinInterval& b) {
    return Json{{"center", b.center}, {"half_width", b.half_width}, {"n", b.n}, {"sigma", b.sigma}, {"r_max", b.r_max}};
  };
  Json doc{{"horizon", hs},
           {"gain", f.gain},
           {"delta", f.delta},
           {"source_return", interval(in.source)},
           {"transferred_return", interval(moved)},
           {"target_return", interval(in.target)},
           {"gap", rep.gap},
           {"gap_condition", rep.gap_condition},
           {"rho_hat", rep.rho_hat},
           {"rho_low", rep.low},
           {"rho_high", rep.high},
           {"degenerate", rep.degenerate},
           {"negative_transfer", rep.negative_transfer}};
  const std::string text = doc.dump(2) + "\n";
  if (f.out.empty())
    std::cout << text;
  else
    write_text_file(f.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-teacher policy advice for average-reward tabular MDPs"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run seeded trials and write CSV, JSON and SVG results");
  run_cmd->add_option("--config", run.config_file, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  run_cmd->add_option("--domain", run.domain, "grid-world | combination-lock | block-dude");
  run_cmd->add_option("--algo", run.algo, "ours | regal-no-advice | optimal-policy | best-teacher-baseline");
  run_cmd->add_option("--teacher", run.teacher, "optimal | worst | random");
  run_cmd->add_option("--grand-teacher", run.grand_teacher, "online | offline")->check(CLI::IsMember({"online", "offline"}));
  run_cmd->add_option("--lock-n", run.lock_n, "Combination Lock size n");
  run_cmd->add_option("--teachers", run.teachers, "Number of teachers k");
  run_cmd->add_option("--seed", run.seed, "Base seed; trial i uses seed + i");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--trials", run.trials, "Number of trials");
  run_cmd->add_option("--steps-per-iter", run.steps_per_iter, "Steps per iteration");
  run_cmd->add_option("--iters", run.iters, "Number of iterations");
  run_cmd->add_option("--beta-base", run.beta_base, "beta_i = base^i");
  run_cmd->add_option("--H", run.H, "Span ceiling");
  run_cmd->add_option("--delta", run.delta, "Confidence parameter");
  run_cmd->add_flag("--suite", run.suite, "Run all six settings");

  std::string domain_id = "combination-lock", spec_file, domain_out;
  std::size_t lock_n = 5;
  bool ascii = false;
  auto* build_cmd = app.add_subcommand("build-domain", "Write a benchmark MDP as JSON");
  build_cmd->add_option("--domain", domain_id, "grid-world | combination-lock | block-dude");
  build_cmd->add_option("--lock-n", lock_n, "Combination Lock size n");
  build_cmd->add_option("--block-dude-spec", spec_file, "Block Dude level JSON")->check(CLI::ExistingFile);
  build_cmd->add_option("--out", domain_out, "Output file (default: stdout)");
  build_cmd->add_flag("--ascii", ascii, "Print the grid map instead of JSON");

  AnalyzeFlags analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Negative-transfer report from three reward CSVs");
  analyze_cmd->add_option("--source-run", analyze.source_run, "Source policy on the source task")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--transfer-run", analyze.transfer_run, "Source policy on the target task")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--target-run", analyze.target_run, "Target policy on the target task")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--gain", analyze.gain, "Optimal gain of the target task")->required();
  analyze_cmd->add_option("--delta", analyze.delta, "Confidence parameter");
  analyze_cmd->add_option("--r-max", analyze.r_max, "Largest absolute one-step reward");
  analyze_cmd->add_option("--out", analyze.out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run_command(run);
    if (*build_cmd) return build_domain_command(domain_id, lock_n, spec_file, domain_out, ascii);
    if (*analyze_cmd) return analyze_command(analyze);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
