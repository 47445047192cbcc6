// eipolab: train, compare, plot and sweep EIPO and baseline runs.
//
// Exit codes: 0 success, 1 usage or configuration error (or a failing
// selftest), 2 numeric failure during training.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "checks.hpp"
#include "eipolab/common.hpp"
#include "eipolab/config.hpp"
#include "eipolab/runner.hpp"

namespace {

using namespace eipolab;
namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::vector<std::string>& specs) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == s.size()) {
      throw UsageError("--pairs expects X:Y, got '" + s + "'");
    }
    out.emplace_back(s.substr(0, colon), s.substr(colon + 1));
  }
  return out;
}

int run_selftest(std::uint64_t seed) {
  struct Suite {
    const char* name;
    std::vector<checks::CheckResult> (*fn)(std::uint64_t);
  };
  const Suite suites[] = {
      {"algebraic identities", checks::algebraic_identities},
      {"oracle equivalence", checks::oracle_equivalence},
      {"gradient checks", checks::gradient_checks},
      {"degeneracy checks", checks::degeneracy_checks},
  };
  bool ok = true;
  for (const auto& suite : suites) {
    const auto results = suite.fn(seed);
    std::cout << "== " << suite.name << "\n";
    for (const auto& r : results) {
      std::cout << (r.passed ? "  PASS  " : "  FAIL  ") << r.name << ": " << r.detail << "\n";
    }
    ok = ok && checks::all_passed(results);
  }
  std::cout << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EIPO and intrinsic-reward baselines on gridworlds"};
  app.require_subcommand(1);

  // train
  std::string train_config;
  bool resume = false;
  int stop_after = -1;
  int jobs = 0;
  std::string train_output;
  auto* train = app.add_subcommand("train", "Train every seed of a run config");
  train->add_option("config", train_config, "Run config file")->required()->check(CLI::ExistingFile);
  train->add_flag("--resume", resume, "Continue each seed from its latest checkpoint");
  train->add_option("--stop-after", stop_after, "Checkpoint and stop after this many iterations")
      ->check(CLI::PositiveNumber);
  train->add_option("--jobs,-j", jobs, "Seeds trained in parallel (default EIPOLAB_JOBS or 1)")
      ->check(CLI::PositiveNumber);
  train->add_option("--output,-o", train_output,
                    "Run directory (default <output root>/<name>_<VARIANT>_<kind>)");

  // compare
  std::vector<std::string> compare_dirs;
  std::vector<std::string> pair_specs;
  bool allow_few = false;
  bool weak = false;
  int n_bootstrap = 10000;
  std::uint64_t compare_seed = 0;
  std::string compare_out = "comparison";
  auto* compare = app.add_subcommand("compare", "Probability of improvement between runs");
  compare->add_option("runs", compare_dirs, "Run or seed directories")->required()->check(CLI::ExistingDirectory);
  compare->add_option("--pairs", pair_specs, "Ordered pairs X:Y (default: every pair)")->delimiter(',');
  compare->add_flag("--allow-few-seeds", allow_few, "Compare algorithms with fewer than 5 seeds");
  compare->add_flag("--weak", weak, "Bootstrap P(X >= Y) instead of the strict variant");
  compare->add_option("--n-bootstrap", n_bootstrap, "Bootstrap resamples")->check(CLI::Range(1000, 100000000));
  compare->add_option("--seed", compare_seed, "Bootstrap seed");
  compare->add_option("--out,-o", compare_out, "Output directory");

  // plot
  std::vector<std::string> plot_dirs;
  std::string plot_out = "plots";
  auto* plot = app.add_subcommand("plot", "Learning curves and alpha trajectories");
  plot->add_option("runs", plot_dirs, "Run or seed directories")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out,-o", plot_out, "Output directory");

  // sweep
  std::string sweep_config;
  std::vector<double> lambdas;
  std::string sweep_out;
  int sweep_jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Lambda sweep of a baseline against one EIPO run");
  sweep->add_option("config", sweep_config, "Base config (RND, EXT_NORM_RND or DECOUPLED_RND)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda grid")->required()->delimiter(',');
  sweep->add_option("--out,-o", sweep_out, "Sweep directory (default <output root>/<name>_sweep)");
  sweep->add_option("--jobs,-j", sweep_jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);

  // selftest
  std::uint64_t selftest_seed = 0;
  auto* selftest = app.add_subcommand("selftest", "Run the invariant and oracle suites");
  selftest->add_option("--seed", selftest_seed, "Seed of the randomized instances");

  // defaults
  std::string defaults_variant = "EIPO_RND";
  std::string defaults_kind = "corridor";
  auto* defaults = app.add_subcommand("defaults", "Print a fully commented default config");
  defaults->add_option("--variant", defaults_variant, "Algorithm variant");
  defaults->add_option("--kind", defaults_kind, "Environment kind (corridor | chain)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*train) {
      const auto cfg = config::load_config(train_config);
      const fs::path dir = train_output.empty() ? runner::output_root(cfg) / runner::run_label(cfg)
                                                : fs::path(train_output);
      runner::TrainOptions opts;
      opts.resume = resume;
      if (stop_after > 0) opts.stop_after = stop_after;
      opts.jobs = jobs > 0 ? jobs : runner::jobs_from_env(1);
      opts.log = &std::cerr;
      runner::train(cfg, dir, opts);
      std::cout << dir.string() << "\n";
    } else if (*compare) {
      runner::CompareOptions opts;
      opts.allow_few_seeds = allow_few;
      opts.pairs = parse_pairs(pair_specs);
      opts.n_bootstrap = n_bootstrap;
      opts.strict = !weak;
      opts.seed = compare_seed;
      runner::compare({compare_dirs.begin(), compare_dirs.end()}, compare_out, opts, std::cout);
    } else if (*plot) {
      runner::plot({plot_dirs.begin(), plot_dirs.end()}, plot_out, std::cout);
    } else if (*sweep) {
      const auto cfg = config::load_config(sweep_config);
      runner::SweepOptions opts;
      opts.lambdas = lambdas;
      opts.train.jobs = sweep_jobs > 0 ? sweep_jobs : runner::jobs_from_env(1);
      opts.train.log = &std::cerr;
      const fs::path out =
          sweep_out.empty() ? runner::output_root(cfg) / (cfg.name + "_sweep") : fs::path(sweep_out);
      runner::sweep(cfg, opts, out, std::cout);
      std::cout << out.string() << "\n";
    } else if (*selftest) {
      return run_selftest(selftest_seed);
    } else if (*defaults) {
      config::RunConfig cfg;
      cfg.algorithm.variant = baselines::parse_variant(defaults_variant);
      cfg.environment.kind = defaults_kind;
      cfg.algorithm.fill_defaults(cfg.iterations);
      cfg.validate();
      std::cout << config::write_config(cfg, true);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
