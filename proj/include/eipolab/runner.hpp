#ifndef EIPOLAB_RUNNER_HPP_
#define EIPOLAB_RUNNER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "eipolab/config.hpp"
#include "eipolab/csv.hpp"

namespace eipolab::runner {

namespace fs = std::filesystem;

// EIPOLAB_OUTPUT_ROOT when set, else cfg.output_dir.
fs::path output_root(const config::RunConfig& cfg);
// EIPOLAB_JOBS when set to a positive integer, else fallback.
int jobs_from_env(int fallback = 1);

// "<name>_<VARIANT>_<environment kind>"
std::string run_label(const config::RunConfig& cfg);
fs::path seed_dir(const fs::path& run_dir, std::uint64_t seed);
std::string checkpoint_name(const config::RunConfig& cfg, int iteration);
// Latest checkpoint in a seed directory, if any.
std::optional<fs::path> latest_checkpoint(const fs::path& seed_directory);

struct TrainOptions {
  bool resume = false;
  // Stop (after checkpointing) once this many iterations are complete.
  std::optional<int> stop_after;
  int jobs = 1;
  std::ostream* log = nullptr;
};

// Trains one seed inside `dir` (config.ini, metrics.csv, episodes.csv,
// timing.csv, checkpoints/). Returns the number of completed iterations.
// On NumericError a diagnostic.txt is written before rethrowing.
int train_seed(const config::RunConfig& cfg, std::uint64_t seed, const fs::path& dir,
               const TrainOptions& options);
// Trains every configured seed under run_dir/seed_<s>.
void train(const config::RunConfig& cfg, const fs::path& run_dir, const TrainOptions& options);

struct SeedRun {
  std::string algorithm;
  std::string environment;
  std::uint64_t seed = 0;
  fs::path dir;
  std::vector<double> returns;  // per finished episode, in order
  csv::Table metrics;
  double score = 0.0;           // median of the last 100 returns
  bool short_window = false;
};

// `dir` is a run directory holding seed_* subdirectories or a single seed
// directory. Throws UsageError when no run is found.
std::vector<SeedRun> load_runs(const fs::path& dir);
std::vector<SeedRun> load_runs(const std::vector<fs::path>& dirs);

struct CompareOptions {
  bool allow_few_seeds = false;
  // Ordered (X, Y) pairs; empty means every ordered pair per environment.
  std::vector<std::pair<std::string, std::string>> pairs;
  int n_bootstrap = 10000;
  bool strict = true;
  std::uint64_t seed = 0;
};

// Writes scores.csv, comparisons.csv, win_matrix.csv and report.txt into
// out. Throws UsageError when a compared algorithm has fewer than 5 seeds
// and allow_few_seeds is false.
void compare(const std::vector<fs::path>& dirs, const fs::path& out,
             const CompareOptions& options, std::ostream& log);

// Writes curves.csv (+ learning_curves.svg) and, for EIPO runs, alpha.csv
// (+ alpha.svg).
void plot(const std::vector<fs::path>& dirs, const fs::path& out, std::ostream& log);

struct SweepOptions {
  std::vector<double> lambdas;
  TrainOptions train;
};

// One run per lambda of the base (lambda-scaled) variant plus one EIPO_RND
// run with the base settings; writes summary.csv with one row per lambda
// and one EIPO row.
void sweep(const config::RunConfig& base, const SweepOptions& options, const fs::path& out,
           std::ostream& log);

}  // namespace eipolab::runner

#endif  // EIPOLAB_RUNNER_HPP_
