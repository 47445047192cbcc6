#include "eipolab/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

#include "eipolab/evalstats.hpp"
#include "eipolab/trainer.hpp"

namespace eipolab::runner {

namespace {

std::mutex log_mutex;

void log_line(std::ostream* log, const std::string& line) {
  if (log == nullptr) return;
  std::lock_guard lock(log_mutex);
  *log << line << '\n';
  log->flush();
}

double parse_number(const std::string& s) {
  if (s.empty() || s == "nan") return std::nan("");
  return std::stod(s);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

}  // namespace

fs::path output_root(const config::RunConfig& cfg) {
  if (const char* env = std::getenv("EIPOLAB_OUTPUT_ROOT"); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

int jobs_from_env(int fallback) {
  if (const char* env = std::getenv("EIPOLAB_JOBS"); env != nullptr && *env != '\0') {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return fallback;
}

std::string run_label(const config::RunConfig& cfg) {
  return cfg.name + "_" + std::string(baselines::to_string(cfg.algorithm.variant)) + "_" +
         cfg.environment.kind;
}

fs::path seed_dir(const fs::path& run_dir, std::uint64_t seed) {
  return run_dir / ("seed_" + std::to_string(seed));
}

std::string checkpoint_name(const config::RunConfig& cfg, int iteration) {
  return fmt::format("checkpoint_{}_iter{:06d}.ckpt", baselines::to_string(cfg.algorithm.variant),
                     iteration);
}

std::optional<fs::path> latest_checkpoint(const fs::path& seed_directory) {
  const fs::path dir = seed_directory / "checkpoints";
  if (!fs::exists(dir)) return std::nullopt;
  static const std::regex pattern(R"(checkpoint_[A-Z_]+_iter(\d+)\.ckpt)");
  std::optional<fs::path> best;
  long best_iter = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const long it = std::stol(m[1].str());
    if (it > best_iter) {
      best_iter = it;
      best = entry.path();
    }
  }
  return best;
}

// --- training ---------------------------------------------------------------------

int train_seed(const config::RunConfig& cfg, std::uint64_t seed, const fs::path& dir,
               const TrainOptions& options) {
  fs::create_directories(dir / "checkpoints");
  config::save_config(cfg, dir / "config.ini");
  Trainer trainer(cfg, seed);
  const auto variant = cfg.algorithm.variant;
  std::vector<std::string> timing_rows;

  if (options.resume) {
    if (const auto ckpt = latest_checkpoint(dir)) {
      trainer.restore(Checkpoint::load(ckpt->string()));
      log_line(options.log, fmt::format("seed {}: resumed from {} (iteration {})", seed,
                                        ckpt->filename().string(), trainer.iteration()));
      // Keep wall-clock rows of the iterations the checkpoint covers.
      if (fs::exists(dir / "timing.csv")) {
        const auto t = csv::read(dir / "timing.csv");
        for (const auto& r : t.rows) {
          if (std::stoi(r.at(0)) < trainer.iteration()) timing_rows.push_back(r.at(0) + "," + r.at(1));
        }
      }
    }
  }

  // Rewrite the CSVs from the trainer state so rows written after the last
  // checkpoint by an interrupted run are dropped.
  std::ofstream metrics(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  std::ofstream episodes(dir / "episodes.csv", std::ios::binary | std::ios::trunc);
  std::ofstream timing(dir / "timing.csv", std::ios::binary | std::ios::trunc);
  if (!metrics || !episodes || !timing) throw UsageError("cannot write run files in " + dir.string());
  csv::write_row(metrics, metrics_header(variant));
  for (const auto& row : trainer.metrics()) csv::write_row(metrics, metrics_fields(row, variant));
  csv::write_row(episodes, episodes_header());
  for (const auto& e : trainer.episodes()) csv::write_row(episodes, episode_fields(e));
  timing << "iteration,wall_clock_seconds\n";
  for (const auto& r : timing_rows) timing << r << '\n';
  metrics.flush();
  episodes.flush();
  timing.flush();

  auto save_checkpoint = [&] {
    trainer.checkpoint().save((dir / "checkpoints" / checkpoint_name(cfg, trainer.iteration())).string());
  };

  std::size_t episodes_written = trainer.episodes().size();
  while (trainer.iteration() < cfg.iterations) {
    if (options.stop_after && trainer.iteration() >= *options.stop_after) break;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const MetricsRow& row = trainer.iterate();
      csv::write_row(metrics, metrics_fields(row, variant));
    } catch (const NumericError& e) {
      std::string dump = std::string("numeric failure: ") + e.what() + "\n";
      dump += fmt::format("seed {} iteration {}\n", seed, trainer.iteration());
      if (!trainer.metrics().empty()) {
        const auto& last = trainer.metrics().back();
        const auto h = metrics_header(variant);
        const auto f = metrics_fields(last, variant);
        dump += "last completed iteration:\n";
        for (std::size_t i = 0; i < h.size(); ++i) dump += "  " + h[i] + " = " + f[i] + "\n";
      }
      write_file(dir / "diagnostic.txt", dump);
      throw;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (; episodes_written < trainer.episodes().size(); ++episodes_written) {
      csv::write_row(episodes, episode_fields(trainer.episodes()[episodes_written]));
    }
    timing << trainer.iteration() - 1 << ',' << fmt::format("{:.6f}", secs) << '\n';
    metrics.flush();
    episodes.flush();
    timing.flush();
    const int it = trainer.iteration();
    if (it % cfg.checkpoint_every == 0 || it == cfg.iterations ||
        (options.stop_after && it == *options.stop_after)) {
      save_checkpoint();
    }
    if (it % 50 == 0 || it == cfg.iterations) {
      log_line(options.log, fmt::format("{} seed {}: iteration {}/{} score {}", run_label(cfg),
                                        seed, it, cfg.iterations, trainer.final_score()));
    }
  }
  if (!latest_checkpoint(dir)) save_checkpoint();
  return trainer.iteration();
}

void train(const config::RunConfig& cfg, const fs::path& run_dir, const TrainOptions& options) {
  fs::create_directories(run_dir);
  config::save_config(cfg, run_dir / "config.ini");
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(cfg.seeds.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        train_seed(cfg, cfg.seeds[i], seed_dir(run_dir, cfg.seeds[i]), options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- loading ------------------------------------------------------------------------

namespace {

SeedRun load_seed(const fs::path& dir) {
  SeedRun run;
  run.dir = dir;
  const auto cfg = config::load_config(dir / "config.ini");
  run.algorithm = std::string(baselines::to_string(cfg.algorithm.variant));
  run.environment = cfg.environment.kind;
  const std::string name = dir.filename().string();
  run.seed = std::stoull(name.substr(name.find('_') + 1));
  const auto episodes = csv::read(dir / "episodes.csv");
  const int col = episodes.column("extrinsic_return");
  if (col < 0) throw UsageError(dir.string() + "/episodes.csv lacks extrinsic_return");
  for (const auto& r : episodes.rows) run.returns.push_back(parse_number(r[static_cast<std::size_t>(col)]));
  run.metrics = csv::read(dir / "metrics.csv");
  run.score = evalstats::last_window_median(run.returns, 100, &run.short_window);
  return run;
}

bool is_seed_dir(const fs::path& p) {
  return fs::is_directory(p) && p.filename().string().starts_with("seed_") &&
         fs::exists(p / "metrics.csv") && fs::exists(p / "episodes.csv") &&
         fs::exists(p / "config.ini");
}

}  // namespace

std::vector<SeedRun> load_runs(const fs::path& dir) {
  std::vector<SeedRun> runs;
  if (is_seed_dir(dir)) {
    runs.push_back(load_seed(dir));
    return runs;
  }
  if (!fs::is_directory(dir)) throw UsageError("not a run directory: " + dir.string());
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (is_seed_dir(entry.path())) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& p : subdirs) runs.push_back(load_seed(p));
  if (runs.empty()) throw UsageError("no seed_* run directories under " + dir.string());
  return runs;
}

std::vector<SeedRun> load_runs(const std::vector<fs::path>& dirs) {
  std::vector<SeedRun> all;
  for (const auto& d : dirs) {
    auto runs = load_runs(d);
    all.insert(all.end(), std::make_move_iterator(runs.begin()), std::make_move_iterator(runs.end()));
  }
  return all;
}

// --- compare ------------------------------------------------------------------------

void compare(const std::vector<fs::path>& dirs, const fs::path& out, const CompareOptions& options,
             std::ostream& log) {
  const auto runs = load_runs(dirs);
  fs::create_directories(out);
  // environment -> algorithm -> scores
  std::map<std::string, std::map<std::string, std::vector<double>>> groups;
  std::vector<evalstats::RunScore> scores;
  std::ofstream scores_csv(out / "scores.csv", std::ios::binary);
  csv::write_row(scores_csv, {"algorithm", "environment", "seed", "score", "episodes_in_window"});
  for (const auto& r : runs) {
    groups[r.environment][r.algorithm].push_back(r.score);
    scores.push_back({r.algorithm, r.environment, r.seed, r.score});
    if (r.short_window) {
      log << "warning: " << r.dir.string() << " has " << r.returns.size()
          << " episodes; scoring all of them\n";
    }
    csv::write_row(scores_csv, {r.algorithm, r.environment, std::to_string(r.seed),
                                config::format_double(r.score),
                                std::to_string(std::min<std::size_t>(100, r.returns.size()))});
  }

  std::vector<evalstats::ComparisonReport> reports;
  for (const auto& [env, algos] : groups) {
    std::vector<std::pair<std::string, std::string>> pairs = options.pairs;
    if (pairs.empty()) {
      for (const auto& [a, _] : algos) {
        for (const auto& [b, __] : algos) {
          if (a != b) pairs.emplace_back(a, b);
        }
      }
    }
    for (const auto& [x, y] : pairs) {
      const auto ix = algos.find(x);
      const auto iy = algos.find(y);
      if (ix == algos.end() || iy == algos.end()) continue;
      for (const auto* side : {&*ix, &*iy}) {
        if (side->second.size() < 5 && !options.allow_few_seeds) {
          throw UsageError(fmt::format("{} on {} has {} seeds; at least 5 are required "
                                       "(pass --allow-few-seeds to override)",
                                       side->first, env, side->second.size()));
        }
      }
      auto rep = evalstats::compare(x, ix->second, y, iy->second, options.strict,
                                    options.n_bootstrap, 0.95, options.seed);
      rep.environment = env;
      reports.push_back(rep);
    }
  }

  std::ofstream comp(out / "comparisons.csv", std::ios::binary);
  csv::write_row(comp, {"environment", "x", "y", "n_x", "n_y", "p_strict", "p_weak", "ci_low",
                        "ci_high", "ci_for", "n_bootstrap", "confidence"});
  std::string text = "Probability of improvement P(X > Y) (ties count 1/2) and P(X >= Y)\n\n";
  for (const auto& r : reports) {
    const auto nx = groups[r.environment][r.x].size();
    const auto ny = groups[r.environment][r.y].size();
    csv::write_row(comp, {r.environment, r.x, r.y, std::to_string(nx), std::to_string(ny),
                          config::format_double(r.p_strict), config::format_double(r.p_weak),
                          config::format_double(r.ci_low), config::format_double(r.ci_high),
                          r.strict ? "strict" : "weak", std::to_string(r.n_bootstrap),
                          config::format_double(r.confidence)});
    text += fmt::format("[{}] {} vs {}: strict {:.3f}, weak {:.3f}, {:.0f}% CI [{:.3f}, {:.3f}]\n",
                        r.environment, r.x, r.y, r.p_strict, r.p_weak, 100 * r.confidence,
                        r.ci_low, r.ci_high);
  }

  const auto wins = evalstats::win_matrix(scores);
  std::ofstream wm(out / "win_matrix.csv", std::ios::binary);
  csv::write_row(wm, {"a", "b", "fraction_of_environments"});
  text += "\nWin matrix R(A, B) = fraction of shared environments with mean(A) >= mean(B)\n";
  for (const auto& [key, v] : wins) {
    csv::write_row(wm, {key.first, key.second, config::format_double(v)});
    text += fmt::format("  R({}, {}) = {:.3f}\n", key.first, key.second, v);
  }
  write_file(out / "report.txt", text);
  log << text;
}

// --- plot ---------------------------------------------------------------------------

namespace {

struct Curve {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> lo;
  std::vector<double> hi;
};

std::string svg_plot(const std::string& title, const std::string& ylabel,
                     const std::vector<Curve>& curves) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double W = 720, H = 420, L = 70, R = 170, T = 40, B = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!std::isfinite(c.y[i])) continue;
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      const double lo = c.lo.empty() || !std::isfinite(c.lo[i]) ? c.y[i] : c.lo[i];
      const double hi = c.hi.empty() || !std::isfinite(c.hi[i]) ? c.y[i] : c.hi[i];
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  }
  if (xmin > xmax) xmin = 0, xmax = 1;
  if (ymin > ymax) ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1, ymin -= 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" "
      "fill=\"white\"/>\n<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n",
      W, H, L, title);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", L,
                   H - B, W - R);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", L, T,
                   H - B);
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.0f}</text>\n", px(xv),
                     H - B + 18, xv);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 6,
                     py(yv) + 4, yv);
  }
  s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">iteration</text>\n",
                   (L + W - R) / 2, H - 12);
  s += fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" transform=\"rotate(-90 16 {:.1f})\" "
      "text-anchor=\"middle\">{}</text>\n",
      (T + H - B) / 2, (T + H - B) / 2, ylabel);
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const char* color = colors[ci % 8];
    if (!c.lo.empty()) {
      std::string band;
      for (std::size_t i = 0; i < c.x.size(); ++i) {
        if (std::isfinite(c.hi[i])) band += fmt::format("{:.1f},{:.1f} ", px(c.x[i]), py(c.hi[i]));
      }
      for (std::size_t i = c.x.size(); i-- > 0;) {
        if (std::isfinite(c.lo[i])) band += fmt::format("{:.1f},{:.1f} ", px(c.x[i]), py(c.lo[i]));
      }
      s += fmt::format("<polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n",
                       band, color);
    }
    std::string line;
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (std::isfinite(c.y[i])) line += fmt::format("{:.1f},{:.1f} ", px(c.x[i]), py(c.y[i]));
    }
    s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                     line, color);
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" "
                     "stroke-width=\"3\"/><text x=\"{4}\" y=\"{5}\">{6}</text>\n",
                     W - R + 10, T + 10 + 18 * ci, W - R + 30, color, W - R + 36,
                     T + 14 + 18 * ci, c.label);
  }
  s += "</svg>\n";
  return s;
}

}  // namespace

void plot(const std::vector<fs::path>& dirs, const fs::path& out, std::ostream& log) {
  const auto runs = load_runs(dirs);
  fs::create_directories(out);
  // (algorithm, environment) -> iteration -> per-seed values
  std::map<std::pair<std::string, std::string>, std::map<int, std::vector<double>>> curves;
  std::map<std::string, std::vector<const SeedRun*>> eipo_runs;
  for (const auto& r : runs) {
    auto& c = curves[{r.algorithm, r.environment}];
    const int it_col = r.metrics.column("iteration");
    const int ret_col = r.metrics.column("median_ext_return_last100");
    if (it_col < 0 || ret_col < 0) throw UsageError(r.dir.string() + "/metrics.csv lacks columns");
    for (const auto& row : r.metrics.rows) {
      c[std::stoi(row[static_cast<std::size_t>(it_col)])].push_back(
          parse_number(row[static_cast<std::size_t>(ret_col)]));
    }
    if (r.metrics.has("alpha")) eipo_runs[r.algorithm + " / " + r.environment].push_back(&r);
  }

  std::ofstream tidy(out / "curves.csv", std::ios::binary);
  csv::write_row(tidy, {"algorithm", "environment", "iteration", "mean_return", "ci_low",
                        "ci_high", "n_seeds"});
  std::vector<Curve> svg_curves;
  for (const auto& [key, by_iter] : curves) {
    Curve c;
    c.label = key.first + " / " + key.second;
    for (const auto& [it, values] : by_iter) {
      std::vector<double> v;
      for (double x : values) {
        if (std::isfinite(x)) v.push_back(x);
      }
      double mean = std::nan(""), lo = std::nan(""), hi = std::nan("");
      if (!v.empty()) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        const double half =
            v.size() > 1 ? 1.96 * std::sqrt(var / static_cast<double>(v.size() - 1)) /
                               std::sqrt(static_cast<double>(v.size()))
                         : 0.0;
        lo = mean - half;
        hi = mean + half;
      }
      csv::write_row(tidy, {key.first, key.second, std::to_string(it), config::format_double(mean),
                            config::format_double(lo), config::format_double(hi),
                            std::to_string(v.size())});
      c.x.push_back(it);
      c.y.push_back(mean);
      c.lo.push_back(lo);
      c.hi.push_back(hi);
    }
    svg_curves.push_back(std::move(c));
  }
  write_file(out / "learning_curves.svg",
             svg_plot("Median extrinsic return (last 100 episodes), mean and 95% CI over seeds",
                      "extrinsic return", svg_curves));
  log << "wrote " << (out / "curves.csv").string() << " and learning_curves.svg\n";

  if (eipo_runs.empty()) {
    log << "no EIPO runs: alpha panel skipped\n";
    return;
  }
  std::ofstream alpha_csv(out / "alpha.csv", std::ios::binary);
  csv::write_row(alpha_csv, {"algorithm", "environment", "seed", "iteration", "alpha"});
  std::vector<Curve> traces;
  for (const auto& [label, group] : eipo_runs) {
    for (const SeedRun* r : group) {
      Curve c;
      c.label = label + " seed " + std::to_string(r->seed);
      const int it_col = r->metrics.column("iteration");
      const int a_col = r->metrics.column("alpha");
      for (const auto& row : r->metrics.rows) {
        const auto& it = row[static_cast<std::size_t>(it_col)];
        const auto& a = row[static_cast<std::size_t>(a_col)];
        csv::write_row(alpha_csv, {r->algorithm, r->environment, std::to_string(r->seed), it, a});
        c.x.push_back(std::stod(it));
        c.y.push_back(parse_number(a));
      }
      traces.push_back(std::move(c));
    }
  }
  write_file(out / "alpha.svg", svg_plot("Lagrange multiplier alpha per seed", "alpha", traces));
  log << "wrote " << (out / "alpha.csv").string() << " and alpha.svg\n";
}

// --- sweep --------------------------------------------------------------------------

void sweep(const config::RunConfig& base, const SweepOptions& options, const fs::path& out,
           std::ostream& log) {
  using baselines::Variant;
  const Variant v = base.algorithm.variant;
  if (v != Variant::kRND && v != Variant::kExtNormRND && v != Variant::kDecoupledRND) {
    throw ConfigError("sweep needs a lambda-scaled base variant (RND, EXT_NORM_RND or DECOUPLED_RND)");
  }
  if (options.lambdas.empty()) throw UsageError("sweep: empty lambda grid");
  fs::create_directories(out);

  std::ofstream summary(out / "summary.csv", std::ios::binary);
  csv::write_row(summary, {"label", "variant", "lambda", "n_seeds", "mean_score", "median_score",
                           "p_eipo_vs_this"});

  config::RunConfig eipo = base;
  eipo.algorithm.variant = Variant::kEipoRND;
  eipo.algorithm.kl_weight.reset();
  eipo.algorithm.fill_defaults(eipo.iterations);
  eipo.validate();
  const fs::path eipo_dir = out / "eipo" / run_label(eipo);
  log << "sweep: EIPO_RND reference run\n";
  train(eipo, eipo_dir, options.train);
  std::vector<double> eipo_scores;
  for (const auto& r : load_runs(eipo_dir)) eipo_scores.push_back(r.score);

  auto stats = [](const std::vector<double>& xs) {
    std::vector<double> s = xs;
    std::sort(s.begin(), s.end());
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(s.size());
    const double med = s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]);
    return std::pair{mean, med};
  };

  for (double lambda : options.lambdas) {
    config::RunConfig cfg = base;
    cfg.algorithm.lambda = lambda;
    cfg.validate();
    const std::string label = "lambda_" + config::format_double(lambda);
    log << "sweep: " << label << "\n";
    const fs::path dir = out / label / run_label(cfg);
    train(cfg, dir, options.train);
    std::vector<double> scores;
    for (const auto& r : load_runs(dir)) scores.push_back(r.score);
    const auto [mean, med] = stats(scores);
    csv::write_row(summary, {label, std::string(baselines::to_string(v)), config::format_double(lambda),
                             std::to_string(scores.size()), config::format_double(mean),
                             config::format_double(med),
                             config::format_double(evalstats::prob_improvement(eipo_scores, scores, true))});
  }
  const auto [mean, med] = stats(eipo_scores);
  csv::write_row(summary, {"eipo", "EIPO_RND", config::format_double(*eipo.algorithm.lambda),
                           std::to_string(eipo_scores.size()), config::format_double(mean),
                           config::format_double(med), ""});
}

}  // namespace eipolab::runner
