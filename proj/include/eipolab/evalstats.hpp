#ifndef EIPOLAB_EVALSTATS_HPP_
#define EIPOLAB_EVALSTATS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eipolab::evalstats {

struct RunScore {
  std::string algorithm;
  std::string environment;
  std::uint64_t seed = 0;
  double score = 0.0;  // median extrinsic return over the last 100 episodes
};

struct ComparisonReport {
  std::string x;
  std::string y;
  std::string environment;
  double p_strict = 0.0;
  double p_weak = 0.0;
  double ci_low = 0.0;   // bounds for the p_strict or p_weak point estimate,
  double ci_high = 0.0;  // whichever `strict` selected
  bool strict = true;
  int n_bootstrap = 0;
  double confidence = 0.95;
};

// Median of the trailing `window` values (all values when fewer; sets
// *short_window when given). NaN for an empty input.
double last_window_median(std::span<const double> returns, std::size_t window = 100,
                          bool* short_window = nullptr);

// (1 / NM) sum_ij S(x_i, y_j). Strict: S = 1 if x > y, 1/2 if equal, 0
// otherwise. Weak: S = 1 if x >= y, 0 otherwise. Throws UsageError on empty
// input.
double prob_improvement(std::span<const double> xs, std::span<const double> ys,
                        bool strict);

// Percentile bootstrap over n_bootstrap resamples, each resampling xs and ys
// independently with replacement. Throws UsageError when n_bootstrap < 1000
// or confidence is outside (0, 1).
std::pair<double, double> bootstrap_ci(std::span<const double> xs,
                                       std::span<const double> ys, bool strict,
                                       int n_bootstrap = 10000,
                                       double confidence = 0.95,
                                       std::uint64_t seed = 0);

ComparisonReport compare(const std::string& x, std::span<const double> xs,
                         const std::string& y, std::span<const double> ys,
                         bool strict = true, int n_bootstrap = 10000,
                         double confidence = 0.95, std::uint64_t seed = 0);

// (p_x - p_rand) / (p_ref - p_rand). Throws UsageError when p_ref == p_rand.
double normalized_score(double p_x, double p_ref, double p_rand);

// R(A, B) = (1/N) sum_env 1[mu_A >= mu_B] over the N environments where
// both algorithms have scores. Pairs without a shared environment are
// absent from the map.
using WinMatrix = std::map<std::pair<std::string, std::string>, double>;
WinMatrix win_matrix(std::span<const RunScore> scores);

}  // namespace eipolab::evalstats

#endif  // EIPOLAB_EVALSTATS_HPP_
