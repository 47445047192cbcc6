#include "eipolab/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "eipolab/common.hpp"

namespace eipolab::evalstats {

double last_window_median(std::span<const double> returns, std::size_t window,
                          bool* short_window) {
  if (short_window != nullptr) *short_window = returns.size() < window;
  if (returns.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto from = returns.size() > window ? returns.size() - window : 0;
  std::vector<double> tail(returns.begin() + static_cast<long>(from), returns.end());
  std::sort(tail.begin(), tail.end());
  const std::size_t n = tail.size();
  return n % 2 == 1 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

namespace {

// Sorting ys lets each x be scored with two binary searches; the result is
// identical to the pairwise sum because every term is a multiple of 1/2.
double score_sorted(std::span<const double> xs, const std::vector<double>& sorted_ys,
                    bool strict) {
  double total = 0.0;
  for (double x : xs) {
    const auto lo = std::lower_bound(sorted_ys.begin(), sorted_ys.end(), x);
    const auto hi = std::upper_bound(lo, sorted_ys.end(), x);
    const double below = static_cast<double>(lo - sorted_ys.begin());
    const double equal = static_cast<double>(hi - lo);
    total += strict ? below + 0.5 * equal : below + equal;
  }
  return total / (static_cast<double>(xs.size()) * static_cast<double>(sorted_ys.size()));
}

}  // namespace

double prob_improvement(std::span<const double> xs, std::span<const double> ys, bool strict) {
  if (xs.empty() || ys.empty()) throw UsageError("prob_improvement: empty score set");
  std::vector<double> sorted(ys.begin(), ys.end());
  std::sort(sorted.begin(), sorted.end());
  return score_sorted(xs, sorted, strict);
}

std::pair<double, double> bootstrap_ci(std::span<const double> xs, std::span<const double> ys,
                                       bool strict, int n_bootstrap, double confidence,
                                       std::uint64_t seed) {
  if (n_bootstrap < 1000) throw UsageError("bootstrap_ci: n_bootstrap must be >= 1000");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw UsageError("bootstrap_ci: confidence must lie in (0, 1)");
  }
  if (xs.empty() || ys.empty()) throw UsageError("bootstrap_ci: empty score set");
  Rng rng(derive_seed(seed, Stream::kBootstrap));
  std::vector<double> stats(static_cast<std::size_t>(n_bootstrap));
  std::vector<double> rx(xs.size());
  std::vector<double> ry(ys.size());
  for (auto& st : stats) {
    for (auto& v : rx) v = xs[uniform_index(xs.size(), rng)];
    for (auto& v : ry) v = ys[uniform_index(ys.size(), rng)];
    std::sort(ry.begin(), ry.end());
    st = score_sorted(rx, ry, strict);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - confidence) / 2.0;
  auto quantile = [&](double q) {
    // Linear interpolation between order statistics.
    const double pos = q * static_cast<double>(stats.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const auto j = std::min(i + 1, stats.size() - 1);
    return stats[i] + (pos - static_cast<double>(i)) * (stats[j] - stats[i]);
  };
  return {quantile(tail), quantile(1.0 - tail)};
}

ComparisonReport compare(const std::string& x, std::span<const double> xs, const std::string& y,
                         std::span<const double> ys, bool strict, int n_bootstrap,
                         double confidence, std::uint64_t seed) {
  ComparisonReport r;
  r.x = x;
  r.y = y;
  r.p_strict = prob_improvement(xs, ys, true);
  r.p_weak = prob_improvement(xs, ys, false);
  const auto [lo, hi] = bootstrap_ci(xs, ys, strict, n_bootstrap, confidence, seed);
  const double point = strict ? r.p_strict : r.p_weak;
  // Percentile intervals can exclude the point estimate on tiny samples.
  r.ci_low = std::min(lo, point);
  r.ci_high = std::max(hi, point);
  r.strict = strict;
  r.n_bootstrap = n_bootstrap;
  r.confidence = confidence;
  return r;
}

double normalized_score(double p_x, double p_ref, double p_rand) {
  if (p_ref == p_rand) throw UsageError("normalized_score: reference equals random score");
  return (p_x - p_rand) / (p_ref - p_rand);
}

WinMatrix win_matrix(std::span<const RunScore> scores) {
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> sums;
  std::set<std::string> algorithms;
  for (const auto& s : scores) {
    auto& [total, n] = sums[{s.algorithm, s.environment}];
    total += s.score;
    ++n;
    algorithms.insert(s.algorithm);
  }
  std::map<std::string, std::map<std::string, double>> means;  // algorithm -> env -> mean
  for (const auto& [key, v] : sums) means[key.first][key.second] = v.first / v.second;

  WinMatrix out;
  for (const auto& a : algorithms) {
    for (const auto& b : algorithms) {
      if (a == b) continue;
      int shared = 0;
      int wins = 0;
      for (const auto& [env, mu_a] : means[a]) {
        const auto it = means[b].find(env);
        if (it == means[b].end()) continue;
        ++shared;
        if (mu_a >= it->second) ++wins;
      }
      if (shared > 0) out[{a, b}] = static_cast<double>(wins) / shared;
    }
  }
  return out;
}

}  // namespace eipolab::evalstats
