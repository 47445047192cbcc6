#ifndef EIPOLAB_TESTS_ORACLES_HPP_
#define EIPOLAB_TESTS_ORACLES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "eipolab/common.hpp"
#include "eipolab/eipo.hpp"
#include "eipolab/estimation.hpp"
#include "eipolab/funcapprox.hpp"

// Independent reference implementations used by the unit tests, the
// acceptance binary and `eipolab selftest`.
namespace eipolab::oracles {

using funcapprox::Matrix;
using funcapprox::Vector;

// A_t = sum_{l >= 0} (gamma lambda)^l delta_{t+l}, summed term by term and
// cut after the first done. O(T^2) per worker.
estimation::GaeResult gae_bruteforce(const Matrix& rewards, const Matrix& values,
                                     const Matrix& dones, const Vector& bootstrap,
                                     double gamma, double lambda);

// Mean over all |xs| * |ys| pairs of [x > y] + 1/2 [x == y] (strict) or
// [x >= y] (weak).
double prob_improvement_pairs(std::span<const double> xs, std::span<const double> ys,
                              bool strict);

struct StageReplay {
  std::vector<bool> max_stage;      // flag after each J
  std::vector<bool> alpha_updated;  // max -> min transitions
};

// Alternation schedule with max_stage[0] = false and J[0] = 0:
//   max-stage: stay while J[i] - J[i-1] > 0
//   min-stage: move to max-stage when J[i] - J[i-1] >= 0
StageReplay replay_stages(std::span<const double> js);

// Hand simulation of one clipped Adam step.
void adam_step(Vector& theta, Vector& m, Vector& v, std::uint64_t t, const Vector& grad,
               double lr, double beta1, double beta2, double eps, double max_norm);

// Probability that a symmetric random walk on 0..n-1 started at `start`
// hits n-1 before 0 (gambler's ruin): start / (n - 1).
double hitting_probability(int start, int n);

// Random rollout for loss and estimator tests. Rewards, values and dones
// are random; log-probabilities come from `pair` plus optional noise.
estimation::RolloutBatch random_batch(Rng& rng, const funcapprox::PolicyPair& pair,
                                      int horizon, int workers,
                                      estimation::BehaviorPolicy behavior,
                                      double logp_noise = 0.0);

// Policy pair with every parameter drawn from N(0, scale^2).
funcapprox::PolicyPair random_pair(Rng& rng, int obs_dim, int num_actions, int hidden,
                                   double scale = 0.3);

// |a - b| / max(|a|, |b|, floor) in the Euclidean norm.
double relative_error(const Vector& a, const Vector& b, double floor = 1e-6);

}  // namespace eipolab::oracles

#endif  // EIPOLAB_TESTS_ORACLES_HPP_
