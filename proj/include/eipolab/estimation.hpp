#ifndef EIPOLAB_ESTIMATION_HPP_
#define EIPOLAB_ESTIMATION_HPP_

#include <string_view>
#include <vector>

#include "eipolab/funcapprox.hpp"

namespace eipolab::estimation {

using funcapprox::Matrix;
using funcapprox::Vector;

enum class BehaviorPolicy { kExtrinsic, kMixed };

std::string_view to_string(BehaviorPolicy b);

// Fixed-horizon transitions from W workers. Per-step quantities are T x W
// matrices (row = timestep); observations are stacked row t * W + w.
struct RolloutBatch {
  int horizon = 0;
  int workers = 0;
  BehaviorPolicy behavior = BehaviorPolicy::kExtrinsic;
  Matrix observations;
  std::vector<int> actions;
  // Log-probabilities of the taken action under both heads at collection.
  Matrix logp_e;
  Matrix logp_ei;
  Matrix reward_e;  // after any normalization
  Matrix reward_i;  // after scaling / normalization; zero when unused
  // Subtracted from the mixed reward (Decoupled KL penalty); may be empty.
  Matrix reward_penalty;
  Matrix dones;     // 1.0 on the terminal transition
  Matrix v_e;
  Matrix v_ei;
  Vector bootstrap_e;   // V_E(s_T) per worker
  Vector bootstrap_ei;  // V_EI(s_T) per worker

  std::size_t size() const { return static_cast<std::size_t>(horizon) * workers; }
  Matrix mixed_reward() const;
  // Throws UsageError on shape mismatches or non-finite log-probs / values.
  void validate() const;
};

struct GaeResult {
  Matrix advantages;
  Matrix returns;  // advantages + values
};

// Exponentially weighted TD(lambda) advantages, cut at done. All inputs
// are T x W except bootstrap (W). Throws UsageError on length mismatch.
GaeResult compute_gae(const Matrix& rewards, const Matrix& values,
                      const Matrix& dones, const Vector& bootstrap,
                      double gamma, double lambda);

// Rearranged stage payoffs expressed through GAE advantages.
inline double u_max(double r_e, double r_i, double a_e, double alpha) {
  return r_e + r_i + alpha * a_e;
}
inline double u_min(double r_e, double r_i, double a_ei, double alpha) {
  return (alpha - 1.0) * r_e - r_i + a_ei;
}

struct AdvantageSet {
  Matrix a_e;
  Matrix a_ei;
  Matrix u_max;
  Matrix u_min;
  Matrix ret_e;
  Matrix ret_ei;
};

struct AdvantageOptions {
  double gamma = 0.99;
  double lambda = 0.95;
  double alpha = 0.5;
  // Zero-mean / unit-std A_E and A_EI before the U transforms.
  bool standardize = false;
};

AdvantageSet compute_advantages(const RolloutBatch& batch,
                                const AdvantageOptions& options);

// Evaluates U_max and U_min both in value-difference form and in one-step
// advantage form and returns the largest absolute disagreement.
double u_identities_check(const RolloutBatch& batch, double gamma, double alpha);

// In-place zero-mean / unit-std standardization.
void standardize(Matrix& m);

}  // namespace eipolab::estimation

#endif  // EIPOLAB_ESTIMATION_HPP_
