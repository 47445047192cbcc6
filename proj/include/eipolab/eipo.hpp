#ifndef EIPOLAB_EIPO_HPP_
#define EIPOLAB_EIPO_HPP_

#include <span>
#include <vector>

#include "eipolab/checkpoint.hpp"
#include "eipolab/estimation.hpp"
#include "eipolab/funcapprox.hpp"

namespace eipolab::eipo {

using estimation::BehaviorPolicy;
using funcapprox::Matrix;
using funcapprox::Vector;

// min{ratio * u, clip(ratio, 1 - eps, 1 + eps) * u}
double clipped_term(double ratio, double u, double eps);

// Differentiable batch mean of clipped_term over exp(logp_new - logp_old).
funcapprox::Var clipped_surrogate(funcapprox::Var logp_new, const Vector& logp_old,
                                  const Vector& payoff, double eps);

struct LossConfig {
  double clip_ratio = 0.1;
  double value_weight = 1.0;
  double entropy_weight = 0.001;
};

// Per-sample inputs to every PPO-family loss in the repository. Which
// fields a loss reads depends on the loss; `payoff` holds the stage payoff
// (U_max or U_min) for the EIPO stage losses.
struct Samples {
  BehaviorPolicy behavior = BehaviorPolicy::kExtrinsic;
  Matrix obs;
  std::vector<int> actions;
  Vector logp_e_old;
  Vector logp_ei_old;
  Vector payoff;
  Vector a_e;
  Vector a_ei;
  Vector ret_e;
  Vector ret_ei;

  std::size_t size() const { return actions.size(); }
};

enum class Stage { kMin, kMax };

// Rows `index` of a rollout and its advantage set. For Stage::kMax the
// payoff is U_max, for Stage::kMin it is U_min.
Samples gather(const estimation::RolloutBatch& batch,
               const estimation::AdvantageSet& adv, Stage stage,
               std::span<const std::size_t> index);
Samples gather_all(const estimation::RolloutBatch& batch,
                   const estimation::AdvantageSet& adv, Stage stage);

struct SurrogateReport {
  double primary = 0.0;
  double auxiliary = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double clip_fraction = 0.0;
  double j_gap = 0.0;
};

// Max-stage (data from pi_E):
//   -[mean clip(pi_EI / pi_E_old, U_max) + mean clip(pi_E / pi_E_old, A_E)]
//   + c_v * mean (V_E - R_E)^2 - c_H * (H(pi_E) + H(pi_EI))
// Throws UsageError unless samples.behavior is kExtrinsic.
funcapprox::Var max_stage_loss(funcapprox::Tape& tape,
                               const funcapprox::PolicyPair& pair,
                               const funcapprox::ParamVector& params,
                               const Samples& s, const LossConfig& cfg,
                               SurrogateReport* report = nullptr);

// Min-stage (data from pi_EI):
//   -[mean clip(pi_E / pi_EI_old, U_min) + mean clip(pi_EI / pi_EI_old, A_EI)]
//   + c_v * mean (V_EI - R_EI)^2 - c_H * (H(pi_E) + H(pi_EI))
// Throws UsageError unless samples.behavior is kMixed.
funcapprox::Var min_stage_loss(funcapprox::Tape& tape,
                               const funcapprox::PolicyPair& pair,
                               const funcapprox::ParamVector& params,
                               const Samples& s, const LossConfig& cfg,
                               SurrogateReport* report = nullptr);

// Whole-batch forms: compute advantages with the given alpha, then the loss.
struct LossValue {
  double loss = 0.0;
  SurrogateReport report;
};
LossValue max_stage_loss(const estimation::RolloutBatch& batch,
                         const funcapprox::PolicyPair& pair,
                         const estimation::AdvantageOptions& options,
                         const LossConfig& cfg = {});
LossValue min_stage_loss(const estimation::RolloutBatch& batch,
                         const funcapprox::PolicyPair& pair,
                         const estimation::AdvantageOptions& options,
                         const LossConfig& cfg = {});

// Mean primary surrogate under the current parameters (no gradient).
double primary_surrogate(const funcapprox::PolicyPair& pair, const Samples& s,
                         Stage stage, double eps);

// L(pi_E, pi_EI): mean clipped_term(pi_EI / pi_E, A_E) over data from pi_E,
// with both probabilities under the current parameters.
double estimate_j_gap(const funcapprox::PolicyPair& pair, const Matrix& obs,
                      std::span<const int> actions, const Vector& a_e,
                      double eps);

struct AlphaState {
  double alpha = 0.5;
  double step_size = 0.005;   // beta
  double derivative_clip = 0.05;  // epsilon_alpha
  bool clamp_nonnegative = false;
  std::vector<double> history;

  // alpha <- alpha - beta * clip(L, -eps_alpha, eps_alpha); appends to history.
  void update(double gap);

  void save(ByteWriter& w) const;
  void load(ByteReader& r);
};

// Stage alternation rule. Starts in the min-stage with J_prev = 0.
struct StageState {
  bool max_stage = false;
  double j_prev = 0.0;
  int current_length = 0;
  // Stages shorter than this never switch; 0 disables the guard.
  int min_stage_length = 0;
  std::vector<int> stage_lengths;

  // Applies the rule for J_i and returns the new max_stage flag.
  bool switch_stage(double j);

  void save(ByteWriter& w) const;
  void load(ByteReader& r);
};

}  // namespace eipolab::eipo

#endif  // EIPOLAB_EIPO_HPP_
