#ifndef EIPOLAB_BASELINES_HPP_
#define EIPOLAB_BASELINES_HPP_

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "eipolab/eipo.hpp"

namespace eipolab::baselines {

enum class Variant {
  kEO,
  kRND,
  kExtNormRND,
  kDecayRND,
  kDecoupledRND,
  kEipoRND,
  kEipoCount,
};

std::string_view to_string(Variant v);
// Accepts the names produced by to_string. Throws ConfigError otherwise.
Variant parse_variant(std::string_view name);

bool is_eipo(Variant v);
bool uses_rnd(Variant v);
bool uses_counts(Variant v);
bool uses_intrinsic(Variant v);

struct AlgorithmConfig {
  Variant variant = Variant::kEO;
  // Intrinsic scale; required by RND, EXT_NORM_RND, DECOUPLED_RND and the
  // EIPO variants, absent otherwise.
  std::optional<double> lambda;
  // DECAY_RND only.
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  std::optional<int> decay_iterations;
  // DECAY_RND only: use the increasing clip(i/I * (max - min)) schedule.
  bool decay_printed_formula = false;
  // DECOUPLED_RND only.
  std::optional<double> kl_weight;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Fills any missing required field with its default (lambda 1.0,
  // kl_weight 1.0, decay lambda_max 1.0 / lambda_min 0.0 / I iterations / 2).
  void fill_defaults(int total_iterations);

  // Intrinsic scale at iteration i (0 for EO).
  double lambda_at(int iteration) const;

  bool operator==(const AlgorithmConfig&) const = default;
};

// lambda_max - (i / I) (lambda_max - lambda_min), clipped to
// [lambda_min, lambda_max]. Throws ConfigError unless I > 0 and
// lambda_min <= lambda_max.
double decay_lambda(int i, int I, double lambda_min, double lambda_max);
// clip((i / I) (lambda_max - lambda_min), lambda_min, lambda_max).
double decay_lambda_printed(int i, int I, double lambda_min, double lambda_max);

// KL(p || q) for two logit rows, sum_a p_a ln(p_a / q_a).
double kl_divergence(std::span<const double> logits_p,
                     std::span<const double> logits_q);

// Single-head PPO on the extrinsic slot (pi_E, V_E):
//   -mean clip(pi_E / pi_E_old, A_E) + c_v mean (V_E - R_E)^2 - c_H H(pi_E)
// A_E and R_E carry whatever reward the variant trains on.
funcapprox::Var single_head_loss(funcapprox::Tape& tape,
                                 const funcapprox::PolicyPair& pair,
                                 const funcapprox::ParamVector& params,
                                 const eipo::Samples& s,
                                 const eipo::LossConfig& cfg,
                                 eipo::SurrogateReport* report = nullptr);

// Decoupled-RND on a batch from pi_EI. a_ei / ret_ei come from the reward
// r_E + r_I - w KL(pi_E || pi_EI) and a_e / ret_e from r_E on the same
// rollouts:
//   -[mean clip(pi_EI / pi_EI_old, A_EI) + mean clip(pi_E / pi_E_old, A_E)]
//   + c_v [mean (V_EI - R_EI)^2 + mean (V_E - R_E)^2]
//   - c_H (H(pi_E) + H(pi_EI))
// Throws UsageError unless samples.behavior is kMixed.
funcapprox::Var decoupled_losses(funcapprox::Tape& tape,
                                 const funcapprox::PolicyPair& pair,
                                 const funcapprox::ParamVector& params,
                                 const eipo::Samples& s,
                                 const eipo::LossConfig& cfg,
                                 eipo::SurrogateReport* report = nullptr);

}  // namespace eipolab::baselines

#endif  // EIPOLAB_BASELINES_HPP_
