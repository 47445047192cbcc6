#include "eipolab/estimation.hpp"

#include <algorithm>
#include <cmath>

namespace eipolab::estimation {

std::string_view to_string(BehaviorPolicy b) {
  return b == BehaviorPolicy::kExtrinsic ? "extrinsic" : "mixed";
}

Matrix RolloutBatch::mixed_reward() const {
  Matrix m = reward_e + reward_i;
  if (reward_penalty.size() != 0) m -= reward_penalty;
  return m;
}

void RolloutBatch::validate() const {
  const auto T = static_cast<Eigen::Index>(horizon);
  const auto W = static_cast<Eigen::Index>(workers);
  auto shape = [&](const Matrix& m, const char* name) {
    if (m.rows() != T || m.cols() != W) {
      throw UsageError(std::string("rollout field '") + name + "' is not T x W");
    }
  };
  shape(logp_e, "logp_e");
  shape(logp_ei, "logp_ei");
  shape(reward_e, "reward_e");
  shape(reward_i, "reward_i");
  shape(dones, "dones");
  shape(v_e, "v_e");
  shape(v_ei, "v_ei");
  if (reward_penalty.size() != 0) shape(reward_penalty, "reward_penalty");
  if (bootstrap_e.size() != W || bootstrap_ei.size() != W) {
    throw UsageError("rollout bootstrap values must have W entries");
  }
  if (actions.size() != size() || observations.rows() != T * W) {
    throw UsageError("rollout actions/observations must have T*W rows");
  }
  if (!logp_e.allFinite() || !logp_ei.allFinite()) {
    throw UsageError("rollout holds non-finite log-probabilities");
  }
  if (!v_e.allFinite() || !v_ei.allFinite() || !bootstrap_e.allFinite() ||
      !bootstrap_ei.allFinite()) {
    throw UsageError("rollout holds non-finite values");
  }
}

GaeResult compute_gae(const Matrix& rewards, const Matrix& values,
                      const Matrix& dones, const Vector& bootstrap,
                      double gamma, double lambda) {
  if (values.rows() != rewards.rows() || values.cols() != rewards.cols() ||
      dones.rows() != rewards.rows() || dones.cols() != rewards.cols() ||
      bootstrap.size() != rewards.cols()) {
    throw UsageError("compute_gae: length mismatch");
  }
  const Eigen::Index T = rewards.rows();
  GaeResult out{Matrix::Zero(T, rewards.cols()), Matrix()};
  for (Eigen::Index w = 0; w < rewards.cols(); ++w) {
    double next_adv = 0.0;
    double next_value = bootstrap(w);
    for (Eigen::Index t = T - 1; t >= 0; --t) {
      const double live = 1.0 - dones(t, w);
      const double delta = rewards(t, w) + gamma * next_value * live - values(t, w);
      next_adv = delta + gamma * lambda * live * next_adv;
      out.advantages(t, w) = next_adv;
      next_value = values(t, w);
    }
  }
  out.returns = out.advantages + values;
  return out;
}

void standardize(Matrix& m) {
  if (m.size() < 2) return;
  const double mu = m.mean();
  const double sd = std::sqrt((m.array() - mu).square().mean());
  m = ((m.array() - mu) / std::max(sd, 1e-8)).matrix();
}

AdvantageSet compute_advantages(const RolloutBatch& batch,
                                const AdvantageOptions& options) {
  batch.validate();
  auto ge = compute_gae(batch.reward_e, batch.v_e, batch.dones, batch.bootstrap_e,
                        options.gamma, options.lambda);
  auto gei = compute_gae(batch.mixed_reward(), batch.v_ei, batch.dones,
                         batch.bootstrap_ei, options.gamma, options.lambda);
  AdvantageSet s;
  s.ret_e = ge.returns;
  s.ret_ei = gei.returns;
  s.a_e = std::move(ge.advantages);
  s.a_ei = std::move(gei.advantages);
  if (options.standardize) {
    standardize(s.a_e);
    standardize(s.a_ei);
  }
  const auto T = s.a_e.rows();
  const auto W = s.a_e.cols();
  s.u_max.resize(T, W);
  s.u_min.resize(T, W);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index w = 0; w < W; ++w) {
      const double re = batch.reward_e(t, w);
      const double ri = batch.reward_i(t, w);
      s.u_max(t, w) = u_max(re, ri, s.a_e(t, w), options.alpha);
      s.u_min(t, w) = u_min(re, ri, s.a_ei(t, w), options.alpha);
    }
  }
  return s;
}

double u_identities_check(const RolloutBatch& batch, double gamma, double alpha) {
  batch.validate();
  const Matrix mixed = batch.mixed_reward();
  const auto T = batch.reward_e.rows();
  double worst = 0.0;
  for (Eigen::Index w = 0; w < batch.reward_e.cols(); ++w) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const double live = 1.0 - batch.dones(t, w);
      const double ve_next = t + 1 < T ? batch.v_e(t + 1, w) : batch.bootstrap_e(w);
      const double vei_next = t + 1 < T ? batch.v_ei(t + 1, w) : batch.bootstrap_ei(w);
      const double re = batch.reward_e(t, w);
      const double ri = batch.reward_i(t, w);
      const double ve = batch.v_e(t, w);
      const double vei = batch.v_ei(t, w);
      // Value-difference forms.
      const double umax_v =
          (1.0 + alpha) * re + ri + gamma * alpha * ve_next * live - alpha * ve;
      const double umin_v = alpha * re + gamma * vei_next * live - vei;
      // Advantage forms with one-step advantages.
      const double a_e = re + gamma * ve_next * live - ve;
      const double a_ei = mixed(t, w) + gamma * vei_next * live - vei;
      const double umax_a = u_max(re, ri, a_e, alpha);
      const double umin_a = u_min(re, ri, a_ei, alpha);
      worst = std::max({worst, std::abs(umax_v - umax_a), std::abs(umin_v - umin_a)});
    }
  }
  return worst;
}

}  // namespace eipolab::estimation
