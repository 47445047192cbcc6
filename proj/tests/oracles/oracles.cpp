#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace eipolab::oracles {

estimation::GaeResult gae_bruteforce(const Matrix& rewards, const Matrix& values,
                                     const Matrix& dones, const Vector& bootstrap,
                                     double gamma, double lambda) {
  const auto T = rewards.rows();
  const auto W = rewards.cols();
  estimation::GaeResult out{Matrix::Zero(T, W), Matrix::Zero(T, W)};
  for (Eigen::Index w = 0; w < W; ++w) {
    auto next_value = [&](Eigen::Index k) { return k + 1 < T ? values(k + 1, w) : bootstrap(w); };
    for (Eigen::Index t = 0; t < T; ++t) {
      double a = 0.0;
      double weight = 1.0;
      for (Eigen::Index k = t; k < T; ++k) {
        const double live = 1.0 - dones(k, w);
        const double delta = rewards(k, w) + gamma * live * next_value(k) - values(k, w);
        a += weight * delta;
        if (live == 0.0) break;
        weight *= gamma * lambda;
      }
      out.advantages(t, w) = a;
      out.returns(t, w) = a + values(t, w);
    }
  }
  return out;
}

double prob_improvement_pairs(std::span<const double> xs, std::span<const double> ys,
                              bool strict) {
  double total = 0.0;
  for (double x : xs) {
    for (double y : ys) {
      if (x > y) {
        total += 1.0;
      } else if (x == y) {
        total += strict ? 0.5 : 1.0;
      }
    }
  }
  return total / (static_cast<double>(xs.size()) * static_cast<double>(ys.size()));
}

StageReplay replay_stages(std::span<const double> js) {
  StageReplay r;
  bool max_stage = false;
  double prev = 0.0;
  for (double j : js) {
    const bool before = max_stage;
    if (before) {
      if (j - prev <= 0.0) max_stage = false;
    } else {
      if (j - prev >= 0.0) max_stage = true;
    }
    prev = j;
    r.max_stage.push_back(max_stage);
    r.alpha_updated.push_back(before && !max_stage);
  }
  return r;
}

void adam_step(Vector& theta, Vector& m, Vector& v, std::uint64_t t, const Vector& grad,
               double lr, double beta1, double beta2, double eps, double max_norm) {
  Vector g = grad;
  const double norm = std::sqrt(g.squaredNorm());
  if (max_norm > 0.0 && norm > max_norm) g *= max_norm / norm;
  m = beta1 * m + (1.0 - beta1) * g;
  v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    theta(i) -= lr * (m(i) / bc1) / (std::sqrt(v(i) / bc2) + eps);
  }
}

double hitting_probability(int start, int n) {
  return static_cast<double>(start) / static_cast<double>(n - 1);
}

estimation::RolloutBatch random_batch(Rng& rng, const funcapprox::PolicyPair& pair,
                                      int horizon, int workers,
                                      estimation::BehaviorPolicy behavior, double logp_noise) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto T = static_cast<Eigen::Index>(horizon);
  const auto W = static_cast<Eigen::Index>(workers);
  estimation::RolloutBatch b;
  b.horizon = horizon;
  b.workers = workers;
  b.behavior = behavior;
  b.observations = Matrix(T * W, pair.obs_dim());
  for (Eigen::Index i = 0; i < b.observations.size(); ++i) {
    b.observations.data()[i] = unit(rng) < 0.3 ? 1.0 : 0.0;
  }
  const auto out = pair.forward(b.observations);
  const Matrix lpe = funcapprox::log_softmax_rows(out.logits_e);
  const Matrix lpei = funcapprox::log_softmax_rows(out.logits_ei);
  b.actions.resize(static_cast<std::size_t>(T * W));
  b.logp_e = Matrix(T, W);
  b.logp_ei = Matrix(T, W);
  b.reward_e = Matrix(T, W);
  b.reward_i = Matrix(T, W);
  b.dones = Matrix(T, W);
  b.v_e = Matrix(T, W);
  b.v_ei = Matrix(T, W);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index w = 0; w < W; ++w) {
      const Eigen::Index row = t * W + w;
      const int a = static_cast<int>(uniform_index(static_cast<std::size_t>(pair.num_actions()), rng));
      b.actions[static_cast<std::size_t>(row)] = a;
      b.logp_e(t, w) = lpe(row, a) + logp_noise * normal(rng);
      b.logp_ei(t, w) = lpei(row, a) + logp_noise * normal(rng);
      b.reward_e(t, w) = unit(rng) < 0.2 ? normal(rng) : 0.0;
      b.reward_i(t, w) = std::abs(normal(rng)) * 0.1;
      b.dones(t, w) = unit(rng) < 0.1 ? 1.0 : 0.0;
      b.v_e(t, w) = normal(rng);
      b.v_ei(t, w) = normal(rng);
    }
  }
  b.bootstrap_e = Vector(W);
  b.bootstrap_ei = Vector(W);
  for (Eigen::Index w = 0; w < W; ++w) {
    b.bootstrap_e(w) = normal(rng);
    b.bootstrap_ei(w) = normal(rng);
  }
  return b;
}

funcapprox::PolicyPair random_pair(Rng& rng, int obs_dim, int num_actions, int hidden,
                                   double scale) {
  funcapprox::PolicyPair pair(obs_dim, num_actions, rng(), hidden);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& x : pair.params().flat()) x = normal(rng);
  return pair;
}

double relative_error(const Vector& a, const Vector& b, double floor) {
  const double denom = std::max({a.norm(), b.norm(), floor});
  return (a - b).norm() / denom;
}

}  // namespace eipolab::oracles
