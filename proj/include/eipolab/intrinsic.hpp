#ifndef EIPOLAB_INTRINSIC_HPP_
#define EIPOLAB_INTRINSIC_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "eipolab/checkpoint.hpp"
#include "eipolab/funcapprox.hpp"

namespace eipolab::intrinsic {

using funcapprox::Matrix;
using funcapprox::Vector;

inline constexpr double kVarianceFloor = 1e-8;

// Streaming mean / population variance, merged batch-wise (Chan et al.).
class RunningMoments {
 public:
  void update(std::span<const double> batch);
  double count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return var_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  double count_ = 0.0;
  double mean_ = 0.0;
  double var_ = 0.0;
};

// Per-dimension running statistics for RND inputs.
class ObsNormalizer {
 public:
  explicit ObsNormalizer(int dim, double clip = 5.0);

  void update(const Matrix& batch);  // rows are observations
  Matrix normalize(const Matrix& batch) const;
  double count() const { return count_; }
  const Vector& mean() const { return mean_; }
  const Vector& variance() const { return var_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  double clip_;
  double count_ = 0.0;
  Vector mean_;
  Vector var_;
};

// Rescales extrinsic rewards by the cross-worker standard deviation of
// per-worker discounted reward accumulators:
//   acc_w <- gamma * acc_w + r_w ;  r_w / max(std_w(acc), floor)
class ExtrinsicNormalizer {
 public:
  // Throws ConfigError when workers < 2.
  ExtrinsicNormalizer(int workers, double gamma,
                      double floor = kVarianceFloor);

  std::vector<double> normalize(std::span<const double> rewards);
  const std::vector<double>& accumulators() const { return acc_; }
  double last_divisor() const { return last_divisor_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  double gamma_;
  double floor_;
  std::vector<double> acc_;
  double last_divisor_ = 1.0;
};

// Divides intrinsic bonuses by the running standard deviation of
// per-worker discounted intrinsic returns.
class IntrinsicNormalizer {
 public:
  IntrinsicNormalizer(int workers, double gamma, bool episodic,
                      double floor = kVarianceFloor);

  // bonuses and dones are T x W (row = timestep). Advances the return
  // accumulators, folds them into the running moments, then divides.
  Matrix normalize(const Matrix& bonuses, const Matrix& dones);
  // Division by the current estimate without updating it.
  Matrix divide(const Matrix& bonuses) const;
  double divisor() const;
  const RunningMoments& moments() const { return moments_; }
  std::uint64_t updates() const { return updates_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

  // Test hook: overwrite the running moments directly.
  void set_moments(const RunningMoments& m) { moments_ = m; }

 private:
  double gamma_;
  bool episodic_;
  double floor_;
  std::vector<double> acc_;
  RunningMoments moments_;
  std::uint64_t updates_ = 0;
};

// Visit-count bonus 1/sqrt(N(obs)) over binarized observations.
class CountTable {
 public:
  // Increments the count of obs and returns 1/sqrt(count).
  double bonus(std::span<const double> obs);
  std::uint64_t count(std::span<const double> obs) const;
  std::size_t distinct() const { return counts_.size(); }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  static std::string key(std::span<const double> obs);
  std::unordered_map<std::string, std::uint64_t> counts_;
};

struct RndConfig {
  int obs_dim = 100;
  int hidden = 64;
  int embedding = 32;
  double drop_probability = 0.25;
  double learning_rate = 1e-4;
  std::uint64_t init_seed = 0;
  std::uint64_t dropout_seed = 0;
};

// Random network distillation: a frozen random target network and a
// trainable predictor; the bonus is their squared embedding distance.
class Rnd {
 public:
  explicit Rnd(const RndConfig& config);

  // Inputs are expected to be normalized by an ObsNormalizer.
  double bonus(std::span<const double> obs) const;
  Vector bonus(const Matrix& obs) const;

  struct UpdateStats {
    std::size_t retained = 0;
    double loss = 0.0;
  };
  // One optimizer step on the mean squared embedding error over the
  // samples retained by the dropout mask. Throws UsageError on an empty
  // batch.
  UpdateStats update(const Matrix& obs);

  // Mean squared embedding error over the given rows (the predictor loss).
  funcapprox::Var predictor_loss(funcapprox::Tape& tape,
                                 const funcapprox::ParamVector& predictor,
                                 const Matrix& obs) const;

  const funcapprox::ParamVector& target_params() const { return target_params_; }
  const funcapprox::ParamVector& predictor_params() const { return predictor_params_; }
  funcapprox::ParamVector& predictor_params() { return predictor_params_; }
  void set_drop_probability(double p) { drop_probability_ = p; }
  double drop_probability() const { return drop_probability_; }

  void save(ByteWriter& w) const;
  void load(ByteReader& r);

 private:
  funcapprox::ParamVector target_params_;
  funcapprox::ParamVector predictor_params_;
  funcapprox::Mlp target_;
  funcapprox::Mlp predictor_;
  funcapprox::Adam optimizer_;
  Rng dropout_rng_;
  double drop_probability_;
};

}  // namespace eipolab::intrinsic

#endif  // EIPOLAB_INTRINSIC_HPP_
