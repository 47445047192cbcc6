#include "eipolab/intrinsic.hpp"

#include <algorithm>
#include <cmath>

namespace eipolab::intrinsic {

// --- RunningMoments ----------------------------------------------------------

void RunningMoments::update(std::span<const double> batch) {
  if (batch.empty()) return;
  const double n = static_cast<double>(batch.size());
  double bmean = 0.0;
  for (double x : batch) bmean += x;
  bmean /= n;
  double bvar = 0.0;
  for (double x : batch) bvar += (x - bmean) * (x - bmean);
  bvar /= n;
  const double total = count_ + n;
  const double delta = bmean - mean_;
  const double m2 = var_ * count_ + bvar * n + delta * delta * count_ * n / total;
  mean_ += delta * n / total;
  var_ = m2 / total;
  count_ = total;
}

void RunningMoments::save(ByteWriter& w) const {
  w.f64(count_);
  w.f64(mean_);
  w.f64(var_);
}

void RunningMoments::load(ByteReader& r) {
  count_ = r.f64();
  mean_ = r.f64();
  var_ = r.f64();
}

// --- ObsNormalizer ------------------------------------------------------------

ObsNormalizer::ObsNormalizer(int dim, double clip)
    : clip_(clip), mean_(Vector::Zero(dim)), var_(Vector::Ones(dim)) {}

void ObsNormalizer::update(const Matrix& batch) {
  if (batch.rows() == 0) return;
  if (batch.cols() != mean_.size()) throw UsageError("observation width mismatch");
  const double n = static_cast<double>(batch.rows());
  const Vector bmean = batch.colwise().mean().transpose();
  const Vector bvar =
      (batch.rowwise() - bmean.transpose()).array().square().colwise().sum().transpose() / n;
  if (count_ == 0.0) {
    mean_ = bmean;
    var_ = bvar;
    count_ = n;
    return;
  }
  const double total = count_ + n;
  const Vector delta = bmean - mean_;
  const Vector m2 = var_ * count_ + bvar * n +
                    (delta.array().square() * (count_ * n / total)).matrix();
  mean_ += delta * (n / total);
  var_ = m2 / total;
  count_ = total;
}

Matrix ObsNormalizer::normalize(const Matrix& batch) const {
  const Vector inv_std =
      var_.cwiseMax(kVarianceFloor).cwiseSqrt().cwiseInverse();
  Matrix out = (batch.rowwise() - mean_.transpose()).array().rowwise() *
               inv_std.transpose().array();
  return out.cwiseMax(-clip_).cwiseMin(clip_);
}

void ObsNormalizer::save(ByteWriter& w) const {
  w.f64(clip_);
  w.f64(count_);
  w.f64s({mean_.data(), static_cast<std::size_t>(mean_.size())});
  w.f64s({var_.data(), static_cast<std::size_t>(var_.size())});
}

void ObsNormalizer::load(ByteReader& r) {
  clip_ = r.f64();
  count_ = r.f64();
  r.f64s_into({mean_.data(), static_cast<std::size_t>(mean_.size())});
  r.f64s_into({var_.data(), static_cast<std::size_t>(var_.size())});
}

// --- ExtrinsicNormalizer ------------------------------------------------------

ExtrinsicNormalizer::ExtrinsicNormalizer(int workers, double gamma, double floor)
    : gamma_(gamma), floor_(floor) {
  if (workers < 2) {
    throw ConfigError(
        "extrinsic normalization needs >= 2 workers (cross-worker std)");
  }
  acc_.assign(static_cast<std::size_t>(workers), 0.0);
}

std::vector<double> ExtrinsicNormalizer::normalize(std::span<const double> rewards) {
  if (rewards.size() != acc_.size()) {
    throw UsageError("normalize_extrinsic: reward count != worker count");
  }
  for (std::size_t w = 0; w < acc_.size(); ++w) acc_[w] = gamma_ * acc_[w] + rewards[w];
  const double n = static_cast<double>(acc_.size());
  double mean = 0.0;
  for (double a : acc_) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : acc_) var += (a - mean) * (a - mean);
  var /= n;
  last_divisor_ = std::max(std::sqrt(var), floor_);
  std::vector<double> out(rewards.size());
  for (std::size_t w = 0; w < out.size(); ++w) out[w] = rewards[w] / last_divisor_;
  return out;
}

void ExtrinsicNormalizer::save(ByteWriter& w) const {
  w.f64s(acc_);
  w.f64(last_divisor_);
}

void ExtrinsicNormalizer::load(ByteReader& r) {
  r.f64s_into(acc_);
  last_divisor_ = r.f64();
}

// --- IntrinsicNormalizer ------------------------------------------------------

IntrinsicNormalizer::IntrinsicNormalizer(int workers, double gamma, bool episodic,
                                         double floor)
    : gamma_(gamma), episodic_(episodic), floor_(floor),
      acc_(static_cast<std::size_t>(workers), 0.0) {}

Matrix IntrinsicNormalizer::normalize(const Matrix& bonuses, const Matrix& dones) {
  if (bonuses.cols() != static_cast<Eigen::Index>(acc_.size()) ||
      dones.rows() != bonuses.rows() || dones.cols() != bonuses.cols()) {
    throw UsageError("normalize_intrinsic: block shape mismatch");
  }
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(bonuses.size()));
  for (Eigen::Index t = 0; t < bonuses.rows(); ++t) {
    for (Eigen::Index w = 0; w < bonuses.cols(); ++w) {
      auto& a = acc_[static_cast<std::size_t>(w)];
      a = gamma_ * a + bonuses(t, w);
      returns.push_back(a);
      if (episodic_ && dones(t, w) != 0.0) a = 0.0;
    }
  }
  moments_.update(returns);
  ++updates_;
  return divide(bonuses);
}

double IntrinsicNormalizer::divisor() const {
  return std::max(std::sqrt(moments_.variance()), floor_);
}

Matrix IntrinsicNormalizer::divide(const Matrix& bonuses) const {
  return bonuses / divisor();
}

void IntrinsicNormalizer::save(ByteWriter& w) const {
  w.f64s(acc_);
  moments_.save(w);
  w.u64(updates_);
}

void IntrinsicNormalizer::load(ByteReader& r) {
  r.f64s_into(acc_);
  moments_.load(r);
  updates_ = r.u64();
}

// --- CountTable ---------------------------------------------------------------

std::string CountTable::key(std::span<const double> obs) {
  std::string k((obs.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i] > 0.5) k[i / 8] = static_cast<char>(k[i / 8] | (1 << (i % 8)));
  }
  return k;
}

double CountTable::bonus(std::span<const double> obs) {
  const auto n = ++counts_[key(obs)];
  return 1.0 / std::sqrt(static_cast<double>(n));
}

std::uint64_t CountTable::count(std::span<const double> obs) const {
  auto it = counts_.find(key(obs));
  return it == counts_.end() ? 0 : it->second;
}

void CountTable::save(ByteWriter& w) const {
  std::vector<std::pair<std::string, std::uint64_t>> items(counts_.begin(), counts_.end());
  std::sort(items.begin(), items.end());
  w.u64(items.size());
  for (const auto& [k, n] : items) {
    w.str(k);
    w.u64(n);
  }
}

void CountTable::load(ByteReader& r) {
  counts_.clear();
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto k = r.str();
    counts_[k] = r.u64();
  }
}

// --- Rnd ----------------------------------------------------------------------

Rnd::Rnd(const RndConfig& config)
    : dropout_rng_(config.dropout_seed), drop_probability_(config.drop_probability) {
  if (config.drop_probability < 0.0 || config.drop_probability > 1.0) {
    throw ConfigError("RND drop probability must lie in [0, 1]");
  }
  const std::vector<int> sizes{config.obs_dim, config.hidden, config.hidden,
                               config.embedding};
  target_ = funcapprox::Mlp(target_params_, "rnd", sizes,
                            funcapprox::Activation::kRelu,
                            funcapprox::Activation::kIdentity);
  predictor_ = funcapprox::Mlp(predictor_params_, "rnd", sizes,
                               funcapprox::Activation::kRelu,
                               funcapprox::Activation::kIdentity);
  Rng rng(config.init_seed);
  const double root2 = std::sqrt(2.0);
  target_.init(target_params_, rng, root2, 1.0);
  predictor_.init(predictor_params_, rng, root2, 1.0);
  optimizer_ = funcapprox::Adam(predictor_params_.size(),
                                {.learning_rate = config.learning_rate});
}

double Rnd::bonus(std::span<const double> obs) const {
  Matrix row(1, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = obs[i];
  return bonus(row)(0);
}

Vector Rnd::bonus(const Matrix& obs) const {
  const Matrix diff = predictor_.forward(predictor_params_, obs) -
                      target_.forward(target_params_, obs);
  return diff.rowwise().squaredNorm();
}

funcapprox::Var Rnd::predictor_loss(funcapprox::Tape& tape,
                                    const funcapprox::ParamVector& predictor,
                                    const Matrix& obs) const {
  using namespace funcapprox;
  Var target = tape.constant(target_.forward(target_params_, obs));
  Var pred = predictor_.forward(tape, predictor, tape.constant(obs));
  Var loss = mean(square(sub(pred, target)));
  tape.tag(loss, "rnd_predictor_loss");
  return loss;
}

Rnd::UpdateStats Rnd::update(const Matrix& obs) {
  if (obs.rows() == 0) throw UsageError("rnd_update: empty batch");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < obs.rows(); ++i) {
    if (uniform01(dropout_rng_) >= drop_probability_) keep.push_back(i);
  }
  if (keep.empty()) return {};
  Matrix kept(static_cast<Eigen::Index>(keep.size()), obs.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) kept.row(static_cast<Eigen::Index>(k)) = obs.row(keep[k]);
  auto vg = funcapprox::value_and_grad(
      [&](funcapprox::Tape& t, const funcapprox::ParamVector& p) {
        return predictor_loss(t, p, kept);
      },
      predictor_params_);
  optimizer_.step(predictor_params_, vg.grad);
  return {keep.size(), vg.value};
}

void Rnd::save(ByteWriter& w) const {
  funcapprox::save_params(w, target_params_);
  funcapprox::save_params(w, predictor_params_);
  optimizer_.save(w);
  w.rng(dropout_rng_);
  w.f64(drop_probability_);
}

void Rnd::load(ByteReader& r) {
  funcapprox::load_params(r, target_params_);
  funcapprox::load_params(r, predictor_params_);
  optimizer_.load(r);
  r.rng(dropout_rng_);
  drop_probability_ = r.f64();
}

}  // namespace eipolab::intrinsic
