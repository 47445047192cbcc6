#include "eipolab/eipo.hpp"

#include <algorithm>
#include <cmath>

namespace eipolab::eipo {

using funcapprox::Tape;
using funcapprox::Var;

double clipped_term(double ratio, double u, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * u, clipped * u);
}

Var clipped_surrogate(Var logp_new, const Vector& logp_old, const Vector& payoff,
                      double eps) {
  Tape& t = *logp_new.tape;
  Var old = t.constant(Matrix(logp_old));
  Var u = t.constant(Matrix(payoff));
  Var ratio = funcapprox::exp(funcapprox::sub(logp_new, old));
  Var unclipped = funcapprox::mul(ratio, u);
  Var clipped = funcapprox::mul(funcapprox::clip(ratio, 1.0 - eps, 1.0 + eps), u);
  return funcapprox::mean(funcapprox::minimum(unclipped, clipped));
}

namespace {

Vector take(const Matrix& m, std::span<const std::size_t> index) {
  // T x W matrices are addressed by flat row index t * W + w.
  const auto W = m.cols();
  Vector out(static_cast<Eigen::Index>(index.size()));
  for (std::size_t k = 0; k < index.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(index[k]);
    out(static_cast<Eigen::Index>(k)) = m(i / W, i % W);
  }
  return out;
}

void ratio_stats(const Vector& logp_new, const Vector& logp_old, double eps,
                 SurrogateReport* report) {
  if (report == nullptr || logp_new.size() == 0) return;
  const Vector ratio = (logp_new - logp_old).array().exp().matrix();
  report->mean_ratio = ratio.mean();
  report->clip_fraction =
      static_cast<double>(((ratio.array() - 1.0).abs() > eps).count()) /
      static_cast<double>(ratio.size());
}

Var stage_loss(Tape& tape, const funcapprox::PolicyPair& pair,
               const funcapprox::ParamVector& params, const Samples& s,
               const LossConfig& cfg, Stage stage, SurrogateReport* report) {
  using namespace funcapprox;
  const bool max = stage == Stage::kMax;
  const BehaviorPolicy want = max ? BehaviorPolicy::kExtrinsic : BehaviorPolicy::kMixed;
  if (s.behavior != want) {
    throw UsageError(std::string(max ? "max" : "min") +
                     "-stage loss requires a batch collected by the " +
                     std::string(estimation::to_string(want)) + " policy");
  }
  PolicyVars out = pair.forward(tape, params, tape.constant(s.obs));
  Var lp_e = pick(log_softmax(out.logits_e), s.actions);
  Var lp_ei = pick(log_softmax(out.logits_ei), s.actions);

  // The primary ratio moves the head that is not collecting; the auxiliary
  // ratio is plain PPO on the collecting head.
  const Vector& old = max ? s.logp_e_old : s.logp_ei_old;
  Var primary_logp = max ? lp_ei : lp_e;
  Var aux_logp = max ? lp_e : lp_ei;
  const Vector& aux_adv = max ? s.a_e : s.a_ei;
  const Vector& ret = max ? s.ret_e : s.ret_ei;
  Var value = max ? out.v_e : out.v_ei;

  Var primary = clipped_surrogate(primary_logp, old, s.payoff, cfg.clip_ratio);
  Var aux = clipped_surrogate(aux_logp, old, aux_adv, cfg.clip_ratio);
  Var value_loss = mean(square(sub(value, tape.constant(Matrix(ret)))));
  Var ent = add(mean(entropy(out.logits_e)), mean(entropy(out.logits_ei)));
  tape.tag(primary, "primary_surrogate");
  tape.tag(aux, "auxiliary_surrogate");
  tape.tag(value_loss, "value_loss");
  tape.tag(ent, "entropy");

  Var loss = add(scale(add(primary, aux), -1.0),
                 sub(scale(value_loss, cfg.value_weight), scale(ent, cfg.entropy_weight)));
  if (report != nullptr) {
    report->primary = primary.scalar();
    report->auxiliary = aux.scalar();
    report->value_loss = value_loss.scalar();
    report->entropy = ent.scalar();
    ratio_stats(Vector(primary_logp.value().col(0)), old, cfg.clip_ratio, report);
  }
  return loss;
}

}  // namespace

Samples gather(const estimation::RolloutBatch& batch,
               const estimation::AdvantageSet& adv, Stage stage,
               std::span<const std::size_t> index) {
  Samples s;
  s.behavior = batch.behavior;
  s.obs.resize(static_cast<Eigen::Index>(index.size()), batch.observations.cols());
  s.actions.resize(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) {
    s.obs.row(static_cast<Eigen::Index>(k)) =
        batch.observations.row(static_cast<Eigen::Index>(index[k]));
    s.actions[k] = batch.actions[index[k]];
  }
  s.logp_e_old = take(batch.logp_e, index);
  s.logp_ei_old = take(batch.logp_ei, index);
  s.payoff = take(stage == Stage::kMax ? adv.u_max : adv.u_min, index);
  s.a_e = take(adv.a_e, index);
  s.a_ei = take(adv.a_ei, index);
  s.ret_e = take(adv.ret_e, index);
  s.ret_ei = take(adv.ret_ei, index);
  return s;
}

Samples gather_all(const estimation::RolloutBatch& batch,
                   const estimation::AdvantageSet& adv, Stage stage) {
  std::vector<std::size_t> idx(batch.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return gather(batch, adv, stage, idx);
}

Var max_stage_loss(Tape& tape, const funcapprox::PolicyPair& pair,
                   const funcapprox::ParamVector& params, const Samples& s,
                   const LossConfig& cfg, SurrogateReport* report) {
  return stage_loss(tape, pair, params, s, cfg, Stage::kMax, report);
}

Var min_stage_loss(Tape& tape, const funcapprox::PolicyPair& pair,
                   const funcapprox::ParamVector& params, const Samples& s,
                   const LossConfig& cfg, SurrogateReport* report) {
  return stage_loss(tape, pair, params, s, cfg, Stage::kMin, report);
}

namespace {

LossValue whole_batch(const estimation::RolloutBatch& batch,
                      const funcapprox::PolicyPair& pair,
                      const estimation::AdvantageOptions& options,
                      const LossConfig& cfg, Stage stage) {
  const auto adv = estimation::compute_advantages(batch, options);
  const Samples s = gather_all(batch, adv, stage);
  LossValue out;
  Tape tape;
  Var loss = stage_loss(tape, pair, pair.params(), s, cfg, stage, &out.report);
  out.loss = loss.scalar();
  if (stage == Stage::kMax) {
    out.report.j_gap = estimate_j_gap(pair, s.obs, s.actions, s.a_e, cfg.clip_ratio);
  }
  return out;
}

}  // namespace

LossValue max_stage_loss(const estimation::RolloutBatch& batch,
                         const funcapprox::PolicyPair& pair,
                         const estimation::AdvantageOptions& options,
                         const LossConfig& cfg) {
  return whole_batch(batch, pair, options, cfg, Stage::kMax);
}

LossValue min_stage_loss(const estimation::RolloutBatch& batch,
                         const funcapprox::PolicyPair& pair,
                         const estimation::AdvantageOptions& options,
                         const LossConfig& cfg) {
  return whole_batch(batch, pair, options, cfg, Stage::kMin);
}

namespace {

Vector picked_logp(const Matrix& logits, std::span<const int> actions) {
  const Matrix lp = funcapprox::log_softmax_rows(logits);
  Vector out(lp.rows());
  for (Eigen::Index i = 0; i < lp.rows(); ++i) out(i) = lp(i, actions[static_cast<std::size_t>(i)]);
  return out;
}

double mean_clipped(const Vector& ratio, const Vector& u, double eps) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ratio.size(); ++i) acc += clipped_term(ratio(i), u(i), eps);
  return ratio.size() == 0 ? 0.0 : acc / static_cast<double>(ratio.size());
}

}  // namespace

double primary_surrogate(const funcapprox::PolicyPair& pair, const Samples& s,
                         Stage stage, double eps) {
  const auto out = pair.forward(s.obs);
  const bool max = stage == Stage::kMax;
  const Vector lp = picked_logp(max ? out.logits_ei : out.logits_e, s.actions);
  const Vector& old = max ? s.logp_e_old : s.logp_ei_old;
  const Vector ratio = (lp - old).array().exp().matrix();
  return mean_clipped(ratio, s.payoff, eps);
}

double estimate_j_gap(const funcapprox::PolicyPair& pair, const Matrix& obs,
                      std::span<const int> actions, const Vector& a_e,
                      double eps) {
  const auto out = pair.forward(obs);
  const Vector lp_e = picked_logp(out.logits_e, actions);
  const Vector lp_ei = picked_logp(out.logits_ei, actions);
  const Vector ratio = (lp_ei - lp_e).array().exp().matrix();
  return mean_clipped(ratio, a_e, eps);
}

void AlphaState::update(double gap) {
  const double d = std::clamp(gap, -derivative_clip, derivative_clip);
  alpha -= step_size * d;
  if (clamp_nonnegative) alpha = std::max(alpha, 0.0);
  history.push_back(alpha);
}

void AlphaState::save(ByteWriter& w) const {
  w.f64(alpha);
  w.f64(step_size);
  w.f64(derivative_clip);
  w.boolean(clamp_nonnegative);
  w.f64s(history);
}

void AlphaState::load(ByteReader& r) {
  alpha = r.f64();
  step_size = r.f64();
  derivative_clip = r.f64();
  clamp_nonnegative = r.boolean();
  history = r.f64s();
}

bool StageState::switch_stage(double j) {
  ++current_length;
  const double delta = j - j_prev;
  j_prev = j;
  if (current_length < min_stage_length) return max_stage;
  const bool next = max_stage ? !(delta <= 0.0) : (delta >= 0.0);
  if (next != max_stage) {
    stage_lengths.push_back(current_length);
    current_length = 0;
    max_stage = next;
  }
  return max_stage;
}

void StageState::save(ByteWriter& w) const {
  w.boolean(max_stage);
  w.f64(j_prev);
  w.i64(current_length);
  w.i64(min_stage_length);
  w.u64(stage_lengths.size());
  for (int l : stage_lengths) w.i64(l);
}

void StageState::load(ByteReader& r) {
  max_stage = r.boolean();
  j_prev = r.f64();
  current_length = static_cast<int>(r.i64());
  min_stage_length = static_cast<int>(r.i64());
  stage_lengths.resize(r.u64());
  for (auto& l : stage_lengths) l = static_cast<int>(r.i64());
}

}  // namespace eipolab::eipo
