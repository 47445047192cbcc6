#include "eipolab/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace eipolab::baselines {

using funcapprox::Matrix;
using funcapprox::Tape;
using funcapprox::Var;

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 7> kNames{{
    {Variant::kEO, "EO"},
    {Variant::kRND, "RND"},
    {Variant::kExtNormRND, "EXT_NORM_RND"},
    {Variant::kDecayRND, "DECAY_RND"},
    {Variant::kDecoupledRND, "DECOUPLED_RND"},
    {Variant::kEipoRND, "EIPO_RND"},
    {Variant::kEipoCount, "EIPO_COUNT"},
}};

}  // namespace

std::string_view to_string(Variant v) {
  for (const auto& [k, name] : kNames) {
    if (k == v) return name;
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown algorithm variant '" + std::string(name) + "'");
}

bool is_eipo(Variant v) { return v == Variant::kEipoRND || v == Variant::kEipoCount; }
bool uses_counts(Variant v) { return v == Variant::kEipoCount; }
bool uses_rnd(Variant v) { return v != Variant::kEO && v != Variant::kEipoCount; }
bool uses_intrinsic(Variant v) { return v != Variant::kEO; }

void AlgorithmConfig::validate() const {
  const std::string name(to_string(variant));
  auto require = [&](bool present, const char* field, bool wanted) {
    if (present && !wanted) {
      throw ConfigError("algorithm." + std::string(field) + " is not used by variant " + name);
    }
    if (!present && wanted) {
      throw ConfigError("algorithm." + std::string(field) + " is required by variant " + name);
    }
  };
  const bool decay = variant == Variant::kDecayRND;
  const bool wants_lambda = uses_intrinsic(variant) && !decay;
  require(lambda.has_value(), "lambda", wants_lambda);
  require(lambda_min.has_value(), "lambda_min", decay);
  require(lambda_max.has_value(), "lambda_max", decay);
  require(decay_iterations.has_value(), "decay_iterations", decay);
  require(kl_weight.has_value(), "kl_weight", variant == Variant::kDecoupledRND);
  if (decay_printed_formula && !decay) {
    throw ConfigError("algorithm.decay_printed_formula is not used by variant " + name);
  }
  if (lambda && (!std::isfinite(*lambda) || *lambda < 0.0)) {
    throw ConfigError("algorithm.lambda must be finite and >= 0");
  }
  if (decay) {
    if (*decay_iterations <= 0) throw ConfigError("algorithm.decay_iterations must be > 0");
    if (!(*lambda_min <= *lambda_max)) {
      throw ConfigError("algorithm.lambda_min must not exceed algorithm.lambda_max");
    }
  }
  if (kl_weight && (!std::isfinite(*kl_weight) || *kl_weight < 0.0)) {
    throw ConfigError("algorithm.kl_weight must be finite and >= 0");
  }
}

void AlgorithmConfig::fill_defaults(int total_iterations) {
  const bool decay = variant == Variant::kDecayRND;
  if (uses_intrinsic(variant) && !decay && !lambda) lambda = 1.0;
  if (decay) {
    if (!lambda_max) lambda_max = 1.0;
    if (!lambda_min) lambda_min = 0.0;
    if (!decay_iterations) decay_iterations = std::max(1, total_iterations / 2);
  }
  if (variant == Variant::kDecoupledRND && !kl_weight) kl_weight = 1.0;
}

double AlgorithmConfig::lambda_at(int iteration) const {
  if (variant == Variant::kDecayRND) {
    return decay_printed_formula
               ? decay_lambda_printed(iteration, *decay_iterations, *lambda_min, *lambda_max)
               : decay_lambda(iteration, *decay_iterations, *lambda_min, *lambda_max);
  }
  return lambda.value_or(0.0);
}

namespace {

void check_schedule(int I, double lo, double hi) {
  if (I <= 0) throw ConfigError("decay schedule needs I > 0");
  if (!(lo <= hi)) throw ConfigError("decay schedule needs lambda_min <= lambda_max");
}

}  // namespace

double decay_lambda(int i, int I, double lambda_min, double lambda_max) {
  check_schedule(I, lambda_min, lambda_max);
  const double frac = static_cast<double>(i) / static_cast<double>(I);
  return std::clamp(lambda_max - frac * (lambda_max - lambda_min), lambda_min, lambda_max);
}

double decay_lambda_printed(int i, int I, double lambda_min, double lambda_max) {
  check_schedule(I, lambda_min, lambda_max);
  const double frac = static_cast<double>(i) / static_cast<double>(I);
  return std::clamp(frac * (lambda_max - lambda_min), lambda_min, lambda_max);
}

double kl_divergence(std::span<const double> logits_p, std::span<const double> logits_q) {
  if (logits_p.size() != logits_q.size()) throw UsageError("kl_divergence: size mismatch");
  auto lse = [](std::span<const double> x) {
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
  };
  const double zp = lse(logits_p);
  const double zq = lse(logits_q);
  double kl = 0.0;
  for (std::size_t a = 0; a < logits_p.size(); ++a) {
    const double lp = logits_p[a] - zp;
    const double lq = logits_q[a] - zq;
    kl += std::exp(lp) * (lp - lq);
  }
  return std::max(kl, 0.0);
}

namespace {

void fill_ratio_stats(Var logp, const funcapprox::Vector& old, double eps,
                      eipo::SurrogateReport* report) {
  if (report == nullptr || old.size() == 0) return;
  const auto ratio = (logp.value().col(0) - old).array().exp();
  report->mean_ratio = ratio.mean();
  report->clip_fraction = static_cast<double>(((ratio - 1.0).abs() > eps).count()) /
                          static_cast<double>(old.size());
}

}  // namespace

Var single_head_loss(Tape& tape, const funcapprox::PolicyPair& pair,
                     const funcapprox::ParamVector& params, const eipo::Samples& s,
                     const eipo::LossConfig& cfg, eipo::SurrogateReport* report) {
  using namespace funcapprox;
  PolicyVars out = pair.forward(tape, params, tape.constant(s.obs));
  Var lp_e = pick(log_softmax(out.logits_e), s.actions);
  Var surrogate = eipo::clipped_surrogate(lp_e, s.logp_e_old, s.a_e, cfg.clip_ratio);
  Var value_loss = mean(square(sub(out.v_e, tape.constant(Matrix(s.ret_e)))));
  Var ent = mean(entropy(out.logits_e));
  tape.tag(surrogate, "surrogate");
  tape.tag(value_loss, "value_loss");
  tape.tag(ent, "entropy");
  Var loss = add(scale(surrogate, -1.0),
                 sub(scale(value_loss, cfg.value_weight), scale(ent, cfg.entropy_weight)));
  if (report != nullptr) {
    report->primary = surrogate.scalar();
    report->value_loss = value_loss.scalar();
    report->entropy = ent.scalar();
    fill_ratio_stats(lp_e, s.logp_e_old, cfg.clip_ratio, report);
  }
  return loss;
}

Var decoupled_losses(Tape& tape, const funcapprox::PolicyPair& pair,
                     const funcapprox::ParamVector& params, const eipo::Samples& s,
                     const eipo::LossConfig& cfg, eipo::SurrogateReport* report) {
  using namespace funcapprox;
  if (s.behavior != estimation::BehaviorPolicy::kMixed) {
    throw UsageError("decoupled losses require a batch collected by the mixed policy");
  }
  PolicyVars out = pair.forward(tape, params, tape.constant(s.obs));
  Var lp_e = pick(log_softmax(out.logits_e), s.actions);
  Var lp_ei = pick(log_softmax(out.logits_ei), s.actions);
  Var mixed = eipo::clipped_surrogate(lp_ei, s.logp_ei_old, s.a_ei, cfg.clip_ratio);
  Var extrinsic = eipo::clipped_surrogate(lp_e, s.logp_e_old, s.a_e, cfg.clip_ratio);
  Var value_loss = add(mean(square(sub(out.v_ei, tape.constant(Matrix(s.ret_ei))))),
                       mean(square(sub(out.v_e, tape.constant(Matrix(s.ret_e))))));
  Var ent = add(mean(entropy(out.logits_e)), mean(entropy(out.logits_ei)));
  tape.tag(mixed, "mixed_surrogate");
  tape.tag(extrinsic, "extrinsic_surrogate");
  tape.tag(value_loss, "value_loss");
  tape.tag(ent, "entropy");
  Var loss = add(scale(add(mixed, extrinsic), -1.0),
                 sub(scale(value_loss, cfg.value_weight), scale(ent, cfg.entropy_weight)));
  if (report != nullptr) {
    report->primary = mixed.scalar();
    report->auxiliary = extrinsic.scalar();
    report->value_loss = value_loss.scalar();
    report->entropy = ent.scalar();
    fill_ratio_stats(lp_ei, s.logp_ei_old, cfg.clip_ratio, report);
  }
  return loss;
}

}  // namespace eipolab::baselines
