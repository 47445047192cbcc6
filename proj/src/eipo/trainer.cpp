#include "eipolab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eipolab {

using baselines::Variant;
using estimation::BehaviorPolicy;
using funcapprox::Matrix;
using funcapprox::Vector;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_double(double x) { return config::format_double(x); }

double median(std::vector<double> xs) {
  if (xs.empty()) return kNaN;
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid), xs.end());
  const double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<long>(mid));
  return 0.5 * (lo + hi);
}

// The run-level keys that may differ between a checkpoint and the run that
// resumes it.
config::RunConfig resume_identity(config::RunConfig c) {
  const config::RunConfig defaults;
  c.name = defaults.name;
  c.output_dir = defaults.output_dir;
  c.seeds = defaults.seeds;
  c.iterations = defaults.iterations;
  c.checkpoint_every = defaults.checkpoint_every;
  return c;
}

}  // namespace

// --- rows -----------------------------------------------------------------------

void MetricsRow::save(ByteWriter& w) const {
  w.i64(iteration);
  w.str(variant);
  w.u64(frames);
  w.str(behavior);
  w.boolean(max_stage);
  w.f64(alpha);
  w.boolean(alpha_updated);
  w.f64s(std::vector<double>{gap, j, mean_ext_return, median_ext_return,
                             mean_raw_intrinsic, mean_intrinsic, lambda, primary,
                             auxiliary, value_loss, entropy, clip_fraction, mean_ratio,
                             grad_norm, rnd_loss, ext_divisor, mean_kl});
  w.i64(episodes);
}

void MetricsRow::load(ByteReader& r) {
  iteration = static_cast<int>(r.i64());
  variant = r.str();
  frames = r.u64();
  behavior = r.str();
  max_stage = r.boolean();
  alpha = r.f64();
  alpha_updated = r.boolean();
  const auto v = r.f64s();
  if (v.size() != 17) throw UsageError("checkpoint metrics row has the wrong width");
  gap = v[0];
  j = v[1];
  mean_ext_return = v[2];
  median_ext_return = v[3];
  mean_raw_intrinsic = v[4];
  mean_intrinsic = v[5];
  lambda = v[6];
  primary = v[7];
  auxiliary = v[8];
  value_loss = v[9];
  entropy = v[10];
  clip_fraction = v[11];
  mean_ratio = v[12];
  grad_norm = v[13];
  rnd_loss = v[14];
  ext_divisor = v[15];
  mean_kl = v[16];
  episodes = static_cast<int>(r.i64());
}

std::vector<std::string> metrics_header(Variant variant) {
  std::vector<std::string> h{"schema", "iteration", "variant", "frames", "behavior"};
  if (baselines::is_eipo(variant)) {
    h.insert(h.end(), {"stage", "alpha", "alpha_updated", "gap", "j"});
  }
  h.insert(h.end(), {"episodes", "mean_ext_return", "median_ext_return_last100",
                     "mean_raw_intrinsic", "mean_intrinsic", "lambda", "primary_objective",
                     "auxiliary_objective", "value_loss", "entropy", "clip_fraction",
                     "mean_ratio", "grad_norm", "rnd_loss", "ext_divisor", "mean_kl"});
  return h;
}

std::vector<std::string> metrics_fields(const MetricsRow& r, Variant variant) {
  std::vector<std::string> f{std::to_string(kMetricsSchemaVersion), std::to_string(r.iteration),
                             r.variant, std::to_string(r.frames), r.behavior};
  if (baselines::is_eipo(variant)) {
    f.insert(f.end(), {r.max_stage ? "max" : "min", fmt_double(r.alpha),
                       r.alpha_updated ? "1" : "0", fmt_double(r.gap), fmt_double(r.j)});
  }
  for (double x : {r.mean_ext_return, r.median_ext_return, r.mean_raw_intrinsic,
                   r.mean_intrinsic, r.lambda, r.primary, r.auxiliary, r.value_loss,
                   r.entropy, r.clip_fraction, r.mean_ratio, r.grad_norm, r.rnd_loss,
                   r.ext_divisor, r.mean_kl}) {
    f.push_back(fmt_double(x));
  }
  f.insert(f.begin() + (baselines::is_eipo(variant) ? 10 : 5), std::to_string(r.episodes));
  return f;
}

std::vector<std::string> episodes_header() {
  return {"iteration", "worker", "behavior", "extrinsic_return", "length"};
}

std::vector<std::string> episode_fields(const EpisodeRecord& e) {
  return {std::to_string(e.iteration), std::to_string(e.worker), e.behavior,
          fmt_double(e.extrinsic_return), std::to_string(e.length)};
}

// --- state ----------------------------------------------------------------------

struct Trainer::State {
  config::RunConfig cfg;
  std::uint64_t seed;
  Variant variant;
  gridworld::GridSpec spec;
  gridworld::VecEnv env;
  funcapprox::PolicyPair pair;
  funcapprox::Adam optimizer;
  std::optional<intrinsic::Rnd> rnd;
  intrinsic::ObsNormalizer obs_norm;
  std::optional<intrinsic::CountTable> counts;
  intrinsic::IntrinsicNormalizer int_norm;
  std::optional<intrinsic::ExtrinsicNormalizer> ext_norm;
  Rng policy_rng;
  Rng minibatch_rng;
  eipo::AlphaState alpha;
  eipo::StageState stage;
  int iteration = 0;
  std::uint64_t frames = 0;
  std::vector<MetricsRow> metrics;
  std::vector<EpisodeRecord> episodes;

  State(const config::RunConfig& c, std::uint64_t s)
      : cfg(c),
        seed(s),
        variant(c.algorithm.variant),
        spec(c.environment.make_spec()),
        env(spec, c.ppo.workers, s),
        pair(gridworld::kObsSize, gridworld::kNumActions, derive_seed(s, Stream::kInit),
             c.ppo.hidden),
        optimizer(pair.params().size(),
                  {.learning_rate = c.ppo.learning_rate, .max_grad_norm = c.ppo.max_grad_norm}),
        obs_norm(gridworld::kObsSize),
        int_norm(c.ppo.workers, c.ppo.gamma, c.intrinsic.episodic),
        policy_rng(derive_seed(s, Stream::kPolicySampling)),
        minibatch_rng(derive_seed(s, Stream::kMinibatch)) {
    alpha.alpha = c.eipo.alpha_init;
    alpha.step_size = c.eipo.alpha_step;
    alpha.derivative_clip = c.eipo.alpha_clip;
    alpha.clamp_nonnegative = c.eipo.clamp_nonnegative;
    stage.min_stage_length = c.eipo.min_stage_length;
    if (variant == Variant::kExtNormRND) {
      ext_norm.emplace(c.ppo.workers, c.ppo.gamma);
    }
    if (baselines::uses_counts(variant)) counts.emplace();
    if (baselines::uses_rnd(variant)) {
      rnd.emplace(intrinsic::RndConfig{
          .obs_dim = gridworld::kObsSize,
          .hidden = c.intrinsic.hidden,
          .embedding = c.intrinsic.embedding,
          .drop_probability = c.intrinsic.drop_probability,
          .learning_rate = c.intrinsic.learning_rate,
          .init_seed = derive_seed(s, Stream::kRndInit),
          .dropout_seed = derive_seed(s, Stream::kRndDropout)});
      warmup();
    }
  }

  // Random-policy steps on a separate environment copy so the training
  // environment streams match the variants without RND.
  void warmup() {
    const int steps = cfg.intrinsic.obs_warmup_steps;
    if (steps <= 0) return;
    const int W = cfg.ppo.workers;
    gridworld::VecEnv wenv(spec, W, derive_seed(seed, Stream::kWarmup));
    Rng rng(derive_seed(seed, Stream::kWarmup, 1));
    const int vector_steps = (steps + W - 1) / W;
    Matrix batch(static_cast<Eigen::Index>(vector_steps) * W, gridworld::kObsSize);
    std::vector<int> actions(static_cast<std::size_t>(W));
    Eigen::Index row = 0;
    for (int t = 0; t < vector_steps; ++t) {
      for (auto& a : actions) a = static_cast<int>(uniform_index(gridworld::kNumActions, rng));
      const auto trans = wenv.step(actions);
      for (const auto& tr : trans) {
        for (int k = 0; k < gridworld::kObsSize; ++k) batch(row, k) = tr.next_observation[k];
        ++row;
      }
    }
    obs_norm.update(batch);
  }

  BehaviorPolicy behavior() const {
    if (baselines::is_eipo(variant)) {
      return stage.max_stage ? BehaviorPolicy::kExtrinsic : BehaviorPolicy::kMixed;
    }
    return variant == Variant::kDecoupledRND ? BehaviorPolicy::kMixed : BehaviorPolicy::kExtrinsic;
  }

  const MetricsRow& iterate();
};

namespace {

Matrix stack(const std::vector<gridworld::Observation>& obs) {
  Matrix m(static_cast<Eigen::Index>(obs.size()), gridworld::kObsSize);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (int k = 0; k < gridworld::kObsSize; ++k) m(static_cast<Eigen::Index>(i), k) = obs[i][k];
  }
  return m;
}

}  // namespace

const MetricsRow& Trainer::State::iterate() {
  const int T = cfg.ppo.horizon;
  const int W = cfg.ppo.workers;
  const auto N = static_cast<Eigen::Index>(T) * W;
  const BehaviorPolicy behavior_policy = behavior();
  const bool mixed_behavior = behavior_policy == BehaviorPolicy::kMixed;
  const std::string behavior_name(estimation::to_string(behavior_policy));
  const double lambda_i = cfg.algorithm.lambda_at(iteration);

  estimation::RolloutBatch batch;
  batch.horizon = T;
  batch.workers = W;
  batch.behavior = behavior_policy;
  batch.observations.resize(N, gridworld::kObsSize);
  batch.actions.assign(static_cast<std::size_t>(N), 0);
  batch.logp_e.resize(T, W);
  batch.logp_ei.resize(T, W);
  batch.v_e.resize(T, W);
  batch.v_ei.resize(T, W);
  batch.dones = Matrix::Zero(T, W);
  Matrix raw_ext = Matrix::Zero(T, W);
  Matrix raw_bonus = Matrix::Zero(T, W);
  Matrix kl = Matrix::Zero(T, W);
  Matrix next_obs(N, gridworld::kObsSize);

  MetricsRow row;
  row.iteration = iteration;
  row.variant = std::string(baselines::to_string(variant));
  row.behavior = behavior_name;
  row.lambda = lambda_i;
  std::vector<double> finished;

  std::vector<int> actions(static_cast<std::size_t>(W));
  std::vector<double> probs(gridworld::kNumActions);
  for (int t = 0; t < T; ++t) {
    const Matrix obs = stack(env.observations());
    const auto out = pair.forward(obs);
    const Matrix lp_e = funcapprox::log_softmax_rows(out.logits_e);
    const Matrix lp_ei = funcapprox::log_softmax_rows(out.logits_ei);
    const Matrix& lp_behavior = mixed_behavior ? lp_ei : lp_e;
    for (int w = 0; w < W; ++w) {
      for (int a = 0; a < gridworld::kNumActions; ++a) probs[a] = std::exp(lp_behavior(w, a));
      const int a = static_cast<int>(sample_categorical(probs, policy_rng));
      actions[static_cast<std::size_t>(w)] = a;
      const Eigen::Index r = static_cast<Eigen::Index>(t) * W + w;
      batch.observations.row(r) = obs.row(w);
      batch.actions[static_cast<std::size_t>(r)] = a;
      batch.logp_e(t, w) = lp_e(w, a);
      batch.logp_ei(t, w) = lp_ei(w, a);
      batch.v_e(t, w) = out.v_e(w, 0);
      batch.v_ei(t, w) = out.v_ei(w, 0);
      if (variant == Variant::kDecoupledRND) {
        const Vector le = out.logits_e.row(w).transpose();
        const Vector lei = out.logits_ei.row(w).transpose();
        kl(t, w) = baselines::kl_divergence({le.data(), static_cast<std::size_t>(le.size())},
                                            {lei.data(), static_cast<std::size_t>(lei.size())});
      }
    }
    const auto trans = env.step(actions);
    for (int w = 0; w < W; ++w) {
      const auto& tr = trans[static_cast<std::size_t>(w)];
      const Eigen::Index r = static_cast<Eigen::Index>(t) * W + w;
      raw_ext(t, w) = tr.extrinsic_reward;
      for (int k = 0; k < gridworld::kObsSize; ++k) next_obs(r, k) = tr.next_observation[k];
      if (counts) raw_bonus(t, w) = counts->bonus(tr.next_observation);
      if (tr.done) {
        batch.dones(t, w) = 1.0;
        episodes.push_back({iteration, w, behavior_name, tr.episode_return, tr.episode_length});
        finished.push_back(tr.episode_return);
      }
    }
  }
  frames += static_cast<std::uint64_t>(N);
  {
    const auto out = pair.forward(stack(env.observations()));
    batch.bootstrap_e = out.v_e.col(0);
    batch.bootstrap_ei = out.v_ei.col(0);
  }

  // Intrinsic rewards.
  Matrix normed_next;
  if (rnd) {
    normed_next = obs_norm.normalize(next_obs);
    const Vector b = rnd->bonus(normed_next);
    for (int t = 0; t < T; ++t) {
      for (int w = 0; w < W; ++w) raw_bonus(t, w) = b(static_cast<Eigen::Index>(t) * W + w);
    }
    obs_norm.update(next_obs);
  }
  Matrix r_i = Matrix::Zero(T, W);
  if (baselines::uses_intrinsic(variant)) {
    r_i = cfg.intrinsic.normalize ? int_norm.normalize(raw_bonus, batch.dones) : raw_bonus;
    r_i *= lambda_i;
  }
  row.mean_raw_intrinsic = raw_bonus.mean();
  row.mean_intrinsic = r_i.mean();

  // Extrinsic rewards.
  Matrix r_e = raw_ext;
  if (ext_norm) {
    for (int t = 0; t < T; ++t) {
      std::vector<double> in(static_cast<std::size_t>(W));
      for (int w = 0; w < W; ++w) in[static_cast<std::size_t>(w)] = raw_ext(t, w);
      const auto out = ext_norm->normalize(in);
      for (int w = 0; w < W; ++w) r_e(t, w) = out[static_cast<std::size_t>(w)];
    }
    row.ext_divisor = ext_norm->last_divisor();
  }

  const bool eipo_variant = baselines::is_eipo(variant);
  const bool decoupled = variant == Variant::kDecoupledRND;
  if (eipo_variant || decoupled) {
    batch.reward_e = r_e;
    batch.reward_i = r_i;
    if (decoupled) {
      batch.reward_penalty = kl * cfg.algorithm.kl_weight.value_or(0.0);
      row.mean_kl = kl.mean();
    }
  } else {
    batch.reward_e = r_e + r_i;
    batch.reward_i = Matrix::Zero(T, W);
  }

  const auto adv = estimation::compute_advantages(
      batch, {.gamma = cfg.ppo.gamma,
              .lambda = cfg.ppo.gae_lambda,
              .alpha = alpha.alpha,
              .standardize = cfg.ppo.standardize_advantages});

  const eipo::Stage stage_kind = stage.max_stage ? eipo::Stage::kMax : eipo::Stage::kMin;
  const eipo::LossConfig loss_cfg{.clip_ratio = cfg.ppo.clip_ratio,
                                  .value_weight = cfg.ppo.value_weight,
                                  .entropy_weight = cfg.ppo.entropy_weight};

  std::vector<std::size_t> perm(static_cast<std::size_t>(N));
  const int M = cfg.ppo.minibatches;
  const std::size_t mb = perm.size() / static_cast<std::size_t>(M);
  int updates = 0;
  int rnd_updates = 0;
  for (int epoch = 0; epoch < cfg.ppo.epochs; ++epoch) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[uniform_index(i, minibatch_rng)]);
    }
    for (int m = 0; m < M; ++m) {
      const std::size_t lo = static_cast<std::size_t>(m) * mb;
      const std::size_t hi = m + 1 == M ? perm.size() : lo + mb;
      const std::span<const std::size_t> idx(perm.data() + lo, hi - lo);
      const eipo::Samples samples = eipo::gather(batch, adv, stage_kind, idx);
      eipo::SurrogateReport rep;
      auto loss_fn = [&](funcapprox::Tape& tape, const funcapprox::ParamVector& p) {
        if (eipo_variant) {
          return stage.max_stage ? eipo::max_stage_loss(tape, pair, p, samples, loss_cfg, &rep)
                                 : eipo::min_stage_loss(tape, pair, p, samples, loss_cfg, &rep);
        }
        if (decoupled) return baselines::decoupled_losses(tape, pair, p, samples, loss_cfg, &rep);
        return baselines::single_head_loss(tape, pair, p, samples, loss_cfg, &rep);
      };
      funcapprox::ValueAndGrad vg;
      try {
        vg = funcapprox::value_and_grad(loss_fn, pair.params());
      } catch (const NumericError& e) {
        throw NumericError("iteration " + std::to_string(iteration) + " (" + row.variant +
                           ", epoch " + std::to_string(epoch) + ", minibatch " +
                           std::to_string(m) + "): " + e.what());
      }
      row.grad_norm += optimizer.step(pair.params(), vg.grad);
      row.primary += rep.primary;
      row.auxiliary += rep.auxiliary;
      row.value_loss += rep.value_loss;
      row.entropy += rep.entropy;
      row.clip_fraction += rep.clip_fraction;
      row.mean_ratio += rep.mean_ratio;
      ++updates;
      if (rnd) {
        Matrix sub(static_cast<Eigen::Index>(idx.size()), gridworld::kObsSize);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          sub.row(static_cast<Eigen::Index>(k)) = normed_next.row(static_cast<Eigen::Index>(idx[k]));
        }
        const auto st = rnd->update(sub);
        if (st.retained > 0) {
          row.rnd_loss += st.loss;
          ++rnd_updates;
        }
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(updates);
  row.grad_norm *= inv;
  row.primary *= inv;
  row.auxiliary *= inv;
  row.value_loss *= inv;
  row.entropy *= inv;
  row.clip_fraction *= inv;
  row.mean_ratio *= inv;
  if (rnd_updates > 0) row.rnd_loss /= rnd_updates;

  row.gap = kNaN;
  if (eipo_variant) {
    const eipo::Samples all = eipo::gather_all(batch, adv, stage_kind);
    const double surrogate = eipo::primary_surrogate(pair, all, stage_kind, cfg.ppo.clip_ratio);
    // The min-stage maximizes the negated objective.
    const double j = stage.max_stage ? surrogate : -surrogate;
    const bool was_max = stage.max_stage;
    stage.switch_stage(j);
    row.j = j;
    if (was_max && !stage.max_stage) {
      row.gap = eipo::estimate_j_gap(pair, all.obs, all.actions, all.a_e, cfg.ppo.clip_ratio);
      alpha.update(row.gap);
      row.alpha_updated = true;
    }
    row.max_stage = was_max;
    row.alpha = alpha.alpha;
  }

  row.episodes = static_cast<int>(finished.size());
  row.mean_ext_return =
      finished.empty() ? kNaN
                       : std::accumulate(finished.begin(), finished.end(), 0.0) /
                             static_cast<double>(finished.size());
  row.frames = frames;
  ++iteration;
  metrics.push_back(row);
  // Median over the trailing window uses the episodes recorded so far.
  std::vector<double> tail;
  const std::size_t from = episodes.size() > 100 ? episodes.size() - 100 : 0;
  for (std::size_t i = from; i < episodes.size(); ++i) tail.push_back(episodes[i].extrinsic_return);
  metrics.back().median_ext_return = median(tail);
  return metrics.back();
}

// --- Trainer ----------------------------------------------------------------------

Trainer::Trainer(const config::RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  s_ = std::make_unique<State>(cfg, seed);
}

Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

const MetricsRow& Trainer::iterate() { return s_->iterate(); }
int Trainer::iteration() const { return s_->iteration; }
std::uint64_t Trainer::seed() const { return s_->seed; }
const config::RunConfig& Trainer::config() const { return s_->cfg; }
const std::vector<MetricsRow>& Trainer::metrics() const { return s_->metrics; }
const std::vector<EpisodeRecord>& Trainer::episodes() const { return s_->episodes; }
const funcapprox::PolicyPair& Trainer::policy() const { return s_->pair; }
const eipo::AlphaState& Trainer::alpha() const { return s_->alpha; }
const eipo::StageState& Trainer::stage() const { return s_->stage; }

double Trainer::final_score(std::size_t window) const {
  const auto& eps = s_->episodes;
  const std::size_t from = eps.size() > window ? eps.size() - window : 0;
  std::vector<double> tail;
  for (std::size_t i = from; i < eps.size(); ++i) tail.push_back(eps[i].extrinsic_return);
  return median(tail);
}

Checkpoint Trainer::checkpoint() const {
  const State& s = *s_;
  Checkpoint ckpt(s.pair.params().architecture_hash());
  ckpt.put("config", config::write_config(resume_identity(s.cfg)));
  auto section = [&](const std::string& tag, auto&& fn) {
    ByteWriter w;
    fn(w);
    ckpt.put(tag, w.bytes());
  };
  section("meta", [&](ByteWriter& w) {
    w.u64(s.seed);
    w.i64(s.iteration);
    w.u64(s.frames);
  });
  section("params", [&](ByteWriter& w) { funcapprox::save_params(w, s.pair.params()); });
  section("optimizer", [&](ByteWriter& w) { s.optimizer.save(w); });
  section("obs_norm", [&](ByteWriter& w) { s.obs_norm.save(w); });
  section("int_norm", [&](ByteWriter& w) { s.int_norm.save(w); });
  if (s.rnd) section("rnd", [&](ByteWriter& w) { s.rnd->save(w); });
  if (s.counts) section("counts", [&](ByteWriter& w) { s.counts->save(w); });
  if (s.ext_norm) section("ext_norm", [&](ByteWriter& w) { s.ext_norm->save(w); });
  section("alpha", [&](ByteWriter& w) { s.alpha.save(w); });
  section("stage", [&](ByteWriter& w) { s.stage.save(w); });
  section("env", [&](ByteWriter& w) { s.env.save(w); });
  section("rng", [&](ByteWriter& w) {
    w.rng(s.policy_rng);
    w.rng(s.minibatch_rng);
  });
  section("metrics", [&](ByteWriter& w) {
    w.u64(s.metrics.size());
    for (const auto& m : s.metrics) m.save(w);
  });
  section("episodes", [&](ByteWriter& w) {
    w.u64(s.episodes.size());
    for (const auto& e : s.episodes) {
      w.i64(e.iteration);
      w.i64(e.worker);
      w.str(e.behavior);
      w.f64(e.extrinsic_return);
      w.i64(e.length);
    }
  });
  return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
  State& s = *s_;
  if (ckpt.architecture_hash() != s.pair.params().architecture_hash()) {
    throw UsageError("checkpoint architecture does not match this run");
  }
  if (ckpt.get("config") != config::write_config(resume_identity(s.cfg))) {
    throw UsageError("checkpoint was written by a run with a different configuration");
  }
  auto read = [&](const std::string& tag, auto&& fn) {
    ByteReader r(ckpt.get(tag));
    fn(r);
    if (!r.at_end()) throw UsageError("checkpoint section '" + tag + "' has trailing bytes");
  };
  read("meta", [&](ByteReader& r) {
    if (r.u64() != s.seed) throw UsageError("checkpoint belongs to another seed");
    s.iteration = static_cast<int>(r.i64());
    s.frames = r.u64();
  });
  read("params", [&](ByteReader& r) { funcapprox::load_params(r, s.pair.params()); });
  read("optimizer", [&](ByteReader& r) { s.optimizer.load(r); });
  read("obs_norm", [&](ByteReader& r) { s.obs_norm.load(r); });
  read("int_norm", [&](ByteReader& r) { s.int_norm.load(r); });
  if (s.rnd) read("rnd", [&](ByteReader& r) { s.rnd->load(r); });
  if (s.counts) read("counts", [&](ByteReader& r) { s.counts->load(r); });
  if (s.ext_norm) read("ext_norm", [&](ByteReader& r) { s.ext_norm->load(r); });
  read("alpha", [&](ByteReader& r) { s.alpha.load(r); });
  read("stage", [&](ByteReader& r) { s.stage.load(r); });
  read("env", [&](ByteReader& r) { s.env.load(r); });
  read("rng", [&](ByteReader& r) {
    r.rng(s.policy_rng);
    r.rng(s.minibatch_rng);
  });
  read("metrics", [&](ByteReader& r) {
    s.metrics.resize(r.u64());
    for (auto& m : s.metrics) m.load(r);
  });
  read("episodes", [&](ByteReader& r) {
    s.episodes.resize(r.u64());
    for (auto& e : s.episodes) {
      e.iteration = static_cast<int>(r.i64());
      e.worker = static_cast<int>(r.i64());
      e.behavior = r.str();
      e.extrinsic_return = r.f64();
      e.length = static_cast<int>(r.i64());
    }
  });
}

Trainer make_trainer(const config::RunConfig& cfg, std::uint64_t seed) {
  return Trainer(cfg, seed);
}

}  // namespace eipolab
