#include <doctest.h>

#include <cmath>
#include <random>

#include "checks.hpp"
#include "eipolab/eipo.hpp"
#include "eipolab/trainer.hpp"
#include "oracles.hpp"

using namespace eipolab;
using namespace eipolab::eipo;
using funcapprox::PolicyPair;

namespace {

// Zeroes every weight of a head and sets its output bias.
void set_head(PolicyPair& pair, PolicyPair::Part part, std::vector<double> bias) {
  auto& params = pair.params();
  for (std::size_t slot : pair.slots_of(part)) {
    auto t = params.tensor(slot);
    t.setZero();
    if (params.slot(slot).name.ends_with(".b") && t.rows() == static_cast<long>(bias.size())) {
      for (std::size_t k = 0; k < bias.size(); ++k) t(static_cast<long>(k), 0) = bias[k];
    }
  }
}

// One state, two actions: pi_E = (1/4, 3/4), pi_EI = (3/4, 1/4), V_E = 0.2,
// V_EI = -0.1.
PolicyPair micro_pair() {
  PolicyPair pair(1, 2, 0, 2);
  set_head(pair, PolicyPair::Part::kPiE, {0.0, std::log(3.0)});
  set_head(pair, PolicyPair::Part::kPiEI, {std::log(3.0), 0.0});
  set_head(pair, PolicyPair::Part::kVE, {0.2});
  set_head(pair, PolicyPair::Part::kVEI, {-0.1});
  return pair;
}

Samples micro_samples(BehaviorPolicy behavior) {
  Samples s;
  s.behavior = behavior;
  s.obs = Matrix::Zero(3, 1);
  s.actions = {0, 1, 1};
  s.logp_e_old = Vector::Constant(3, std::log(0.5));
  s.logp_ei_old = Vector(3);
  s.logp_ei_old << std::log(0.6), std::log(0.3), std::log(0.3);
  s.payoff = Vector(3);
  s.payoff << 1.0, -2.0, 0.5;
  s.a_e = Vector(3);
  s.a_e << 0.3, -0.4, 1.0;
  s.a_ei = Vector(3);
  s.a_ei << -0.2, 0.6, 0.1;
  s.ret_e = Vector(3);
  s.ret_e << 1.0, 0.0, 0.5;
  s.ret_ei = Vector(3);
  s.ret_ei << 0.2, 0.4, -1.0;
  return s;
}

const double kH = -(0.25 * std::log(0.25) + 0.75 * std::log(0.75));

}  // namespace

TEST_CASE("clipped_term examples") {
  CHECK(clipped_term(1.0, 0.7, 0.1) == 0.7);
  CHECK(clipped_term(1.5, -2.0, 0.1) == -3.0);
  CHECK(clipped_term(1.5, 2.0, 0.1) == doctest::Approx(2.2).epsilon(1e-15));
  CHECK(clipped_term(0.5, 2.0, 0.1) == 1.0);
  CHECK(clipped_term(0.5, -2.0, 0.1) == doctest::Approx(-1.8).epsilon(1e-15));
}

TEST_CASE("clipped_term is pessimistic and exact inside the band") {
  Rng rng(11);
  std::uniform_real_distribution<double> ratio(0.01, 3.0);
  std::normal_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 20000; ++i) {
    const double r = ratio(rng);
    const double v = u(rng);
    CHECK(clipped_term(r, v, 0.1) <= r * v);
    if (std::abs(r - 1.0) <= 0.1) CHECK(clipped_term(r, v, 0.1) == r * v);
  }
}

TEST_CASE("max-stage loss matches a hand-computed micro-batch") {
  const auto pair = micro_pair();
  const auto s = micro_samples(BehaviorPolicy::kExtrinsic);
  LossConfig cfg;
  funcapprox::Tape tape;
  SurrogateReport rep;
  const double loss = max_stage_loss(tape, pair, pair.params(), s, cfg, &rep).scalar();
  // primary ratios (1.5, 0.5, 0.5) on U (1, -2, 0.5): 1.1, -1.8, 0.25
  // auxiliary ratios (0.5, 1.5, 1.5) on A_E (0.3, -0.4, 1): 0.15, -0.6, 1.1
  const double primary = (1.1 - 1.8 + 0.25) / 3.0;
  const double aux = (0.15 - 0.6 + 1.1) / 3.0;
  const double value = (0.64 + 0.04 + 0.09) / 3.0;
  CHECK(rep.primary == doctest::Approx(primary).epsilon(1e-12));
  CHECK(rep.auxiliary == doctest::Approx(aux).epsilon(1e-12));
  CHECK(rep.value_loss == doctest::Approx(value).epsilon(1e-12));
  CHECK(rep.entropy == doctest::Approx(2.0 * kH).epsilon(1e-12));
  CHECK(std::abs(loss - (-(primary + aux) + value - 0.001 * 2.0 * kH)) < 1e-10);
  CHECK(rep.clip_fraction == 1.0);
}

TEST_CASE("min-stage loss matches a hand-computed micro-batch") {
  const auto pair = micro_pair();
  const auto s = micro_samples(BehaviorPolicy::kMixed);
  LossConfig cfg;
  funcapprox::Tape tape;
  SurrogateReport rep;
  const double loss = min_stage_loss(tape, pair, pair.params(), s, cfg, &rep).scalar();
  // primary ratios (5/12, 2.5, 2.5) on U (1, -2, 0.5): 5/12, -5, 0.55
  // auxiliary ratios (1.25, 5/6, 5/6) on A_EI (-0.2, 0.6, 0.1): -0.25, 0.5, 1/12
  const double primary = (5.0 / 12.0 - 5.0 + 0.55) / 3.0;
  const double aux = (-0.25 + 0.5 + 1.0 / 12.0) / 3.0;
  const double value = (0.09 + 0.25 + 0.81) / 3.0;
  CHECK(rep.primary == doctest::Approx(primary).epsilon(1e-12));
  CHECK(rep.auxiliary == doctest::Approx(aux).epsilon(1e-12));
  CHECK(rep.value_loss == doctest::Approx(value).epsilon(1e-12));
  CHECK(std::abs(loss - (-(primary + aux) + value - 0.001 * 2.0 * kH)) < 1e-10);
}

TEST_CASE("stage losses reject the wrong behavior policy") {
  const auto pair = micro_pair();
  LossConfig cfg;
  funcapprox::Tape tape;
  CHECK_THROWS_AS(max_stage_loss(tape, pair, pair.params(), micro_samples(BehaviorPolicy::kMixed), cfg),
                  UsageError);
  CHECK_THROWS_AS(min_stage_loss(tape, pair, pair.params(), micro_samples(BehaviorPolicy::kExtrinsic), cfg),
                  UsageError);
  Rng rng(12);
  PolicyPair fresh(5, 3, 1, 8);
  const auto b = oracles::random_batch(rng, fresh, 4, 2, BehaviorPolicy::kMixed);
  CHECK_THROWS_AS(max_stage_loss(b, fresh, estimation::AdvantageOptions{}), UsageError);
}

TEST_CASE("with unit ratios the primary terms are the payoff means") {
  Rng rng(13);
  PolicyPair pair(5, 3, 2, 8);
  estimation::AdvantageOptions opt;
  opt.alpha = 0.37;
  {
    const auto b = oracles::random_batch(rng, pair, 8, 3, BehaviorPolicy::kExtrinsic);
    const auto adv = estimation::compute_advantages(b, opt);
    const auto v = max_stage_loss(b, pair, opt);
    CHECK(std::abs(v.report.primary - adv.u_max.mean()) < 1e-10);
    CHECK(std::abs(v.report.auxiliary - adv.a_e.mean()) < 1e-10);
    CHECK(v.report.mean_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.report.clip_fraction == 0.0);
  }
  {
    const auto b = oracles::random_batch(rng, pair, 8, 3, BehaviorPolicy::kMixed);
    const auto adv = estimation::compute_advantages(b, opt);
    const auto v = min_stage_loss(b, pair, opt);
    CHECK(std::abs(v.report.primary - adv.u_min.mean()) < 1e-10);
    CHECK(std::abs(v.report.auxiliary - adv.a_ei.mean()) < 1e-10);
  }
}

TEST_CASE("alpha 0 max-stage primary is PPO on the mixed reward") {
  Rng rng(14);
  PolicyPair pair(5, 3, 3, 8);
  const auto b = oracles::random_batch(rng, pair, 8, 2, BehaviorPolicy::kExtrinsic);
  estimation::AdvantageOptions opt;
  opt.alpha = 0.0;
  const auto v = max_stage_loss(b, pair, opt);
  CHECK(std::abs(v.report.primary - b.mixed_reward().mean()) < 1e-10);
}

TEST_CASE("alpha 1 with no intrinsic reward makes U_min the mixed advantage") {
  Rng rng(15);
  PolicyPair pair(5, 3, 4, 8);
  auto b = oracles::random_batch(rng, pair, 8, 2, BehaviorPolicy::kMixed);
  b.reward_i.setZero();
  estimation::AdvantageOptions opt;
  opt.alpha = 1.0;
  const auto adv = estimation::compute_advantages(b, opt);
  CHECK((adv.u_min - adv.a_ei).cwiseAbs().maxCoeff() < 1e-12);
  const auto v = min_stage_loss(b, pair, opt);
  CHECK(std::abs(v.report.primary - adv.a_ei.mean()) < 1e-10);
}

TEST_CASE("J gap estimates") {
  const auto pair = micro_pair();
  const Matrix obs = Matrix::Zero(2, 1);
  const std::vector<int> actions{0, 1};
  Vector a_e(2);
  SUBCASE("all-zero advantages give zero") {
    a_e.setZero();
    CHECK(estimate_j_gap(pair, obs, actions, a_e, 0.1) == 0.0);
  }
  SUBCASE("pi_EI up-weighting the positive action is positive") {
    // ratios pi_EI / pi_E = (3, 1/3)
    a_e << 1.0, -1.0;
    const double gap = estimate_j_gap(pair, obs, actions, a_e, 0.1);
    CHECK(gap == doctest::Approx((1.1 - 0.9) / 2.0).epsilon(1e-12));
    CHECK(gap > 0.0);
  }
  SUBCASE("identical policies give the mean advantage") {
    PolicyPair same(1, 2, 7, 2);
    a_e << 0.4, -0.1;
    CHECK(estimate_j_gap(same, obs, actions, a_e, 0.1) == doctest::Approx(0.15).epsilon(1e-12));
  }
}

TEST_CASE("alpha update examples") {
  AlphaState a;
  a.update(0.0);
  CHECK(a.alpha == 0.5);
  a.update(0.2);
  CHECK(a.alpha == doctest::Approx(0.49975).epsilon(1e-15));
  const double before = a.alpha;
  a.update(-1.0);
  CHECK(a.alpha - before == doctest::Approx(0.00025).epsilon(1e-10));
  CHECK(a.history.size() == 3);
  CHECK(a.history.back() == a.alpha);
}

TEST_CASE("alpha clamp keeps alpha nonnegative only when enabled") {
  AlphaState a;
  a.alpha = 0.0001;
  a.update(1.0);
  CHECK(a.alpha < 0.0);
  AlphaState c;
  c.alpha = 0.0001;
  c.clamp_nonnegative = true;
  c.update(1.0);
  CHECK(c.alpha == 0.0);
}

TEST_CASE("stage switching examples") {
  SUBCASE("a flat J leaves the max-stage") {
    StageState s;
    s.max_stage = true;
    s.j_prev = 1.0;
    CHECK_FALSE(s.switch_stage(1.0));
  }
  SUBCASE("a strictly increasing J keeps the max-stage") {
    StageState s;
    s.max_stage = true;
    for (int i = 1; i <= 20; ++i) CHECK(s.switch_stage(0.1 * i));
  }
  SUBCASE("hand trace from the min-stage") {
    StageState s;
    CHECK_FALSE(s.max_stage);
    const std::vector<double> js{0.0, 1.0, 0.5, 0.4, 0.6};
    const std::vector<bool> expected{true, true, false, false, true};
    for (std::size_t i = 0; i < js.size(); ++i) CHECK(s.switch_stage(js[i]) == expected[i]);
    CHECK(s.stage_lengths == std::vector<int>{1, 2, 2});
  }
  SUBCASE("the guard delays switching") {
    StageState s;
    s.min_stage_length = 3;
    CHECK_FALSE(s.switch_stage(1.0));
    CHECK_FALSE(s.switch_stage(2.0));
    CHECK(s.switch_stage(3.0));
  }
}

TEST_CASE("stage replay matches the oracle on random J sequences") {
  Rng rng(16);
  std::uniform_int_distribution<int> step(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> js;
    double j = 0.0;
    for (int i = 0; i < 40; ++i) js.push_back(j += step(rng));
    const auto oracle = oracles::replay_stages(js);
    StageState s;
    for (std::size_t i = 0; i < js.size(); ++i) CHECK(s.switch_stage(js[i]) == oracle.max_stage[i]);
  }
}

TEST_CASE("alpha and stage state round-trip through bytes") {
  AlphaState a;
  a.alpha = -0.3;
  a.clamp_nonnegative = true;
  a.history = {0.5, 0.4, -0.3};
  StageState s;
  s.max_stage = true;
  s.j_prev = 1.25;
  s.current_length = 3;
  s.min_stage_length = 2;
  s.stage_lengths = {1, 4, 2};
  ByteWriter w;
  a.save(w);
  s.save(w);
  ByteReader r(w.bytes());
  AlphaState a2;
  StageState s2;
  a2.load(r);
  s2.load(r);
  CHECK(a2.alpha == a.alpha);
  CHECK(a2.clamp_nonnegative);
  CHECK(a2.history == a.history);
  CHECK(s2.max_stage);
  CHECK(s2.j_prev == 1.25);
  CHECK(s2.current_length == 3);
  CHECK(s2.min_stage_length == 2);
  CHECK(s2.stage_lengths == s.stage_lengths);
}

TEST_CASE("EIPO training logs obey the stage machine and alpha timing") {
  Trainer t(checks::tiny_config(baselines::Variant::kEipoRND, 40), 3);
  for (int i = 0; i < 40; ++i) t.iterate();
  const auto& rows = t.metrics();
  CHECK(rows.front().behavior == "mixed");
  std::vector<double> js;
  for (const auto& r : rows) js.push_back(r.j);
  const auto replay = oracles::replay_stages(js);
  double alpha = t.config().eipo.alpha_init;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    // Each row records the stage that collected it and the switch its J caused.
    CHECK(r.max_stage == (i > 0 && replay.max_stage[i - 1]));
    CHECK(r.behavior == (r.max_stage ? "extrinsic" : "mixed"));
    CHECK(r.alpha_updated == replay.alpha_updated[i]);
    if (r.alpha_updated) {
      CHECK(std::abs(r.alpha - alpha) <= 0.005 * 0.05 + 1e-15);
      CHECK(std::isfinite(r.gap));
    } else {
      CHECK(r.alpha == alpha);
      CHECK(std::isnan(r.gap));
    }
    alpha = r.alpha;
    CHECK(std::isfinite(r.primary));
    CHECK(std::isfinite(r.clip_fraction));
  }
}
