#include <doctest.h>

#include <cmath>
#include <random>

#include "eipolab/baselines.hpp"
#include "eipolab/funcapprox.hpp"
#include "oracles.hpp"

using namespace eipolab;
using namespace eipolab::funcapprox;

namespace {

Matrix random_obs(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("zero-initialized heads give uniform distributions from both heads") {
  PolicyPair pair(100, 5, 3);
  Rng rng(1);
  const auto out = pair.forward(random_obs(rng, 7, 100));
  const Matrix lp_e = log_softmax_rows(out.logits_e);
  const Matrix lp_ei = log_softmax_rows(out.logits_ei);
  for (Eigen::Index i = 0; i < lp_e.size(); ++i) {
    CHECK(std::exp(lp_e.data()[i]) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(lp_e.data()[i] == lp_ei.data()[i]);
  }
}

TEST_CASE("identical policy heads give identical logits and zero KL") {
  Rng rng(2);
  auto pair = oracles::random_pair(rng, 10, 5, 8);
  const auto e = pair.slots_of(PolicyPair::Part::kPiE);
  const auto ei = pair.slots_of(PolicyPair::Part::kPiEI);
  REQUIRE(e.size() == ei.size());
  for (std::size_t k = 0; k < e.size(); ++k) pair.params().tensor(ei[k]) = pair.params().tensor(e[k]);
  const auto out = pair.forward(random_obs(rng, 4, 10));
  CHECK(out.logits_e == out.logits_ei);
  for (Eigen::Index i = 0; i < 4; ++i) {
    std::vector<double> p(out.logits_e.cols()), q(out.logits_ei.cols());
    for (Eigen::Index a = 0; a < out.logits_e.cols(); ++a) {
      p[a] = out.logits_e(i, a);
      q[a] = out.logits_ei(i, a);
    }
    CHECK(baselines::kl_divergence(p, q) == 0.0);
  }
}

TEST_CASE("hand-set single hidden layer matches a pencil-and-paper product") {
  ParamVector params;
  Mlp mlp(params, "m", {2, 2, 2}, Activation::kTanh, Activation::kIdentity);
  // Layer 0: w0 = [[1, 2], [3, 4]], b0 = [0.5, -0.5]; layer 1: w1 = [[1, -1], [2, 0]], b1 = [0, 1].
  params.tensor(0) << 1, 2, 3, 4;
  params.tensor(1) << 0.5, -0.5;
  params.tensor(2) << 1, -1, 2, 0;
  params.tensor(3) << 0, 1;
  Matrix x(1, 2);
  x << 0.1, -0.2;
  const Matrix y = mlp.forward(params, x);
  // h = tanh(x w0 + b0) = tanh([0.1 - 0.6 + 0.5, 0.2 - 0.8 - 0.5]) = tanh([0, -1.1])
  const double h0 = std::tanh(0.0);
  const double h1 = std::tanh(-1.1);
  CHECK(y(0, 0) == doctest::Approx(h0 * 1 + h1 * 2 + 0).epsilon(1e-14));
  CHECK(y(0, 1) == doctest::Approx(h0 * -1 + h1 * 0 + 1).epsilon(1e-14));

  Tape tape;
  const Var out = mlp.forward(tape, params, tape.constant(x));
  CHECK((out.value() - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward rejects observations of the wrong width") {
  PolicyPair pair(100, 5, 0);
  CHECK_THROWS_AS(pair.forward(Matrix::Zero(3, 99)), UsageError);
}

TEST_CASE("half squared norm has the parameters as gradient") {
  Rng rng(3);
  ParamVector p;
  p.add("a", 3, 2);
  p.add("b", 4, 1);
  for (auto& x : p.flat()) x = std::normal_distribution<double>(0, 1)(rng);
  const auto vg = value_and_grad(
      [](Tape& t, const ParamVector& q) {
        return scale(add(sum(square(t.param(q, 0))), sum(square(t.param(q, 1)))), 0.5);
      },
      p);
  CHECK((vg.grad - p.flat()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(vg.value == doctest::Approx(0.5 * p.flat().squaredNorm()));
}

TEST_CASE("a constant loss has zero gradient") {
  PolicyPair pair(6, 3, 1, 4);
  const auto vg = value_and_grad([](Tape& t, const ParamVector&) { return t.constant(Matrix::Constant(1, 1, 2.5)); },
                                 pair.params());
  CHECK(vg.value == 2.5);
  CHECK(vg.grad.isZero(0.0));
}

TEST_CASE("non-finite losses raise a numeric error naming the component") {
  PolicyPair pair(6, 3, 1, 4);
  try {
    value_and_grad(
        [](Tape& t, const ParamVector& p) {
          Var bad = scale(t.param(p, 0), std::numeric_limits<double>::infinity());
          t.tag(mean(bad), "exploding_term");
          return mean(bad);
        },
        pair.params());
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("exploding_term") != std::string::npos);
  }
}

TEST_CASE("random small net gradients match central finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto pair = oracles::random_pair(rng, 5, 4, 6);
    const Matrix obs = random_obs(rng, 6, 5);
    std::vector<int> actions(6);
    for (auto& a : actions) a = static_cast<int>(uniform_index(4, rng));
    const LossFn fn = [&](Tape& t, const ParamVector& p) {
      PolicyVars v = pair.forward(t, p, t.constant(obs));
      Var lp = pick(log_softmax(v.logits_e), actions);
      Var lq = pick(log_softmax(v.logits_ei), actions);
      return add(add(mean(mul(exp(lp), lq)), mean(square(v.v_e))),
                 add(mean(tanh(v.v_ei)), mean(entropy(v.logits_ei))));
    };
    const auto vg = value_and_grad(fn, pair.params());
    const Vector fd = finite_difference_grad(fn, pair.params(), 1e-5);
    CHECK(oracles::relative_error(vg.grad, fd) < 1e-4);
  }
}

TEST_CASE("perturbing one policy head never moves the other; the backbone moves both") {
  Rng rng(5);
  auto pair = oracles::random_pair(rng, 8, 5, 6);
  const Matrix obs = random_obs(rng, 3, 8);
  const auto base = pair.forward(obs);

  auto perturbed = pair;
  for (auto s : perturbed.slots_of(PolicyPair::Part::kPiE)) perturbed.params().tensor(s).array() += 0.3;
  auto out = perturbed.forward(obs);
  CHECK(out.logits_ei == base.logits_ei);
  CHECK(out.logits_e != base.logits_e);

  perturbed = pair;
  for (auto s : perturbed.slots_of(PolicyPair::Part::kPiEI)) perturbed.params().tensor(s).array() += 0.3;
  out = perturbed.forward(obs);
  CHECK(out.logits_e == base.logits_e);
  CHECK(out.logits_ei != base.logits_ei);

  perturbed = pair;
  for (auto s : perturbed.slots_of(PolicyPair::Part::kBackbone)) perturbed.params().tensor(s).array() += 0.1;
  out = perturbed.forward(obs);
  CHECK(out.logits_e != base.logits_e);
  CHECK(out.logits_ei != base.logits_ei);
}

TEST_CASE("flatten and unflatten round-trip exactly") {
  Rng rng(6);
  auto pair = oracles::random_pair(rng, 7, 5, 9);
  const auto flat = pair.params().flatten();
  PolicyPair other(7, 5, 99, 9);
  other.params().unflatten(flat);
  CHECK(other.params().flat() == pair.params().flat());
  CHECK(other.params().flatten() == flat);
  CHECK(other.params().architecture_hash() == pair.params().architecture_hash());
  CHECK_THROWS_AS(other.params().unflatten(std::vector<double>(flat.size() - 1)), UsageError);
}

TEST_CASE("probabilities sum to one") {
  Rng rng(7);
  auto pair = oracles::random_pair(rng, 9, 5, 6, 2.0);
  const auto out = pair.forward(random_obs(rng, 20, 9));
  const Matrix p = log_softmax_rows(out.logits_e).array().exp();
  for (Eigen::Index i = 0; i < p.rows(); ++i) CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-6);
  CHECK(out.logits_e.allFinite());
}

TEST_CASE("a zero gradient leaves parameters unchanged") {
  ParamVector p;
  p.add("x", 3, 1);
  p.flat() << 1.0, -2.0, 3.0;
  Adam adam(3, {});
  adam.step(p, Vector::Zero(3));
  CHECK(p.flat() == Vector((Vector(3) << 1.0, -2.0, 3.0).finished()));
  CHECK(adam.steps() == 1);
}

TEST_CASE("a gradient of norm 10 is rescaled to norm 1 before the update") {
  ParamVector p;
  p.add("x", 2, 1);
  p.flat() << 0.0, 0.0;
  Adam adam(2, {.learning_rate = 0.1});
  Vector g(2);
  g << 6.0, 8.0;
  const double norm = adam.step(p, g);
  CHECK(norm == doctest::Approx(10.0));
  // First moment after one step: (1 - beta1) * g / 10.
  CHECK(adam.first_moment()(0) == doctest::Approx(0.1 * 0.6));
  CHECK(adam.first_moment()(1) == doctest::Approx(0.1 * 0.8));
  CHECK(adam.second_moment()(1) == doctest::Approx(0.001 * 0.64));
}

TEST_CASE("two steps with a fixed gradient follow the hand-simulated recurrence") {
  ParamVector p;
  p.add("x", 3, 1);
  p.flat() << 0.5, -1.0, 2.0;
  Vector theta = p.flat();
  Vector m = Vector::Zero(3);
  Vector v = Vector::Zero(3);
  Vector g(3);
  g << 0.3, -0.2, 0.05;
  AdamConfig cfg{.learning_rate = 0.01};
  Adam adam(3, cfg);
  for (std::uint64_t t = 1; t <= 2; ++t) {
    adam.step(p, g);
    oracles::adam_step(theta, m, v, t, g, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon,
                       cfg.max_grad_norm);
    CHECK((p.flat() - theta).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(adam.steps() == 2);
}

TEST_CASE("non-finite gradients raise a numeric error") {
  ParamVector p;
  p.add("x", 2, 1);
  Adam adam(2, {});
  Vector g(2);
  g << 1.0, std::nan("");
  CHECK_THROWS_AS(adam.step(p, g), NumericError);
  CHECK_THROWS_AS(adam.step(p, Vector::Zero(3)), UsageError);
}

TEST_CASE("entropy bonus") {
  CHECK(entropy_bonus(std::vector<double>(5, 0.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-14));
  CHECK(entropy_bonus(std::vector<double>{200.0, 0.0, 0.0, 0.0, 0.0}) < 1e-80);
  const std::vector<double> logits{1, 0, 0, 0, 0};
  const double z = std::exp(1.0) + 4.0;
  double h = 0.0;
  for (double l : logits) {
    const double p = std::exp(l) / z;
    h -= p * std::log(p);
  }
  CHECK(entropy_bonus(logits) == doctest::Approx(h).epsilon(1e-14));

  Tape tape;
  Matrix row(1, 5);
  row << 1, 0, 0, 0, 0;
  CHECK(entropy(tape.constant(row)).scalar() == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("parameters and optimizer moments serialize byte-stably") {
  Rng rng(8);
  auto pair = oracles::random_pair(rng, 5, 3, 4);
  Adam adam(pair.params().size(), {});
  adam.step(pair.params(), Vector::Constant(static_cast<Eigen::Index>(pair.params().size()), 0.1));
  ByteWriter a;
  save_params(a, pair.params());
  adam.save(a);
  ByteWriter b;
  save_params(b, pair.params());
  adam.save(b);
  CHECK(a.bytes() == b.bytes());

  PolicyPair other(5, 3, 0, 4);
  Adam other_adam(other.params().size(), {});
  ByteReader r(a.bytes());
  load_params(r, other.params());
  other_adam.load(r);
  CHECK(r.at_end());
  CHECK(other.params().flat() == pair.params().flat());
  CHECK(other_adam.first_moment() == adam.first_moment());
  CHECK(other_adam.steps() == adam.steps());

  PolicyPair wider(5, 3, 0, 6);
  ByteReader r2(a.bytes());
  CHECK_THROWS(load_params(r2, wider.params()));
}
