#include <doctest.h>

#include <cmath>
#include <random>

#include "eipolab/intrinsic.hpp"

using namespace eipolab;
using namespace eipolab::intrinsic;

namespace {

Matrix random_obs(Rng& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

RndConfig small_rnd(double drop = 0.25) {
  RndConfig c;
  c.obs_dim = 12;
  c.hidden = 16;
  c.embedding = 8;
  c.drop_probability = drop;
  c.init_seed = 3;
  c.dropout_seed = 17;
  return c;
}

double population_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return std::sqrt(v / static_cast<double>(xs.size()));
}

}  // namespace

TEST_CASE("predictor copied from the target gives zero bonus") {
  Rnd rnd(small_rnd());
  rnd.predictor_params().flat() = rnd.target_params().flat();
  Rng rng(1);
  const Vector b = rnd.bonus(random_obs(rng, 10, 12));
  CHECK(b.isZero(0.0));
}

TEST_CASE("bonuses are nonnegative and deterministic") {
  Rnd rnd(small_rnd());
  Rng rng(2);
  const Matrix obs = random_obs(rng, 50, 12);
  const Vector a = rnd.bonus(obs);
  const Vector b = rnd.bonus(obs);
  CHECK(a == b);
  CHECK(a.minCoeff() >= 0.0);
  Vector r = obs.row(3).transpose();
  CHECK(rnd.bonus(std::span<const double>(r.data(), 12)) == doctest::Approx(a(3)).epsilon(1e-13));
}

TEST_CASE("500 updates on one repeated observation cut its bonus by at least 90%") {
  // Production shapes: 100-dim binary observations, default widths and rate.
  RndConfig cfg;
  cfg.drop_probability = 0.0;
  Rnd rnd(cfg);
  Rng rng(3);
  Matrix one(1, 100);
  for (Eigen::Index i = 0; i < 100; ++i) one(0, i) = uniform01(rng) < 0.2 ? 1.0 : 0.0;
  const Matrix batch = one.replicate(16, 1);
  const double before = rnd.bonus(one)(0);
  for (int k = 0; k < 500; ++k) rnd.update(batch);
  const double after = rnd.bonus(one)(0);
  CHECK(after <= 0.1 * before);
}

TEST_CASE("drop probability 1 makes the update a no-op") {
  Rnd rnd(small_rnd(1.0));
  const Vector before = rnd.predictor_params().flat();
  Rng rng(4);
  const auto stats = rnd.update(random_obs(rng, 32, 12));
  CHECK(stats.retained == 0);
  CHECK(rnd.predictor_params().flat() == before);
}

TEST_CASE("drop probability 0 trains on the full-batch mean squared error") {
  Rnd rnd(small_rnd(0.0));
  Rng rng(5);
  const Matrix obs = random_obs(rng, 20, 12);
  // The bonus is a squared distance; the loss averages over the 8 embedding
  // coordinates as well as the batch.
  const double full = rnd.bonus(obs).mean() / 8.0;
  const auto stats = rnd.update(obs);
  CHECK(stats.retained == 20);
  CHECK(stats.loss == doctest::Approx(full).epsilon(1e-12));
}

TEST_CASE("retained count replays the seeded Bernoulli mask") {
  auto cfg = small_rnd(0.25);
  Rnd rnd(cfg);
  Rng replay(cfg.dropout_seed);
  std::size_t expected = 0;
  for (int i = 0; i < 64; ++i) expected += uniform01(replay) >= 0.25 ? 1 : 0;
  Rng rng(6);
  CHECK(rnd.update(random_obs(rng, 64, 12)).retained == expected);
  CHECK_THROWS_AS(rnd.update(Matrix(0, 12)), UsageError);
}

TEST_CASE("the target network never changes") {
  Rnd rnd(small_rnd(0.0));
  const Vector target = rnd.target_params().flat();
  Rng rng(7);
  for (int k = 0; k < 20; ++k) rnd.update(random_obs(rng, 8, 12));
  CHECK(rnd.target_params().flat() == target);
}

TEST_CASE("count bonus is 1/sqrt(N) including the current visit") {
  CountTable t;
  std::vector<double> obs(100, 0.0);
  obs[7] = 1.0;
  CHECK(t.bonus(obs) == 1.0);
  t.bonus(obs);
  t.bonus(obs);
  CHECK(t.bonus(obs) == 0.5);
  double prev = 0.5;
  for (int n = 5; n <= 99; ++n) {
    const double b = t.bonus(obs);
    CHECK(b < prev);
    prev = b;
  }
  CHECK(t.bonus(obs) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(t.count(obs) == 100);
  obs[8] = 1.0;
  CHECK(t.bonus(obs) == 1.0);
  CHECK(t.distinct() == 2);
}

TEST_CASE("extrinsic normalization of all-zero rewards stays zero") {
  ExtrinsicNormalizer n(4, 0.99);
  for (int t = 0; t < 10; ++t) {
    const auto out = n.normalize(std::vector<double>(4, 0.0));
    for (double x : out) CHECK(x == 0.0);
    for (double a : n.accumulators()) CHECK(a == 0.0);
    CHECK(n.last_divisor() == kVarianceFloor);
  }
}

TEST_CASE("extrinsic normalization matches a 3-step hand computation") {
  ExtrinsicNormalizer n(2, 0.99);
  // acc = (1, 0), (1.99, 0), (2.9701, 0); cross-worker std = acc_0 / 2.
  const double expected[] = {1.0 / 0.5, 1.0 / 0.995, 1.0 / 1.48505};
  for (double e : expected) {
    const auto out = n.normalize(std::vector<double>{1.0, 0.0});
    CHECK(out[0] == doctest::Approx(e).epsilon(1e-12));
    CHECK(out[1] == 0.0);
  }
  CHECK(n.accumulators()[0] == doctest::Approx(2.9701).epsilon(1e-14));
  CHECK_THROWS_AS(ExtrinsicNormalizer(1, 0.99), ConfigError);
  CHECK_THROWS_AS(n.normalize(std::vector<double>{1.0}), UsageError);
}

TEST_CASE("extrinsic normalization is invariant to positive rescaling") {
  ExtrinsicNormalizer a(8, 0.99);
  ExtrinsicNormalizer b(8, 0.99);
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> r(8);
    for (auto& x : r) x = u(rng) < 0.3 ? 1.0 : 0.0;
    std::vector<double> scaled = r;
    for (auto& x : scaled) x *= 37.5;
    const auto oa = a.normalize(r);
    const auto ob = b.normalize(scaled);
    for (int w = 0; w < 8; ++w) CHECK(ob[w] == doctest::Approx(oa[w]).epsilon(1e-12));
  }
}

TEST_CASE("zero intrinsic bonuses normalize to zero") {
  IntrinsicNormalizer n(3, 0.99, true);
  const Matrix out = n.normalize(Matrix::Zero(5, 3), Matrix::Zero(5, 3));
  CHECK(out.isZero(0.0));
  CHECK(n.divisor() >= kVarianceFloor);
}

TEST_CASE("intrinsic normalization divides by the return std estimate") {
  IntrinsicNormalizer n(1, 0.99, true);
  RunningMoments m;
  m.update(std::vector<double>{-2.0, 2.0});  // population std 2
  n.set_moments(m);
  CHECK(n.divide(Matrix::Constant(1, 1, 3.0))(0, 0) == 1.5);
}

TEST_CASE("a constant bonus stream converges to bonus / stationary return std") {
  const double b = 0.7;
  const double gamma = 0.9;
  const int episode = 20;
  IntrinsicNormalizer n(2, gamma, true);
  // Stationary returns cycle through b (1 - gamma^k) / (1 - gamma), k = 1..20.
  std::vector<double> cycle;
  double acc = 0.0;
  for (int k = 0; k < episode; ++k) {
    acc = gamma * acc + b;
    cycle.push_back(acc);
  }
  const double stationary = population_std(cycle);
  Matrix out;
  for (int block = 0; block < 500; ++block) {
    Matrix dones = Matrix::Zero(episode, 2);
    dones.row(episode - 1).setOnes();
    out = n.normalize(Matrix::Constant(episode, 2, b), dones);
  }
  CHECK(out(0, 0) == doctest::Approx(b / stationary).epsilon(1e-9));
}

TEST_CASE("running moments merge batches exactly") {
  Rng rng(9);
  std::normal_distribution<double> d(1.0, 2.0);
  std::vector<double> all;
  RunningMoments m;
  for (int k = 0; k < 10; ++k) {
    std::vector<double> batch(1 + k * 3);
    for (auto& x : batch) x = d(rng);
    all.insert(all.end(), batch.begin(), batch.end());
    m.update(batch);
  }
  CHECK(m.count() == static_cast<double>(all.size()));
  CHECK(std::sqrt(m.variance()) == doctest::Approx(population_std(all)).epsilon(1e-12));
}

TEST_CASE("observation normalizer standardizes and clips") {
  ObsNormalizer n(3, 5.0);
  Matrix batch(4, 3);
  batch << 0, 1, 10, 2, 1, 10, 4, 1, 10, 6, 1, 10;
  n.update(batch);
  CHECK(n.mean()(0) == 3.0);
  CHECK(n.variance()(0) == 5.0);
  CHECK(n.variance()(1) >= 0.0);
  Matrix x(1, 3);
  x << 3.0 + std::sqrt(5.0), 1.0, 1e6;
  const Matrix y = n.normalize(x);
  CHECK(y(0, 0) == doctest::Approx(1.0));
  CHECK(y(0, 1) == 0.0);
  CHECK(y(0, 2) == 5.0);
}

TEST_CASE("normalizer and RND state survive save/load mid-stream") {
  Rng rng(10);
  ExtrinsicNormalizer ext(4, 0.99);
  IntrinsicNormalizer in(4, 0.99, true);
  ObsNormalizer obs(12);
  Rnd rnd(small_rnd());
  CountTable counts;
  auto feed = [&](ExtrinsicNormalizer& e, IntrinsicNormalizer& i, ObsNormalizer& o, Rnd& r,
                  CountTable& c, Rng& g) {
    std::vector<double> rew(4);
    for (auto& x : rew) x = uniform01(g) < 0.4 ? 1.0 : 0.0;
    const auto er = e.normalize(rew);
    const Matrix batch = random_obs(g, 8, 12);
    o.update(batch);
    const Matrix nb = o.normalize(batch);
    const Matrix bonus = r.bonus(nb).reshaped(2, 4);
    const Matrix ir = i.normalize(bonus, Matrix::Zero(2, 4));
    const auto st = r.update(nb);
    std::vector<double> key(12, 0.0);
    key[uniform_index(12, g)] = 1.0;
    const double cb = c.bonus(key);
    return std::vector<double>{er[0], er[3], ir(1, 2), st.loss, cb, static_cast<double>(st.retained)};
  };
  for (int k = 0; k < 13; ++k) feed(ext, in, obs, rnd, counts, rng);

  ByteWriter w;
  ext.save(w);
  in.save(w);
  obs.save(w);
  rnd.save(w);
  counts.save(w);
  ExtrinsicNormalizer ext2(4, 0.99);
  IntrinsicNormalizer in2(4, 0.99, true);
  ObsNormalizer obs2(12);
  RndConfig other = small_rnd();
  other.init_seed = 99;
  other.dropout_seed = 98;
  Rnd rnd2(other);
  CountTable counts2;
  ByteReader r(w.bytes());
  ext2.load(r);
  in2.load(r);
  obs2.load(r);
  rnd2.load(r);
  counts2.load(r);
  CHECK(r.at_end());

  Rng rng2 = rng;
  for (int k = 0; k < 10; ++k) {
    CHECK(feed(ext, in, obs, rnd, counts, rng) == feed(ext2, in2, obs2, rnd2, counts2, rng2));
  }
}
