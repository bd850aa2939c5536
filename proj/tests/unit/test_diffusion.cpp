#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bidd/diffusion/schedule.hpp"
#include "bidd/diffusion/training.hpp"
#include "bidd/dgp/generator.hpp"
#include "bidd/error.hpp"
#include "bidd/numerics/sampling.hpp"

using namespace bidd;

namespace {

TrainSpec toy_spec(std::size_t epochs) {
  TrainSpec s;
  s.epochs = epochs;
  s.model = DenoiserConfig::desk();
  return s;
}

PairDataset linear_toy(std::uint64_t seed, std::size_t n) {
  DGPSpec spec;
  spec.mediators = 0;
  spec.noise = NoiseFamily::Gaussian;
  spec.mechanisms = {MechanismSpec::linear(1.0, 0.0)};
  spec.n = n;
  spec.seed = seed;
  return generate(spec);
}

// a = b + 0.1 e: the noise is almost exactly predictable from (a_t, b, t).
PairDataset tight_linear_toy(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  PairDataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.b.push_back(rng.normal());
    d.a.push_back(d.b.back() + 0.1 * rng.normal());
  }
  standardize(d);
  return d;
}

double mean_of(const std::vector<LossRecord>& trace, std::size_t from, std::size_t count) {
  double s = 0.0;
  for (std::size_t e = from; e < from + count; ++e) s += trace[e].loss;
  return s / static_cast<double>(count);
}

}  // namespace

TEST_CASE("default schedule endpoints and monotonicity") {
  const NoiseSchedule s = make_schedule(256, 1e-4, 0.02);
  CHECK(s.beta_at(1) == 1e-4);
  CHECK(s.beta_at(256) == 0.02);
  CHECK(s.alpha_bar_at(1) == doctest::Approx(0.9999).epsilon(1e-15));
  for (std::size_t t = 1; t < 256; ++t) {
    CHECK(s.beta_at(t + 1) > s.beta_at(t));
    CHECK(s.alpha_bar_at(t + 1) < s.alpha_bar_at(t));
  }
  CHECK(s.alpha_bar_at(256) > 0.0);
  CHECK(s.alpha_bar_at(1) < 1.0);

  // Brute-force product over the linear grid.
  double prod = 1.0;
  for (int t = 1; t <= 256; ++t) prod *= 1.0 - (1e-4 + (t - 1) / 255.0 * (0.02 - 1e-4));
  CHECK(std::abs(s.alpha_bar_at(256) - prod) < 1e-12);
  // exp(-sum beta) = 0.0763 is the usual back-of-envelope value; the product is 0.0750.
  CHECK(std::abs(s.alpha_bar_at(256) - 0.0762) < 0.0015);
}

TEST_CASE("schedule edge cases") {
  const NoiseSchedule one = make_schedule(1, 1e-4, 0.02);
  CHECK(one.T == 1);
  CHECK(one.beta_at(1) == 1e-4);
  CHECK_THROWS_AS(make_schedule(0, 1e-4, 0.02), ParameterError);
  CHECK_THROWS_AS(make_schedule(10, 0.0, 0.02), ParameterError);
  CHECK_THROWS_AS(make_schedule(10, 0.03, 0.02), ParameterError);
  CHECK_THROWS_AS(make_schedule(10, 1e-4, 1.0), ParameterError);
  TrainSpec spec;
  CHECK(make_schedule(spec).T == 256);
}

TEST_CASE("forward noising") {
  CHECK(noised(1.5, -0.3, 1.0) == 1.5);
  CHECK(noised(1.5, -0.3, 0.0) == -0.3);
  const NoiseSchedule s = make_schedule(256, 1e-4, 0.02);
  CHECK_THROWS_AS(noised(0.0, 0.0, 0, s), ParameterError);
  CHECK_THROWS_AS(noised(0.0, 0.0, 257, s), ParameterError);

  Rng rng(12);
  for (std::size_t t : {1u, 64u, 128u, 256u}) {
    std::vector<double> x(100000);
    for (auto& v : x) v = noised(rng.normal(), rng.normal(), t, s);
    CHECK(std::abs(variance(x) - 1.0) < 0.03);
  }
}

TEST_CASE("train spec validation") {
  TrainSpec s;
  CHECK_NOTHROW(s.validate());
  s.model.t_max = 100;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  TrainSpec z;
  z.T = 0;
  CHECK_THROWS_AS(z.validate(), ConfigError);
  TrainSpec o = toy_spec(10);
  CHECK(o.optimizer().total_epochs == 10);
}

TEST_CASE("zero epochs returns the initialized model") {
  const PairDataset d = linear_toy(1, 100);
  const Rng rng(77);
  const TrainResult r = train_conditional(d, toy_spec(0), rng);
  CHECK(r.trace.empty());
  Rng init = rng.split("init");
  const DenoiserModel expected = init_params(init, DenoiserConfig::desk());
  CHECK(std::equal(expected.parameters().begin(), expected.parameters().end(),
                   r.model.parameters().begin()));
}

TEST_CASE("training is deterministic") {
  const PairDataset d = linear_toy(2, 80);
  const TrainResult r1 = train_conditional(d, toy_spec(5), Rng(9));
  const TrainResult r2 = train_conditional(d, toy_spec(5), Rng(9));
  CHECK(std::equal(r1.model.parameters().begin(), r1.model.parameters().end(),
                   r2.model.parameters().begin()));
  REQUIRE(r1.trace.size() == 5);
  CHECK(r1.trace[0].lr == doctest::Approx(1e-4));
  const TrainResult r3 = train_conditional(d, toy_spec(5), Rng(10));
  CHECK_FALSE(std::equal(r1.model.parameters().begin(), r1.model.parameters().end(),
                         r3.model.parameters().begin()));
}

TEST_CASE("training rejects bad input") {
  std::vector<double> a{1.0}, b{1.0};
  CHECK_THROWS_AS(train_conditional(a, b, toy_spec(1), Rng(1)), ParameterError);
  std::vector<double> a2{1.0, 2.0, std::nan("")}, b2{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(train_conditional(a2, b2, toy_spec(1), Rng(1)), NumericError);
}

TEST_CASE("training loss falls on a linear toy problem") {
  // Small network and a larger step so 200 epochs stay quick.
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PairDataset d = tight_linear_toy(100 + seed, 200);
    TrainSpec s = toy_spec(200);
    s.model.width = 32;
    s.lr_init = 1e-3;
    s.lr_final = 1e-4;
    const TrainResult r = train_conditional(d, s, Rng(seed));
    if (mean_of(r.trace, 190, 10) < 0.5 * mean_of(r.trace, 0, 10)) ++passed;
  }
  CHECK(passed >= 19);
}

TEST_CASE("desk preset lowers the loss over 1500 epochs") {
  int passed = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PairDataset d = linear_toy(500 + seed, 64);
    const TrainResult r = train_conditional(d, toy_spec(1500), Rng(seed));
    if (mean_of(r.trace, 1450, 50) < mean_of(r.trace, 0, 50)) ++passed;
  }
  CHECK(passed >= 19);
}

TEST_CASE("predict_noise layout") {
  const DenoiserModel zero(DenoiserConfig::desk());
  const NoiseSchedule s = make_schedule(256, 1e-4, 0.02);
  const std::vector<double> a{0.1, -0.4, 2.0}, b{1.0, 2.0, 3.0};
  Rng rng(4);
  const auto one = predict_noise(zero, a, b, 10, s, rng, 1);
  CHECK(one.predicted.size() == 3);
  const auto p = predict_noise(zero, a, b, 10, s, rng, 4);
  REQUIRE(p.predicted.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(p.predicted[i] == 0.0);
    CHECK(p.condition[i] == b[i / 4]);
  }
  CHECK(p.noise[0] != p.noise[1]);
  CHECK_THROWS_AS(predict_noise(zero, a, b, 0, s, rng, 1), ParameterError);
  CHECK_THROWS_AS(predict_noise(zero, a, b, 5, s, rng, 0), ParameterError);

  Rng r1(8), r2(8);
  const auto m1 = predict_noise(zero, a, b, 200, s, r1, 3);
  const auto m2 = predict_noise(zero, a, b, 200, s, r2, 3, true);
  CHECK(m1.noise == m2.noise);
  CHECK(m2.condition == m1.condition);
}

TEST_CASE("trained model predicts the injected noise") {
  const PairDataset d = linear_toy(3, 400);
  TrainSpec s = toy_spec(600);
  s.lr_init = 1e-3;
  s.lr_final = 1e-4;
  const TrainResult r = train_conditional(d, s, Rng(3));
  const NoiseSchedule sched = make_schedule(s);
  Rng rng(5);
  const auto p = predict_noise(r.model, d.a, d.b, 128, sched, rng, 2);
  CHECK(correlation(p.predicted, p.noise) > 0.3);
}

TEST_CASE("loss trace CSV") {
  const std::vector<LossRecord> trace{{0, 1.5, 1e-4}, {1, 0.25, 5e-5}};
  std::ostringstream os;
  write_loss_trace(os, trace);
  CHECK(os.str() == "epoch,loss,lr\n0,1.5,0.0001\n1,0.25,5.0000000000000002e-05\n");
}
