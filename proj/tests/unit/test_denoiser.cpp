#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bidd/denoiser/adamw.hpp"
#include "bidd/denoiser/checkpoint.hpp"
#include "bidd/denoiser/model.hpp"
#include "bidd/error.hpp"

using namespace bidd;

namespace {

DenoiserConfig tiny_config() {
  DenoiserConfig c;
  c.width = 8;
  c.n_res_blocks = 2;
  return c;
}

struct Batch {
  std::vector<double> noised, cond, target;
  std::vector<std::size_t> t;
};

Batch random_batch(Rng& rng, std::size_t n, std::size_t t_max) {
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.noised.push_back(rng.normal());
    b.cond.push_back(rng.normal());
    b.target.push_back(rng.normal());
    b.t.push_back(1 + rng.below(t_max));
  }
  b.t[1] = b.t[0];  // a repeated timestep exercises the shared time table
  return b;
}

double batch_loss(const DenoiserModel& m, const Batch& b) {
  const auto c = forward(m, b.noised, b.cond, b.t);
  return mse_loss(c.prediction, b.target, nullptr);
}

}  // namespace

TEST_CASE("default config has the published parameter count, stage by stage") {
  const DenoiserModel model(DenoiserConfig::paper());
  const StageCounts s = model.stage_counts();
  CHECK(s.input == 1024);        // 1 -> 512
  CHECK(s.condition == 708);     // 1 -> 16 -> 32 -> 4
  CHECK(s.time == 271360);       // 16 -> 512 -> 512
  CHECK(s.residual == 8460440);  // 2 x (1028 -> 2056 -> 1028)
  CHECK(s.output == 527361);     // 1028 -> 512 -> 1
  CHECK(s.total() == 9260893);
  CHECK(model.parameter_count() == 9260893);
  CHECK(model.config().concat_width() == 1028);
}

TEST_CASE("desk config shape") {
  const DenoiserModel model(DenoiserConfig::desk());
  CHECK(model.config().concat_width() == 260);
  CHECK(model.blocks().size() == 1);
  CHECK(model.parameter_count() == model.stage_counts().total());
}

TEST_CASE("time embedding") {
  const auto e0 = time_embed(0.0, 4);
  CHECK(e0 == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  CHECK(time_embed(17.0, 16) == time_embed(17.0, 16));
  for (std::size_t t = 1; t <= 256; ++t) {
    for (double v : time_embed(static_cast<double>(t), 16)) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
  const auto e = time_embed(3.0, 4);
  CHECK(e[0] == doctest::Approx(std::sin(3.0)));
  CHECK(e[3] == doctest::Approx(std::cos(3.0 / 100.0)));
  CHECK_THROWS_AS(time_embed(1.0, 5), ConfigError);
  DenoiserConfig bad;
  bad.time_embed_dim = 15;
  CHECK_THROWS_AS(DenoiserModel{bad}, ConfigError);
}

TEST_CASE("zero network predicts zero") {
  const DenoiserModel model(tiny_config());
  for (double a : {-3.0, 0.0, 2.5}) CHECK(forward_one(model, a, 1.0 - a, 7) == 0.0);
}

TEST_CASE("batch of one equals the corresponding row of a batch") {
  Rng rng(3);
  const auto model = init_params(rng, tiny_config());
  const Batch b = random_batch(rng, 9, 256);
  const auto full = forward(model, b.noised, b.cond, b.t).prediction;
  for (std::size_t i = 0; i < b.noised.size(); ++i) {
    CHECK(forward_one(model, b.noised[i], b.cond[i], b.t[i]) == doctest::Approx(full[i]).epsilon(1e-12));
  }
  CHECK(predict(model, b.noised, b.cond, b.t) == full);
}

TEST_CASE("forward rejects bad inputs") {
  Rng rng(3);
  const auto model = init_params(rng, tiny_config());
  CHECK_THROWS_AS(forward_one(model, std::nan(""), 0.0, 1), NumericError);
  CHECK_THROWS_AS(forward_one(model, 0.0, INFINITY, 1), NumericError);
  CHECK_THROWS_AS(forward_one(model, 0.0, 0.0, 0), ParameterError);
  CHECK_THROWS_AS(forward_one(model, 0.0, 0.0, 257), ParameterError);
}

TEST_CASE("initialization") {
  Rng r1(11), r2(11);
  const auto m1 = init_params(r1, DenoiserConfig::desk());
  const auto m2 = init_params(r2, DenoiserConfig::desk());
  CHECK(std::equal(m1.parameters().begin(), m1.parameters().end(), m2.parameters().begin()));
  // Bias of the 1-input projection is bounded by 1/sqrt(1).
  for (double p : m1.parameters()) CHECK(std::abs(p) <= 1.0);

  // Monte-Carlo sanity: standardized inputs give finite, moderate outputs.
  Rng data(5);
  const Batch b = random_batch(data, 2000, 256);
  for (double p : forward(m1, b.noised, b.cond, b.t).prediction) {
    CHECK(std::isfinite(p));
    CHECK(std::abs(p) < 1e3);
  }
}

TEST_CASE("backward matches central finite differences on a width-8 model") {
  Rng rng(2024);
  auto model = init_params(rng, tiny_config());
  const Batch b = random_batch(rng, 6, 256);
  const auto cache = forward(model, b.noised, b.cond, b.t);
  std::vector<double> dloss;
  mse_loss(cache.prediction, b.target, &dloss);
  const auto grads = backward(model, cache, dloss);

  const double h = 1e-5;
  auto params = model.parameters();
  double worst = 0.0;
  std::size_t worst_index = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = batch_loss(model, b);
    params[i] = saved - h;
    const double down = batch_loss(model, b);
    params[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    // Relative error with a floor for gradients that are zero up to rounding.
    const double rel = std::abs(grads[i] - fd) / std::max({std::abs(grads[i]), std::abs(fd), 1e-7});
    if (rel > worst) {
      worst = rel;
      worst_index = i;
    }
  }
  INFO("worst parameter index " << worst_index);
  CHECK(worst < 1e-4);
}

TEST_CASE("zero loss gradient gives zero parameter gradients") {
  Rng rng(8);
  const auto model = init_params(rng, tiny_config());
  const Batch b = random_batch(rng, 5, 256);
  const auto cache = forward(model, b.noised, b.cond, b.t);
  const std::vector<double> zero(5, 0.0);
  for (double g : backward(model, cache, zero)) CHECK(g == 0.0);
}

TEST_CASE("condition input weights get no gradient when the condition is zeroed") {
  Rng rng(8);
  const auto model = init_params(rng, tiny_config());
  Batch b = random_batch(rng, 5, 256);
  std::fill(b.cond.begin(), b.cond.end(), 0.0);
  const auto cache = forward(model, b.noised, b.cond, b.t);
  std::vector<double> dloss;
  mse_loss(cache.prediction, b.target, &dloss);
  const auto grads = backward(model, cache, dloss);
  const auto& first = model.cond_layers()[0];
  for (std::size_t j = 0; j < first.in * first.out; ++j) CHECK(grads[first.weight + j] == 0.0);
}

TEST_CASE("AdamW schedule and update") {
  AdamWConfig cfg;
  CHECK(cfg.lr_at(0) == doctest::Approx(1e-4).epsilon(1e-15));
  CHECK(cfg.lr_at(cfg.total_epochs) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(cfg.lr_at(cfg.total_epochs / 2) == doctest::Approx(5.5e-5).epsilon(1e-12));
  for (std::size_t e = 1; e <= cfg.total_epochs; ++e) CHECK(cfg.lr_at(e) <= cfg.lr_at(e - 1));

  Rng rng(1);
  auto model = init_params(rng, tiny_config());
  const std::vector<double> before(model.parameters().begin(), model.parameters().end());

  SUBCASE("zero gradient without weight decay leaves parameters unchanged") {
    AdamWConfig no_decay;
    no_decay.weight_decay = 0.0;
    auto state = make_optimizer(model, no_decay);
    const std::vector<double> zero(model.parameter_count(), 0.0);
    adamw_step(model, zero, state, 0);
    CHECK(std::equal(before.begin(), before.end(), model.parameters().begin()));
  }
  SUBCASE("first step moves each parameter by about lr against the gradient sign") {
    AdamWConfig no_decay;
    no_decay.weight_decay = 0.0;
    auto state = make_optimizer(model, no_decay);
    std::vector<double> g(model.parameter_count(), 0.5);
    adamw_step(model, g, state, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(model.parameters()[i] - before[i] == doctest::Approx(-1e-4).epsilon(1e-6));
    }
  }
  SUBCASE("weight decay is decoupled") {
    auto state = make_optimizer(model, cfg);
    const std::vector<double> zero(model.parameter_count(), 0.0);
    adamw_step(model, zero, state, 0);
    for (std::size_t i = 0; i < zero.size(); ++i) {
      CHECK(model.parameters()[i] == doctest::Approx(before[i] * (1.0 - 1e-4 * 0.01)));
    }
  }
  SUBCASE("non-finite gradient aborts with the epoch") {
    auto state = make_optimizer(model, cfg);
    std::vector<double> g(model.parameter_count(), 0.0);
    g[3] = std::nan("");
    try {
      adamw_step(model, g, state, 17);
      FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
      CHECK(e.epoch() == 17);
    }
    CHECK(std::equal(before.begin(), before.end(), model.parameters().begin()));
  }
}

TEST_CASE("checkpoint round trip and corruption detection") {
  Rng rng(4);
  const auto model = init_params(rng, tiny_config());
  std::stringstream ss;
  save_checkpoint(model, ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == "BIDDCKPT");
  CHECK(bytes.size() == 8 + 4 + 8 * 8 + 8 + model.parameter_count() * 8 + 8);

  std::stringstream in(bytes);
  const auto loaded = load_checkpoint(in);
  CHECK(loaded.config() == model.config());
  CHECK(std::equal(model.parameters().begin(), model.parameters().end(), loaded.parameters().begin()));

  std::string corrupt = bytes;
  corrupt[200] ^= 0x01;
  std::stringstream bad(corrupt);
  CHECK_THROWS_AS(load_checkpoint(bad), FormatError);

  std::stringstream truncated(bytes.substr(0, 50));
  CHECK_THROWS_AS(load_checkpoint(truncated), FormatError);

  std::stringstream magic("NOTACKPT-------------------");
  CHECK_THROWS_AS(load_checkpoint(magic), FormatError);
}
