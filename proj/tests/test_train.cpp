#include <doctest.h>

#include <cmath>
#include <random>

#include "a2d/error.hpp"
#include "a2d/train.hpp"
#include "oracles.hpp"

using namespace a2d;

namespace {

Model with_weight(const Model& m, std::size_t layer, std::size_t idx, double delta, bool bias) {
  std::vector<Layer> layers(m.layers().begin(), m.layers().end());
  (bias ? layers[layer].bias : layers[layer].weights)[idx] += delta;
  return Model(std::move(layers));
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("one SGD step moves each parameter by its loss gradient") {
  // With lr = 1 and a single example, W - W' is the backpropagated gradient.
  const Model m = make_mlp(Architecture{{6, 7, 3}}, 1.0, 21);
  const std::vector<double> x{0.2, 0.9, 0.4, 0.1, 0.7, 0.5};
  const std::vector<double> ref{0.3, -0.2, 0.8};
  const std::vector<LossKind> losses{CrossEntropy{2}, MarginCW{1, 1e6}, MeanSquared{ref}};
  for (const LossKind& loss : losses) {
    TrainConfig cfg;
    cfg.learning_rate = 1.0;
    cfg.epochs = 1;
    cfg.batch_size = 1;
    const TrainResult r = sgd_train(m, 1, cfg, [&](std::size_t, const Model&, std::vector<double>& in) {
      in = x;
      return loss;
    });
    auto f = [&](const Model& mm) {
      const auto z = oracle::logits(mm, x);
      if (const auto* ce = std::get_if<CrossEntropy>(&loss)) return oracle::cross_entropy(z, ce->label);
      if (const auto* cw = std::get_if<MarginCW>(&loss)) return oracle::margin_cw(z, cw->target, cw->kappa);
      return oracle::mse(z, ref);
    };
    for (std::size_t li = 0; li < m.layers().size(); ++li) {
      const Layer& before = m.layers()[li];
      if (before.kind != LayerKind::Dense) continue;
      const Layer& after = r.model.layers()[li];
      for (bool bias : {false, true}) {
        const std::size_t n = bias ? before.bias.size() : before.weights.size();
        for (std::size_t i = 0; i < n; ++i) {
          const double step = bias ? before.bias[i] - after.bias[i] : before.weights[i] - after.weights[i];
          const double h = 1e-6;
          const double fd = (f(with_weight(m, li, i, h, bias)) - f(with_weight(m, li, i, -h, bias))) / (2 * h);
          CHECK(step == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
        }
      }
    }
  }
}

TEST_CASE("training separates blobs and is reproducible") {
  const auto& [model, data] = oracle::blob_model();
  CHECK(accuracy(model, data) > 0.97);

  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  const Dataset small = synthetic_blobs(3, 40, 8, 0.1, 2);
  const TrainResult a = train(Architecture{{8, 6, 3}}, small, cfg);
  const TrainResult b = train(Architecture{{8, 6, 3}}, small, cfg);
  CHECK(a.model == b.model);
  REQUIRE(a.history.size() == 3);
  CHECK(a.history[2].mean_loss < a.history[0].mean_loss);
  CHECK(a.history[0].accuracy.has_value());
}

TEST_CASE("zero learning rate leaves the model unchanged") {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  const Dataset d = synthetic_blobs(2, 10, 4, 0.1, 1);
  const Model init = make_mlp(Architecture{{4, 3, 2}}, 1.0, 1);
  CHECK(train(init, d, cfg).model == init);
}

TEST_CASE("divergence and bad configs are reported") {
  TrainConfig cfg;
  cfg.learning_rate = 1e200;
  cfg.epochs = 5;
  const Dataset d = synthetic_blobs(2, 20, 4, 0.1, 1);
  CHECK_THROWS_AS(train(Architecture{{4, 8, 2}}, d, cfg), DivergenceError);

  TrainConfig zero;
  zero.epochs = 0;
  CHECK_THROWS_AS(zero.validate(), InvalidInput);
  zero.epochs = 1;
  zero.batch_size = 0;
  CHECK_THROWS_AS(zero.validate(), InvalidInput);
  CHECK_THROWS_AS(train(Architecture{{5, 2}}, d, TrainConfig{}), InvalidInput);
}

}  // TEST_SUITE
