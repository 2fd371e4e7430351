#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "a2d/error.hpp"
#include "a2d/nn.hpp"
#include "a2d/tensor.hpp"
#include "oracles.hpp"

using namespace a2d;

namespace {

std::vector<double> random_input(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

double oracle_loss(const Model& m, const std::vector<double>& x, const LossKind& loss) {
  const auto z = oracle::logits(m, x);
  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) return oracle::cross_entropy(z, ce->label);
  if (const auto* cw = std::get_if<MarginCW>(&loss)) return oracle::margin_cw(z, cw->target, cw->kappa);
  return oracle::mse(z, std::get<MeanSquared>(loss).reference);
}

double max_rel_error(const Model& m, const std::vector<double>& x, const LossKind& loss) {
  const InputGradient g = input_gradient(m, Tensor::vector(x), loss);
  double worst = 0.0;
  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (oracle_loss(m, xp, loss) - oracle_loss(m, xm, loss)) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(g.grad[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - g.grad[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("tensor shape and data stay consistent") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.all_finite());
  CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5)), InvalidInput);
  CHECK_THROWS_AS(Tensor({0, 3}), InvalidInput);
  Tensor v = Tensor::vector({1.0, NAN});
  CHECK_FALSE(v.all_finite());
}

TEST_CASE("model construction rejects incompatible layers") {
  CHECK_THROWS_AS(Model({}), InvalidInput);
  CHECK_THROWS_AS(Model({Layer::dense(3, 4), Layer::dense(5, 2)}), InvalidInput);
  CHECK_THROWS_AS(Model({Layer::relu(3)}), InvalidInput);
  CHECK_THROWS_AS(Model({Layer::dense(3, 4), Layer::relu(4)}), InvalidInput);
  Layer bad = Layer::dense(2, 2);
  bad.weights[1] = INFINITY;
  CHECK_THROWS_AS(Model({bad}), InvalidInput);
  const Model ok({Layer::dense(3, 4), Layer::relu(4), Layer::dense(4, 2)});
  CHECK(ok.input_dim() == 3);
  CHECK(ok.num_classes() == 2);
}

TEST_CASE("forward matches the triple-loop oracle") {
  std::mt19937_64 rng(1);
  const Model m = make_mlp(Architecture{{20, 13, 9, 5}}, 1.0, 7);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = random_input(rng, 20);
    const auto ref = oracle::logits(m, x);
    const Tensor z = forward(m, Tensor::vector(x));
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(z[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("batched forward equals row-wise forward") {
  std::mt19937_64 rng(2);
  const Model m = make_mlp(Architecture{{6, 8, 3}}, 1.0, 1);
  const auto a = random_input(rng, 6), b = random_input(rng, 6);
  std::vector<double> both(a);
  both.insert(both.end(), b.begin(), b.end());
  const Tensor z = forward(m, Tensor({2, 6}, both));
  REQUIRE(z.shape() == std::vector<std::size_t>{2, 3});
  const Tensor za = forward(m, Tensor::vector(a)), zb = forward(m, Tensor::vector(b));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(z[i] == za[i]);
    CHECK(z[3 + i] == zb[i]);
  }
}

TEST_CASE("input gradients match central differences for every loss") {
  std::mt19937_64 rng(4);
  const Model m = make_mlp(Architecture{{12, 16, 10, 4}}, 1.0, 3);
  std::vector<double> ref(4);
  for (double& r : ref) r = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (int rep = 0; rep < 5; ++rep) {
    const auto x = random_input(rng, 12);
    CHECK(max_rel_error(m, x, CrossEntropy{static_cast<std::size_t>(rep % 4)}) < 1e-5);
    CHECK(max_rel_error(m, x, MarginCW{static_cast<std::size_t>(rep % 4), 1e6}) < 1e-5);
    CHECK(max_rel_error(m, x, MeanSquared{ref}) < 1e-5);
  }
}

TEST_CASE("margin loss is flat once the margin passes kappa") {
  const Model m = make_mlp(Architecture{{4, 3}}, 1.0, 2);
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const auto z = oracle::logits(m, x);
  const std::size_t top = argmax(z);
  const InputGradient g = input_gradient(m, Tensor::vector(x), MarginCW{top, 0.0});
  CHECK(g.loss == 0.0);
  for (double v : g.grad.values()) CHECK(v == 0.0);
}

TEST_CASE("logit jacobian rows match per-class differences") {
  std::mt19937_64 rng(8);
  const Model m = make_mlp(Architecture{{7, 11, 3}}, 1.0, 9);
  const auto x = random_input(rng, 7);
  const auto jac = logit_jacobian(m, x);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 7; ++i) {
      auto xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const double fd = (oracle::logits(m, xp)[k] - oracle::logits(m, xm)[k]) / 2e-6;
      CHECK(jac[k * 7 + i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("softmax and argmax") {
  const std::vector<double> z{1.0, 3.0, 3.0, -2.0};
  CHECK(argmax(z) == 1);
  const auto p = softmax(z);
  double s = 0.0;
  for (double v : p) s += v;
  CHECK(s == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(p[2]));
  const auto big = softmax(std::vector<double>{1000.0, 0.0});
  CHECK(big[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(big[1]));
}

TEST_CASE("loss validation") {
  CHECK_THROWS_AS(validate_loss(CrossEntropy{5}, 5), InvalidInput);
  CHECK_THROWS_AS(validate_loss(MarginCW{0, -1.0}, 5), InvalidInput);
  CHECK_THROWS_AS(validate_loss(MeanSquared{{1.0}}, 5), InvalidInput);
  CHECK_NOTHROW(validate_loss(MarginCW{4, 0.0}, 5));
}

TEST_CASE("model files round-trip and reject corruption") {
  const auto dir = std::filesystem::temp_directory_path() / "a2d_nn_io";
  std::filesystem::create_directories(dir);
  const Model m = make_mlp(Architecture{{5, 6, 3}}, 1.0, 4);
  save_model(m, dir / "m.a2dm");
  CHECK(load_model(dir / "m.a2dm") == m);

  std::ifstream in(dir / "m.a2dm", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  auto write = [&](const std::string& b) {
    std::ofstream(dir / "bad.a2dm", std::ios::binary | std::ios::trunc) << b;
  };
  write(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_model(dir / "bad.a2dm"), FormatError);
  write("XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(load_model(dir / "bad.a2dm"), FormatError);
  write(bytes + "z");
  CHECK_THROWS_AS(load_model(dir / "bad.a2dm"), FormatError);
  CHECK_THROWS_AS(load_model(dir / "missing.a2dm"), MissingArtifact);
}

TEST_CASE("make_mlp is seeded and bounded") {
  const Model a = make_mlp(Architecture{{100, 10}}, 2.0, 1);
  CHECK(a == make_mlp(Architecture{{100, 10}}, 2.0, 1));
  CHECK_FALSE(a == make_mlp(Architecture{{100, 10}}, 2.0, 2));
  for (double w : a.layers()[0].weights) CHECK(std::abs(w) <= 2.0 / 10.0);
  for (double b : a.layers()[0].bias) CHECK(b == 0.0);
}

}  // TEST_SUITE
