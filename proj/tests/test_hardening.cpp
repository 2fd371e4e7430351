#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "a2d/error.hpp"
#include "a2d/hardening.hpp"
#include "oracles.hpp"

using namespace a2d;

namespace {

TrainConfig quick(std::size_t epochs, double lr = 0.1) {
  TrainConfig c;
  c.learning_rate = lr;
  c.epochs = epochs;
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

const Model& autoencoder() {
  static const Model ae = train_autoencoder(oracle::blob_model().second, 4, quick(150, 0.2), 24);
  return ae;
}

}  // namespace

TEST_SUITE("hardening") {

TEST_CASE("autoencoder reconstructs benign inputs better than noise") {
  const Dataset& data = oracle::blob_model().second;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double benign = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    benign += reconstruction_error(autoencoder(), data[i * 9].pixels.values());
    std::vector<double> r(16);
    for (double& v : r) v = u(rng);
    noise += reconstruction_error(autoencoder(), r);
  }
  CHECK(benign * 3 < noise);
  CHECK(autoencoder().input_dim() == 16);
  CHECK(autoencoder().output_dim() == 16);
}

TEST_CASE("AE threshold is the nearest-rank benign quantile") {
  const Dataset& data = oracle::blob_model().second;
  for (double fpr : {0.0, 0.01, 0.05, 0.2}) {
    const AeDetector det = ae_fit_threshold(autoencoder(), data, fpr);
    std::vector<double> errors;
    for (const Example& e : data) errors.push_back(reconstruction_error(autoencoder(), e.pixels.values()));
    std::sort(errors.begin(), errors.end());
    const auto rank = static_cast<std::size_t>(std::ceil((1.0 - fpr) * errors.size()));
    CHECK(det.tau() == errors[std::max<std::size_t>(rank, 1) - 1]);
    std::size_t flagged = 0;
    for (const Example& e : data) flagged += det.classify(e.pixels.values()) == Verdict::Adversarial;
    CHECK(static_cast<double>(flagged) <= fpr * data.size());
  }
  CHECK_THROWS_AS(ae_fit_threshold(autoencoder(), data, 1.0), InvalidInput);
}

TEST_CASE("PGD stays in its ball and raises the loss") {
  const auto& [model, data] = oracle::blob_model();
  AttackConfig pgd = defense_defaults(AttackKind::BIM_Linf);
  pgd.epsilon = 0.1;
  pgd.alpha = 0.03;
  pgd.max_iter = 5;
  for (std::size_t i = 0; i < data.size(); i += 50) {
    const auto x = data[i].pixels.values();
    const auto adv = pgd_perturb(model, x, data[i].label, pgd);
    for (std::size_t j = 0; j < x.size(); ++j) {
      CHECK(std::abs(adv[j] - x[j]) <= pgd.epsilon + 1e-12);
      CHECK((adv[j] >= 0.0 && adv[j] <= 1.0));
    }
    const double before = oracle::cross_entropy(oracle::logits(model, {x.begin(), x.end()}), data[i].label);
    const double after = oracle::cross_entropy(oracle::logits(model, adv), data[i].label);
    CHECK(after >= before);
  }
}

TEST_CASE("adversarial training with a zero budget is plain training") {
  const Dataset d = synthetic_blobs(3, 30, 6, 0.1, 4);
  AttackConfig pgd = defense_defaults(AttackKind::BIM_Linf);
  pgd.epsilon = 0.0;
  const Architecture arch{{6, 8, 3}};
  CHECK(pgd_adversarial_train(arch, d, pgd, quick(3)).model == train(arch, d, quick(3)).model);
  pgd.kind = AttackKind::BIM_L2;
  CHECK_THROWS_AS(pgd_adversarial_train(arch, d, pgd, quick(3)), InvalidInput);
}

TEST_CASE("adversarial training makes PGD less effective") {
  const Dataset d = synthetic_blobs(3, 80, 8, 0.12, 6);
  AttackConfig pgd = defense_defaults(AttackKind::BIM_Linf);
  pgd.epsilon = 0.08;
  pgd.alpha = 0.02;
  pgd.max_iter = 5;
  const Architecture arch{{8, 16, 3}};
  const Model plain = train(arch, d, quick(20)).model;
  const Model robust = pgd_adversarial_train(arch, d, pgd, quick(20)).model;
  auto robust_acc = [&](const Model& m) {
    std::size_t ok = 0;
    for (const Example& e : d) {
      ok += argmax(oracle::logits(m, pgd_perturb(m, e.pixels.values(), e.label, pgd))) == e.label;
    }
    return static_cast<double>(ok) / d.size();
  };
  CHECK(robust_acc(robust) >= robust_acc(plain));
}

TEST_CASE("kappa sweep bookkeeping") {
  const auto& [model, data] = oracle::blob_model();
  const Dataset inputs = data.head(24, "in");
  AttackConfig bim = defense_defaults(AttackKind::BIM_Linf);
  bim.alpha = 0.005;
  const std::vector<DefenseAttack> defs{{"bim", bim}};
  const AeDetector ae = ae_fit_threshold(autoencoder(), data, 0.05);
  SweepConfig cfg;
  cfg.kappas = {0.0, 1.0, 3.0};
  cfg.l2_cap = 8.4;
  cfg.workers = 3;
  SweepDetectors det{defs, [](const Fingerprint& f) { return f.costs[0] < 10 ? Verdict::Adversarial : Verdict::Benign; },
                     &ae};
  const SweepResult r = kappa_sweep(model, inputs, cfg, det, "plain");
  REQUIRE(r.rows.size() == 3);
  for (const SweepRow& row : r.rows) {
    CHECK(row.attempted == 24);
    CHECK(row.asr == doctest::Approx(double(row.successes) / 24));
    CHECK(row.detect_combined >= std::max(row.detect_a2d, row.detect_ae));
    CHECK(row.residual_asr_combined <= std::min(row.residual_asr_a2d, row.residual_asr_ae) + 1e-15);
    CHECK(row.residual_asr_a2d == doctest::Approx(row.asr * (1 - row.detect_a2d)));
  }
  cfg.workers = 1;
  const SweepResult again = kappa_sweep(model, inputs, cfg, det, "plain");
  CHECK(sweep_csv(again) == sweep_csv(r));
  CHECK(sweep_csv(r).rfind("model,kappa,attempted", 0) == 0);

  SweepConfig capped = cfg;
  capped.l2_cap = 1e-9;
  const SweepResult none = kappa_sweep(model, inputs, capped, det, "plain");
  for (const SweepRow& row : none.rows) {
    if (row.kappa > 0) CHECK(row.successes == 0);
  }
}

}  // TEST_SUITE
