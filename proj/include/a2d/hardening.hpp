#pragma once

// Adaptive-attack evaluation: autoencoder reconstruction detector, PGD
// adversarial training, and confidence (kappa) sweeps of C&W examples
// against attack-cost detection and its combinations.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "a2d/attacks.hpp"
#include "a2d/data.hpp"
#include "a2d/detectors.hpp"
#include "a2d/fingerprint.hpp"
#include "a2d/nn.hpp"
#include "a2d/train.hpp"

namespace a2d {

inline constexpr double kMnistL2Cap = 8.4;
inline constexpr double kCifarL2Cap = 1.6;  // recorded for completeness; no CIFAR model here
inline constexpr double kDefaultAeFpr = 0.01;

// Dense input-hidden-bottleneck-hidden-input autoencoder trained with MSE.
Model train_autoencoder(const Dataset& benign, std::size_t bottleneck_dim, const TrainConfig& cfg,
                        std::size_t hidden_dim = 128);

double reconstruction_error(const Model& autoencoder, std::span<const double> x);

class AeDetector {
 public:
  AeDetector(Model autoencoder, double tau);

  const Model& autoencoder() const noexcept { return ae_; }
  double tau() const noexcept { return tau_; }

  double error(std::span<const double> x) const { return reconstruction_error(ae_, x); }
  // Adversarial iff error > tau.
  Verdict classify(std::span<const double> x) const;

 private:
  Model ae_;
  double tau_;
};

// tau is the nearest-rank (1 - target_fpr) quantile of the benign errors.
AeDetector ae_fit_threshold(Model autoencoder, const Dataset& benign, double target_fpr = kDefaultAeFpr);

// Fixed-step PGD from x (no early stop, no random start) used as the inner
// maximiser of adversarial training.
std::vector<double> pgd_perturb(const Model& model, std::span<const double> x, std::size_t label,
                                const AttackConfig& pgd);

// Cross-entropy training on PGD-perturbed inputs; pgd must be BIM_Linf.
TrainResult pgd_adversarial_train(const Architecture& arch, const Dataset& data, const AttackConfig& pgd,
                                  const TrainConfig& cfg);

struct SweepConfig {
  std::vector<double> kappas;
  double l2_cap = kMnistL2Cap;
  AttackConfig cw = generation_defaults(AttackKind::CW_L2);
  std::size_t workers = 1;
};

struct SweepDetectors {
  std::vector<DefenseAttack> defenses;  // fingerprints for the cost rule
  FingerprintRule a2d;                  // attack-as-defense decision
  const AeDetector* ae = nullptr;       // optional
};

struct SweepRow {
  double kappa = 0.0;
  std::size_t attempted = 0;
  std::size_t successes = 0;  // reached the target within the L2 cap
  double asr = 0.0;           // successes / attempted
  double mean_l2 = 0.0;       // over successes
  double mean_cost = 0.0;     // first defense cost, over successes
  double detect_a2d = 0.0;    // detection rates over successes
  double detect_ae = 0.0;
  double detect_combined = 0.0;
  double residual_asr_a2d = 0.0;  // successful and undetected, over attempted
  double residual_asr_ae = 0.0;
  double residual_asr_combined = 0.0;
};

struct SweepResult {
  std::string model_tag;
  std::vector<SweepRow> rows;
};

// Crafts C&W examples for every (kappa, input) pair against `model` and
// scores them with the configured detectors. Flag rule for the combination:
// adversarial if any enabled detector flags.
SweepResult kappa_sweep(const Model& model, const Dataset& inputs, const SweepConfig& cfg,
                        const SweepDetectors& detectors, std::string model_tag = "plain");

std::string sweep_csv(const SweepResult& r);

}  // namespace a2d
