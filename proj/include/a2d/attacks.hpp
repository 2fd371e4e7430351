#pragma once

// Instrumented evasion attacks. Every attack reports how much work it took
// (iterations and model queries) as well as the adversarial point it found.
//
// Query unit: one forward pass, or one forward pass plus its backward pass,
// on one example. Passes that can be fused are fused (the forward pass that
// checks iterate i also seeds the gradient for step i+1).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "a2d/data.hpp"
#include "a2d/nn.hpp"
#include "a2d/tensor.hpp"

namespace a2d {

enum class AttackKind { FGSM, BIM_Linf, BIM_L2, JSMA, DBA, CW_L2 };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);  // throws InvalidInput

struct Untargeted {
  friend bool operator==(const Untargeted&, const Untargeted&) = default;
};
// Rank 1 is the current prediction, rank 2 the runner-up, and so on.
struct TargetRank {
  std::size_t rank = 2;
  friend bool operator==(const TargetRank&, const TargetRank&) = default;
};
struct TargetClass {
  std::size_t label = 0;
  friend bool operator==(const TargetClass&, const TargetClass&) = default;
};
using Targeting = std::variant<Untargeted, TargetRank, TargetClass>;

enum class Norm { Linf, L2 };

struct AttackConfig {
  AttackKind kind = AttackKind::BIM_Linf;
  double epsilon = 0.3;
  double alpha = 0.01;          // BIM step; CW gradient step
  std::size_t max_iter = 500;   // BIM/JSMA/CW steps; DBA proposals
  double theta = 1.0;
  double gamma = 0.1;
  double mse_threshold = 0.02;
  double kappa = 0.0;
  double c = 1.0;
  Norm fgsm_norm = Norm::Linf;  // FGSM only; BIM takes its norm from `kind`
  Targeting targeting = Untargeted{};
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

// MNIST parameters for crafting adversarial corpora.
AttackConfig generation_defaults(AttackKind kind);
// Parameters for running an attack as a defense (early stop, cap 500).
AttackConfig defense_defaults(AttackKind kind);

struct AttackOutcome {
  bool success = false;
  std::size_t iterations = 0;
  std::size_t queries = 0;
  std::optional<Tensor> adversarial;
  std::size_t source_label = 0;  // label the attack moved away from
  std::optional<std::size_t> target;
  std::size_t final_label = 0;
  double distortion_l0 = 0.0;
  double distortion_l2 = 0.0;
  double distortion_linf = 0.0;
};

// `label` defaults to the model's prediction for x (the defense setting).
AttackOutcome fgsm(const Model& model, const Tensor& x, const AttackConfig& cfg,
                   std::optional<std::size_t> label = std::nullopt);
AttackOutcome bim(const Model& model, const Tensor& x, const AttackConfig& cfg,
                  std::optional<std::size_t> label = std::nullopt);
AttackOutcome jsma(const Model& model, const Tensor& x, const AttackConfig& cfg,
                   std::optional<std::size_t> label = std::nullopt);
// `pool` supplies starting points when random noise never changes the label.
AttackOutcome dba(const Model& model, const Tensor& x, const AttackConfig& cfg,
                  std::optional<std::size_t> label = std::nullopt, const Dataset* pool = nullptr);
AttackOutcome cw_l2(const Model& model, const Tensor& x, const AttackConfig& cfg,
                    std::optional<std::size_t> label = std::nullopt);

AttackOutcome run_attack(const Model& model, const Tensor& x, const AttackConfig& cfg,
                         std::optional<std::size_t> label = std::nullopt, const Dataset* pool = nullptr);

// Concrete target class for `targeting` given the logits at x. Untargeted
// yields nullopt.
std::optional<std::size_t> resolve_target(const Targeting& targeting, std::span<const double> logits);

struct Distortion {
  double l0 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};
Distortion measure_distortion(std::span<const double> x, std::span<const double> adv);

struct RadiusProbe {
  double epsilon = 0.0;
  bool success = false;
};
struct RadiusResult {
  double radius = 0.0;
  std::vector<RadiusProbe> trace;
};

// Smallest BIM budget found by bisection over [0, base.epsilon] at which the
// attack succeeds; base.epsilon when it never does.
RadiusResult robustness_radius(const Model& model, const Tensor& x, const AttackConfig& base,
                               std::size_t bisection_steps, std::optional<std::size_t> label = std::nullopt);

}  // namespace a2d
