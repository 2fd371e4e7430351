#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "a2d/error.hpp"

namespace a2d {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::FGSM: return "fgsm";
    case AttackKind::BIM_Linf: return "bim";
    case AttackKind::BIM_L2: return "bim2";
    case AttackKind::JSMA: return "jsma";
    case AttackKind::DBA: return "dba";
    case AttackKind::CW_L2: return "cw";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (AttackKind k : {AttackKind::FGSM, AttackKind::BIM_Linf, AttackKind::BIM_L2, AttackKind::JSMA, AttackKind::DBA,
                       AttackKind::CW_L2}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidInput("unknown attack kind '" + std::string(name) + "' (expected fgsm, bim, bim2, jsma, dba or cw)");
}

void AttackConfig::validate() const {
  const std::string who(to_string(kind));
  auto require = [&who](bool ok, const char* msg) {
    if (!ok) throw InvalidInput(who + ": " + msg);
  };
  require(max_iter >= 1, "max_iter must be at least 1");
  switch (kind) {
    case AttackKind::FGSM:
      require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be finite and >= 0");
      break;
    case AttackKind::BIM_Linf:
    case AttackKind::BIM_L2:
      require(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be finite and >= 0");
      require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive");
      break;
    case AttackKind::JSMA:
      require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
      require(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
      require(!std::holds_alternative<Untargeted>(targeting), "needs a target (rank or class)");
      break;
    case AttackKind::DBA:
      require(mse_threshold > 0.0 && std::isfinite(mse_threshold), "mse_threshold must be positive");
      require(std::holds_alternative<Untargeted>(targeting), "only untargeted mode is supported");
      break;
    case AttackKind::CW_L2:
      require(c > 0.0 && std::isfinite(c), "c must be positive");
      require(kappa >= 0.0 && std::isfinite(kappa), "kappa must be >= 0");
      require(alpha > 0.0 && std::isfinite(alpha), "alpha (step size) must be positive");
      require(!std::holds_alternative<Untargeted>(targeting), "needs a target (rank or class)");
      break;
  }
  if (const auto* r = std::get_if<TargetRank>(&targeting)) require(r->rank >= 1, "target rank starts at 1");
}

AttackConfig generation_defaults(AttackKind kind) {
  AttackConfig c;
  c.kind = kind;
  switch (kind) {
    case AttackKind::FGSM:
      c.epsilon = 0.3;
      c.max_iter = 1;
      break;
    case AttackKind::BIM_Linf:
      c.epsilon = 0.3;
      c.alpha = 0.01;
      c.max_iter = 500;
      break;
    case AttackKind::BIM_L2:
      c.epsilon = 2.0;
      c.alpha = 0.1;
      c.max_iter = 100;
      break;
    case AttackKind::JSMA:
      c.theta = 1.0;
      c.gamma = 0.1;
      c.max_iter = 100;
      c.targeting = TargetRank{2};
      break;
    case AttackKind::DBA:
      c.mse_threshold = 0.02;
      c.max_iter = 1000;
      break;
    case AttackKind::CW_L2:
      c.kappa = 0.0;
      c.c = 10.0;
      c.alpha = 0.1;
      c.max_iter = 200;
      c.targeting = TargetRank{2};
      break;
  }
  return c;
}

AttackConfig defense_defaults(AttackKind kind) {
  AttackConfig c = generation_defaults(kind);
  switch (kind) {
    case AttackKind::BIM_Linf:
      // Fine steps so that costs resolve robustness rather than collapse to a few values.
      c.alpha = 0.001;
      c.max_iter = 500;
      break;
    case AttackKind::BIM_L2:
      c.epsilon = 2.8;
      c.alpha = 0.1;
      c.max_iter = 500;
      break;
    case AttackKind::JSMA:
      c.theta = 0.1;
      c.gamma = 1.0;
      c.max_iter = 2000;
      break;
    case AttackKind::DBA:
      c.max_iter = 500;
      break;
    default:
      break;
  }
  return c;
}

std::optional<std::size_t> resolve_target(const Targeting& targeting, std::span<const double> logits) {
  if (std::holds_alternative<Untargeted>(targeting)) return std::nullopt;
  if (const auto* t = std::get_if<TargetClass>(&targeting)) {
    if (t->label >= logits.size()) throw InvalidInput("target class out of range");
    return t->label;
  }
  const std::size_t rank = std::get<TargetRank>(targeting).rank;
  if (rank == 0 || rank > logits.size()) throw InvalidInput("target rank out of range");
  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), 0);
  // Descending by logit; equal logits keep the lower class first.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  return order[rank - 1];
}

Distortion measure_distortion(std::span<const double> x, std::span<const double> adv) {
  Distortion d;
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = std::abs(adv[i] - x[i]);
    if (diff != 0.0) d.l0 += 1.0;
    sq += diff * diff;
    d.linf = std::max(d.linf, diff);
  }
  d.l2 = std::sqrt(sq);
  return d;
}

AttackOutcome run_attack(const Model& model, const Tensor& x, const AttackConfig& cfg,
                         std::optional<std::size_t> label, const Dataset* pool) {
  switch (cfg.kind) {
    case AttackKind::FGSM: return fgsm(model, x, cfg, label);
    case AttackKind::BIM_Linf:
    case AttackKind::BIM_L2: return bim(model, x, cfg, label);
    case AttackKind::JSMA: return jsma(model, x, cfg, label);
    case AttackKind::DBA: return dba(model, x, cfg, label, pool);
    case AttackKind::CW_L2: return cw_l2(model, x, cfg, label);
  }
  throw InvalidInput("unknown attack kind");
}

namespace detail {

void check_input(const Model& model, const Tensor& x) {
  if (x.size() != model.input_dim()) {
    throw InvalidInput("input has " + std::to_string(x.size()) + " values, model expects " +
                       std::to_string(model.input_dim()));
  }
  for (double v : x.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("input pixels must lie in [0, 1]");
  }
}

bool reached(std::span<const double> logits, std::size_t source, std::optional<std::size_t> target) {
  const std::size_t pred = argmax(logits);
  return target ? pred == *target : pred != source;
}

void finish(AttackOutcome& out, const Tensor& x, const std::vector<double>& adv, std::size_t final_label,
            bool success, std::size_t queries) {
  out.success = success;
  out.final_label = final_label;
  out.queries = queries;
  if (success) {
    const Distortion d = measure_distortion(x.values(), adv);
    out.distortion_l0 = d.l0;
    out.distortion_l2 = d.l2;
    out.distortion_linf = d.linf;
    out.adversarial = Tensor(x.shape(), adv);
  }
}

void clip_unit(std::span<double> v) {
  for (double& e : v) e = std::clamp(e, 0.0, 1.0);
}

}  // namespace detail
}  // namespace a2d
