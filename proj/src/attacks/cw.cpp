// Carlini-Wagner L2 with a fixed trade-off constant, optimised in tanh space.
#include <algorithm>
#include <cmath>
#include <limits>

#include "a2d/error.hpp"
#include "common.hpp"

namespace a2d {
namespace {

constexpr double kBoxEdge = 1e-6;

// Z_t minus the best other logit.
double target_margin(std::span<const double> z, std::size_t t) {
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i != t) other = std::max(other, z[i]);
  }
  return z[t] - other;
}

bool confident(std::span<const double> z, std::size_t t, double kappa) {
  return argmax(z) == t && target_margin(z, t) >= kappa;
}

}  // namespace

AttackOutcome cw_l2(const Model& model, const Tensor& x, const AttackConfig& cfg, std::optional<std::size_t> label) {
  if (cfg.kind != AttackKind::CW_L2) throw InvalidInput("cw_l2 called with a non-CW config");
  cfg.validate();
  detail::check_input(model, x);

  detail::QueryCounter q(model);
  const auto xs = x.values();
  const std::size_t n = xs.size();
  AttackOutcome out;
  const auto z0 = q.forward(xs);
  out.source_label = label.value_or(argmax(z0));
  out.target = resolve_target(cfg.targeting, z0);
  const std::size_t t = *out.target;
  if (confident(z0, t, cfg.kappa)) {
    detail::finish(out, x, std::vector<double>(xs.begin(), xs.end()), argmax(z0), true, q.queries());
    return out;
  }

  std::vector<double> w(n), adv(n), grad(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::atanh(2.0 * std::clamp(xs[i], kBoxEdge, 1.0 - kBoxEdge) - 1.0);
    adv[i] = (std::tanh(w[i]) + 1.0) / 2.0;
  }
  const LossKind margin = MarginCW{t, cfg.kappa};

  std::vector<double> best;
  double best_l2 = std::numeric_limits<double>::infinity();
  std::size_t final_label = argmax(z0);
  std::size_t best_label = final_label;
  for (std::size_t step = 0;; ++step) {
    // Step 0 reuses the pass at x; the box clamp moves it by at most kBoxEdge.
    if (step > 0) {
      const auto z = q.forward(adv);
      final_label = argmax(z);
    }
    if (step > 0 && confident(q.logits(), t, cfg.kappa)) {
      const double l2 = measure_distortion(xs, adv).l2;
      if (l2 < best_l2) {
        best_l2 = l2;
        best = adv;
        best_label = final_label;
      }
    }
    if (step == cfg.max_iter) break;
    q.gradient(margin, grad);
    for (std::size_t i = 0; i < n; ++i) {
      const double th = 2.0 * adv[i] - 1.0;
      const double g = 2.0 * (adv[i] - xs[i]) + cfg.c * grad[i];
      w[i] -= cfg.alpha * g * (1.0 - th * th) / 2.0;
      adv[i] = (std::tanh(w[i]) + 1.0) / 2.0;
    }
    out.iterations = step + 1;
  }
  if (!best.empty()) {
    detail::finish(out, x, best, best_label, true, q.queries());
  } else {
    detail::finish(out, x, adv, final_label, false, q.queries());
  }
  return out;
}

}  // namespace a2d
