// FGSM and BIM (L-infinity and L2).
#include <algorithm>
#include <cmath>

#include "a2d/error.hpp"
#include "common.hpp"

namespace a2d {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

// Ascent direction: raise the source-label loss, or lower the target loss.
LossKind step_loss(std::size_t source, std::optional<std::size_t> target) {
  return CrossEntropy{target ? *target : source};
}

double step_direction(std::optional<std::size_t> target) { return target ? -1.0 : 1.0; }

}  // namespace

AttackOutcome fgsm(const Model& model, const Tensor& x, const AttackConfig& cfg, std::optional<std::size_t> label) {
  if (cfg.kind != AttackKind::FGSM) throw InvalidInput("fgsm called with a non-FGSM config");
  cfg.validate();
  detail::check_input(model, x);

  detail::QueryCounter q(model);
  const auto xs = x.values();
  const auto z0 = q.forward(xs);
  AttackOutcome out;
  out.source_label = label.value_or(argmax(z0));
  out.target = resolve_target(cfg.targeting, z0);

  std::vector<double> grad(xs.size());
  q.gradient(step_loss(out.source_label, out.target), grad);
  const double dir = step_direction(out.target);

  std::vector<double> adv(xs.begin(), xs.end());
  if (cfg.fgsm_norm == Norm::Linf) {
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = xs[i] + cfg.epsilon * (dir * sign(grad[i]));
  } else {
    const double n = l2_norm(grad);
    if (n == 0.0) {
      out.iterations = 1;
      detail::finish(out, x, adv, argmax(z0), false, q.queries());
      return out;
    }
    for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = xs[i] + cfg.epsilon * dir * grad[i] / n;
  }
  detail::clip_unit(adv);
  out.iterations = 1;
  const auto z = q.forward(adv);
  detail::finish(out, x, adv, argmax(z), detail::reached(z, out.source_label, out.target), q.queries());
  return out;
}

AttackOutcome bim(const Model& model, const Tensor& x, const AttackConfig& cfg, std::optional<std::size_t> label) {
  if (cfg.kind != AttackKind::BIM_Linf && cfg.kind != AttackKind::BIM_L2) {
    throw InvalidInput("bim called with a non-BIM config");
  }
  cfg.validate();
  detail::check_input(model, x);
  const bool linf = cfg.kind == AttackKind::BIM_Linf;

  detail::QueryCounter q(model);
  const auto xs = x.values();
  const std::size_t n = xs.size();
  AttackOutcome out;
  const auto z0 = q.forward(xs);
  out.source_label = label.value_or(argmax(z0));
  out.target = resolve_target(cfg.targeting, z0);
  const bool start_reached = detail::reached(z0, out.source_label, out.target);
  const LossKind loss = step_loss(out.source_label, out.target);
  const double dir = step_direction(out.target);

  std::vector<double> cur(xs.begin(), xs.end());
  std::vector<double> grad(n);
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    q.gradient(loss, grad);
    if (linf) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = sign(grad[i]);
        if (s == 0.0) continue;
        moved = true;
        const double v = std::clamp(cur[i] + cfg.alpha * (dir * s), xs[i] - cfg.epsilon, xs[i] + cfg.epsilon);
        cur[i] = std::clamp(v, 0.0, 1.0);
      }
      if (!moved && !start_reached) {
        out.iterations = it;
        detail::finish(out, x, cur, argmax(q.logits()), false, q.queries());
        return out;
      }
    } else {
      const double g = l2_norm(grad);
      if (g == 0.0) {
        out.iterations = it;
        const bool ok = start_reached;
        detail::finish(out, x, std::vector<double>(xs.begin(), xs.end()), argmax(z0), ok, q.queries());
        return out;
      }
      for (std::size_t i = 0; i < n; ++i) cur[i] += cfg.alpha * dir * grad[i] / g;
      double dn = 0.0;
      for (std::size_t i = 0; i < n; ++i) dn += (cur[i] - xs[i]) * (cur[i] - xs[i]);
      dn = std::sqrt(dn);
      if (dn > cfg.epsilon) {
        const double scale = cfg.epsilon / dn;
        for (std::size_t i = 0; i < n; ++i) cur[i] = xs[i] + (cur[i] - xs[i]) * scale;
      }
      detail::clip_unit(cur);
    }
    const auto z = q.forward(cur);
    const bool hit = detail::reached(z, out.source_label, out.target);
    if (hit || start_reached || it == cfg.max_iter) {
      out.iterations = it;
      if (start_reached && !hit) {
        // The step left the adversarial region; x itself is the answer.
        detail::finish(out, x, std::vector<double>(xs.begin(), xs.end()), argmax(z0), true, q.queries());
      } else {
        detail::finish(out, x, cur, argmax(z), hit, q.queries());
      }
      return out;
    }
  }
  return out;  // unreachable: max_iter >= 1
}

}  // namespace a2d
