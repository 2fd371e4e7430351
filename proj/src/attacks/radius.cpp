#include "a2d/error.hpp"
#include "common.hpp"

namespace a2d {

RadiusResult robustness_radius(const Model& model, const Tensor& x, const AttackConfig& base,
                               std::size_t bisection_steps, std::optional<std::size_t> label) {
  if (base.kind != AttackKind::BIM_Linf && base.kind != AttackKind::BIM_L2) {
    throw InvalidInput("robustness_radius needs a BIM configuration");
  }
  if (!std::holds_alternative<Untargeted>(base.targeting)) {
    throw InvalidInput("robustness_radius needs an untargeted attack");
  }
  base.validate();
  detail::check_input(model, x);

  RadiusResult r;
  const std::size_t pred = argmax(Evaluator(model).forward(x.values()));
  if (pred != label.value_or(pred)) {
    r.radius = 0.0;
    r.trace.push_back({0.0, true});
    return r;
  }
  auto probe = [&](double eps) {
    AttackConfig cfg = base;
    cfg.epsilon = eps;
    const bool ok = bim(model, x, cfg, label).success;
    r.trace.push_back({eps, ok});
    return ok;
  };
  double hi = base.epsilon;
  if (!probe(hi)) {
    r.radius = hi;
    return r;
  }
  double lo = 0.0;
  for (std::size_t s = 0; s < bisection_steps; ++s) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  r.radius = hi;
  return r;
}

}  // namespace a2d
