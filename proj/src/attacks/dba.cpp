// Label-only boundary walk: start from any misclassified point and creep
// back toward the input while the label stays changed.
#include <algorithm>
#include <cmath>
#include <random>

#include "a2d/error.hpp"
#include "common.hpp"

namespace a2d {
namespace {

constexpr std::size_t kNoiseDraws = 100;
constexpr double kOrthogonalStep = 0.1;  // fraction of the current distance
constexpr double kTowardStep = 0.1;

double mse(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

AttackOutcome dba(const Model& model, const Tensor& x, const AttackConfig& cfg, std::optional<std::size_t> label,
                  const Dataset* pool) {
  if (cfg.kind != AttackKind::DBA) throw InvalidInput("dba called with a non-DBA config");
  cfg.validate();
  detail::check_input(model, x);

  detail::QueryCounter q(model);
  const auto xs = x.values();
  const std::size_t n = xs.size();
  AttackOutcome out;
  const std::size_t pred0 = argmax(q.forward(xs));
  out.source_label = label.value_or(pred0);
  if (pred0 != out.source_label) {
    detail::finish(out, x, std::vector<double>(xs.begin(), xs.end()), pred0, true, q.queries());
    return out;
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<double> adv;
  std::size_t adv_label = pred0;
  {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> draw(n);
    for (std::size_t d = 0; d < kNoiseDraws && adv.empty(); ++d) {
      for (double& v : draw) v = unit(rng);
      const std::size_t l = argmax(q.forward(draw));
      if (l != out.source_label) {
        adv = draw;
        adv_label = l;
      }
    }
  }
  if (adv.empty() && pool != nullptr) {
    for (const Example& e : *pool) {
      if (e.pixels.size() != n) continue;
      const std::size_t l = argmax(q.forward(e.pixels.values()));
      if (l != out.source_label) {
        adv.assign(e.pixels.values().begin(), e.pixels.values().end());
        adv_label = l;
        break;
      }
    }
  }
  if (adv.empty()) {
    detail::finish(out, x, std::vector<double>(xs.begin(), xs.end()), pred0, false, q.queries());
    return out;
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> diff(n), eta(n), prop(n);
  std::size_t proposals = 0;
  while (mse(adv, xs) >= cfg.mse_threshold && proposals < cfg.max_iter) {
    ++proposals;
    double dist2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff[i] = xs[i] - adv[i];
      dist2 += diff[i] * diff[i];
    }
    const double dist = std::sqrt(dist2);

    double along = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] = gauss(rng);
      along += eta[i] * diff[i];
    }
    double eta2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      eta[i] -= along / dist2 * diff[i];
      eta2 += eta[i] * eta[i];
    }
    const double eta_scale = eta2 > 0.0 ? kOrthogonalStep * dist / std::sqrt(eta2) : 0.0;

    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      prop[i] = adv[i] + eta[i] * eta_scale - xs[i];
      r2 += prop[i] * prop[i];
    }
    const double back = dist / std::sqrt(r2);
    for (std::size_t i = 0; i < n; ++i) {
      const double on_sphere = xs[i] + prop[i] * back;
      prop[i] = std::clamp(on_sphere + kTowardStep * (xs[i] - on_sphere), 0.0, 1.0);
    }

    const std::size_t l = argmax(q.forward(prop));
    if (l != out.source_label) {
      adv.swap(prop);
      adv_label = l;
      ++out.iterations;
    }
  }
  detail::finish(out, x, adv, adv_label, mse(adv, xs) < cfg.mse_threshold, q.queries());
  return out;
}

}  // namespace a2d
