// Targeted saliency-map attack that raises two pixels per iteration.
#include <algorithm>
#include <cmath>

#include "a2d/error.hpp"
#include "a2d/simd/kernels.hpp"
#include "common.hpp"

namespace a2d {

AttackOutcome jsma(const Model& model, const Tensor& x, const AttackConfig& cfg, std::optional<std::size_t> label) {
  if (cfg.kind != AttackKind::JSMA) throw InvalidInput("jsma called with a non-JSMA config");
  cfg.validate();
  detail::check_input(model, x);

  detail::QueryCounter q(model);
  const auto xs = x.values();
  const std::size_t n = xs.size();
  const std::size_t k = model.num_classes();
  AttackOutcome out;
  const auto z0 = q.forward(xs);
  out.source_label = label.value_or(argmax(z0));
  out.target = resolve_target(cfg.targeting, z0);
  const std::size_t t = *out.target;

  std::vector<double> cur(xs.begin(), xs.end());
  if (detail::reached(z0, out.source_label, out.target)) {
    detail::finish(out, x, cur, argmax(z0), true, q.queries());
    return out;
  }
  const auto budget = static_cast<std::size_t>(std::floor(cfg.gamma * static_cast<double>(n)));

  std::vector<double> seed_t(k, 0.0);
  seed_t[t] = 1.0;
  std::vector<double> seed_all(k, 1.0);
  std::vector<double> a(n), total(n);
  std::vector<double> ca, cb;
  std::vector<std::size_t> domain;
  std::vector<bool> touched(n, false);
  std::size_t touched_count = 0;
  std::size_t pred = argmax(z0);

  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    if (touched_count + 2 > budget) break;
    q.backward(seed_t, a);
    q.backward(seed_all, total);

    domain.clear();
    ca.clear();
    cb.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (cur[i] < 1.0) {
        domain.push_back(i);
        ca.push_back(a[i]);
        cb.push_back(total[i] - a[i]);
      }
    }
    double score = 0.0;
    std::size_t p = 0, r = 0;
    simd::active().pair_argmax(ca.data(), cb.data(), domain.size(), &score, &p, &r);
    if (p >= domain.size()) break;  // no eligible pair

    for (std::size_t idx : {domain[p], domain[r]}) {
      cur[idx] = std::min(1.0, cur[idx] + cfg.theta);
      if (!touched[idx]) {
        touched[idx] = true;
        ++touched_count;
      }
    }
    out.iterations = it;
    const auto z = q.forward(cur);
    pred = argmax(z);
    if (pred == t) {
      detail::finish(out, x, cur, pred, true, q.queries());
      return out;
    }
  }
  detail::finish(out, x, cur, pred, false, q.queries());
  return out;
}

}  // namespace a2d
