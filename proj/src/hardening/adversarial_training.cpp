#include <algorithm>

#include "a2d/error.hpp"
#include "a2d/hardening.hpp"

namespace a2d {

std::vector<double> pgd_perturb(const Model& model, std::span<const double> x, std::size_t label,
                                const AttackConfig& pgd) {
  std::vector<double> cur(x.begin(), x.end());
  if (pgd.epsilon == 0.0) return cur;
  Evaluator eval(model);
  std::vector<double> grad(x.size());
  const LossKind loss = CrossEntropy{label};
  for (std::size_t it = 0; it < pgd.max_iter; ++it) {
    eval.loss_gradient(cur, loss, grad);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double s = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
      const double v = std::clamp(cur[i] + pgd.alpha * s, x[i] - pgd.epsilon, x[i] + pgd.epsilon);
      cur[i] = std::clamp(v, 0.0, 1.0);
    }
  }
  return cur;
}

TrainResult pgd_adversarial_train(const Architecture& arch, const Dataset& data, const AttackConfig& pgd,
                                  const TrainConfig& cfg) {
  if (pgd.kind != AttackKind::BIM_Linf) throw InvalidInput("adversarial training uses an L-infinity BIM inner attack");
  pgd.validate();
  cfg.validate();
  if (data.empty()) throw InvalidInput("cannot train on an empty dataset");
  Model init = make_mlp(arch, cfg.weight_init_scale, cfg.seed);
  if (data.input_dim() != init.input_dim()) throw InvalidInput("dataset width does not match the model input");
  return sgd_train(std::move(init), data.size(), cfg,
                   [&](std::size_t i, const Model& current, std::vector<double>& input) -> LossKind {
                     input = pgd_perturb(current, data[i].pixels.values(), data[i].label, pgd);
                     return CrossEntropy{data[i].label};
                   });
}

}  // namespace a2d
