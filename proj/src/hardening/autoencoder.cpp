#include <algorithm>
#include <cmath>
#include <string>

#include "a2d/error.hpp"
#include "a2d/hardening.hpp"

namespace a2d {

Model train_autoencoder(const Dataset& benign, std::size_t bottleneck_dim, const TrainConfig& cfg,
                        std::size_t hidden_dim) {
  if (benign.empty()) throw InvalidInput("autoencoder needs benign training data");
  if (bottleneck_dim == 0 || hidden_dim == 0) throw InvalidInput("autoencoder widths must be positive");
  cfg.validate();
  const std::size_t d = benign.input_dim();
  Model init = make_mlp(Architecture{{d, hidden_dim, bottleneck_dim, hidden_dim, d}}, cfg.weight_init_scale, cfg.seed);
  auto result = sgd_train(std::move(init), benign.size(), cfg,
                          [&benign](std::size_t i, const Model&, std::vector<double>& input) -> LossKind {
                            const auto px = benign[i].pixels.values();
                            input.assign(px.begin(), px.end());
                            return MeanSquared{input};
                          });
  return std::move(result.model);
}

double reconstruction_error(const Model& autoencoder, std::span<const double> x) {
  if (autoencoder.output_dim() != x.size()) throw InvalidInput("autoencoder output width differs from the input");
  Evaluator eval(autoencoder);
  const auto r = eval.forward(x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - r[i]) * (x[i] - r[i]);
  return s / static_cast<double>(x.size());
}

AeDetector::AeDetector(Model autoencoder, double tau) : ae_(std::move(autoencoder)), tau_(tau) {
  if (ae_.input_dim() != ae_.output_dim()) throw InvalidInput("autoencoder must map its input width to itself");
  if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw FitError("autoencoder threshold must be positive");
}

Verdict AeDetector::classify(std::span<const double> x) const {
  return error(x) > tau_ ? Verdict::Adversarial : Verdict::Benign;
}

AeDetector ae_fit_threshold(Model autoencoder, const Dataset& benign, double target_fpr) {
  if (benign.empty()) throw InvalidInput("threshold fitting needs benign data");
  if (!(target_fpr >= 0.0 && target_fpr < 1.0)) throw InvalidInput("target_fpr must lie in [0, 1)");
  std::vector<double> errors;
  errors.reserve(benign.size());
  for (const Example& e : benign) errors.push_back(reconstruction_error(autoencoder, e.pixels.values()));
  std::sort(errors.begin(), errors.end());
  const double n = static_cast<double>(errors.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - target_fpr) * n));
  rank = std::clamp<std::size_t>(rank, 1, errors.size());
  return AeDetector(std::move(autoencoder), errors[rank - 1]);
}

}  // namespace a2d
