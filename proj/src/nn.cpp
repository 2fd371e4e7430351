#include "a2d/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "a2d/error.hpp"
#include "a2d/simd/kernels.hpp"

namespace a2d {

Layer Layer::dense(std::size_t in_dim, std::size_t out_dim) {
  Layer l;
  l.kind = LayerKind::Dense;
  l.in_dim = in_dim;
  l.out_dim = out_dim;
  l.weights.assign(in_dim * out_dim, 0.0);
  l.bias.assign(out_dim, 0.0);
  return l;
}

Layer Layer::relu(std::size_t dim) {
  Layer l;
  l.kind = LayerKind::ReLU;
  l.in_dim = dim;
  l.out_dim = dim;
  return l;
}

Model::Model(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidInput("model has no layers");
  if (layers_.front().kind != LayerKind::Dense || layers_.back().kind != LayerKind::Dense) {
    throw InvalidInput("model must start and end with a Dense layer");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string name = "layer " + std::to_string(i);
    if (l.in_dim == 0 || l.out_dim == 0) throw InvalidInput(name + " has a zero dimension");
    if (i > 0 && l.in_dim != layers_[i - 1].out_dim) {
      throw InvalidInput(name + " expects " + std::to_string(l.in_dim) + " inputs but layer " +
                         std::to_string(i - 1) + " produces " + std::to_string(layers_[i - 1].out_dim));
    }
    if (l.kind == LayerKind::Dense) {
      if (l.weights.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim) {
        throw InvalidInput(name + " parameter sizes do not match its dimensions");
      }
      auto finite = [](double v) { return std::isfinite(v); };
      if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
          !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
        throw InvalidInput(name + " has non-finite parameters");
      }
    } else if (l.kind == LayerKind::ReLU) {
      if (l.in_dim != l.out_dim) throw InvalidInput(name + " (ReLU) must preserve its width");
      if (!l.weights.empty() || !l.bias.empty()) throw InvalidInput(name + " (ReLU) carries parameters");
    } else {
      throw InvalidInput(name + " has an unknown kind");
    }
  }
}

std::size_t Model::max_width() const noexcept {
  std::size_t w = input_dim();
  for (const Layer& l : layers_) w = std::max(w, l.out_dim);
  return w;
}

Model make_mlp(const Architecture& arch, double init_scale, std::uint64_t seed) {
  if (arch.dims.size() < 2) throw InvalidInput("architecture needs at least input and output widths");
  if (!(init_scale > 0.0)) throw InvalidInput("weight_init_scale must be positive");
  std::mt19937_64 rng(seed);
  std::vector<Layer> layers;
  for (std::size_t i = 0; i + 1 < arch.dims.size(); ++i) {
    if (i > 0) layers.push_back(Layer::relu(arch.dims[i]));
    Layer d = Layer::dense(arch.dims[i], arch.dims[i + 1]);
    const double bound = init_scale / std::sqrt(static_cast<double>(arch.dims[i]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : d.weights) w = dist(rng);
    layers.push_back(std::move(d));
  }
  return Model(std::move(layers));
}

void validate_loss(const LossKind& loss, std::size_t output_dim) {
  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
    if (ce->label >= output_dim) throw InvalidInput("cross-entropy label out of range");
  } else if (const auto* cw = std::get_if<MarginCW>(&loss)) {
    if (cw->target >= output_dim) throw InvalidInput("margin target out of range");
    if (output_dim < 2) throw InvalidInput("margin loss needs at least two classes");
    if (!(cw->kappa >= 0.0) || !std::isfinite(cw->kappa)) throw InvalidInput("kappa must be >= 0");
  } else {
    const auto& mse = std::get<MeanSquared>(loss);
    if (mse.reference.size() != output_dim) throw InvalidInput("MSE reference has the wrong length");
  }
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double loss_and_seed(const LossKind& loss, std::span<const double> z, std::span<double> seed) {
  const bool want_seed = !seed.empty();
  if (want_seed) std::fill(seed.begin(), seed.end(), 0.0);

  if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
    const double top = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    const double log_norm = top + std::log(sum);
    if (want_seed) {
      for (std::size_t i = 0; i < z.size(); ++i) seed[i] = std::exp(z[i] - log_norm);
      seed[ce->label] -= 1.0;
    }
    return log_norm - z[ce->label];
  }

  if (const auto* cw = std::get_if<MarginCW>(&loss)) {
    std::size_t other = cw->target == 0 ? 1 : 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (i != cw->target && z[i] > z[other]) other = i;
    }
    const double margin = z[other] - z[cw->target];
    if (margin > -cw->kappa) {
      if (want_seed) {
        seed[other] = 1.0;
        seed[cw->target] = -1.0;
      }
      return margin;
    }
    return -cw->kappa;
  }

  const auto& mse = std::get<MeanSquared>(loss);
  const double n = static_cast<double>(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - mse.reference[i];
    sum += d * d;
    if (want_seed) seed[i] = 2.0 * d / n;
  }
  return sum / n;
}

Evaluator::Evaluator(const Model& model) : model_(&model) {
  const auto layers = model.layers();
  acts_.resize(layers.size() + 1);
  acts_[0].resize(model.input_dim());
  for (std::size_t i = 0; i < layers.size(); ++i) acts_[i + 1].resize(layers[i].out_dim);
  grad_a_.reserve(model.max_width());
  grad_b_.reserve(model.max_width());
  seed_.resize(model.output_dim());
}

std::span<const double> Evaluator::forward(std::span<const double> x) {
  if (x.size() != model_->input_dim()) {
    throw InvalidInput("input has " + std::to_string(x.size()) + " values, model expects " +
                       std::to_string(model_->input_dim()));
  }
  std::copy(x.begin(), x.end(), acts_[0].begin());
  const auto layers = model_->layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    const std::vector<double>& in = acts_[l];
    std::vector<double>& out = acts_[l + 1];
    if (layer.kind == LayerKind::Dense) {
      std::copy(layer.bias.begin(), layer.bias.end(), out.begin());
      const double* w = layer.weights.data();
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        if (in[i] != 0.0) {
          simd::active().axpy(in[i], w + i * layer.out_dim, out.data(), layer.out_dim);
        }
      }
    } else {
      for (std::size_t i = 0; i < layer.out_dim; ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
    }
  }
  return acts_.back();
}

void Evaluator::backward(std::span<const double> seed, std::span<double> input_grad) {
  const auto layers = model_->layers();
  grad_a_.assign(seed.begin(), seed.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Layer& layer = layers[l];
    grad_b_.resize(layer.in_dim);
    if (layer.kind == LayerKind::Dense) {
      const double* w = layer.weights.data();
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        grad_b_[i] = simd::active().dot(w + i * layer.out_dim, grad_a_.data(), layer.out_dim);
      }
    } else {
      const std::vector<double>& in = acts_[l];
      for (std::size_t i = 0; i < layer.in_dim; ++i) grad_b_[i] = in[i] > 0.0 ? grad_a_[i] : 0.0;
    }
    grad_a_.swap(grad_b_);
  }
  std::copy(grad_a_.begin(), grad_a_.end(), input_grad.begin());
}

double Evaluator::loss_gradient(std::span<const double> x, const LossKind& loss,
                                std::span<double> input_grad) {
  validate_loss(loss, model_->output_dim());
  if (input_grad.size() != model_->input_dim()) throw InvalidInput("gradient buffer has the wrong size");
  forward(x);
  const double value = loss_and_seed(loss, acts_.back(), seed_);
  backward(seed_, input_grad);
  return value;
}

Tensor forward(const Model& model, const Tensor& x) {
  const std::size_t d = model.input_dim();
  const std::size_t k = model.num_classes();
  Evaluator eval(model);
  if (x.rank() == 1) {
    const auto z = eval.forward(x.values());
    return Tensor({k}, std::vector<double>(z.begin(), z.end()));
  }
  if (x.rank() != 2 || x.shape()[1] != d) {
    throw InvalidInput("forward expects shape [" + std::to_string(d) + "] or [batch, " +
                       std::to_string(d) + "]");
  }
  const std::size_t batch = x.shape()[0];
  std::vector<double> out(batch * k);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto z = eval.forward(x.values().subspan(b * d, d));
    std::copy(z.begin(), z.end(), out.begin() + static_cast<std::ptrdiff_t>(b * k));
  }
  return Tensor({batch, k}, std::move(out));
}

Prediction predict(const Model& model, std::span<const double> x) {
  Evaluator eval(model);
  const auto z = eval.forward(x);
  return Prediction{argmax(z), softmax(z)};
}

Prediction predict(const Model& model, const Tensor& x) { return predict(model, x.values()); }

InputGradient input_gradient(const Model& model, const Tensor& x, const LossKind& loss) {
  Evaluator eval(model);
  InputGradient out;
  out.grad = Tensor(x.shape().empty() ? std::vector<std::size_t>{model.input_dim()} : x.shape());
  if (x.size() != model.input_dim()) {
    throw InvalidInput("input has " + std::to_string(x.size()) + " values, model expects " +
                       std::to_string(model.input_dim()));
  }
  out.loss = eval.loss_gradient(x.values(), loss, out.grad.values());
  const auto z = eval.logits();
  out.logits.assign(z.begin(), z.end());
  return out;
}

std::vector<double> logit_jacobian(const Model& model, std::span<const double> x) {
  Evaluator eval(model);
  eval.forward(x);
  const std::size_t k = model.num_classes();
  const std::size_t d = model.input_dim();
  std::vector<double> jac(k * d);
  std::vector<double> seed(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    seed[c] = 1.0;
    eval.backward(seed, std::span<double>(jac).subspan(c * d, d));
    seed[c] = 0.0;
  }
  return jac;
}

}  // namespace a2d
