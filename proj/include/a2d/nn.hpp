#pragma once

// Dense feed-forward classifier: evaluation, exact gradients, serialization.
//
// A network is a list of Dense and ReLU layers ending in a Dense layer whose
// outputs are the logits. Softmax is never stored as a layer; it is applied
// inside `predict` and the cross-entropy loss.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "a2d/tensor.hpp"

namespace a2d {

enum class LayerKind : std::uint8_t { Dense = 1, ReLU = 2 };

struct Layer {
  LayerKind kind = LayerKind::Dense;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;  // in_dim x out_dim, row-major; Dense only
  std::vector<double> bias;     // out_dim; Dense only

  static Layer dense(std::size_t in_dim, std::size_t out_dim);
  static Layer relu(std::size_t dim);

  double& weight(std::size_t in, std::size_t out) { return weights[in * out_dim + out]; }
  double weight(std::size_t in, std::size_t out) const { return weights[in * out_dim + out]; }

  friend bool operator==(const Layer&, const Layer&) = default;
};

class Model {
 public:
  // Throws InvalidInput unless the layers chain dimension-compatibly, start
  // and end with Dense, and carry finite parameters.
  explicit Model(std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return layers_.front().in_dim; }
  std::size_t output_dim() const noexcept { return layers_.back().out_dim; }
  std::size_t num_classes() const noexcept { return output_dim(); }
  std::span<const Layer> layers() const noexcept { return layers_; }
  std::size_t max_width() const noexcept;

  friend bool operator==(const Model&, const Model&) = default;

 private:
  friend class ParameterAccess;
  std::vector<Layer> layers_;
};

// Layer widths {input, hidden..., output}; hidden layers use ReLU.
struct Architecture {
  std::vector<std::size_t> dims;
};

// Weights uniform in +-init_scale/sqrt(in_dim), biases zero.
Model make_mlp(const Architecture& arch, double init_scale, std::uint64_t seed);

struct CrossEntropy {
  std::size_t label = 0;
};

// max(max_{i != target} Z_i - Z_target, -kappa) over the logits Z.
struct MarginCW {
  std::size_t target = 0;
  double kappa = 0.0;
};

// Mean over outputs of (Z_i - reference_i)^2.
struct MeanSquared {
  std::vector<double> reference;
};

using LossKind = std::variant<CrossEntropy, MarginCW, MeanSquared>;

void validate_loss(const LossKind& loss, std::size_t output_dim);

// Loss value at `logits`; writes dLoss/dlogits into `seed` when non-empty.
double loss_and_seed(const LossKind& loss, std::span<const double> logits, std::span<double> seed);

std::size_t argmax(std::span<const double> values);  // lowest index on ties
std::vector<double> softmax(std::span<const double> logits);

// Reusable forward/backward buffers for one model. Not thread-safe; create
// one per worker. The model must outlive the evaluator.
class Evaluator {
 public:
  explicit Evaluator(const Model& model);

  const Model& model() const noexcept { return *model_; }

  std::span<const double> forward(std::span<const double> x);
  std::span<const double> logits() const noexcept { return acts_.back(); }

  // Backpropagate `seed` (dOut/dlogits) from the last forward() to the input.
  void backward(std::span<const double> seed, std::span<double> input_grad);

  // Forward + loss + input gradient in one pass. Returns the loss value.
  double loss_gradient(std::span<const double> x, const LossKind& loss, std::span<double> input_grad);

  // Activations after each layer of the last forward(); index 0 is the input.
  std::span<const double> activation(std::size_t i) const noexcept { return acts_[i]; }

 private:
  const Model* model_;
  std::vector<std::vector<double>> acts_;
  std::vector<double> grad_a_;
  std::vector<double> grad_b_;
  std::vector<double> seed_;
};

// x has shape [input_dim] or [batch, input_dim]; result is [num_classes] or
// [batch, num_classes].
Tensor forward(const Model& model, const Tensor& x);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

Prediction predict(const Model& model, const Tensor& x);
Prediction predict(const Model& model, std::span<const double> x);

struct InputGradient {
  double loss = 0.0;
  Tensor grad;
  std::vector<double> logits;
};

InputGradient input_gradient(const Model& model, const Tensor& x, const LossKind& loss);

// Rows are classes: jacobian[k * input_dim + i] = dZ_k / dx_i.
std::vector<double> logit_jacobian(const Model& model, std::span<const double> x);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace a2d
