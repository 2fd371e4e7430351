#pragma once

#include <optional>
#include <span>
#include <vector>

#include "a2d/attacks.hpp"
#include "a2d/nn.hpp"

namespace a2d::detail {

// Evaluator wrapper that counts model queries. Backward passes reuse the
// preceding forward pass and are not counted again.
class QueryCounter {
 public:
  explicit QueryCounter(const Model& model) : eval_(model), seed_(model.output_dim()) {}

  std::span<const double> forward(std::span<const double> x) {
    ++queries_;
    return eval_.forward(x);
  }

  // Gradient of `loss` at the point of the last forward(); returns the loss.
  double gradient(const LossKind& loss, std::span<double> grad) {
    const double v = loss_and_seed(loss, eval_.logits(), seed_);
    eval_.backward(seed_, grad);
    return v;
  }

  void backward(std::span<const double> seed, std::span<double> grad) { eval_.backward(seed, grad); }

  std::span<const double> logits() const noexcept { return eval_.logits(); }
  std::size_t queries() const noexcept { return queries_; }
  const Model& model() const noexcept { return eval_.model(); }

 private:
  Evaluator eval_;
  std::vector<double> seed_;
  std::size_t queries_ = 0;
};

void check_input(const Model& model, const Tensor& x);

// Untargeted: label changed. Targeted: prediction equals the target.
bool reached(std::span<const double> logits, std::size_t source, std::optional<std::size_t> target);

// Fills distortions, final label and the adversarial tensor (shaped like x).
void finish(AttackOutcome& out, const Tensor& x, const std::vector<double>& adv, std::size_t final_label,
            bool success, std::size_t queries);

void clip_unit(std::span<double> v);

}  // namespace a2d::detail
