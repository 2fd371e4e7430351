#include "a2d/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "a2d/error.hpp"
#include "a2d/simd/kernels.hpp"
#include "parameter_access.hpp"

namespace a2d {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning_rate must be a finite non-negative number");
  }
  if (epochs == 0) throw InvalidInput("epochs must be positive");
  if (batch_size == 0) throw InvalidInput("batch_size must be positive");
  if (!(weight_init_scale > 0.0)) throw InvalidInput("weight_init_scale must be positive");
}

namespace {

// Per-layer gradient sums for one batch, shaped like the Dense layers.
struct GradAccum {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  explicit GradAccum(const Model& m) {
    for (const Layer& l : m.layers()) {
      w.emplace_back(l.weights.size(), 0.0);
      b.emplace_back(l.bias.size(), 0.0);
    }
  }

  void clear() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
  }
};

// Backpropagates `seed` through the evaluator's last forward pass, adding the
// parameter gradients into `acc`. The input gradient is never formed.
void accumulate(const Model& model, const Evaluator& eval, std::span<const double> seed, GradAccum& acc,
                std::vector<double>& ga, std::vector<double>& gb) {
  const auto& k = simd::active();
  const auto layers = model.layers();
  ga.assign(seed.begin(), seed.end());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Layer& layer = layers[l];
    const auto in = eval.activation(l);
    if (layer.kind == LayerKind::Dense) {
      double* dw = acc.w[l].data();
      for (std::size_t o = 0; o < layer.out_dim; ++o) acc.b[l][o] += ga[o];
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        if (in[i] != 0.0) k.axpy(in[i], ga.data(), dw + i * layer.out_dim, layer.out_dim);
      }
      if (l == 0) break;
      gb.resize(layer.in_dim);
      const double* w = layer.weights.data();
      for (std::size_t i = 0; i < layer.in_dim; ++i) gb[i] = k.dot(w + i * layer.out_dim, ga.data(), layer.out_dim);
    } else {
      gb.resize(layer.in_dim);
      for (std::size_t i = 0; i < layer.in_dim; ++i) gb[i] = in[i] > 0.0 ? ga[i] : 0.0;
    }
    ga.swap(gb);
  }
}

}  // namespace

TrainResult sgd_train(Model init, std::size_t n, const TrainConfig& cfg, const SampleFn& sample) {
  cfg.validate();
  if (n == 0) throw InvalidInput("cannot train on an empty dataset");

  Model model = std::move(init);
  auto& params = ParameterAccess::layers(model);
  GradAccum acc(model);
  std::vector<double> seed(model.output_dim());
  std::vector<double> input;
  std::vector<double> ga;
  std::vector<double> gb;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A55A5A5A5Aull);

  TrainResult result{model, {}};
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t labelled = 0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      acc.clear();
      {
        Evaluator eval(model);
        for (std::size_t p = start; p < stop; ++p) {
          const LossKind loss = sample(order[p], model, input);
          validate_loss(loss, model.output_dim());
          const auto z = eval.forward(input);
          const double value = loss_and_seed(loss, z, seed);
          if (!std::isfinite(value)) {
            throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch + 1) + " at example " +
                                  std::to_string(order[p]) + "; lower the learning rate");
          }
          loss_sum += value;
          if (const auto* ce = std::get_if<CrossEntropy>(&loss)) {
            ++labelled;
            if (argmax(z) == ce->label) ++correct;
          }
          accumulate(model, eval, seed, acc, ga, gb);
        }
      }
      const double step = cfg.learning_rate / static_cast<double>(stop - start);
      if (step == 0.0) continue;
      for (std::size_t l = 0; l < params.size(); ++l) {
        Layer& layer = params[l];
        for (std::size_t j = 0; j < layer.weights.size(); ++j) layer.weights[j] -= step * acc.w[l][j];
        for (std::size_t j = 0; j < layer.bias.size(); ++j) layer.bias[j] -= step * acc.b[l][j];
      }
    }
    EpochStats stats;
    stats.mean_loss = loss_sum / static_cast<double>(n);
    if (labelled > 0) stats.accuracy = static_cast<double>(correct) / static_cast<double>(labelled);
    result.history.push_back(stats);
  }
  for (const Layer& l : params) {
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(l.weights.begin(), l.weights.end(), finite)) {
      throw DivergenceError("training produced non-finite weights; lower the learning rate");
    }
  }
  result.model = std::move(model);
  return result;
}

TrainResult train(Model init, const Dataset& data, const TrainConfig& cfg) {
  if (data.empty()) throw InvalidInput("cannot train on an empty dataset");
  if (data.input_dim() != init.input_dim()) throw InvalidInput("dataset width does not match the model input");
  if (data.num_classes() > init.num_classes()) throw InvalidInput("dataset has more classes than the model outputs");
  return sgd_train(std::move(init), data.size(), cfg,
                   [&data](std::size_t i, const Model&, std::vector<double>& input) -> LossKind {
                     const auto px = data[i].pixels.values();
                     input.assign(px.begin(), px.end());
                     return CrossEntropy{data[i].label};
                   });
}

TrainResult train(const Architecture& arch, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  return train(make_mlp(arch, cfg.weight_init_scale, cfg.seed), data, cfg);
}

double accuracy(const Model& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  Evaluator eval(model);
  std::size_t correct = 0;
  for (const Example& e : data) {
    if (argmax(eval.forward(e.pixels.values())) == e.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace a2d
