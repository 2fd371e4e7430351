#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "a2d/data.hpp"
#include "a2d/nn.hpp"

namespace a2d {

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double weight_init_scale = 1.0;

  void validate() const;
};

struct EpochStats {
  double mean_loss = 0.0;
  std::optional<double> accuracy;  // classification losses only, measured before each update
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

// Fills `input` with the training input for example `index` and returns the
// loss to minimise. `current` is the model as it stands before the batch
// containing `index` is applied.
using SampleFn = std::function<LossKind(std::size_t index, const Model& current, std::vector<double>& input)>;

// Mini-batch SGD without momentum over examples 0..n-1, shuffled once per
// epoch from cfg.seed. Throws DivergenceError on a non-finite loss.
TrainResult sgd_train(Model init, std::size_t n, const TrainConfig& cfg, const SampleFn& sample);

// Cross-entropy classifier training.
TrainResult train(const Architecture& arch, const Dataset& data, const TrainConfig& cfg);
TrainResult train(Model init, const Dataset& data, const TrainConfig& cfg);

// Fraction of `data` the model labels correctly.
double accuracy(const Model& model, const Dataset& data);

}  // namespace a2d
