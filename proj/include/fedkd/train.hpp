#pragma once

#include <cstdint>

#include "fedkd/losses.hpp"
#include "fedkd/model.hpp"

namespace fedkd {

struct TrainConfig {
  double learning_rate = 0.1;
  int batch_size = 1;
  int epochs = 1;
  std::uint64_t rng_seed = 0;
};

void validate_train_config(const TrainConfig& cfg);

/// Gradient set shaped like the layers of a ModelParams.
struct GradSet {
  std::vector<DenseLayer> layers;
};

struct BackwardResult {
  double loss = 0.0;
  GradSet grads;
};

// Loss and d(loss)/d(weights, biases) for one batch. ReLU subgradient at 0 is
// 0, as is the L1 subgradient at 0.
BackwardResult backward(const ModelParams& params, const Tensor& batch, const LossSpec& loss);

// w <- w - lr * g, elementwise. Pure: inputs untouched.
ModelParams sgd_step(const ModelParams& params, const GradSet& grads, double learning_rate);

/// Seeded mini-batch SGD: config.epochs passes over shuffled batches of
/// config.batch_size. Loss targets stay fixed for the whole call while model
/// outputs are recomputed per batch.
ModelParams train(const ModelParams& params, const Tensor& inputs, const LossSpec& loss,
                  const TrainConfig& cfg);

}  // namespace fedkd
