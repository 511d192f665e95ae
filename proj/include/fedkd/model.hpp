#pragma once

#include <cstdint>
#include <vector>

#include "fedkd/tensor.hpp"

namespace fedkd {

/// Depth/width descriptor of one dense classifier. Depth (hidden_layers) is
/// the per-client capacity axis; output_dim is the joint head shared by every
/// model in an experiment.
struct ModelArch {
  int input_dim = 0;
  int hidden_layers = 0;
  int hidden_width = 0;
  int output_dim = 0;

  friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

void validate_arch(const ModelArch& arch);

// (fan_in, fan_out) of each dense layer, input through head.
std::vector<std::pair<int, int>> layer_dims(const ModelArch& arch);

std::size_t parameter_count(const ModelArch& arch);

/// One dense layer: weight is [out x in] row-major, bias has out entries.
struct DenseLayer {
  Tensor weight;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Weights of one classifier. Value type: a copy is an independent snapshot.
struct ModelParams {
  ModelArch arch;
  std::vector<DenseLayer> layers;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Seeded He-style init: weights ~ N(0, 2/fan_in), biases zero.
ModelParams init_params(const ModelArch& arch, std::uint64_t seed);

ModelParams zero_params(const ModelArch& arch);

void validate_params(const ModelParams& params);

/// Pre-softmax outputs for a batch [B x input_dim] -> [B x output_dim].
/// ReLU on hidden layers, linear head.
Tensor forward_logits(const ModelParams& params, const Tensor& batch);

// Forward pass retaining per-layer pre-activations and hidden activations for
// backpropagation. Logits are pre.back() (the head is linear).
struct ForwardTrace {
  std::vector<Tensor> pre;
  std::vector<Tensor> act;

  const Tensor& logits() const { return pre.back(); }
};

ForwardTrace forward_trace(const ModelParams& params, const Tensor& batch);

}  // namespace fedkd
