#include "fedkd/model.hpp"

#include <cmath>
#include <sstream>

#include "fedkd/errors.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

void validate_arch(const ModelArch& arch) {
  if (arch.input_dim <= 0 || arch.hidden_layers <= 0 || arch.hidden_width <= 0 ||
      arch.output_dim <= 0) {
    std::ostringstream msg;
    msg << "model arch extents must be positive, got input_dim=" << arch.input_dim
        << " hidden_layers=" << arch.hidden_layers << " hidden_width=" << arch.hidden_width
        << " output_dim=" << arch.output_dim;
    throw ParameterError(msg.str());
  }
}

std::vector<std::pair<int, int>> layer_dims(const ModelArch& arch) {
  validate_arch(arch);
  std::vector<std::pair<int, int>> dims;
  dims.reserve(static_cast<std::size_t>(arch.hidden_layers) + 1);
  int in = arch.input_dim;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    dims.emplace_back(in, arch.hidden_width);
    in = arch.hidden_width;
  }
  dims.emplace_back(in, arch.output_dim);
  return dims;
}

std::size_t parameter_count(const ModelArch& arch) {
  std::size_t n = 0;
  for (auto [in, out] : layer_dims(arch)) {
    n += static_cast<std::size_t>(in) * static_cast<std::size_t>(out) +
         static_cast<std::size_t>(out);
  }
  return n;
}

ModelParams init_params(const ModelArch& arch, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams params;
  params.arch = arch;
  for (auto [in, out] : layer_dims(arch)) {
    DenseLayer layer;
    layer.weight = Tensor::matrix(static_cast<std::size_t>(out), static_cast<std::size_t>(in));
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (double& w : layer.weight.data()) {
      w = scale * rng.normal();
    }
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ModelParams zero_params(const ModelArch& arch) {
  ModelParams params;
  params.arch = arch;
  for (auto [in, out] : layer_dims(arch)) {
    DenseLayer layer;
    layer.weight = Tensor::matrix(static_cast<std::size_t>(out), static_cast<std::size_t>(in));
    layer.bias.assign(static_cast<std::size_t>(out), 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

void validate_params(const ModelParams& params) {
  const auto dims = layer_dims(params.arch);
  if (params.layers.size() != dims.size()) {
    throw DimensionError("model has the wrong number of layers for its arch");
  }
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto [in, out] = dims[l];
    const auto& layer = params.layers[l];
    if (layer.weight.rank() != 2 || layer.weight.rows() != static_cast<std::size_t>(out) ||
        layer.weight.cols() != static_cast<std::size_t>(in) ||
        layer.bias.size() != static_cast<std::size_t>(out)) {
      std::ostringstream msg;
      msg << "layer " << l << " does not chain: expected weight [" << out << " x " << in
          << "], got " << shape_string(layer.weight) << " with bias " << layer.bias.size();
      throw DimensionError(msg.str());
    }
  }
}

namespace {

// y[b] = W x[b] + bias, relu optional.
Tensor dense_forward(const Tensor& x, const DenseLayer& layer, bool relu) {
  const std::size_t batch = x.rows();
  const std::size_t in = x.cols();
  const std::size_t out = layer.weight.rows();
  Tensor y = Tensor::matrix(batch, out);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xb = x.row(b).data();
    double* yb = y.row(b).data();
    for (std::size_t o = 0; o < out; ++o) {
      const double* w = layer.weight.row(o).data();
      double acc = layer.bias[o];
      for (std::size_t i = 0; i < in; ++i) {
        acc += w[i] * xb[i];
      }
      yb[o] = relu && acc < 0.0 ? 0.0 : acc;
    }
  }
  return y;
}

void check_batch(const ModelParams& params, const Tensor& batch) {
  if (batch.rank() != 2) {
    throw DimensionError("input batch must be rank 2, got " + shape_string(batch));
  }
  if (batch.cols() != static_cast<std::size_t>(params.arch.input_dim)) {
    std::ostringstream msg;
    msg << "batch has " << batch.cols() << " columns but the model expects input_dim="
        << params.arch.input_dim;
    throw DimensionError(msg.str());
  }
}

}  // namespace

Tensor forward_logits(const ModelParams& params, const Tensor& batch) {
  validate_params(params);
  check_batch(params, batch);
  Tensor a = batch;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    a = dense_forward(a, params.layers[l], l != last);
  }
  require_finite(a, "forward_logits");
  return a;
}

ForwardTrace forward_trace(const ModelParams& params, const Tensor& batch) {
  validate_params(params);
  check_batch(params, batch);
  ForwardTrace trace;
  trace.pre.reserve(params.layers.size());
  trace.act.reserve(params.layers.size());
  const std::size_t last = params.layers.size() - 1;
  const Tensor* a = &batch;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Tensor pre = dense_forward(*a, params.layers[l], false);
    if (l != last) {
      Tensor act = pre;
      for (double& v : act.data()) {
        if (v < 0.0) {
          v = 0.0;
        }
      }
      trace.act.push_back(std::move(act));
      a = &trace.act.back();
    }
    trace.pre.push_back(std::move(pre));
  }
  require_finite(trace.logits(), "forward_trace");
  return trace;
}

}  // namespace fedkd
