#include "fedkd/train.hpp"

#include <numeric>
#include <sstream>

#include "fedkd/dataset.hpp"
#include "fedkd/errors.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) {
    std::ostringstream msg;
    msg << "learning_rate must be positive, got " << cfg.learning_rate;
    throw ParameterError(msg.str());
  }
  if (cfg.batch_size < 1) {
    std::ostringstream msg;
    msg << "batch_size must be at least 1, got " << cfg.batch_size;
    throw ParameterError(msg.str());
  }
  if (cfg.epochs < 0) {
    std::ostringstream msg;
    msg << "epochs must be non-negative, got " << cfg.epochs;
    throw ParameterError(msg.str());
  }
}

BackwardResult backward(const ModelParams& params, const Tensor& batch, const LossSpec& loss) {
  const ForwardTrace trace = forward_trace(params, batch);
  const std::size_t layer_count = params.layers.size();
  const std::size_t batch_rows = batch.rows();

  BackwardResult result;
  const LossEval eval = loss_with_grad(loss, trace.logits());
  result.loss = eval.value;
  result.grads.layers.reserve(layer_count);
  for (const DenseLayer& layer : params.layers) {
    DenseLayer g;
    g.weight = Tensor::matrix(layer.weight.rows(), layer.weight.cols());
    g.bias.assign(layer.bias.size(), 0.0);
    result.grads.layers.push_back(std::move(g));
  }

  // delta starts as dL/dlogits and walks back through the hidden layers.
  Tensor delta = eval.grad_logits;
  for (std::size_t li = layer_count; li-- > 0;) {
    const DenseLayer& layer = params.layers[li];
    DenseLayer& grad = result.grads.layers[li];
    const Tensor& input = li == 0 ? batch : trace.act[li - 1];
    const std::size_t out_dim = layer.weight.rows();
    const std::size_t in_dim = layer.weight.cols();
    for (std::size_t b = 0; b < batch_rows; ++b) {
      auto d = delta.row(b);
      auto x = input.row(b);
      for (std::size_t o = 0; o < out_dim; ++o) {
        grad.bias[o] += d[o];
        auto w_grad = grad.weight.row(o);
        for (std::size_t i = 0; i < in_dim; ++i) {
          w_grad[i] += d[o] * x[i];
        }
      }
    }
    if (li == 0) {
      break;
    }
    // Pass delta through W and the previous layer's ReLU gate.
    Tensor prev = Tensor::matrix(batch_rows, in_dim);
    const Tensor& pre = trace.pre[li - 1];
    for (std::size_t b = 0; b < batch_rows; ++b) {
      auto d = delta.row(b);
      auto p = prev.row(b);
      auto gate = pre.row(b);
      for (std::size_t o = 0; o < out_dim; ++o) {
        auto w = layer.weight.row(o);
        for (std::size_t i = 0; i < in_dim; ++i) {
          p[i] += d[o] * w[i];
        }
      }
      // ReLU subgradient at 0 is 0.
      for (std::size_t i = 0; i < in_dim; ++i) {
        if (!(gate[i] > 0.0)) {
          p[i] = 0.0;
        }
      }
    }
    delta = std::move(prev);
  }
  return result;
}

ModelParams sgd_step(const ModelParams& params, const GradSet& grads, double learning_rate) {
  if (grads.layers.size() != params.layers.size()) {
    std::ostringstream msg;
    msg << "gradient set has " << grads.layers.size() << " layers for a model with "
        << params.layers.size();
    throw DimensionError(msg.str());
  }
  ModelParams next = params;
  for (std::size_t li = 0; li < next.layers.size(); ++li) {
    DenseLayer& layer = next.layers[li];
    const DenseLayer& g = grads.layers[li];
    require_same_shape(layer.weight, g.weight, "sgd_step");
    if (g.bias.size() != layer.bias.size()) {
      std::ostringstream msg;
      msg << "bias gradient length " << g.bias.size() << " does not match bias length "
          << layer.bias.size();
      throw DimensionError(msg.str());
    }
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] -= learning_rate * g.weight.data()[i];
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] -= learning_rate * g.bias[i];
    }
  }
  return next;
}

ModelParams train(const ModelParams& params, const Tensor& inputs, const LossSpec& loss,
                  const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (inputs.rows() == 0) {
    throw DataError("train: empty dataset");
  }
  if (loss_row_count(loss) != inputs.rows()) {
    std::ostringstream msg;
    msg << "loss targets cover " << loss_row_count(loss) << " rows but inputs have "
        << inputs.rows();
    throw DimensionError(msg.str());
  }

  ModelParams current = params;
  Rng rng(cfg.rng_seed);
  std::vector<std::size_t> order(inputs.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(start + batch_size, order.size());
      const std::span<const std::size_t> rows(order.data() + start, stop - start);
      const Tensor batch = gather_rows(inputs, rows);
      const LossSpec batch_loss = loss_select_rows(loss, rows);
      const BackwardResult back = backward(current, batch, batch_loss);
      current = sgd_step(current, back.grads, cfg.learning_rate);
    }
  }
  return current;
}

}  // namespace fedkd
