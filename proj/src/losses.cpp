#include "fedkd/losses.hpp"

#include <cmath>
#include <sstream>

#include "fedkd/errors.hpp"

namespace fedkd {

namespace {

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + ": expected a rank-2 tensor, got " +
                         shape_string(t));
  }
}

void require_rho(double rho) {
  if (!(rho > 0.0)) {
    std::ostringstream msg;
    msg << "temperature must be positive, got " << rho;
    throw ParameterError(msg.str());
  }
}

void require_labels(const Tensor& logits, std::span<const int> labels) {
  if (labels.size() != logits.rows()) {
    std::ostringstream msg;
    msg << "got " << labels.size() << " labels for " << logits.rows() << " logit rows";
    throw DimensionError(msg.str());
  }
  const int classes = static_cast<int>(logits.cols());
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (labels[b] < 0 || labels[b] >= classes) {
      std::ostringstream msg;
      msg << "label " << labels[b] << " at row " << b << " is outside [0, " << classes << ")";
      throw DataError(msg.str());
    }
  }
}

// log softmax(z/rho) of one row, max-subtracted.
void row_log_softmax(std::span<const double> z, double rho, std::vector<double>& out) {
  out.resize(z.size());
  double m = z[0];
  for (double v : z) {
    m = std::max(m, v);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = (z[j] - m) / rho;
    total += std::exp(out[j]);
  }
  const double log_total = std::log(total);
  for (double& v : out) {
    v -= log_total;
  }
}

}  // namespace

Tensor softmax_temperature(const Tensor& logits, double rho) {
  require_rho(rho);
  require_rank2(logits, "softmax_temperature");
  require_finite(logits, "softmax_temperature");
  Tensor probs = logits;
  std::vector<double> log_probs;
  for (std::size_t b = 0; b < logits.rows(); ++b) {
    row_log_softmax(logits.row(b), rho, log_probs);
    auto out = probs.row(b);
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = std::exp(log_probs[j]);
    }
  }
  return probs;
}

namespace {

LossEval l1_with_grad(const Tensor& target, const Tensor& own) {
  require_rank2(own, "loss_l1_logits");
  require_same_shape(target, own, "loss_l1_logits");
  const std::size_t batch = own.rows();
  if (batch == 0) {
    throw DataError("loss_l1_logits: empty batch");
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  LossEval eval;
  eval.grad_logits = Tensor::matrix(own.rows(), own.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < own.size(); ++i) {
    const double diff = own.data()[i] - target.data()[i];
    total += std::abs(diff);
    // Subgradient at 0 fixed to 0.
    eval.grad_logits.data()[i] = diff > 0.0 ? inv_batch : (diff < 0.0 ? -inv_batch : 0.0);
  }
  eval.value = total * inv_batch;
  return eval;
}

LossEval task_ce_with_grad(const Tensor& logits, std::span<const int> labels) {
  require_rank2(logits, "loss_task_ce");
  require_labels(logits, labels);
  const std::size_t batch = logits.rows();
  if (batch == 0) {
    throw DataError("loss_task_ce: empty batch");
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  LossEval eval;
  eval.grad_logits = Tensor::matrix(logits.rows(), logits.cols());
  std::vector<double> log_probs;
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    row_log_softmax(logits.row(b), 1.0, log_probs);
    total -= log_probs[static_cast<std::size_t>(labels[b])];
    auto grad = eval.grad_logits.row(b);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      grad[j] = std::exp(log_probs[j]) * inv_batch;
    }
    grad[static_cast<std::size_t>(labels[b])] -= inv_batch;
  }
  eval.value = total * inv_batch;
  return eval;
}

LossEval lwof_with_grad(const Tensor& current, const Tensor& snapshot, double rho) {
  require_rho(rho);
  require_rank2(current, "loss_lwof");
  require_same_shape(snapshot, current, "loss_lwof");
  const std::size_t batch = current.rows();
  if (batch == 0) {
    throw DataError("loss_lwof: empty batch");
  }
  const double inv_batch = 1.0 / static_cast<double>(batch);
  LossEval eval;
  eval.grad_logits = Tensor::matrix(current.rows(), current.cols());
  std::vector<double> log_p;
  std::vector<double> log_q;
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    row_log_softmax(snapshot.row(b), rho, log_p);
    row_log_softmax(current.row(b), rho, log_q);
    auto grad = eval.grad_logits.row(b);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      const double p = std::exp(log_p[j]);
      const double q = std::exp(log_q[j]);
      if (p > 0.0) {
        total -= p * log_q[j];
      }
      // d/dz of -sum_j p_j log q_j with p frozen: (q - p) / rho.
      grad[j] = (q - p) * inv_batch / rho;
    }
  }
  eval.value = total * inv_batch;
  return eval;
}

LossEval combined_with_grad(const Tensor& logits, std::span<const int> labels,
                            const Tensor& snapshot, double rho, double beta) {
  if (beta < 0.0) {
    std::ostringstream msg;
    msg << "regularizer weight must be non-negative, got " << beta;
    throw ParameterError(msg.str());
  }
  LossEval eval = task_ce_with_grad(logits, labels);
  if (beta == 0.0) {
    // Exactly the task loss, bit for bit.
    return eval;
  }
  const LossEval reg = lwof_with_grad(logits, snapshot, rho);
  eval.value += beta * reg.value;
  for (std::size_t i = 0; i < eval.grad_logits.size(); ++i) {
    eval.grad_logits.data()[i] += beta * reg.grad_logits.data()[i];
  }
  return eval;
}

}  // namespace

double loss_l1_logits(const Tensor& target, const Tensor& own) {
  return l1_with_grad(target, own).value;
}

double loss_task_ce(const Tensor& logits, std::span<const int> labels) {
  return task_ce_with_grad(logits, labels).value;
}

double loss_lwof(const Tensor& current_logits, const Tensor& snapshot_logits, double rho) {
  return lwof_with_grad(current_logits, snapshot_logits, rho).value;
}

double loss_local_combined(const Tensor& logits, std::span<const int> labels,
                           const Tensor& snapshot_logits, double rho, double beta) {
  return combined_with_grad(logits, labels, snapshot_logits, rho, beta).value;
}

std::size_t loss_row_count(const LossSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1TowardTarget>) {
          return s.target.rows();
        } else if constexpr (std::is_same_v<T, TaskCrossEntropy>) {
          return s.labels.size();
        } else if constexpr (std::is_same_v<T, SoftenedCrossEntropy>) {
          return s.snapshot.rows();
        } else {
          return s.labels.size();
        }
      },
      spec);
}

namespace {

std::vector<int> select_ints(const std::vector<int>& v, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    out.push_back(v.at(r));
  }
  return out;
}

Tensor select_tensor_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out = Tensor::matrix(rows.size(), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = t.row(rows[i]);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

}  // namespace

LossSpec loss_select_rows(const LossSpec& spec, std::span<const std::size_t> rows) {
  return std::visit(
      [&](const auto& s) -> LossSpec {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1TowardTarget>) {
          return L1TowardTarget{select_tensor_rows(s.target, rows)};
        } else if constexpr (std::is_same_v<T, TaskCrossEntropy>) {
          return TaskCrossEntropy{select_ints(s.labels, rows)};
        } else if constexpr (std::is_same_v<T, SoftenedCrossEntropy>) {
          return SoftenedCrossEntropy{select_tensor_rows(s.snapshot, rows), s.rho};
        } else {
          return LocalObjective{select_ints(s.labels, rows), select_tensor_rows(s.snapshot, rows),
                                s.rho, s.beta};
        }
      },
      spec);
}

LossEval loss_with_grad(const LossSpec& spec, const Tensor& logits) {
  return std::visit(
      [&](const auto& s) -> LossEval {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1TowardTarget>) {
          return l1_with_grad(s.target, logits);
        } else if constexpr (std::is_same_v<T, TaskCrossEntropy>) {
          return task_ce_with_grad(logits, s.labels);
        } else if constexpr (std::is_same_v<T, SoftenedCrossEntropy>) {
          return lwof_with_grad(logits, s.snapshot, s.rho);
        } else {
          return combined_with_grad(logits, s.labels, s.snapshot, s.rho, s.beta);
        }
      },
      spec);
}

double loss_value(const LossSpec& spec, const Tensor& logits) {
  return loss_with_grad(spec, logits).value;
}

}  // namespace fedkd
