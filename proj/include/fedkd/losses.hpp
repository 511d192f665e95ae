#pragma once

#include <span>
#include <variant>
#include <vector>

#include "fedkd/tensor.hpp"

namespace fedkd {

/// Row-wise softened softmax exp(z/rho) / sum exp(z/rho), computed with
/// max-subtraction. rho > 0.
Tensor softmax_temperature(const Tensor& logits, double rho);

/// Mean over the batch of the per-example L1 distance between logit rows.
double loss_l1_logits(const Tensor& target, const Tensor& own);

/// Mean negative log softmax probability of the true class.
double loss_task_ce(const Tensor& logits, std::span<const int> labels);

/// Mean cross-entropy between the softened snapshot distribution and the
/// softened current distribution. Only the current side carries gradient.
double loss_lwof(const Tensor& current_logits, const Tensor& snapshot_logits, double rho);

/// loss_task_ce + beta * loss_lwof; beta = 0 reduces exactly to the task loss.
double loss_local_combined(const Tensor& logits, std::span<const int> labels,
                           const Tensor& snapshot_logits, double rho, double beta);

// --- training objectives -------------------------------------------------
//
// A LossSpec carries targets aligned row-for-row with the training inputs;
// loss_select_rows slices the targets for a mini-batch.

struct L1TowardTarget {
  Tensor target;
};

struct TaskCrossEntropy {
  std::vector<int> labels;
};

struct SoftenedCrossEntropy {
  Tensor snapshot;
  double rho = 1.0;
};

struct LocalObjective {
  std::vector<int> labels;
  Tensor snapshot;
  double rho = 1.0;
  double beta = 1.0;
};

using LossSpec = std::variant<L1TowardTarget, TaskCrossEntropy, SoftenedCrossEntropy, LocalObjective>;

std::size_t loss_row_count(const LossSpec& spec);

LossSpec loss_select_rows(const LossSpec& spec, std::span<const std::size_t> rows);

struct LossEval {
  double value = 0.0;
  Tensor grad_logits;
};

// Loss value and its gradient with respect to the logits.
LossEval loss_with_grad(const LossSpec& spec, const Tensor& logits);

double loss_value(const LossSpec& spec, const Tensor& logits);

}  // namespace fedkd
