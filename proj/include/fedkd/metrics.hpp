#pragma once

#include <optional>
#include <vector>

#include "fedkd/dataset.hpp"
#include "fedkd/model.hpp"
#include "fedkd/records.hpp"

namespace fedkd {

/// [lo, hi) block of the joint head a test set is scored against.
struct ClassSlice {
  int lo = 0;
  int hi = 0;
};

/// Fraction of examples whose argmax over logits[lo:hi) (offset back to label
/// space) equals the label. Ties break toward the lowest index. Exact
/// rational: one integer count, one division.
double evaluate_accuracy(const ModelParams& model, const LabeledDataset& testset,
                         ClassSlice slice);

struct EvalReport {
  double initial_mean = 0.0;
  std::optional<double> global_final;
  std::optional<double> distilled_final_mean;
  std::optional<double> personalised_final_mean;
  std::optional<double> gap_final;
  std::vector<RoundRecord> per_round;
};

EvalReport summarize(const std::vector<RoundRecord>& records,
                     const std::vector<double>& initial_accs);

}  // namespace fedkd
