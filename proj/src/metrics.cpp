#include "fedkd/metrics.hpp"

#include <sstream>

#include "fedkd/errors.hpp"

namespace fedkd {

double evaluate_accuracy(const ModelParams& model, const LabeledDataset& testset,
                         ClassSlice slice) {
  validate_dataset(testset);
  if (testset.size() == 0) {
    throw DataError("evaluate_accuracy: empty testset");
  }
  if (slice.lo < 0 || slice.hi > model.arch.output_dim || slice.lo >= slice.hi) {
    std::ostringstream msg;
    msg << "class slice [" << slice.lo << ", " << slice.hi << ") does not fit a head of "
        << model.arch.output_dim;
    throw ParameterError(msg.str());
  }

  const Tensor logits = forward_logits(model, testset.inputs);
  std::size_t correct = 0;
  for (std::size_t b = 0; b < testset.size(); ++b) {
    auto z = logits.row(b);
    int best = slice.lo;
    for (int j = slice.lo + 1; j < slice.hi; ++j) {
      // Strict > keeps ties at the lowest index.
      if (z[static_cast<std::size_t>(j)] > z[static_cast<std::size_t>(best)]) {
        best = j;
      }
    }
    if (best == testset.labels[b]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(testset.size());
}

namespace {

double mean_of(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) {
    total += v;
  }
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

}  // namespace

EvalReport summarize(const std::vector<RoundRecord>& records,
                     const std::vector<double>& initial_accs) {
  EvalReport report;
  report.initial_mean = mean_of(initial_accs);
  report.per_round = records;
  if (!records.empty()) {
    const RoundRecord& last = records.back();
    report.global_final = last.global_acc;
    report.distilled_final_mean = last.distilled_acc_mean;
    report.personalised_final_mean = last.personalised_acc_mean;
    report.gap_final = last.gap;
  }
  return report;
}

}  // namespace fedkd
