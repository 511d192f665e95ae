#pragma once

#include <vector>

namespace fedkd {

/// One round's measurements. Accuracies are fractions in [0, 1]; gap is
/// distilled minus personalised and may be negative. For the FedAvg method
/// the distilled/personalised columns carry the broadcast-model accuracy and
/// the per-client vectors stay empty.
struct RoundRecord {
  int round_index = 0;
  double global_acc = 0.0;
  double distilled_acc_mean = 0.0;
  double personalised_acc_mean = 0.0;
  double gap = 0.0;
  std::vector<double> distilled_accs;
  std::vector<double> personalised_accs;
  std::vector<int> participating_client_ids;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

}  // namespace fedkd
