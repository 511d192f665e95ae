#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedkd/tensor.hpp"

namespace fedkd {

enum class ClassRole { kPublic, kLocal };

/// Examples with labels in the joint output head. Public classes occupy head
/// indices [0, P) and local classes [P, P+L); class_lo/class_hi delimit the
/// block this dataset's labels live in.
struct LabeledDataset {
  Tensor inputs;             // [N x input_dim]
  std::vector<int> labels;   // joint-head indices in [class_lo, class_hi)
  int class_count = 0;       // joint head width
  ClassRole class_role = ClassRole::kLocal;
  int class_lo = 0;
  int class_hi = 0;

  std::size_t size() const { return labels.size(); }
  int local_class_count() const { return class_hi - class_lo; }
};

void validate_dataset(const LabeledDataset& data);

struct SyntheticSpec {
  int public_classes = 20;
  int local_classes = 10;
  int train_per_class = 100;
  int test_per_class = 50;
  int public_per_class = 100;
  int input_dim = 16;
  double cluster_spread = 0.5;
  std::uint64_t rng_seed = 0;
};

struct SyntheticData {
  LabeledDataset public_data;
  LabeledDataset local_train;
  LabeledDataset local_test;
};

/// Disjoint-content classification task: one seeded isotropic Gaussian
/// cluster per class. Public and local cluster means come from independent
/// streams; train and test noise come from disjoint streams of the same
/// clusters.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

SyntheticData generate_synthetic(int public_classes, int local_classes, int per_class_count,
                                 int input_dim, double cluster_spread, std::uint64_t rng_seed);

/// Uniform sample of `count` rows without replacement, seeded by
/// (base_seed, round_index); rows are returned in dataset order.
LabeledDataset sample_public_subset(const LabeledDataset& public_data, std::size_t count,
                                    int round_index, std::uint64_t base_seed);

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows);

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const std::size_t> rows);

}  // namespace fedkd
