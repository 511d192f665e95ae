#include "fedkd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedkd/errors.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

void validate_dataset(const LabeledDataset& data) {
  if (data.inputs.rank() != 2) {
    throw DataError("dataset inputs must be a rank-2 tensor, got " + shape_string(data.inputs));
  }
  if (data.inputs.rows() != data.labels.size()) {
    std::ostringstream msg;
    msg << "dataset has " << data.inputs.rows() << " input rows but " << data.labels.size()
        << " labels";
    throw DataError(msg.str());
  }
  if (data.class_count <= 0) {
    std::ostringstream msg;
    msg << "class_count must be positive, got " << data.class_count;
    throw DataError(msg.str());
  }
  if (data.class_lo < 0 || data.class_hi > data.class_count || data.class_lo >= data.class_hi) {
    std::ostringstream msg;
    msg << "class block [" << data.class_lo << ", " << data.class_hi
        << ") does not fit inside a head of " << data.class_count;
    throw DataError(msg.str());
  }
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    if (data.labels[i] < data.class_lo || data.labels[i] >= data.class_hi) {
      std::ostringstream msg;
      msg << "label " << data.labels[i] << " at row " << i << " is outside the class block ["
          << data.class_lo << ", " << data.class_hi << ")";
      throw DataError(msg.str());
    }
  }
}

namespace {

void require_positive(int value, const char* name) {
  if (value <= 0) {
    std::ostringstream msg;
    msg << name << " must be positive, got " << value;
    throw ParameterError(msg.str());
  }
}

// Stream tags under SeedStream::kData for the independent draws.
enum : std::uint64_t {
  kPublicMeans = 0,
  kLocalMeans = 1,
  kPublicNoise = 2,
  kTrainNoise = 3,
  kTestNoise = 4,
};

// Means are drawn with per-coordinate std 1/sqrt(dim) so cluster centers sit
// at unit expected norm regardless of input_dim; inputs then stay O(1), which
// keeps SGD at the paper's lr 0.1 well inside its stable regime.
std::vector<std::vector<double>> draw_means(int classes, int dim, std::uint64_t seed,
                                            std::uint64_t tag) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::vector<double>> means(static_cast<std::size_t>(classes));
  for (int c = 0; c < classes; ++c) {
    Rng rng(derive_seed(seed, SeedStream::kData, tag, static_cast<std::uint64_t>(c)));
    auto& m = means[static_cast<std::size_t>(c)];
    m.resize(static_cast<std::size_t>(dim));
    for (double& v : m) {
      v = scale * rng.normal();
    }
  }
  return means;
}

// Offset of stream ids used for pair centers; class offsets use the class
// index itself, so any value past the class range avoids collisions.
constexpr std::uint64_t kPairStreamBase = 1u << 20;

// Local classes come in confusable twins: classes 2j and 2j+1 share a
// unit-norm pair center and differ by a small per-class offset. Lone
// fine-tuning on one twin then keeps a persistent gradient into the other
// twin's region, which is what makes skewed shards costly.
std::vector<std::vector<double>> draw_paired_means(int classes, int dim, std::uint64_t seed,
                                                   std::uint64_t tag, double twin_delta) {
  const double root_dim = std::sqrt(static_cast<double>(dim));
  std::vector<std::vector<double>> means(static_cast<std::size_t>(classes));
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < classes; ++c) {
    const std::size_t pair = static_cast<std::size_t>(c / 2);
    if (pair == centers.size()) {
      Rng rng(derive_seed(seed, SeedStream::kData, tag, kPairStreamBase + pair));
      auto& center = centers.emplace_back(static_cast<std::size_t>(dim));
      for (double& v : center) {
        v = rng.normal() / root_dim;
      }
    }
    Rng rng(derive_seed(seed, SeedStream::kData, tag, static_cast<std::uint64_t>(c)));
    auto& m = means[static_cast<std::size_t>(c)];
    m = centers[pair];
    for (double& v : m) {
      v += twin_delta * rng.normal() / root_dim;
    }
  }
  return means;
}

LabeledDataset draw_clusters(const std::vector<std::vector<double>>& means, int per_class,
                             double spread, std::uint64_t seed, std::uint64_t tag, int class_lo,
                             int class_count, ClassRole role) {
  const int classes = static_cast<int>(means.size());
  const int dim = static_cast<int>(means.front().size());
  LabeledDataset data;
  data.inputs = Tensor::matrix(static_cast<std::size_t>(classes) * per_class,
                               static_cast<std::size_t>(dim));
  data.labels.reserve(data.inputs.rows());
  data.class_count = class_count;
  data.class_role = role;
  data.class_lo = class_lo;
  data.class_hi = class_lo + classes;
  std::size_t row = 0;
  for (int c = 0; c < classes; ++c) {
    Rng rng(derive_seed(seed, SeedStream::kData, tag, static_cast<std::uint64_t>(c)));
    const auto& mean = means[static_cast<std::size_t>(c)];
    for (int n = 0; n < per_class; ++n, ++row) {
      auto out = data.inputs.row(row);
      for (int d = 0; d < dim; ++d) {
        out[static_cast<std::size_t>(d)] =
            mean[static_cast<std::size_t>(d)] + spread * rng.normal();
      }
      data.labels.push_back(class_lo + c);
    }
  }
  return data;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  require_positive(spec.public_classes, "public_classes");
  require_positive(spec.local_classes, "local_classes");
  require_positive(spec.train_per_class, "train_per_class");
  require_positive(spec.test_per_class, "test_per_class");
  require_positive(spec.public_per_class, "public_per_class");
  require_positive(spec.input_dim, "input_dim");
  if (!(spec.cluster_spread > 0.0)) {
    std::ostringstream msg;
    msg << "cluster_spread must be positive, got " << spec.cluster_spread;
    throw ParameterError(msg.str());
  }

  // Twin offset norm, relative to the unit-norm pair centers.
  constexpr double kTwinDelta = 0.5;
  const auto public_means =
      draw_means(spec.public_classes, spec.input_dim, spec.rng_seed, kPublicMeans);
  const auto local_means =
      draw_paired_means(spec.local_classes, spec.input_dim, spec.rng_seed, kLocalMeans, kTwinDelta);
  const int head = spec.public_classes + spec.local_classes;

  SyntheticData data;
  data.public_data = draw_clusters(public_means, spec.public_per_class, spec.cluster_spread,
                                   spec.rng_seed, kPublicNoise, 0, head, ClassRole::kPublic);
  data.local_train = draw_clusters(local_means, spec.train_per_class, spec.cluster_spread,
                                   spec.rng_seed, kTrainNoise, spec.public_classes, head,
                                   ClassRole::kLocal);
  data.local_test = draw_clusters(local_means, spec.test_per_class, spec.cluster_spread,
                                  spec.rng_seed, kTestNoise, spec.public_classes, head,
                                  ClassRole::kLocal);
  return data;
}

SyntheticData generate_synthetic(int public_classes, int local_classes, int per_class_count,
                                 int input_dim, double cluster_spread, std::uint64_t rng_seed) {
  SyntheticSpec spec;
  spec.public_classes = public_classes;
  spec.local_classes = local_classes;
  spec.train_per_class = per_class_count;
  spec.test_per_class = per_class_count;
  spec.public_per_class = per_class_count;
  spec.input_dim = input_dim;
  spec.cluster_spread = cluster_spread;
  spec.rng_seed = rng_seed;
  return generate_synthetic(spec);
}

LabeledDataset sample_public_subset(const LabeledDataset& public_data, std::size_t count,
                                    int round_index, std::uint64_t base_seed) {
  validate_dataset(public_data);
  if (count > public_data.size()) {
    std::ostringstream msg;
    msg << "subset of " << count << " requested from " << public_data.size() << " examples";
    throw ParameterError(msg.str());
  }
  Rng rng(derive_seed(base_seed, SeedStream::kSubset, static_cast<std::uint64_t>(round_index)));
  const std::vector<std::size_t> rows = rng.sample_without_replacement(public_data.size(), count);

  LabeledDataset subset;
  subset.inputs = gather_rows(public_data.inputs, rows);
  subset.labels = gather_labels(public_data.labels, rows);
  subset.class_count = public_data.class_count;
  subset.class_role = public_data.class_role;
  subset.class_lo = public_data.class_lo;
  subset.class_hi = public_data.class_hi;
  return subset;
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows) {
  Tensor out = Tensor::matrix(rows.size(), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= t.rows()) {
      std::ostringstream msg;
      msg << "row " << rows[i] << " out of range for " << shape_string(t);
      throw DimensionError(msg.str());
    }
    auto src = t.row(rows[i]);
    auto dst = out.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) {
    if (r >= labels.size()) {
      std::ostringstream msg;
      msg << "label row " << r << " out of range for " << labels.size();
      throw DimensionError(msg.str());
    }
    out.push_back(labels[r]);
  }
  return out;
}

}  // namespace fedkd
