#include "fedkd/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedkd/errors.hpp"
#include "fedkd/rng.hpp"

namespace fedkd {

std::vector<std::size_t> largest_remainder_allocation(std::span<const double> proportions,
                                                      std::size_t total) {
  if (proportions.empty()) {
    throw ParameterError("largest_remainder_allocation: no proportions");
  }
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) {
      std::ostringstream msg;
      msg << "proportions must be non-negative, got " << p;
      throw ParameterError(msg.str());
    }
    sum += p;
  }
  if (!(sum > 0.0)) {
    throw ParameterError("proportions sum to zero");
  }

  std::vector<std::size_t> counts(proportions.size(), 0);
  std::vector<double> fracs(proportions.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < proportions.size(); ++i) {
    const double raw = static_cast<double>(total) * proportions[i] / sum;
    const double base = std::floor(raw);
    counts[i] = static_cast<std::size_t>(base);
    fracs[i] = raw - base;
    assigned += counts[i];
  }

  std::vector<std::size_t> order(proportions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Largest fractional part first; ties go to the lower index.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fracs[a] > fracs[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
    counts[order[k % order.size()]] += 1;
  }
  return counts;
}

std::vector<ClientShard> partition_dirichlet(const LabeledDataset& dataset,
                                             const PartitionSpec& spec) {
  validate_dataset(dataset);
  if (dataset.size() == 0) {
    throw DataError("partition_dirichlet: empty dataset");
  }
  if (dataset.class_role != ClassRole::kLocal) {
    throw DataError("partition_dirichlet: only local datasets are partitioned");
  }
  if (!(spec.alpha > 0.0)) {
    std::ostringstream msg;
    msg << "alpha must be positive, got " << spec.alpha;
    throw ParameterError(msg.str());
  }
  if (spec.client_count < 1) {
    std::ostringstream msg;
    msg << "client_count must be at least 1, got " << spec.client_count;
    throw ParameterError(msg.str());
  }

  const std::size_t class_count = static_cast<std::size_t>(dataset.local_class_count());
  std::vector<std::vector<std::size_t>> by_class(class_count);
  for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i] - dataset.class_lo)].push_back(i);
  }

  const std::size_t clients = static_cast<std::size_t>(spec.client_count);
  std::vector<ClientShard> shards(clients);
  for (std::size_t k = 0; k < clients; ++k) {
    shards[k].client_id = static_cast<int>(k);
    shards[k].per_class_counts.assign(class_count, 0);
  }

  for (std::size_t c = 0; c < class_count; ++c) {
    Rng rng(derive_seed(spec.rng_seed, SeedStream::kPartition, static_cast<std::uint64_t>(c)));
    const std::vector<double> proportions = rng.dirichlet(spec.alpha, clients);
    const std::vector<std::size_t> counts =
        largest_remainder_allocation(proportions, by_class[c].size());
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < clients; ++k) {
      shards[k].per_class_counts[c] = counts[k];
      for (std::size_t n = 0; n < counts[k]; ++n, ++cursor) {
        shards[k].indices.push_back(by_class[c][cursor]);
      }
    }
  }

  for (ClientShard& shard : shards) {
    std::sort(shard.indices.begin(), shard.indices.end());
  }
  return shards;
}

std::vector<PartitionRow> partition_report(const std::vector<ClientShard>& shards) {
  std::vector<PartitionRow> rows;
  for (const ClientShard& shard : shards) {
    for (std::size_t c = 0; c < shard.per_class_counts.size(); ++c) {
      rows.push_back({shard.client_id, static_cast<int>(c), shard.per_class_counts[c]});
    }
  }
  return rows;
}

std::string partition_report_csv(const std::vector<ClientShard>& shards) {
  std::ostringstream out;
  out << "client_id,class,count\n";
  for (const PartitionRow& row : partition_report(shards)) {
    out << row.client_id << ',' << row.class_index << ',' << row.count << '\n';
  }
  return out.str();
}

}  // namespace fedkd
