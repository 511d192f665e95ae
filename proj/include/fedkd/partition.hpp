#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedkd/dataset.hpp"

namespace fedkd {

struct PartitionSpec {
  double alpha = 0.1;   // Dirichlet concentration; smaller means more skew
  int client_count = 20;
  std::uint64_t rng_seed = 0;
};

struct ClientShard {
  int client_id = 0;
  std::vector<std::size_t> indices;            // positions in the parent dataset, ascending
  std::vector<std::size_t> per_class_counts;   // histogram over [class_lo, class_hi)

  std::size_t size() const { return indices.size(); }
};

// Rounds real proportions to integer counts summing exactly to total.
// Floors first, then hands the remainder to the largest fractional parts
// (ties to the lower index).
std::vector<std::size_t> largest_remainder_allocation(std::span<const double> proportions,
                                                      std::size_t total);

/// Per-class Dirichlet split over clients: for each class, proportions drawn
/// from Dirichlet(alpha) decide how that class's examples spread across
/// clients. Every example lands in exactly one shard.
std::vector<ClientShard> partition_dirichlet(const LabeledDataset& dataset,
                                             const PartitionSpec& spec);

struct PartitionRow {
  int client_id = 0;
  int class_index = 0;   // 0-based within the dataset's class block
  std::size_t count = 0;
};

// Full (client, class) grid, client ascending then class ascending.
std::vector<PartitionRow> partition_report(const std::vector<ClientShard>& shards);

// CSV with header client_id,class,count.
std::string partition_report_csv(const std::vector<ClientShard>& shards);

}  // namespace fedkd
