#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fedkd/dataset.hpp"
#include "fedkd/errors.hpp"
#include "fedkd/partition.hpp"
#include "fedkd/rng.hpp"

using namespace fedkd;

namespace {

LabeledDataset local_fixture(int classes, int per_class, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.public_classes = 3;
  spec.local_classes = classes;
  spec.train_per_class = per_class;
  spec.test_per_class = 5;
  spec.public_per_class = 5;
  spec.input_dim = 4;
  spec.cluster_spread = 0.3;
  spec.rng_seed = seed;
  return generate_synthetic(spec).local_train;
}

// independent largest-remainder implementation for cross-checking
std::vector<std::size_t> naive_allocation(const std::vector<double>& props, std::size_t total) {
  const double sum = [&] {
    double s = 0.0;
    for (double p : props) s += p;
    return s;
  }();
  std::vector<std::size_t> counts(props.size());
  std::vector<std::pair<double, std::size_t>> fracs;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const double share = props[i] / sum * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(share));
    assigned += counts[i];
    fracs.push_back({share - std::floor(share), i});
  }
  std::stable_sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t k = 0; k < total - assigned; ++k) {
    counts[fracs[k % fracs.size()].second] += 1;
  }
  return counts;
}

double mean_max_share(double alpha, int seeds) {
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const LabeledDataset data = local_fixture(6, 40, 1000 + static_cast<std::uint64_t>(s));
    PartitionSpec spec;
    spec.alpha = alpha;
    spec.client_count = 10;
    spec.rng_seed = 1000 + static_cast<std::uint64_t>(s);
    const auto shards = partition_dirichlet(data, spec);
    double run = 0.0;
    int counted = 0;
    for (const auto& shard : shards) {
      if (shard.size() == 0) continue;
      const std::size_t top = *std::max_element(shard.per_class_counts.begin(),
                                                shard.per_class_counts.end());
      run += static_cast<double>(top) / static_cast<double>(shard.size());
      counted += 1;
    }
    total += run / counted;
  }
  return total / seeds;
}

}  // namespace

TEST_CASE("largest_remainder_allocation hand cases") {
  const std::vector<double> even = {0.5, 0.5};
  CHECK(largest_remainder_allocation(even, 3) == std::vector<std::size_t>{2, 1});

  const std::vector<double> thirds = {1.0, 1.0, 1.0};
  CHECK(largest_remainder_allocation(thirds, 10) == std::vector<std::size_t>{4, 3, 3});

  const std::vector<double> skew = {0.7, 0.2, 0.1};
  CHECK(largest_remainder_allocation(skew, 10) == std::vector<std::size_t>{7, 2, 1});

  // exact integer shares stay exact
  const std::vector<double> quarters = {0.25, 0.25, 0.25, 0.25};
  CHECK(largest_remainder_allocation(quarters, 8) == std::vector<std::size_t>{2, 2, 2, 2});

  CHECK(largest_remainder_allocation(even, 0) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("largest_remainder_allocation matches an independent implementation") {
  Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 1 + rng.below(12);
    std::vector<double> props(k);
    for (double& p : props) p = rng.uniform() + 1e-3;
    const std::size_t total = rng.below(500);
    const auto got = largest_remainder_allocation(props, total);
    const auto expected = naive_allocation(props, total);
    CHECK(got == expected);
    std::size_t sum = 0;
    for (std::size_t c : got) sum += c;
    CHECK(sum == total);
  }
}

TEST_CASE("largest_remainder_allocation validates proportions") {
  CHECK_THROWS_AS(largest_remainder_allocation(std::vector<double>{-0.1, 1.0}, 5),
                  ParameterError);
  CHECK_THROWS_AS(largest_remainder_allocation(std::vector<double>{0.0, 0.0}, 5),
                  ParameterError);
  CHECK_THROWS_AS(largest_remainder_allocation(std::vector<double>{}, 5), ParameterError);
}

TEST_CASE("partition_dirichlet covers every example exactly once") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const LabeledDataset data = local_fixture(5, 30, seed);
    PartitionSpec spec;
    spec.alpha = 0.2;
    spec.client_count = 8;
    spec.rng_seed = seed;
    const auto shards = partition_dirichlet(data, spec);
    REQUIRE(shards.size() == 8);

    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (std::size_t k = 0; k < shards.size(); ++k) {
      CHECK(shards[k].client_id == static_cast<int>(k));
      CHECK(std::is_sorted(shards[k].indices.begin(), shards[k].indices.end()));
      for (std::size_t idx : shards[k].indices) {
        CHECK(idx < data.size());
        CHECK(seen.insert(idx).second);  // no duplicates across shards
      }
      total += shards[k].size();
    }
    CHECK(total == data.size());
  }
}

TEST_CASE("per_class_counts equals a recomputed histogram") {
  const LabeledDataset data = local_fixture(6, 25, 9);
  PartitionSpec spec;
  spec.alpha = 0.5;
  spec.client_count = 7;
  spec.rng_seed = 9;
  const auto shards = partition_dirichlet(data, spec);
  for (const auto& shard : shards) {
    REQUIRE(shard.per_class_counts.size() == 6);
    std::vector<std::size_t> histogram(6, 0);
    for (std::size_t idx : shard.indices) {
      histogram[static_cast<std::size_t>(data.labels[idx] - data.class_lo)] += 1;
    }
    CHECK(shard.per_class_counts == histogram);
  }
}

TEST_CASE("partition is deterministic per seed") {
  const LabeledDataset data = local_fixture(4, 20, 3);
  PartitionSpec spec;
  spec.alpha = 0.1;
  spec.client_count = 5;
  spec.rng_seed = 77;
  const auto a = partition_dirichlet(data, spec);
  const auto b = partition_dirichlet(data, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].indices == b[k].indices);
  }
  spec.rng_seed = 78;
  const auto c = partition_dirichlet(data, spec);
  bool any_difference = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    any_difference = any_difference || (a[k].indices != c[k].indices);
  }
  CHECK(any_difference);
}

TEST_CASE("partition rejects public datasets and bad specs") {
  SyntheticSpec sspec;
  sspec.rng_seed = 5;
  const SyntheticData data = generate_synthetic(sspec);
  PartitionSpec spec;
  spec.alpha = 0.1;
  spec.client_count = 4;
  CHECK_THROWS_AS(partition_dirichlet(data.public_data, spec), DataError);

  spec.alpha = 0.0;
  CHECK_THROWS_AS(partition_dirichlet(data.local_train, spec), ParameterError);
  spec.alpha = 0.1;
  spec.client_count = 0;
  CHECK_THROWS_AS(partition_dirichlet(data.local_train, spec), ParameterError);
}

TEST_CASE("smaller alpha concentrates shards on fewer classes") {
  const double skewed = mean_max_share(0.1, 8);
  const double mixed = mean_max_share(0.5, 8);
  const double uniform = mean_max_share(1e6, 8);
  CHECK(skewed > mixed);
  CHECK(mixed > uniform);
  CHECK(uniform < 0.35);
  CHECK(skewed > 0.7);
}

TEST_CASE("partition_report lists the full grid in canonical order") {
  const LabeledDataset data = local_fixture(3, 10, 2);
  PartitionSpec spec;
  spec.alpha = 0.3;
  spec.client_count = 4;
  spec.rng_seed = 2;
  const auto shards = partition_dirichlet(data, spec);
  const auto rows = partition_report(shards);
  REQUIRE(rows.size() == 4 * 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].client_id == static_cast<int>(i / 3));
    CHECK(rows[i].class_index == static_cast<int>(i % 3));
    CHECK(rows[i].count == shards[i / 3].per_class_counts[i % 3]);
  }

  const std::string csv = partition_report_csv(shards);
  CHECK(csv.substr(0, 22) == "client_id,class,count\n");
  // one line per grid cell plus the header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}
