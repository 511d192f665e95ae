#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedkd/dataset.hpp"
#include "fedkd/metrics.hpp"
#include "fedkd/model.hpp"
#include "fedkd/partition.hpp"
#include "fedkd/records.hpp"
#include "fedkd/tensor.hpp"

namespace fedkd {

enum class Method { kFedmdGlobal, kFedmdGlobalLwof, kFedavg };
enum class DropoutPolicy { kRandomPerRound, kFixedLowestCapacity };

struct ExperimentConfig {
  Method method = Method::kFedmdGlobal;
  int rounds = 50;
  int clients = 20;
  double alpha = 0.1;
  int local_epochs = 5;
  int kd_epochs = 5;
  int init_epochs = 20;           // per initialization phase
  int public_subset_size = 400;   // distillation rows resampled each round
  double participation = 1.0;     // FedAvg only
  DropoutPolicy dropout_policy = DropoutPolicy::kRandomPerRound;
  double beta = 1.0;              // forgetting-regularizer weight
  double rho = 2.0;               // softening temperature
  double learning_rate = 0.1;
  int kd_batch_size = 64;
  int local_batch_size = 128;
  int public_classes = 20;
  int local_classes = 10;
  int input_dim = 16;
  int train_per_class = 100;
  int test_per_class = 50;
  int public_per_class = 100;
  double cluster_spread = 0.5;
  int hidden_width = 32;
  std::uint64_t seed = 42;

  int joint_head() const { return public_classes + local_classes; }
  ClassSlice local_slice() const { return {public_classes, public_classes + local_classes}; }
  bool lwof_enabled() const { return method == Method::kFedmdGlobalLwof; }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ConfigError naming the offending field.
void validate_config(const ExperimentConfig& cfg);

struct ClientState {
  int client_id = 0;
  ModelParams model;
  std::optional<ModelParams> lwof_snapshot;   // refreshed after each distillation stage
  ClientShard shard;
  int global_updates_seen = 0;
};

struct ServerState {
  ModelParams global_model;
  std::optional<Tensor> aggregated_logits;   // row count == public_subset size
  LabeledDataset public_subset;
};

// Client depth tiers. Depths run 1..6; the global model sits at depth 6.
inline constexpr int kDepthFamilyMin = 1;
inline constexpr int kDepthFamilyMax = 6;
inline constexpr int kGlobalDepth = 6;

// Default capacity tiering: depths 1..5 in proportions 6:4:4:4:2 per 20
// clients, lowest-capacity clients first.
std::vector<int> default_depth_assignment(int clients);

/// Clients with per-client depths from the family and seeded weights; the
/// joint head width is shared by all of them.
std::vector<ClientState> build_hetero_clients(const ExperimentConfig& cfg,
                                              const std::vector<int>& depth_assignment);

ModelParams init_global_model(const ExperimentConfig& cfg);

// ConfigError unless one shard per client.
void attach_shards(std::vector<ClientState>& clients, const std::vector<ClientShard>& shards);

/// Pre-federation warm start. FedMD methods train each client on the public
/// data then on its local shard; FedAvg trains on the local shard only.
/// Returns per-client test accuracy (the "initial" measure).
std::vector<double> initialize_clients(std::vector<ClientState>& clients,
                                       const LabeledDataset& public_data,
                                       const LabeledDataset& local_train,
                                       const LabeledDataset& local_test,
                                       const ExperimentConfig& cfg);

// Arithmetic mean of per-client logit tensors in ascending client-id order.
Tensor aggregate_logits(std::vector<std::pair<int, Tensor>> client_logits);

/// Every client's logits on the public subset, averaged in canonical order.
/// The global model's own logits are not part of the average.
Tensor collect_and_aggregate_logits(const std::vector<ClientState>& clients,
                                    const LabeledDataset& public_subset);

struct KdOutcome {
  double global_acc = 0.0;
  std::vector<double> distilled_accs;
};

/// Distillation stage: global model and every client train toward the fixed
/// aggregated logits with the L1 logit loss, then get scored on the local
/// test set. Refreshes forgetting snapshots when the method calls for them.
KdOutcome global_update_round(ServerState& server, std::vector<ClientState>& clients,
                              const ExperimentConfig& cfg, const LabeledDataset& local_test,
                              int round_index);

/// Personalisation stage: each client trains on its own shard, with the
/// softened-snapshot regularizer when lwof is set. Returns per-client test
/// accuracy. Clients with empty shards skip training but are still scored.
std::vector<double> local_update_round(std::vector<ClientState>& clients,
                                       const ExperimentConfig& cfg,
                                       const LabeledDataset& local_train,
                                       const LabeledDataset& local_test, bool lwof,
                                       int round_index);

// Shard-size-weighted mean of parameter sets. Weights must be non-negative
// with a positive sum.
ModelParams weighted_average_params(const std::vector<const ModelParams*>& models,
                                    const std::vector<double>& weights);

std::size_t participant_count(double participation, std::size_t clients);

struct FedavgOutcome {
  double global_acc = 0.0;
  std::vector<int> participant_ids;
};

/// One FedAvg round: select participants, broadcast the global weights, train
/// each participant on its shard, replace the global weights with the
/// shard-size-weighted average. Non-participants are untouched.
FedavgOutcome fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                           const ExperimentConfig& cfg, const LabeledDataset& local_train,
                           const LabeledDataset& local_test, int round_index);

struct Experiment {
  ExperimentConfig cfg;
  LabeledDataset public_data;
  LabeledDataset local_train;
  LabeledDataset local_test;
  std::vector<ClientShard> shards;
  ServerState server;
  std::vector<ClientState> clients;
};

// Data, partition, and seeded models; no training yet.
Experiment prepare_experiment(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<double> initial_accs;
  std::vector<RoundRecord> records;
  EvalReport report;
};

/// Initialization followed by `rounds` rounds of the configured method.
/// Fully reproducible from the config.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace fedkd
