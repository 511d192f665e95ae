#include "fedkd/federation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedkd/errors.hpp"
#include "fedkd/losses.hpp"
#include "fedkd/rng.hpp"
#include "fedkd/train.hpp"

namespace fedkd {

namespace {

void config_check(bool ok, const char* field, const std::string& detail) {
  if (!ok) {
    throw ConfigError(std::string(field) + ": " + detail);
  }
}

std::string printed(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  config_check(cfg.rounds >= 0, "rounds", "must be non-negative, got " + std::to_string(cfg.rounds));
  config_check(cfg.clients >= 1, "clients", "must be at least 1, got " + std::to_string(cfg.clients));
  config_check(cfg.alpha > 0.0, "alpha", "must be positive, got " + printed(cfg.alpha));
  config_check(cfg.local_epochs >= 0, "local_epochs",
               "must be non-negative, got " + std::to_string(cfg.local_epochs));
  config_check(cfg.kd_epochs >= 0, "kd_epochs",
               "must be non-negative, got " + std::to_string(cfg.kd_epochs));
  config_check(cfg.init_epochs >= 0, "init_epochs",
               "must be non-negative, got " + std::to_string(cfg.init_epochs));
  config_check(cfg.public_subset_size >= 1, "public_subset_size",
               "must be at least 1, got " + std::to_string(cfg.public_subset_size));
  config_check(cfg.participation > 0.0 && cfg.participation <= 1.0, "participation",
               "must lie in (0, 1], got " + printed(cfg.participation));
  config_check(cfg.beta >= 0.0, "beta", "must be non-negative, got " + printed(cfg.beta));
  config_check(cfg.rho > 0.0, "rho", "must be positive, got " + printed(cfg.rho));
  config_check(cfg.learning_rate > 0.0, "learning_rate",
               "must be positive, got " + printed(cfg.learning_rate));
  config_check(cfg.kd_batch_size >= 1, "kd_batch_size",
               "must be at least 1, got " + std::to_string(cfg.kd_batch_size));
  config_check(cfg.local_batch_size >= 1, "local_batch_size",
               "must be at least 1, got " + std::to_string(cfg.local_batch_size));
  config_check(cfg.public_classes >= 1, "public_classes",
               "must be at least 1, got " + std::to_string(cfg.public_classes));
  config_check(cfg.local_classes >= 1, "local_classes",
               "must be at least 1, got " + std::to_string(cfg.local_classes));
  config_check(cfg.input_dim >= 1, "input_dim",
               "must be at least 1, got " + std::to_string(cfg.input_dim));
  config_check(cfg.train_per_class >= 1, "train_per_class",
               "must be at least 1, got " + std::to_string(cfg.train_per_class));
  config_check(cfg.test_per_class >= 1, "test_per_class",
               "must be at least 1, got " + std::to_string(cfg.test_per_class));
  config_check(cfg.public_per_class >= 1, "public_per_class",
               "must be at least 1, got " + std::to_string(cfg.public_per_class));
  config_check(cfg.cluster_spread > 0.0, "cluster_spread",
               "must be positive, got " + printed(cfg.cluster_spread));
  config_check(cfg.hidden_width >= 1, "hidden_width",
               "must be at least 1, got " + std::to_string(cfg.hidden_width));
  const long long public_size =
      static_cast<long long>(cfg.public_classes) * cfg.public_per_class;
  config_check(cfg.public_subset_size <= public_size, "public_subset_size",
               "exceeds the public dataset size of " + std::to_string(public_size));
}

std::vector<int> default_depth_assignment(int clients) {
  if (clients < 1) {
    throw ConfigError("clients: must be at least 1, got " + std::to_string(clients));
  }
  // Table-style tiering at depths 1..5 in proportions 6:4:4:4:2.
  const std::vector<double> proportions{6.0, 4.0, 4.0, 4.0, 2.0};
  const std::vector<std::size_t> tier_sizes =
      largest_remainder_allocation(proportions, static_cast<std::size_t>(clients));
  std::vector<int> depths;
  depths.reserve(static_cast<std::size_t>(clients));
  for (std::size_t tier = 0; tier < tier_sizes.size(); ++tier) {
    for (std::size_t n = 0; n < tier_sizes[tier]; ++n) {
      depths.push_back(static_cast<int>(tier) + 1);
    }
  }
  return depths;
}

namespace {

ModelArch arch_for_depth(const ExperimentConfig& cfg, int depth) {
  ModelArch arch;
  arch.input_dim = cfg.input_dim;
  arch.hidden_layers = depth;
  arch.hidden_width = cfg.hidden_width;
  arch.output_dim = cfg.joint_head();
  return arch;
}

// The global model draws weights from a slot no client id can collide with.
constexpr std::uint64_t kGlobalWeightSlot = 1;

}  // namespace

std::vector<ClientState> build_hetero_clients(const ExperimentConfig& cfg,
                                              const std::vector<int>& depth_assignment) {
  if (depth_assignment.size() != static_cast<std::size_t>(cfg.clients)) {
    std::ostringstream msg;
    msg << "depth assignment covers " << depth_assignment.size() << " clients, config declares "
        << cfg.clients;
    throw ConfigError(msg.str());
  }
  std::vector<ClientState> clients;
  clients.reserve(depth_assignment.size());
  for (std::size_t k = 0; k < depth_assignment.size(); ++k) {
    const int depth = depth_assignment[k];
    if (depth < kDepthFamilyMin || depth > kDepthFamilyMax) {
      std::ostringstream msg;
      msg << "depth " << depth << " for client " << k << " is outside the family ["
          << kDepthFamilyMin << ", " << kDepthFamilyMax << "]";
      throw ConfigError(msg.str());
    }
    ClientState client;
    client.client_id = static_cast<int>(k);
    client.model = init_params(arch_for_depth(cfg, depth),
                               derive_seed(cfg.seed, SeedStream::kWeights, k, 0));
    clients.push_back(std::move(client));
  }
  return clients;
}

ModelParams init_global_model(const ExperimentConfig& cfg) {
  return init_params(arch_for_depth(cfg, kGlobalDepth),
                     derive_seed(cfg.seed, SeedStream::kWeights, 0, kGlobalWeightSlot));
}

void attach_shards(std::vector<ClientState>& clients, const std::vector<ClientShard>& shards) {
  if (shards.size() != clients.size()) {
    std::ostringstream msg;
    msg << shards.size() << " shards for " << clients.size() << " clients";
    throw ConfigError(msg.str());
  }
  for (ClientState& client : clients) {
    const auto it = std::find_if(shards.begin(), shards.end(), [&](const ClientShard& s) {
      return s.client_id == client.client_id;
    });
    if (it == shards.end()) {
      throw ConfigError("no shard for client " + std::to_string(client.client_id));
    }
    client.shard = *it;
  }
}

namespace {

struct ShardData {
  Tensor inputs;
  std::vector<int> labels;
};

ShardData shard_data(const LabeledDataset& local_train, const ClientShard& shard) {
  ShardData data;
  data.inputs = gather_rows(local_train.inputs, shard.indices);
  data.labels = gather_labels(local_train.labels, shard.indices);
  return data;
}

}  // namespace

std::vector<double> initialize_clients(std::vector<ClientState>& clients,
                                       const LabeledDataset& public_data,
                                       const LabeledDataset& local_train,
                                       const LabeledDataset& local_test,
                                       const ExperimentConfig& cfg) {
  const bool with_public_phase = cfg.method != Method::kFedavg;
  std::vector<double> initial_accs;
  initial_accs.reserve(clients.size());
  for (ClientState& client : clients) {
    const std::uint64_t id = static_cast<std::uint64_t>(client.client_id);
    if (with_public_phase) {
      TrainConfig warmup;
      warmup.learning_rate = cfg.learning_rate;
      warmup.batch_size = cfg.kd_batch_size;
      warmup.epochs = cfg.init_epochs;
      warmup.rng_seed = derive_seed(cfg.seed, SeedStream::kInitPublic, id);
      client.model = train(client.model, public_data.inputs,
                           TaskCrossEntropy{public_data.labels}, warmup);
    }
    if (!client.shard.indices.empty()) {
      const ShardData data = shard_data(local_train, client.shard);
      TrainConfig local;
      local.learning_rate = cfg.learning_rate;
      local.batch_size = cfg.local_batch_size;
      local.epochs = cfg.init_epochs;
      local.rng_seed = derive_seed(cfg.seed, SeedStream::kInitLocal, id);
      client.model = train(client.model, data.inputs, TaskCrossEntropy{data.labels}, local);
    }
    initial_accs.push_back(evaluate_accuracy(client.model, local_test, cfg.local_slice()));
  }
  return initial_accs;
}

Tensor aggregate_logits(std::vector<std::pair<int, Tensor>> client_logits) {
  if (client_logits.empty()) {
    throw ProtocolError("aggregate_logits: no client logits");
  }
  // Canonical order: ascending client id, whatever order they arrived in.
  std::sort(client_logits.begin(), client_logits.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < client_logits.size(); ++i) {
    if (client_logits[i].first == client_logits[i - 1].first) {
      throw ProtocolError("aggregate_logits: duplicate client id " +
                          std::to_string(client_logits[i].first));
    }
  }
  Tensor sum = client_logits.front().second;
  for (std::size_t i = 1; i < client_logits.size(); ++i) {
    const Tensor& z = client_logits[i].second;
    require_same_shape(sum, z, "aggregate_logits");
    for (std::size_t j = 0; j < sum.size(); ++j) {
      sum.data()[j] += z.data()[j];
    }
  }
  const double n = static_cast<double>(client_logits.size());
  for (std::size_t j = 0; j < sum.size(); ++j) {
    sum.data()[j] /= n;
  }
  return sum;
}

Tensor collect_and_aggregate_logits(const std::vector<ClientState>& clients,
                                    const LabeledDataset& public_subset) {
  std::vector<std::pair<int, Tensor>> logits;
  logits.reserve(clients.size());
  for (const ClientState& client : clients) {
    logits.emplace_back(client.client_id, forward_logits(client.model, public_subset.inputs));
  }
  return aggregate_logits(std::move(logits));
}

namespace {

TrainConfig kd_train_config(const ExperimentConfig& cfg, int round_index, std::uint64_t entity) {
  TrainConfig tc;
  tc.learning_rate = cfg.learning_rate;
  tc.batch_size = cfg.kd_batch_size;
  tc.epochs = cfg.kd_epochs;
  tc.rng_seed =
      derive_seed(cfg.seed, SeedStream::kKd, static_cast<std::uint64_t>(round_index), entity);
  return tc;
}

}  // namespace

KdOutcome global_update_round(ServerState& server, std::vector<ClientState>& clients,
                              const ExperimentConfig& cfg, const LabeledDataset& local_test,
                              int round_index) {
  if (!server.aggregated_logits.has_value()) {
    throw ProtocolError("global update before logit aggregation");
  }
  if (server.aggregated_logits->rows() != server.public_subset.size()) {
    std::ostringstream msg;
    msg << "aggregated logits cover " << server.aggregated_logits->rows()
        << " rows, public subset has " << server.public_subset.size();
    throw ProtocolError(msg.str());
  }

  const LossSpec kd_loss = L1TowardTarget{*server.aggregated_logits};
  // Entity slot 0 is the global model; clients occupy id+1.
  server.global_model = train(server.global_model, server.public_subset.inputs, kd_loss,
                              kd_train_config(cfg, round_index, 0));

  KdOutcome outcome;
  outcome.distilled_accs.reserve(clients.size());
  for (ClientState& client : clients) {
    const std::uint64_t entity = static_cast<std::uint64_t>(client.client_id) + 1;
    client.model = train(client.model, server.public_subset.inputs, kd_loss,
                         kd_train_config(cfg, round_index, entity));
    if (cfg.lwof_enabled()) {
      client.lwof_snapshot = client.model;
    }
    client.global_updates_seen += 1;
    outcome.distilled_accs.push_back(
        evaluate_accuracy(client.model, local_test, cfg.local_slice()));
  }
  outcome.global_acc = evaluate_accuracy(server.global_model, local_test, cfg.local_slice());
  return outcome;
}

std::vector<double> local_update_round(std::vector<ClientState>& clients,
                                       const ExperimentConfig& cfg,
                                       const LabeledDataset& local_train,
                                       const LabeledDataset& local_test, bool lwof,
                                       int round_index) {
  std::vector<double> accs;
  accs.reserve(clients.size());
  for (ClientState& client : clients) {
    if (client.global_updates_seen == 0) {
      throw ProtocolError("local update for client " + std::to_string(client.client_id) +
                          " before any global update");
    }
    if (lwof && !client.lwof_snapshot.has_value()) {
      throw ProtocolError("LwoF local update for client " + std::to_string(client.client_id) +
                          " without a snapshot");
    }
    if (!client.shard.indices.empty()) {
      const ShardData data = shard_data(local_train, client.shard);
      LossSpec loss = TaskCrossEntropy{data.labels};
      if (lwof) {
        // Snapshot logits frozen once for the whole call (Eq. 3's z').
        loss = LocalObjective{data.labels, forward_logits(*client.lwof_snapshot, data.inputs),
                              cfg.rho, cfg.beta};
      }
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.local_batch_size;
      tc.epochs = cfg.local_epochs;
      tc.rng_seed = derive_seed(cfg.seed, SeedStream::kLocal,
                                static_cast<std::uint64_t>(round_index),
                                static_cast<std::uint64_t>(client.client_id));
      client.model = train(client.model, data.inputs, loss, tc);
    }
    accs.push_back(evaluate_accuracy(client.model, local_test, cfg.local_slice()));
  }
  return accs;
}

ModelParams weighted_average_params(const std::vector<const ModelParams*>& models,
                                    const std::vector<double>& weights) {
  if (models.empty() || models.size() != weights.size()) {
    std::ostringstream msg;
    msg << weights.size() << " weights for " << models.size() << " models";
    throw ParameterError(msg.str());
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw ParameterError("weights must be non-negative, got " + printed(w));
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw ParameterError("weights sum to zero");
  }

  ModelParams mean = zero_params(models.front()->arch);
  for (std::size_t m = 0; m < models.size(); ++m) {
    const ModelParams& p = *models[m];
    if (p.layers.size() != mean.layers.size()) {
      throw DimensionError("models disagree on layer count");
    }
    const double w = weights[m] / total;
    for (std::size_t li = 0; li < mean.layers.size(); ++li) {
      DenseLayer& acc = mean.layers[li];
      const DenseLayer& src = p.layers[li];
      require_same_shape(acc.weight, src.weight, "weighted_average_params");
      for (std::size_t i = 0; i < acc.weight.size(); ++i) {
        acc.weight.data()[i] += w * src.weight.data()[i];
      }
      for (std::size_t i = 0; i < acc.bias.size(); ++i) {
        acc.bias[i] += w * src.bias[i];
      }
    }
  }
  return mean;
}

std::size_t participant_count(double participation, std::size_t clients) {
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw ParameterError("participation must lie in (0, 1], got " + printed(participation));
  }
  if (clients == 0) {
    throw ParameterError("no clients to select from");
  }
  // Guard against products like 0.4*20 landing a hair above the integer.
  const double raw = std::ceil(participation * static_cast<double>(clients) - 1e-9);
  const std::size_t n = static_cast<std::size_t>(raw);
  return std::clamp<std::size_t>(n, 1, clients);
}

FedavgOutcome fedavg_round(ServerState& server, std::vector<ClientState>& clients,
                           const ExperimentConfig& cfg, const LabeledDataset& local_train,
                           const LabeledDataset& local_test, int round_index) {
  for (const ClientState& client : clients) {
    if (!(client.model.arch == server.global_model.arch)) {
      throw ConfigError("fedavg requires homogeneous models; client " +
                        std::to_string(client.client_id) + " differs from the global arch");
    }
  }

  const std::size_t n = participant_count(cfg.participation, clients.size());
  std::vector<std::size_t> picks;
  if (cfg.dropout_policy == DropoutPolicy::kRandomPerRound) {
    Rng rng(derive_seed(cfg.seed, SeedStream::kDropout, static_cast<std::uint64_t>(round_index)));
    picks = rng.sample_without_replacement(clients.size(), n);
  } else {
    // Fixed dropout sheds the lowest-capacity tier: the lowest ids stay out.
    picks.resize(n);
    const std::size_t first = clients.size() - n;
    for (std::size_t i = 0; i < n; ++i) {
      picks[i] = first + i;
    }
  }

  FedavgOutcome outcome;
  std::vector<const ModelParams*> trained;
  std::vector<double> weights;
  for (std::size_t pick : picks) {
    ClientState& client = clients[pick];
    outcome.participant_ids.push_back(client.client_id);
    client.model = server.global_model;
    if (!client.shard.indices.empty()) {
      const ShardData data = shard_data(local_train, client.shard);
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.batch_size = cfg.local_batch_size;
      tc.epochs = cfg.local_epochs;
      tc.rng_seed = derive_seed(cfg.seed, SeedStream::kLocal,
                                static_cast<std::uint64_t>(round_index),
                                static_cast<std::uint64_t>(client.client_id));
      client.model = train(client.model, data.inputs, TaskCrossEntropy{data.labels}, tc);
    }
    trained.push_back(&client.model);
    weights.push_back(static_cast<double>(client.shard.indices.size()));
  }

  double total_weight = 0.0;
  for (double w : weights) {
    total_weight += w;
  }
  if (total_weight > 0.0) {
    server.global_model = weighted_average_params(trained, weights);
  }
  outcome.global_acc = evaluate_accuracy(server.global_model, local_test, cfg.local_slice());
  return outcome;
}

Experiment prepare_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  SyntheticSpec data_spec;
  data_spec.public_classes = cfg.public_classes;
  data_spec.local_classes = cfg.local_classes;
  data_spec.train_per_class = cfg.train_per_class;
  data_spec.test_per_class = cfg.test_per_class;
  data_spec.public_per_class = cfg.public_per_class;
  data_spec.input_dim = cfg.input_dim;
  data_spec.cluster_spread = cfg.cluster_spread;
  data_spec.rng_seed = cfg.seed;
  SyntheticData data = generate_synthetic(data_spec);

  PartitionSpec part_spec;
  part_spec.alpha = cfg.alpha;
  part_spec.client_count = cfg.clients;
  part_spec.rng_seed = cfg.seed;

  Experiment exp;
  exp.cfg = cfg;
  exp.shards = partition_dirichlet(data.local_train, part_spec);
  exp.public_data = std::move(data.public_data);
  exp.local_train = std::move(data.local_train);
  exp.local_test = std::move(data.local_test);
  // FedAvg distributes one model size to everyone: the global arch.
  const std::vector<int> depths =
      cfg.method == Method::kFedavg ? std::vector<int>(static_cast<std::size_t>(cfg.clients),
                                                       kGlobalDepth)
                                    : default_depth_assignment(cfg.clients);
  exp.clients = build_hetero_clients(cfg, depths);
  attach_shards(exp.clients, exp.shards);
  exp.server.global_model = init_global_model(cfg);
  return exp;
}

namespace {

double mean_of(const std::vector<double>& values) {
  double total = 0.0;
  for (double v : values) {
    total += v;
  }
  return values.empty() ? 0.0 : total / static_cast<double>(values.size());
}

std::vector<int> all_client_ids(const std::vector<ClientState>& clients) {
  std::vector<int> ids;
  ids.reserve(clients.size());
  for (const ClientState& client : clients) {
    ids.push_back(client.client_id);
  }
  return ids;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Experiment exp = prepare_experiment(cfg);
  ExperimentResult result;
  result.initial_accs =
      initialize_clients(exp.clients, exp.public_data, exp.local_train, exp.local_test, exp.cfg);

  // FedAvg broadcasts the seeded server weights as-is: averaging the warm
  // starts would mix independently initialized networks, which cancels their
  // functions. The per-client warm start only feeds the Initial column.

  for (int round = 0; round < cfg.rounds; ++round) {
    try {
      RoundRecord record;
      record.round_index = round;
      if (cfg.method == Method::kFedavg) {
        const FedavgOutcome outcome =
            fedavg_round(exp.server, exp.clients, cfg, exp.local_train, exp.local_test, round);
        record.global_acc = outcome.global_acc;
        record.distilled_acc_mean = outcome.global_acc;
        record.personalised_acc_mean = outcome.global_acc;
        record.gap = 0.0;
        record.participating_client_ids = outcome.participant_ids;
      } else {
        exp.server.public_subset = sample_public_subset(
            exp.public_data, static_cast<std::size_t>(cfg.public_subset_size), round, cfg.seed);
        exp.server.aggregated_logits =
            collect_and_aggregate_logits(exp.clients, exp.server.public_subset);
        const KdOutcome kd =
            global_update_round(exp.server, exp.clients, cfg, exp.local_test, round);
        const std::vector<double> personalised = local_update_round(
            exp.clients, cfg, exp.local_train, exp.local_test, cfg.lwof_enabled(), round);
        record.global_acc = kd.global_acc;
        record.distilled_accs = kd.distilled_accs;
        record.personalised_accs = personalised;
        record.distilled_acc_mean = mean_of(kd.distilled_accs);
        record.personalised_acc_mean = mean_of(personalised);
        record.gap = record.distilled_acc_mean - record.personalised_acc_mean;
        record.participating_client_ids = all_client_ids(exp.clients);
      }
      result.records.push_back(std::move(record));
    } catch (const Error& e) {
      throw ProtocolError("round " + std::to_string(round) + ": " + e.what());
    }
  }

  result.report = summarize(result.records, result.initial_accs);
  return result;
}

}  // namespace fedkd
