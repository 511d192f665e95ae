#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "fedkd/cli.hpp"
#include "fedkd/config.hpp"
#include "fedkd/dataset.hpp"
#include "fedkd/errors.hpp"
#include "fedkd/federation.hpp"
#include "fedkd/losses.hpp"
#include "fedkd/metrics.hpp"
#include "fedkd/partition.hpp"
#include "fedkd/reporting.hpp"
#include "fedkd/version.hpp"

namespace py = pybind11;

namespace {

using Rows = std::vector<std::vector<double>>;

fedkd::Tensor tensor_from_rows(const Rows& rows) {
  if (rows.empty()) {
    throw fedkd::DimensionError("expected at least one row");
  }
  fedkd::Tensor t = fedkd::Tensor::matrix(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      throw fedkd::DimensionError("ragged rows: row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " entries, row 0 has " +
                                  std::to_string(rows.front().size()));
    }
    std::copy(rows[r].begin(), rows[r].end(), t.row(r).begin());
  }
  return t;
}

Rows rows_from_tensor(const fedkd::Tensor& t) {
  Rows rows(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    auto src = t.row(r);
    rows[r].assign(src.begin(), src.end());
  }
  return rows;
}

fedkd::ExperimentConfig config_from_overrides(const std::map<std::string, std::string>& kv) {
  return fedkd::config_from_map(kv);
}

// Thin forward-only model handle for poking at the nn substrate from python.
struct PyModel {
  fedkd::ModelParams params;

  PyModel(int input_dim, int hidden_layers, int hidden_width, int output_dim,
          std::uint64_t seed) {
    fedkd::ModelArch arch{input_dim, hidden_layers, hidden_width, output_dim};
    params = fedkd::init_params(arch, seed);
  }

  Rows forward(const Rows& batch) const {
    return rows_from_tensor(fedkd::forward_logits(params, tensor_from_rows(batch)));
  }

  std::size_t parameter_count() const { return fedkd::parameter_count(params.arch); }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Federated knowledge-distillation simulator core";
  m.attr("__version__") = fedkd::kVersion;

  // Base first: pybind11 tries translators newest-first, so the derived
  // ConfigError must be registered after Error to win the match.
  py::register_exception<fedkd::Error>(m, "FedkdError", PyExc_RuntimeError);
  py::register_exception<fedkd::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<PyModel>(m, "Model")
      .def(py::init<int, int, int, int, std::uint64_t>(), py::arg("input_dim"),
           py::arg("hidden_layers"), py::arg("hidden_width"), py::arg("output_dim"),
           py::arg("seed"))
      .def("forward", &PyModel::forward, py::arg("batch"))
      .def_property_readonly("parameter_count", &PyModel::parameter_count);

  m.def(
      "softmax_temperature",
      [](const Rows& logits, double rho) {
        return rows_from_tensor(fedkd::softmax_temperature(tensor_from_rows(logits), rho));
      },
      py::arg("logits"), py::arg("rho") = 1.0);

  m.def(
      "loss_l1_logits",
      [](const Rows& target, const Rows& own) {
        return fedkd::loss_l1_logits(tensor_from_rows(target), tensor_from_rows(own));
      },
      py::arg("target"), py::arg("own"));

  m.def(
      "loss_task_ce",
      [](const Rows& logits, const std::vector<int>& labels) {
        return fedkd::loss_task_ce(tensor_from_rows(logits), labels);
      },
      py::arg("logits"), py::arg("labels"));

  m.def(
      "loss_lwof",
      [](const Rows& current, const Rows& snapshot, double rho) {
        return fedkd::loss_lwof(tensor_from_rows(current), tensor_from_rows(snapshot), rho);
      },
      py::arg("current_logits"), py::arg("snapshot_logits"), py::arg("rho") = 2.0);

  m.def(
      "loss_local_combined",
      [](const Rows& logits, const std::vector<int>& labels, const Rows& snapshot, double rho,
         double beta) {
        return fedkd::loss_local_combined(tensor_from_rows(logits), labels,
                                          tensor_from_rows(snapshot), rho, beta);
      },
      py::arg("logits"), py::arg("labels"), py::arg("snapshot_logits"), py::arg("rho") = 2.0,
      py::arg("beta") = 1.0);

  m.def("default_config", []() {
    std::map<std::string, std::string> kv;
    const fedkd::ExperimentConfig cfg;
    for (const fedkd::ConfigField& f : fedkd::config_fields()) {
      kv[f.key] = f.get(cfg);
    }
    return kv;
  });

  m.def(
      "partition_counts",
      [](const std::map<std::string, std::string>& overrides) {
        const fedkd::Experiment exp = fedkd::prepare_experiment(config_from_overrides(overrides));
        std::vector<std::vector<std::size_t>> counts;
        counts.reserve(exp.shards.size());
        for (const fedkd::ClientShard& shard : exp.shards) {
          counts.push_back(shard.per_class_counts);
        }
        return counts;
      },
      py::arg("overrides") = std::map<std::string, std::string>{},
      "Per-client per-class example counts for the configured partition");

  m.def(
      "run_experiment_json",
      [](const std::map<std::string, std::string>& overrides) {
        const fedkd::ExperimentResult result =
            fedkd::run_experiment(config_from_overrides(overrides));
        return fedkd::summary_to_json(result).dump();
      },
      py::arg("overrides") = std::map<std::string, std::string>{},
      py::call_guard<py::gil_scoped_release>(),
      "Run the configured experiment; returns the summary as a JSON string");

  m.def(
      "serialize_config",
      [](const std::map<std::string, std::string>& overrides) {
        return fedkd::serialize_config(config_from_overrides(overrides));
      },
      py::arg("overrides") = std::map<std::string, std::string>{});
}
