#include "fedkd/cli.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

#include "fedkd/errors.hpp"
#include "fedkd/reporting.hpp"

namespace fedkd {

void cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  validate_config(cfg);
  const std::string started = utc_timestamp();
  const ExperimentResult result = run_experiment(cfg);
  const std::string finished = utc_timestamp();

  write_text_file(outdir / "rounds.csv", rounds_csv(result));
  write_text_file(outdir / "summary.json", summary_to_json(result).dump(2) + "\n");
  write_text_file(outdir / "manifest.json",
                  make_manifest(cfg, started, finished, outdir).dump(2) + "\n");
}

void cmd_partition_report(const ExperimentConfig& cfg, const std::filesystem::path& outdir) {
  const Experiment exp = prepare_experiment(cfg);
  write_text_file(outdir / "partition.csv", partition_report_csv(exp.shards));
}

namespace {

struct MetricRow {
  const char* name;
  std::optional<double> a;
  std::optional<double> b;
};

std::optional<double> metric_from(const nlohmann::json& summary, const char* key) {
  if (!summary.contains(key) || summary.at(key).is_null()) {
    return std::nullopt;
  }
  return summary.at(key).get<double>();
}

std::string signed_percent(double fraction) {
  const std::string body = format_percent(std::abs(fraction));
  if (fraction > 0.0) {
    return "+" + body;
  }
  if (fraction < 0.0) {
    return "-" + body;
  }
  return body;
}

}  // namespace

void cmd_compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                 std::ostream& out, std::ostream& warn,
                 const std::optional<std::filesystem::path>& out_file) {
  const ExperimentConfig cfg_a = config_from_manifest_file(run_a / "manifest.json");
  const ExperimentConfig cfg_b = config_from_manifest_file(run_b / "manifest.json");

  std::vector<std::string> differing;
  for (const ConfigField& f : config_fields()) {
    if (f.key == "method") {
      continue;
    }
    if (f.get(cfg_a) != f.get(cfg_b)) {
      differing.push_back(f.key);
    }
  }
  if (!differing.empty()) {
    std::ostringstream msg;
    msg << "warning: runs differ beyond the method axis:";
    for (const std::string& key : differing) {
      msg << ' ' << key;
    }
    warn << msg.str() << '\n';
  }

  nlohmann::json summary_a;
  nlohmann::json summary_b;
  try {
    summary_a = nlohmann::json::parse(read_text_file(run_a / "summary.json"));
    summary_b = nlohmann::json::parse(read_text_file(run_b / "summary.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed summary: ") + e.what());
  }

  const MetricRow rows[] = {
      {"initial_mean", metric_from(summary_a, "initial_mean"),
       metric_from(summary_b, "initial_mean")},
      {"global_final", metric_from(summary_a, "global_final"),
       metric_from(summary_b, "global_final")},
      {"distilled_final_mean", metric_from(summary_a, "distilled_final_mean"),
       metric_from(summary_b, "distilled_final_mean")},
      {"personalised_final_mean", metric_from(summary_a, "personalised_final_mean"),
       metric_from(summary_b, "personalised_final_mean")},
      {"gap_final", metric_from(summary_a, "gap_final"), metric_from(summary_b, "gap_final")},
  };

  std::ostringstream csv;
  csv << "metric,run_a,run_b,delta,direction\n";
  for (const MetricRow& row : rows) {
    if (!row.a.has_value() || !row.b.has_value()) {
      warn << "warning: metric " << row.name << " missing from "
           << (!row.a.has_value() ? run_a : run_b).generic_string() << '\n';
      continue;
    }
    const double delta = *row.b - *row.a;
    const char* direction = delta > 0.0 ? "up" : (delta < 0.0 ? "down" : "flat");
    csv << row.name << ',' << format_percent(*row.a) << ',' << format_percent(*row.b) << ','
        << signed_percent(delta) << ',' << direction << '\n';
  }

  out << csv.str();
  if (out_file.has_value()) {
    write_text_file(*out_file, csv.str());
  }
}

}  // namespace fedkd
