#include "fedkd/reporting.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "fedkd/errors.hpp"
#include "fedkd/version.hpp"

namespace fedkd {

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return buf;
}

std::string rounds_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "round,global_acc,distilled_mean,personalised_mean,gap\n";
  for (const RoundRecord& r : result.records) {
    out << r.round_index << ',' << format_percent(r.global_acc) << ','
        << format_percent(r.distilled_acc_mean) << ',' << format_percent(r.personalised_acc_mean)
        << ',' << format_percent(r.gap) << '\n';
  }
  return out.str();
}

nlohmann::json record_to_json(const RoundRecord& r) {
  return nlohmann::json{{"round", r.round_index},
                        {"global_acc", r.global_acc},
                        {"distilled_acc_mean", r.distilled_acc_mean},
                        {"personalised_acc_mean", r.personalised_acc_mean},
                        {"gap", r.gap},
                        {"distilled_accs", r.distilled_accs},
                        {"personalised_accs", r.personalised_accs},
                        {"participating_client_ids", r.participating_client_ids}};
}

nlohmann::json summary_to_json(const ExperimentResult& result) {
  const EvalReport& rep = result.report;
  nlohmann::json j;
  j["initial_mean"] = rep.initial_mean;
  j["initial_accs"] = result.initial_accs;
  j["global_final"] = rep.global_final.has_value() ? nlohmann::json(*rep.global_final)
                                                   : nlohmann::json(nullptr);
  j["distilled_final_mean"] = rep.distilled_final_mean.has_value()
                                  ? nlohmann::json(*rep.distilled_final_mean)
                                  : nlohmann::json(nullptr);
  j["personalised_final_mean"] = rep.personalised_final_mean.has_value()
                                     ? nlohmann::json(*rep.personalised_final_mean)
                                     : nlohmann::json(nullptr);
  j["gap_final"] =
      rep.gap_final.has_value() ? nlohmann::json(*rep.gap_final) : nlohmann::json(nullptr);
  nlohmann::json rounds = nlohmann::json::array();
  for (const RoundRecord& r : rep.per_round) {
    rounds.push_back(record_to_json(r));
  }
  j["rounds"] = rounds;
  return j;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const ConfigField& f : config_fields()) {
    j[f.key] = f.get(cfg);
  }
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("config snapshot must be a JSON object");
  }
  std::map<std::string, std::string> kv;
  for (const auto& [key, value] : j.items()) {
    kv[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return config_from_map(kv);
}

nlohmann::json make_manifest(const ExperimentConfig& cfg, const std::string& started_utc,
                             const std::string& finished_utc,
                             const std::filesystem::path& outdir) {
  nlohmann::json j;
  j["artifact"] = "fedkd";
  j["version"] = kVersion;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["config"] = config_to_json(cfg);
  j["outputs"] = {{"rounds_csv", (outdir / "rounds.csv").generic_string()},
                  {"summary_json", (outdir / "summary.json").generic_string()},
                  {"manifest_json", (outdir / "manifest.json").generic_string()}};
  return j;
}

ExperimentConfig config_from_manifest_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + path.generic_string() + ": " + e.what());
  }
  if (!j.contains("config")) {
    throw ConfigError("manifest " + path.generic_string() + " has no config snapshot");
  }
  return config_from_json(j.at("config"));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.generic_string());
  }
  out << contents;
  if (!out) {
    throw DataError("failed writing " + path.generic_string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot read " + path.generic_string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace fedkd
