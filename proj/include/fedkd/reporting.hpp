#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fedkd/config.hpp"
#include "fedkd/federation.hpp"

namespace fedkd {

// Accuracies as percent with two decimals (storage stays full precision).
std::string format_percent(double fraction);

// Columns: round,global_acc,distilled_mean,personalised_mean,gap. ASCII, '.'
// decimals, '\n' line endings.
std::string rounds_csv(const ExperimentResult& result);

nlohmann::json record_to_json(const RoundRecord& r);
nlohmann::json summary_to_json(const ExperimentResult& result);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);

// Reproducibility trail: artifact version, timestamps, full config snapshot,
// output paths. Rerunning from a manifest reproduces the round stream.
nlohmann::json make_manifest(const ExperimentConfig& cfg, const std::string& started_utc,
                             const std::string& finished_utc,
                             const std::filesystem::path& outdir);

ExperimentConfig config_from_manifest_file(const std::filesystem::path& path);

std::string utc_timestamp();

void write_text_file(const std::filesystem::path& path, const std::string& contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace fedkd
