#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "fedkd/config.hpp"

namespace fedkd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs the experiment and writes rounds.csv, summary.json and manifest.json
/// into outdir.
void cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& outdir);

/// Writes partition.csv (per-client per-class counts) into outdir.
void cmd_partition_report(const ExperimentConfig& cfg, const std::filesystem::path& outdir);

/// Emits per-metric deltas (B minus A) between two completed run directories.
/// Config differences beyond the method axis warn but still emit.
void cmd_compare(const std::filesystem::path& run_a, const std::filesystem::path& run_b,
                 std::ostream& out, std::ostream& warn,
                 const std::optional<std::filesystem::path>& out_file = std::nullopt);

}  // namespace fedkd
