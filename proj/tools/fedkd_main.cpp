#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fedkd/cli.hpp"
#include "fedkd/errors.hpp"
#include "fedkd/reporting.hpp"
#include "fedkd/version.hpp"

namespace {

struct ConfigSources {
  std::string config_path;
  std::string manifest_path;
  std::map<std::string, std::string> overrides;
};

// --config / --from-manifest plus one string flag per config field.
void add_config_options(CLI::App* cmd, ConfigSources& sources) {
  auto* config_opt =
      cmd->add_option("--config", sources.config_path, "Flat key = value config file");
  auto* manifest_opt = cmd->add_option("--from-manifest", sources.manifest_path,
                                       "Rerun from a manifest.json config snapshot");
  config_opt->excludes(manifest_opt);
  for (const fedkd::ConfigField& field : fedkd::config_fields()) {
    cmd->add_option_function<std::string>(
        "--" + field.key,
        [&sources, key = field.key](const std::string& value) { sources.overrides[key] = value; },
        "Override config field " + field.key);
  }
}

fedkd::ExperimentConfig resolve_config(const ConfigSources& sources) {
  fedkd::ExperimentConfig base;
  if (!sources.manifest_path.empty()) {
    base = fedkd::config_from_manifest_file(sources.manifest_path);
  } else if (!sources.config_path.empty()) {
    base = fedkd::parse_config_file(sources.config_path);
  }
  return fedkd::config_from_map(sources.overrides, base);
}

std::string default_outdir() {
  const char* env = std::getenv("FEDKD_OUT");
  return env != nullptr && *env != '\0' ? env : "out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale federated knowledge-distillation simulator"};
  app.set_version_flag("--version", fedkd::kVersion);
  app.require_subcommand(1);

  ConfigSources run_sources;
  std::string run_out = default_outdir();
  CLI::App* run = app.add_subcommand("run", "Run an experiment and write results");
  add_config_options(run, run_sources);
  run->add_option("--out", run_out, "Output directory (env FEDKD_OUT)");

  ConfigSources part_sources;
  std::string part_out = default_outdir();
  CLI::App* part =
      app.add_subcommand("partition-report", "Write the per-client per-class partition counts");
  add_config_options(part, part_sources);
  part->add_option("--out", part_out, "Output directory (env FEDKD_OUT)");

  std::string compare_a;
  std::string compare_b;
  std::string compare_out;
  CLI::App* compare = app.add_subcommand("compare", "Delta summary between two run directories");
  compare->add_option("run_a", compare_a, "Baseline run directory")->required();
  compare->add_option("run_b", compare_b, "Comparison run directory")->required();
  compare->add_option("--out-file", compare_out, "Also write the delta CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fedkd::kExitOk : fedkd::kExitConfigError;
  }

  try {
    if (run->parsed()) {
      fedkd::cmd_run(resolve_config(run_sources), run_out);
    } else if (part->parsed()) {
      fedkd::cmd_partition_report(resolve_config(part_sources), part_out);
    } else if (compare->parsed()) {
      std::optional<std::filesystem::path> out_file;
      if (!compare_out.empty()) {
        out_file = compare_out;
      }
      fedkd::cmd_compare(compare_a, compare_b, std::cout, std::cerr, out_file);
    }
  } catch (const fedkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fedkd::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fedkd::kExitRuntimeError;
  }
  return fedkd::kExitOk;
}
