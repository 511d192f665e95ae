#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cctype>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "fedkd/config.hpp"
#include "fedkd/errors.hpp"
#include "fedkd/reporting.hpp"
#include "fedkd/version.hpp"

using namespace fedkd;

namespace {

ExperimentConfig nondefault_config() {
  ExperimentConfig cfg;
  cfg.method = Method::kFedmdGlobalLwof;
  cfg.rounds = 7;
  cfg.clients = 5;
  cfg.alpha = 0.25;
  cfg.participation = 0.6;
  cfg.dropout_policy = DropoutPolicy::kFixedLowestCapacity;
  cfg.beta = 0.5;
  cfg.rho = 1.5;
  cfg.learning_rate = 0.05;
  cfg.public_subset_size = 120;
  cfg.public_classes = 6;
  cfg.local_classes = 4;
  cfg.input_dim = 8;
  cfg.train_per_class = 30;
  cfg.test_per_class = 10;
  cfg.public_per_class = 25;
  cfg.cluster_spread = 0.7;
  cfg.hidden_width = 12;
  cfg.seed = 123456789012345ULL;
  return cfg;
}

ExperimentResult fake_result() {
  ExperimentResult result;
  result.initial_accs = {0.25, 0.75};

  RoundRecord r0;
  r0.round_index = 0;
  r0.global_acc = 0.5;
  r0.distilled_acc_mean = 0.25;
  r0.personalised_acc_mean = 0.125;
  r0.gap = 0.125;
  r0.distilled_accs = {0.25, 0.25};
  r0.personalised_accs = {0.0625, 0.1875};
  r0.participating_client_ids = {0, 1};

  RoundRecord r1;
  r1.round_index = 1;
  r1.global_acc = 1.0;
  r1.distilled_acc_mean = 0.375;
  r1.personalised_acc_mean = 0.5;
  r1.gap = -0.125;
  r1.distilled_accs = {0.375, 0.375};
  r1.personalised_accs = {0.5, 0.5};
  r1.participating_client_ids = {0, 1};

  result.records = {r0, r1};
  result.report = summarize(result.records, result.initial_accs);
  return result;
}

}  // namespace

TEST_CASE("method and dropout policy strings round trip") {
  for (Method m : {Method::kFedmdGlobal, Method::kFedmdGlobalLwof, Method::kFedavg}) {
    CHECK(method_from_string(method_to_string(m)) == m);
  }
  CHECK(method_to_string(Method::kFedmdGlobal) == "fedmd_global");
  CHECK(method_to_string(Method::kFedmdGlobalLwof) == "fedmd_global_lwof");
  CHECK(method_to_string(Method::kFedavg) == "fedavg");
  CHECK_THROWS_AS(method_from_string("fedprox"), ConfigError);

  for (DropoutPolicy p : {DropoutPolicy::kRandomPerRound, DropoutPolicy::kFixedLowestCapacity}) {
    CHECK(dropout_policy_from_string(dropout_policy_to_string(p)) == p);
  }
  CHECK(dropout_policy_to_string(DropoutPolicy::kRandomPerRound) == "random_per_round");
  CHECK_THROWS_AS(dropout_policy_from_string("bogus"), ConfigError);
}

TEST_CASE("config_fields covers every knob once, in canonical order") {
  const auto& fields = config_fields();
  REQUIRE(fields.size() == 24);
  CHECK(fields.front().key == "method");
  CHECK(fields.back().key == "seed");
  std::map<std::string, int> seen;
  for (const ConfigField& f : fields) {
    seen[f.key] += 1;
  }
  for (const auto& [key, count] : seen) {
    CHECK(count == 1);
  }
  // a getter/setter pair is an identity on the default config
  ExperimentConfig cfg = default_config();
  for (const ConfigField& f : fields) {
    const std::string v = f.get(cfg);
    f.set(cfg, v);
    CHECK(f.get(cfg) == v);
  }
  CHECK(cfg == default_config());
}

TEST_CASE("serialize_config round trips losslessly") {
  const ExperimentConfig cfg = nondefault_config();
  const std::string text = serialize_config(cfg);
  const ExperimentConfig parsed = parse_config_text(text);
  CHECK(parsed == cfg);

  // serialized form is stable: one "key = value" line per field
  std::size_t lines = 0;
  for (char c : text) {
    lines += c == '\n';
  }
  CHECK(lines == config_fields().size());
  CHECK(text.find("method = fedmd_global_lwof\n") != std::string::npos);
  CHECK(text.find("seed = 123456789012345\n") != std::string::npos);
}

TEST_CASE("parse_config_text handles comments, blanks and overrides") {
  const std::string text =
      "# experiment sweep\n"
      "\n"
      "alpha = 0.5   # heterogeneity\n"
      "  rounds=3\n"
      "method = fedavg\n";
  const ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.rounds == 3);
  CHECK(cfg.method == Method::kFedavg);
  CHECK(cfg.clients == default_config().clients);

  ExperimentConfig base = default_config();
  base.seed = 9;
  CHECK(parse_config_text("alpha = 0.5\n", base).seed == 9);
}

TEST_CASE("config parsing rejects unknown keys and bad values by name") {
  CHECK_THROWS_AS(parse_config_text("learning rate = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("alpha\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("= 3\n"), ConfigError);

  try {
    parse_config_text("frobnicate = 1\n");
    FAIL("expected unknown-key error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
  }
  try {
    parse_config_text("rounds = many\n");
    FAIL("expected bad-int error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rounds") != std::string::npos);
  }
  // parsed configs are validated
  CHECK_THROWS_AS(parse_config_text("alpha = -2\n"), ConfigError);
  CHECK_THROWS_AS(config_from_map({{"clients", "0"}}), ConfigError);
}

TEST_CASE("format_percent renders two decimals") {
  CHECK(format_percent(0.0) == "0.00");
  CHECK(format_percent(1.0) == "100.00");
  CHECK(format_percent(0.5) == "50.00");
  CHECK(format_percent(0.0625) == "6.25");
  CHECK(format_percent(0.123456) == "12.35");
  CHECK(format_percent(-0.125) == "-12.50");
}

TEST_CASE("rounds_csv emits the pinned column layout") {
  const ExperimentResult result = fake_result();
  const std::string expected =
      "round,global_acc,distilled_mean,personalised_mean,gap\n"
      "0,50.00,25.00,12.50,12.50\n"
      "1,100.00,37.50,50.00,-12.50\n";
  CHECK(rounds_csv(result) == expected);

  ExperimentResult empty;
  CHECK(rounds_csv(empty) == "round,global_acc,distilled_mean,personalised_mean,gap\n");
}

TEST_CASE("record and summary json carry full precision") {
  const ExperimentResult result = fake_result();
  const nlohmann::json rec = record_to_json(result.records[0]);
  CHECK(rec.at("round") == 0);
  CHECK(rec.at("global_acc") == 0.5);
  CHECK(rec.at("distilled_acc_mean") == 0.25);
  CHECK(rec.at("personalised_acc_mean") == 0.125);
  CHECK(rec.at("gap") == 0.125);
  CHECK(rec.at("distilled_accs").size() == 2);
  CHECK(rec.at("personalised_accs")[0] == 0.0625);
  CHECK(rec.at("participating_client_ids") == nlohmann::json({0, 1}));

  const nlohmann::json summary = summary_to_json(result);
  CHECK(summary.at("initial_mean") == 0.5);
  CHECK(summary.at("initial_accs") == nlohmann::json({0.25, 0.75}));
  CHECK(summary.at("global_final") == 1.0);
  CHECK(summary.at("distilled_final_mean") == 0.375);
  CHECK(summary.at("personalised_final_mean") == 0.5);
  CHECK(summary.at("gap_final") == -0.125);
  CHECK(summary.at("rounds").size() == 2);
  CHECK(summary.at("rounds")[1] == record_to_json(result.records[1]));

  ExperimentResult bare;
  bare.report = summarize({}, {});
  const nlohmann::json empty_summary = summary_to_json(bare);
  CHECK(empty_summary.at("global_final").is_null());
  CHECK(empty_summary.at("gap_final").is_null());
  CHECK(empty_summary.at("rounds").empty());
}

TEST_CASE("config json snapshots round trip") {
  const ExperimentConfig cfg = nondefault_config();
  const nlohmann::json j = config_to_json(cfg);
  CHECK(j.at("method") == "fedmd_global_lwof");
  CHECK(j.at("alpha") == "0.25");
  CHECK(config_from_json(j) == cfg);

  // numeric json values are accepted too
  nlohmann::json loose = config_to_json(default_config());
  loose["rounds"] = 3;
  loose["alpha"] = 0.5;
  const ExperimentConfig parsed = config_from_json(loose);
  CHECK(parsed.rounds == 3);
  CHECK(parsed.alpha == 0.5);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), ConfigError);
  nlohmann::json unknown = config_to_json(default_config());
  unknown["extra"] = "1";
  CHECK_THROWS_AS(config_from_json(unknown), ConfigError);
}

TEST_CASE("manifest records the trail and reproduces the config") {
  const ExperimentConfig cfg = nondefault_config();
  const nlohmann::json manifest =
      make_manifest(cfg, "2026-01-02T03:04:05Z", "2026-01-02T03:09:00Z", "out/run1");
  CHECK(manifest.at("artifact") == "fedkd");
  CHECK(manifest.at("version") == kVersion);
  CHECK(manifest.at("started_utc") == "2026-01-02T03:04:05Z");
  CHECK(manifest.at("finished_utc") == "2026-01-02T03:09:00Z");
  CHECK(manifest.at("outputs").at("rounds_csv") == "out/run1/rounds.csv");
  CHECK(manifest.at("outputs").at("summary_json") == "out/run1/summary.json");
  CHECK(manifest.at("outputs").at("manifest_json") == "out/run1/manifest.json");
  CHECK(config_from_json(manifest.at("config")) == cfg);

  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "fedkd_test_manifest";
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / "manifest.json";
  write_text_file(path, manifest.dump(2));
  CHECK(config_from_manifest_file(path) == cfg);

  write_text_file(dir / "broken.json", "{ nope");
  CHECK_THROWS_AS(config_from_manifest_file(dir / "broken.json"), ConfigError);
  write_text_file(dir / "empty.json", "{}");
  CHECK_THROWS_AS(config_from_manifest_file(dir / "empty.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("utc_timestamp is ISO-8601 Zulu") {
  const std::string ts = utc_timestamp();
  REQUIRE(ts.size() == 20);
  CHECK(ts[4] == '-');
  CHECK(ts[7] == '-');
  CHECK(ts[10] == 'T');
  CHECK(ts[13] == ':');
  CHECK(ts[16] == ':');
  CHECK(ts[19] == 'Z');
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9, 11, 12, 14, 15, 17, 18}) {
    CHECK(std::isdigit(static_cast<unsigned char>(ts[i])));
  }
  CHECK(ts.substr(0, 2) == "20");
}

TEST_CASE("text files round trip bytes") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "fedkd_test_text" / "nested";
  const std::filesystem::path path = dir / "file.txt";
  const std::string payload = "line one\nline two\n\ttabbed\n";
  write_text_file(path, payload);
  CHECK(read_text_file(path) == payload);
  // overwrite, not append
  write_text_file(path, "short\n");
  CHECK(read_text_file(path) == "short\n");
  CHECK_THROWS_AS(read_text_file(dir / "missing.txt"), DataError);
  std::filesystem::remove_all(dir.parent_path());
}
