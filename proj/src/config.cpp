#include "fedkd/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fedkd/errors.hpp"

namespace fedkd {

std::string method_to_string(Method m) {
  switch (m) {
    case Method::kFedmdGlobal:
      return "fedmd_global";
    case Method::kFedmdGlobalLwof:
      return "fedmd_global_lwof";
    case Method::kFedavg:
      return "fedavg";
  }
  throw ConfigError("method: unknown enum value");
}

Method method_from_string(const std::string& s) {
  if (s == "fedmd_global") {
    return Method::kFedmdGlobal;
  }
  if (s == "fedmd_global_lwof") {
    return Method::kFedmdGlobalLwof;
  }
  if (s == "fedavg") {
    return Method::kFedavg;
  }
  throw ConfigError("method: expected fedmd_global, fedmd_global_lwof or fedavg, got \"" + s +
                    "\"");
}

std::string dropout_policy_to_string(DropoutPolicy p) {
  switch (p) {
    case DropoutPolicy::kRandomPerRound:
      return "random_per_round";
    case DropoutPolicy::kFixedLowestCapacity:
      return "fixed_lowest_capacity";
  }
  throw ConfigError("dropout_policy: unknown enum value");
}

DropoutPolicy dropout_policy_from_string(const std::string& s) {
  if (s == "random_per_round") {
    return DropoutPolicy::kRandomPerRound;
  }
  if (s == "fixed_lowest_capacity") {
    return DropoutPolicy::kFixedLowestCapacity;
  }
  throw ConfigError("dropout_policy: expected random_per_round or fixed_lowest_capacity, got \"" +
                    s + "\"");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw ConfigError("cannot format a value");
  }
  return std::string(buf, ptr);
}

int parse_int(const char* key, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": not an integer: \"" + value + "\"");
  }
  return out;
}

std::uint64_t parse_u64(const char* key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": not an unsigned integer: \"" + value + "\"");
  }
  return out;
}

double parse_double(const char* key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError(std::string(key) + ": not a number: \"" + value + "\"");
  }
  return out;
}

std::string trim(const std::string& s) {
  std::size_t lo = s.find_first_not_of(" \t\r");
  if (lo == std::string::npos) {
    return "";
  }
  std::size_t hi = s.find_last_not_of(" \t\r");
  return s.substr(lo, hi - lo + 1);
}

}  // namespace

#define FEDKD_INT_FIELD(name)                                                           \
  ConfigField {                                                                         \
    #name, [](const ExperimentConfig& c) { return std::to_string(c.name); },            \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_int(#name, v); } \
  }

#define FEDKD_DOUBLE_FIELD(name)                                                           \
  ConfigField {                                                                            \
    #name, [](const ExperimentConfig& c) { return format_double(c.name); },                \
        [](ExperimentConfig& c, const std::string& v) { c.name = parse_double(#name, v); } \
  }

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      ConfigField{"method", [](const ExperimentConfig& c) { return method_to_string(c.method); },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.method = method_from_string(v);
                  }},
      FEDKD_INT_FIELD(rounds),
      FEDKD_INT_FIELD(clients),
      FEDKD_DOUBLE_FIELD(alpha),
      FEDKD_INT_FIELD(local_epochs),
      FEDKD_INT_FIELD(kd_epochs),
      FEDKD_INT_FIELD(init_epochs),
      FEDKD_INT_FIELD(public_subset_size),
      FEDKD_DOUBLE_FIELD(participation),
      ConfigField{"dropout_policy",
                  [](const ExperimentConfig& c) {
                    return dropout_policy_to_string(c.dropout_policy);
                  },
                  [](ExperimentConfig& c, const std::string& v) {
                    c.dropout_policy = dropout_policy_from_string(v);
                  }},
      FEDKD_DOUBLE_FIELD(beta),
      FEDKD_DOUBLE_FIELD(rho),
      FEDKD_DOUBLE_FIELD(learning_rate),
      FEDKD_INT_FIELD(kd_batch_size),
      FEDKD_INT_FIELD(local_batch_size),
      FEDKD_INT_FIELD(public_classes),
      FEDKD_INT_FIELD(local_classes),
      FEDKD_INT_FIELD(input_dim),
      FEDKD_INT_FIELD(train_per_class),
      FEDKD_INT_FIELD(test_per_class),
      FEDKD_INT_FIELD(public_per_class),
      FEDKD_DOUBLE_FIELD(cluster_spread),
      FEDKD_INT_FIELD(hidden_width),
      ConfigField{"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
                  [](ExperimentConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); }},
  };
  return fields;
}

#undef FEDKD_INT_FIELD
#undef FEDKD_DOUBLE_FIELD

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv,
                                 ExperimentConfig base) {
  ExperimentConfig cfg = base;
  for (const auto& [key, value] : kv) {
    const ConfigField* field = nullptr;
    for (const ConfigField& f : config_fields()) {
      if (f.key == key) {
        field = &f;
        break;
      }
    }
    if (field == nullptr) {
      throw ConfigError("unknown config key: \"" + key + "\"");
    }
    field->set(cfg, value);
  }
  validate_config(cfg);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  for (const ConfigField& f : config_fields()) {
    out << f.key << " = " << f.get(cfg) << '\n';
  }
  return out.str();
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got \"" +
                        stripped + "\"");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return config_from_map(kv, base);
}

ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), base);
}

}  // namespace fedkd
