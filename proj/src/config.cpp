#include "lineart/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "lineart/errors.hpp"

namespace lineart {

namespace {

int64_t parse_int(const std::string& key, const std::string& text) {
  int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid integer for '" + key + "': " + text);
  }
  return value;
}

uint64_t parse_uint(const std::string& key, const std::string& text) {
  uint64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid unsigned integer for '" + key + "': " + text);
  }
  return value;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw ConfigError("invalid number for '" + key + "': " + text);
}

std::string format_double(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

struct Field {
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define LINEART_INT_FIELD(name)                                                            \
  {                                                                                        \
    #name, Field {                                                                         \
      [](TrainConfig& c, const std::string& v) { c.name = parse_int(#name, v); },          \
          [](const TrainConfig& c) { return std::to_string(c.name); }                      \
    }                                                                                      \
  }
#define LINEART_DOUBLE_FIELD(key, member)                                                  \
  {                                                                                        \
    key, Field {                                                                           \
      [](TrainConfig& c, const std::string& v) { c.member = parse_double(key, v); },       \
          [](const TrainConfig& c) { return format_double(c.member); }                     \
    }                                                                                      \
  }
#define LINEART_STRING_FIELD(name)                                                         \
  {                                                                                        \
    #name, Field {                                                                         \
      [](TrainConfig& c, const std::string& v) { c.name = v; },                            \
          [](const TrainConfig& c) { return c.name; }                                      \
    }                                                                                      \
  }

// Ordered as in the config file.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      LINEART_INT_FIELD(image_size),
      LINEART_INT_FIELD(batch_size),
      LINEART_INT_FIELD(iterations),
      LINEART_DOUBLE_FIELD("lr_g", lr_g),
      LINEART_DOUBLE_FIELD("lr_d", lr_d),
      LINEART_DOUBLE_FIELD("adam_beta1", adam_beta1),
      LINEART_DOUBLE_FIELD("adam_beta2", adam_beta2),
      LINEART_DOUBLE_FIELD("lambda_adv", weights.adv),
      LINEART_DOUBLE_FIELD("lambda_rec", weights.rec),
      LINEART_DOUBLE_FIELD("lambda_perc", weights.perc),
      LINEART_DOUBLE_FIELD("lambda_style", weights.style),
      {"seed", Field{[](TrainConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
                     [](const TrainConfig& c) { return std::to_string(c.seed); }}},
      {"lsgan_targets",
       Field{[](TrainConfig& c, const std::string& v) {
               c.lsgan_targets = lsgan_targets_from_string(v);
             },
             [](const TrainConfig& c) { return std::string(to_string(c.lsgan_targets)); }}},
      LINEART_INT_FIELD(checkpoint_every),
      LINEART_INT_FIELD(base_channels),
      LINEART_INT_FIELD(res_blocks),
      LINEART_INT_FIELD(le_iterations),
      LINEART_DOUBLE_FIELD("tps_magnitude", tps_magnitude),
      LINEART_INT_FIELD(tps_grid),
      LINEART_STRING_FIELD(dataset),
      LINEART_STRING_FIELD(output_dir),
      LINEART_STRING_FIELD(line_extractor),
      LINEART_STRING_FIELD(feature_extractor),
  };
  return table;
}

#undef LINEART_INT_FIELD
#undef LINEART_DOUBLE_FIELD
#undef LINEART_STRING_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

TrainConfig TrainConfig::full() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.image_size = 64;
  c.batch_size = 4;
  c.iterations = 2000;
  c.checkpoint_every = 500;
  c.le_iterations = 500;
  return c;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* rule) {
    if (!ok) throw ConfigError(std::string("invalid value for '") + key + "': " + rule);
  };
  require(image_size >= 16 && image_size % 16 == 0, "image_size", "positive multiple of 16");
  require(batch_size >= 1, "batch_size", ">= 1");
  require(iterations >= 1, "iterations", ">= 1");
  require(lr_g > 0, "lr_g", "> 0");
  require(lr_d > 0, "lr_d", "> 0");
  require(adam_beta1 >= 0 && adam_beta1 < 1, "adam_beta1", "in [0, 1)");
  require(adam_beta2 >= 0 && adam_beta2 < 1, "adam_beta2", "in [0, 1)");
  require(checkpoint_every >= 1, "checkpoint_every", ">= 1");
  require(base_channels >= 1, "base_channels", ">= 1");
  require(res_blocks >= 0, "res_blocks", ">= 0");
  require(le_iterations >= 1, "le_iterations", ">= 1");
  require(tps_magnitude >= 0, "tps_magnitude", ">= 0");
  require(tps_grid >= 2, "tps_grid", ">= 2");
  weights.validate();
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  const Field* field = find_field(key);
  if (field == nullptr) throw ConfigError("unknown config key: " + key);
  field->set(*this, value);
}

std::string TrainConfig::to_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& [name, field] : fields()) {
    out << YAML::Key << name << YAML::Value << field.get(*this);
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, field] : fields()) keys.push_back(name);
  return keys;
}

void apply_config(TrainConfig& config, const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) throw ConfigError("config must be a key-value mapping");
  for (const auto& item : root) {
    const auto key = item.first.as<std::string>();
    if (!item.second.IsScalar() && !item.second.IsNull()) {
      throw ConfigError("config value for '" + key + "' must be a scalar");
    }
    config.set(key, item.second.IsNull() ? std::string() : item.second.as<std::string>());
  }
}

TrainConfig parse_config(const std::string& yaml_text) {
  TrainConfig config;
  apply_config(config, yaml_text);
  return config;
}

void apply_config_file(TrainConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config(config, buffer.str());
}

TrainConfig load_config(const std::filesystem::path& path) {
  TrainConfig config;
  apply_config_file(config, path);
  return config;
}

void save_config(const TrainConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config: " + path.string());
  out << config.to_yaml();
}

}  // namespace lineart
