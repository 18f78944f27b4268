#include "tbcnn/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <type_traits>
#include <vector>

#include "tbcnn/error.hpp"

namespace tbcnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
  requires std::is_unsigned_v<T>
void parse_value(std::string_view text, T& out) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("expected a non-negative integer, got '" + std::string(text) + "'");
  }
  out = v;
}

void parse_value(std::string_view text, double& out) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  out = v;
}

void parse_value(std::string_view text, bool& out) {
  if (text == "true" || text == "yes" || text == "1") {
    out = true;
  } else if (text == "false" || text == "no" || text == "0") {
    out = false;
  } else {
    throw ConfigError("expected true or false, got '" + std::string(text) + "'");
  }
}

void parse_value(std::string_view text, Variant& out) { out = parse_variant(text); }
void parse_value(std::string_view text, PoolingStrategy& out) { out = parse_pooling(text); }

template <typename T>
  requires std::is_unsigned_v<T>
std::string format_value(T v) {
  return std::to_string(v);
}
std::string format_value(double v) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(Variant v) { return std::string(to_string(v)); }
std::string format_value(PoolingStrategy v) { return std::string(to_string(v)); }

struct Field {
  std::string section;
  std::string key;
  bool textual = false;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, std::string_view)> set;
};

template <typename T>
Field field(std::string section, std::string key, T TrainConfig::*member) {
  return {std::move(section), std::move(key),
          std::is_same_v<T, Variant> || std::is_same_v<T, PoolingStrategy>,
          [member](const TrainConfig& c) { return format_value(c.*member); },
          [member](TrainConfig& c, std::string_view v) { parse_value(v, c.*member); }};
}

template <typename T>
Field rae_field(std::string key, T RaeConfig::*member) {
  return {"rae", std::move(key), false,
          [member](const TrainConfig& c) { return format_value(c.rae.*member); },
          [member](TrainConfig& c, std::string_view v) { parse_value(v, c.rae.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      field("model", "variant", &TrainConfig::variant),
      field("model", "n_e", &TrainConfig::n_e),
      field("model", "n_c", &TrainConfig::n_c),
      field("model", "n_h", &TrainConfig::n_h),
      field("model", "pooling", &TrainConfig::pooling),
      field("model", "k", &TrainConfig::k),
      field("model", "alpha", &TrainConfig::alpha),
      field("train", "batch_size", &TrainConfig::batch_size),
      field("train", "learning_rate", &TrainConfig::learning_rate),
      field("train", "lambda", &TrainConfig::lambda),
      field("train", "dropout_hidden", &TrainConfig::dropout_hidden),
      field("train", "dropout_embedding", &TrainConfig::dropout_embedding),
      field("train", "max_epochs", &TrainConfig::max_epochs),
      field("train", "train_embeddings", &TrainConfig::train_embeddings),
      field("train", "seed", &TrainConfig::seed),
      field("train", "lr_patience", &TrainConfig::lr_patience),
      rae_field("learning_rate", &RaeConfig::learning_rate),
      rae_field("batch_size", &RaeConfig::batch_size),
      rae_field("max_epochs", &RaeConfig::max_epochs),
      rae_field("holdout_fraction", &RaeConfig::holdout_fraction),
      rae_field("seed", &RaeConfig::seed),
  };
  return all;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

}  // namespace

void set_option(TrainConfig& config, std::string_view section, std::string_view key,
                std::string_view value) {
  const Field* f = find_field(section, key);
  if (f == nullptr) {
    throw ConfigError("unknown setting " + std::string(section) + "." + std::string(key));
  }
  try {
    f->set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(section) + "." + std::string(key) + ": " + e.what());
  }
}

std::set<std::string> apply_config(std::istream& in, TrainConfig& config,
                                   std::string_view source) {
  std::set<std::string> assigned;
  std::string section;
  std::string line;
  std::size_t number = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(std::string(source) + ":" + std::to_string(number) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') fail("unterminated section header");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      if (section != "model" && section != "train" && section != "rae") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    if (section.empty()) fail("setting outside of a section");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    const std::string name = section + "." + key;
    if (!assigned.insert(name).second) fail("duplicate setting " + name);
    try {
      set_option(config, section, key, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
  return assigned;
}

std::set<std::string> apply_config_file(const std::filesystem::path& path,
                                        TrainConfig& config) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return apply_config(in, config, path.string());
}

std::string to_config_text(const TrainConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const TrainConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) {
    const std::string v = f.get(config);
    j[f.section][f.key] = f.textual ? nlohmann::json(v) : nlohmann::json::parse(v);
  }
  return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig config;
  for (const auto& f : fields()) {
    if (!j.contains(f.section) || !j[f.section].contains(f.key)) {
      throw DataError("config snapshot lacks " + f.section + "." + f.key);
    }
    const auto& v = j[f.section][f.key];
    try {
      if (v.is_string()) {
        f.set(config, v.get<std::string>());
      } else if (v.is_number_float()) {
        f.set(config, format_value(v.get<double>()));
      } else {
        f.set(config, v.dump());
      }
    } catch (const ConfigError& e) {
      throw DataError("config snapshot " + f.section + "." + f.key + ": " + e.what());
    }
  }
  return config;
}

}  // namespace tbcnn
