#include "docenh/config.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace docenh {

using nlohmann::json;

void Config::validate() const {
  try {
    tone.validate();
    augment.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (jobs && *jobs < 1) throw ConfigError("jobs must be at least 1");
  if (process_cap < 1) throw ConfigError("process_cap must be at least 1");
  std::set<std::string> ids;
  for (const auto& m : metrics) {
    if (m.id.empty()) throw ConfigError("metric without id");
    if (is_builtin_metric(m.id)) throw ConfigError("metric id '" + m.id + "' is builtin");
    if (!m.external || m.external->command.empty()) {
      throw ConfigError("metric '" + m.id + "' needs a command");
    }
    if (!ids.insert(m.id).second) throw ConfigError("duplicate metric id '" + m.id + "'");
  }
  ids.clear();
  for (const auto& e : engines) {
    if (e.id.empty()) throw ConfigError("engine without id");
    if (e.id == "classical") throw ConfigError("engine id 'classical' is builtin");
    if (!ids.insert(e.id).second) throw ConfigError("duplicate engine id '" + e.id + "'");
  }
}

Config parse_config(const std::string& text) {
  Config cfg;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (j.contains("tone")) {
      const auto& t = j["tone"];
      cfg.tone.black_point = t.value("black_point", cfg.tone.black_point);
      cfg.tone.white_point = t.value("white_point", cfg.tone.white_point);
      cfg.tone.gamma = t.value("gamma", cfg.tone.gamma);
    }
    if (j.contains("augment")) {
      const auto& a = j["augment"];
      cfg.augment.crop_size = a.value("crop_size", cfg.augment.crop_size);
      cfg.augment.energy_threshold = a.value("threshold", cfg.augment.energy_threshold);
      cfg.augment.crops_per_page = a.value("crops_per_page", cfg.augment.crops_per_page);
    }
    for (const auto& m : j.value("metrics", json::array())) {
      MetricDescriptor d;
      d.id = m.at("id").get<std::string>();
      d.label = m.value("label", "");
      d.polarity = parse_polarity(m.value("polarity", "higher"));
      ExternalCommand cmd;
      cmd.command = m.value("command", "");
      cmd.timeout = std::chrono::milliseconds(m.value("timeout_ms", cmd.timeout.count()));
      d.external = cmd;
      cfg.metrics.push_back(std::move(d));
    }
    for (const auto& e : j.value("engines", json::array())) {
      const std::string id = e.at("id").get<std::string>();
      const std::string command = e.value("command", "");
      EngineDescriptor d = command.empty() ? EngineDescriptor::precomputed_outputs(id)
                                           : EngineDescriptor::external_command(id, command);
      d.timeout = std::chrono::milliseconds(e.value("timeout_ms", d.timeout.count()));
      cfg.engines.push_back(std::move(d));
    }
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    cfg.process_cap = j.value("process_cap", cfg.process_cap);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  cfg.augment.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Config resolve_config(const std::optional<std::filesystem::path>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return load_config(env);
  return Config{};
}

MetricRegistry metric_registry(const Config& config) {
  MetricRegistry registry;
  for (const auto& m : config.metrics) registry.add(m);
  return registry;
}

}  // namespace docenh
