#include "config.hpp"

#include <fstream>
#include <set>

namespace splitflow::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) throw config_error(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!required.count(key) && !optional.count(key)) {
      throw config_error(path + "/" + key, "unknown key");
    }
  }
  for (const std::string& key : required) {
    if (!obj.contains(key)) {
      throw config_error(path + "/" + key, "missing required key");
    }
  }
}

double get_number(const json& obj, const std::string& path, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw config_error(path + "/" + key, "expected a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path,
                         const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw config_error(path + "/" + key, "expected an integer");
  }
  return v.get<std::int64_t>();
}

euler::LatticeIndex get_mode(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer()) {
    throw config_error(path, "expected a mode as [j1, j2]");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

LorenzBlock parse_lorenz(const json& sys) {
  require_keys(sys, "/system", {"type", "d", "beta", "h"});
  LorenzBlock block;
  block.d = static_cast<int>(get_integer(sys, "/system", "d"));
  block.h = get_number(sys, "/system", "h");
  const json& beta = sys.at("beta");
  if (beta.is_number()) {
    block.beta.assign(static_cast<std::size_t>(std::max(block.d, 0)),
                      beta.get<double>());
  } else if (beta.is_array()) {
    for (const auto& b : beta) {
      if (!b.is_number()) throw config_error("/system/beta", "expected numbers");
      block.beta.push_back(b.get<double>());
    }
  } else {
    throw config_error("/system/beta", "expected a number or an array");
  }
  if (!(block.h > 0)) throw config_error("/system/h", "h must be > 0");
  return block;
}

EulerBlock parse_euler(const json& sys) {
  require_keys(sys, "/system", {"type", "N", "h"}, {"damping", "forcing"});
  EulerBlock block;
  block.N = static_cast<int>(get_integer(sys, "/system", "N"));
  block.h = get_number(sys, "/system", "h");
  if (!(block.h > 0)) throw config_error("/system/h", "h must be > 0");
  if (sys.contains("damping")) {
    const json& damping = sys.at("damping");
    if (!damping.is_array()) throw config_error("/system/damping", "expected an array");
    for (std::size_t i = 0; i < damping.size(); ++i) {
      const std::string path = "/system/damping/" + std::to_string(i);
      require_keys(damping[i], path, {"mode", "rate"});
      block.damping.push_back({get_mode(damping[i].at("mode"), path + "/mode"),
                               get_number(damping[i], path, "rate")});
    }
  }
  if (sys.contains("forcing")) {
    const json& forcing = sys.at("forcing");
    require_keys(forcing, "/system/forcing", {"count", "entries"});
    const std::int64_t count = get_integer(forcing, "/system/forcing", "count");
    if (count < 0) throw config_error("/system/forcing/count", "count must be >= 0");
    block.forcing_count = static_cast<std::size_t>(count);
    const json& entries = forcing.at("entries");
    if (!entries.is_array()) {
      throw config_error("/system/forcing/entries", "expected an array");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string path = "/system/forcing/entries/" + std::to_string(i);
      require_keys(entries[i], path, {"mode", "component", "ell", "value"});
      euler::ForcingEntry e;
      e.mode = get_mode(entries[i].at("mode"), path + "/mode");
      const std::string comp = entries[i].at("component").get<std::string>();
      if (comp != "a" && comp != "b") {
        throw config_error(path + "/component", "must be \"a\" or \"b\"");
      }
      e.component = comp[0];
      e.ell = static_cast<std::uint32_t>(get_integer(entries[i], path, "ell"));
      e.value = get_number(entries[i], path, "value");
      block.forcing.push_back(e);
    }
  }
  return block;
}

const std::set<std::string> kExperiments = {
    "simulate",  "drift",          "entrance", "thermalize",
    "return-time", "triad-portrait", "validate"};

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  require_keys(doc, "", {"system", "experiment", "seed", "trials"}, {"output"});
  RunConfig cfg;

  const json& sys = doc.at("system");
  if (!sys.is_object() || !sys.contains("type")) {
    throw config_error("/system/type", "missing system type");
  }
  const std::string type = sys.at("type").get<std::string>();
  if (type == "lorenz96") {
    cfg.system = parse_lorenz(sys);
  } else if (type == "euler") {
    cfg.system = parse_euler(sys);
  } else {
    throw config_error("/system/type", "must be \"lorenz96\" or \"euler\"");
  }

  const json& exp = doc.at("experiment");
  if (!exp.is_object() || !exp.contains("type")) {
    throw config_error("/experiment/type", "missing experiment type");
  }
  cfg.experiment_type = exp.at("type").get<std::string>();
  if (!kExperiments.count(cfg.experiment_type)) {
    throw config_error("/experiment/type",
                       "unknown experiment \"" + cfg.experiment_type + "\"");
  }
  cfg.experiment = exp;

  const std::int64_t seed = get_integer(doc, "", "seed");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const std::int64_t trials = get_integer(doc, "", "trials");
  if (trials < 0) throw config_error("/trials", "trials must be >= 0");
  cfg.trials = static_cast<std::uint64_t>(trials);
  if (doc.contains("output")) {
    cfg.output = doc.at("output").get<std::string>();
  }
  cfg.normalized = doc;
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("", "cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw config_error("", std::string("JSON parse error: ") + e.what());
  }
  return parse_config(doc);
}

bool is_lorenz(const RunConfig& cfg) {
  return std::holds_alternative<LorenzBlock>(cfg.system);
}

const LorenzBlock& lorenz_block(const RunConfig& cfg) {
  return std::get<LorenzBlock>(cfg.system);
}

const EulerBlock& euler_block(const RunConfig& cfg) {
  return std::get<EulerBlock>(cfg.system);
}

euler::System build_euler_system(const EulerBlock& block) {
  return euler::System(block.N, block.damping, block.forcing_count,
                       block.forcing);
}

}  // namespace splitflow::cli
