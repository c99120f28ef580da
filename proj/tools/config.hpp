#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "splitflow/euler.hpp"

namespace splitflow::cli {

/// Configuration problem with a JSON-pointer-style field path for
/// diagnostics; the CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  config_error(std::string field_path, const std::string& message)
      : std::runtime_error(field_path + ": " + message),
        field(std::move(field_path)) {}
  std::string field;
};

struct LorenzBlock {
  int d = 0;
  std::vector<double> beta;
  double h = 0;
};

struct EulerBlock {
  int N = 0;
  double h = 0;
  std::vector<std::pair<euler::LatticeIndex, double>> damping;
  std::size_t forcing_count = 0;
  std::vector<euler::ForcingEntry> forcing;
};

struct RunConfig {
  std::variant<LorenzBlock, EulerBlock> system;
  std::string experiment_type;
  nlohmann::json experiment;  // the experiment block, including "type"
  std::uint64_t seed = 0;
  std::uint64_t trials = 0;
  std::string output;         // may be overridden by --out
  nlohmann::json normalized;  // echoed into the manifest; reparses equal
};

/// Parses and validates a config document.  Unknown keys anywhere are
/// rejected.  Throws config_error with the offending field path.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads and parses a config file; JSON syntax errors carry the parser's
/// byte/line diagnostics.
RunConfig load_config_file(const std::string& path);

bool is_lorenz(const RunConfig& cfg);
const LorenzBlock& lorenz_block(const RunConfig& cfg);
const EulerBlock& euler_block(const RunConfig& cfg);
euler::System build_euler_system(const EulerBlock& block);

}  // namespace splitflow::cli
