#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace splitflow::cli {

inline constexpr const char* kVersion = "splitflow 0.1.0";

struct RunOptions {
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  unsigned workers = 1;
};

/// Executes the configured experiment, writes the CSV data files and the
/// run.json manifest, and returns the process exit code: 0 on success,
/// 1 on failed validation checks, 2 on configuration problems, 3 on
/// numeric overflow (with the trajectory id in the diagnostic).
int run(const RunConfig& cfg, const RunOptions& opts);

}  // namespace splitflow::cli
