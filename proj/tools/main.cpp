#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "config.hpp"
#include "experiments.hpp"

namespace sfc = splitflow::cli;

namespace {

int parse_workers(int& error) {
  const char* env = std::getenv("SPLITFLOW_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1) {
    std::cerr << "SPLITFLOW_WORKERS must be a positive integer, got \"" << env
              << "\"\n";
    error = 2;
    return 1;
  }
  return static_cast<int>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random-splitting chain experiments"};
  app.set_version_flag("--version", std::string(sfc::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;

  const std::vector<std::string> kinds = {
      "simulate",    "drift",          "entrance", "thermalize",
      "return-time", "triad-portrait", "validate"};
  const std::vector<std::string> descriptions = {
      "run one chain trajectory and record states",
      "Monte Carlo Lyapunov drift estimate over a radius grid",
      "single-cycle dissipative-region entrance probabilities",
      "triad thermalization probability over a delta grid",
      "return-time samples with the fitted tail bound",
      "exact triad orbit sampled on a uniform time grid",
      "self-check the configured system (splitting identity, conservation)"};

  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(kinds[i], descriptions[i]);
    sub->add_option("--config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  int env_error = 0;
  const int workers = parse_workers(env_error);
  if (env_error) return env_error;

  const std::string sub = app.get_subcommands().front()->get_name();
  sfc::RunConfig cfg;
  try {
    cfg = sfc::load_config_file(config_path);
    if (cfg.experiment_type != sub) {
      std::cerr << "configuration error at /experiment/type: config declares \""
                << cfg.experiment_type << "\" but the subcommand is \"" << sub
                << "\"\n";
      return 2;
    }
  } catch (const sfc::config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  sfc::RunOptions opts;
  opts.workers = static_cast<unsigned>(workers);
  if (seed_set) opts.seed_override = seed;
  if (!out_dir.empty()) opts.out_override = out_dir;
  try {
    return sfc::run(cfg, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
