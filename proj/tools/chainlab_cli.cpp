// chainlab: run experiment suites, generate instances, print check plans.
#include <charconv>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainlab/errors.hpp"
#include "chainlab/experiment.hpp"

namespace ex = chainlab::experiment;
using chainlab::io::Json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> suite;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)");
  cmd->add_option("--suite", o.suite, "chaining|concentration|transport|sk|all");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--scale", o.scale, "small|full");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
}

ex::ExperimentConfig resolve(const Overrides& o) {
  ex::ExperimentConfig c = o.config_path.empty() ? ex::ExperimentConfig{} : ex::load_config(o.config_path);
  if (o.suite) c.suite = ex::parse_suite(*o.suite);
  if (o.seed) c.seed = *o.seed;
  if (o.scale) c.scale = ex::parse_scale(*o.scale);
  if (o.out) c.output_dir = *o.out;
  if (o.workers) c.workers = *o.workers;
  return c;
}

// key=value; value parsed as JSON when possible, otherwise kept as a string.
Json parse_params(const std::vector<std::string>& items) {
  Json params = Json::object();
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw chainlab::ConfigError("--param expects key=value, got " + item);
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    Json v = Json::parse(value, nullptr, false);
    params[key] = v.is_discarded() ? Json(value) : v;
  }
  return params;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainlab: numerical checks for chaining and concentration inequalities"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run = app.add_subcommand("run", "run a suite and write report.json plus CSV tables");
  add_common(run, run_opts);

  Overrides describe_opts;
  auto* describe = app.add_subcommand("describe", "print the check plan of a config");
  add_common(describe, describe_opts);

  std::string kind;
  std::vector<std::string> param_items;
  std::uint64_t gen_seed = 0;
  std::string gen_out = ".";
  auto* generate = app.add_subcommand("generate", "write a random instance file");
  generate->add_option("--kind", kind, "gp-random-embed|gp-random-cov|product-space|sk")->required();
  generate->add_option("--param", param_items, "instance parameter key=value (repeatable)");
  generate->add_option("--seed", gen_seed, "64-bit seed");
  generate->add_option("--out", gen_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitConfigError;
  }

  try {
    if (*run) {
      const auto config = resolve(run_opts);
      std::string log;
      const int code = ex::run_to_directory(config, log);
      (code == ex::kExitPass ? std::cout : std::cerr) << log << "\n";
      if (code == ex::kExitPass || code == ex::kExitCheckFailure) {
        std::cout << "wrote " << config.output_dir.string() << "\n";
      }
      return code;
    }
    if (*describe) {
      const auto config = resolve(describe_opts);
      const auto plan = ex::check_plan(config);
      std::cout << "suite " << ex::to_string(config.suite) << ", scale " << ex::to_string(config.scale)
                << ", seed " << config.seed << ": " << plan.size() << " checks\n";
      for (const auto& name : plan) std::cout << name << "\n";
      return ex::kExitPass;
    }
    if (*generate) {
      const auto path = ex::generate_instance(kind, parse_params(param_items), gen_seed, gen_out);
      std::cout << path.string() << "\n";
      return ex::kExitPass;
    }
  } catch (const chainlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ex::kExitConfigError;
  } catch (const chainlab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return ex::kExitIoError;
  } catch (const chainlab::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ex::kExitConfigError;
  }
  return ex::kExitPass;
}
