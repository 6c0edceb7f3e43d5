#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chainlab/io.hpp"

namespace chainlab::experiment {

enum class Suite { chaining, concentration, transport, sk, all };
enum class Scale { small, full };

std::string to_string(Suite suite);
std::string to_string(Scale scale);
/// ConfigError on unknown names.
Suite parse_suite(const std::string& name);
Scale parse_scale(const std::string& name);

/// Batch configuration. `params` holds one optional block per suite, keyed by
/// suite name; missing keys take scale-dependent defaults. With scale=small
/// every size limit is half of the corresponding module maximum.
struct ExperimentConfig {
  Suite suite = Suite::all;
  std::uint64_t seed = 0;
  Scale scale = Scale::full;
  std::filesystem::path output_dir = "chainlab-out";
  unsigned workers = 0;  // 0 = hardware concurrency
  io::Json params = io::Json::object();
};

/// Accepts {"suite", "seed", "scale", "output_dir", "workers", "params"}. For a
/// single-suite config, other top-level keys are taken as that suite's
/// parameters. Anything unrecognized raises ConfigError.
ExperimentConfig parse_config(const io::Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CheckRecord {
  std::string name;
  io::Json params = io::Json::object();
  double value = 0.0;
  double bound = 0.0;
  bool pass = true;
};

struct RunReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::string scale;
  std::string started;   // ISO 8601, UTC
  std::string finished;
  std::vector<CheckRecord> records;

  bool pass() const noexcept;
  std::size_t failures() const noexcept;
};

struct RunOutput {
  RunReport report;
  std::map<std::string, std::string> tables;  // file name -> CSV body
};

/// Names of every check the run will record, in order. Validates all
/// parameters, so a config that passes here will not raise ConfigError in run().
std::vector<std::string> check_plan(const ExperimentConfig& config);

/// Executes the configured suites in memory. Nothing is written.
RunOutput run(const ExperimentConfig& config);

io::Json report_to_json(const RunReport& report);

/// Writes report.json and the suite CSV files into config.output_dir.
void write_outputs(const ExperimentConfig& config, const RunOutput& output);

/// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIoError = 3;

/// Validates, runs, writes. Maps errors to exit codes; the message goes to `log`.
int run_to_directory(const ExperimentConfig& config, std::string& log);

/// Instance kinds accepted by generate_instance.
std::vector<std::string> instance_kinds();

/// Writes one reproducible instance file into out_dir and returns its path.
///   gp-random-embed: n, dim, cloud ("gaussian" | "sphere")     -> gp_embed.csv
///   gp-random-cov:   n, m (A A^T / m with A n x m Gaussian)     -> gp_cov.json
///   product-space:   q, N; |A| uniform in [1, q^N - 1]          -> product_space.json
///   sk:              N, h                                       -> sk.json
std::filesystem::path generate_instance(const std::string& kind, const io::Json& params,
                                        std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace chainlab::experiment
