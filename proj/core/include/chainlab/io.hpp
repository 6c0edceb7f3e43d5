#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "chainlab/chaining.hpp"
#include "chainlab/concentration.hpp"
#include "chainlab/gp.hpp"
#include "chainlab/spinglass.hpp"

namespace chainlab::io {

using Json = nlohmann::json;

/// Shortest round-trip decimal form ("%.17g"); "nan"/"inf"/"-inf" for non-finite values.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed. IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& body);

/// Parses JSON text; malformed input raises ConfigError.
Json parse_json(const std::string& text, const std::string& origin = "input");

/// Comma-separated numeric matrix, one row per line. Blank lines are skipped;
/// ragged rows or non-numeric fields raise InvalidArgument.
Eigen::MatrixXd parse_matrix_csv(const std::string& text);
std::string format_matrix_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// {"kind": "cov" | "embed", "data": [[...], ...]}
Json gp_spec_to_json(const gp::GaussianProcessSpec& spec);
gp::GaussianProcessSpec gp_spec_from_json(const Json& j);
/// .csv files are embeddings; anything else is read as a JSON spec.
gp::GaussianProcessSpec load_gp_spec(const std::filesystem::path& path);

/// {"q": q, "N": N, "weights": [...], "A": [[...], ...]}
Json product_instance_to_json(const concentration::ProductSpaceInstance& inst);
concentration::ProductSpaceInstance product_instance_from_json(const Json& j);

/// {"N": N, "h": h, "couplings": [...]}
Json sk_instance_to_json(const spinglass::SKInstance& inst);
spinglass::SKInstance sk_instance_from_json(const Json& j);

Json tail_point_to_json(const TailPoint& p);
Json chaining_report_to_json(const chaining::ChainingReport& r);

/// Header "pair,lambda,distance,empirical,bound,stderr" and one line per record.
std::string pair_tails_csv(const std::vector<gp::PairTailRecord>& records);

}  // namespace chainlab::io
