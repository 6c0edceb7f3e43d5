#include "chainlab/io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chainlab/errors.hpp"

namespace chainlab::io {

namespace {

// Runs fn, turning nlohmann type/shape errors into ConfigError.
template <class Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

double parse_field(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw InvalidArgument("line " + std::to_string(line) + ": non-numeric field '" +
                          std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + origin + ": " + e.what());
  }
}

Eigen::MatrixXd parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " fields, got " +
                            std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

std::string format_matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_number(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text_file(path));
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  write_text_file(path, format_matrix_csv(m));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  return guarded("matrix", [&] {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty array of rows");
    const std::size_t cols = j.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
      if (!j[r].is_array() || j[r].size() != cols) throw ConfigError("ragged matrix row " + std::to_string(r));
      for (std::size_t c = 0; c < cols; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
      }
    }
    return m;
  });
}

Json gp_spec_to_json(const gp::GaussianProcessSpec& spec) {
  return Json{{"kind", spec.kind() == gp::GaussianProcessSpec::Kind::covariance ? "cov" : "embed"},
              {"data", matrix_to_json(spec.data())}};
}

gp::GaussianProcessSpec gp_spec_from_json(const Json& j) {
  const std::string kind = guarded("gp spec", [&] { return j.at("kind").get<std::string>(); });
  Eigen::MatrixXd data = matrix_from_json(guarded("gp spec", [&] { return j.at("data"); }));
  if (kind == "cov") return gp::GaussianProcessSpec::from_covariance(std::move(data));
  if (kind == "embed") return gp::GaussianProcessSpec::from_embedding(std::move(data));
  throw ConfigError("gp spec kind must be \"cov\" or \"embed\", got \"" + kind + "\"");
}

gp::GaussianProcessSpec load_gp_spec(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return gp::GaussianProcessSpec::from_embedding(read_matrix_csv(path));
  return gp_spec_from_json(parse_json(read_text_file(path), path.string()));
}

Json product_instance_to_json(const concentration::ProductSpaceInstance& inst) {
  Json set = Json::array();
  for (const auto& y : inst.set()) {
    Json row = Json::array();
    for (auto v : y) row.push_back(static_cast<int>(v));
    set.push_back(std::move(row));
  }
  return Json{{"q", inst.alphabet()}, {"N", inst.factors()}, {"weights", inst.weights()}, {"A", set}};
}

concentration::ProductSpaceInstance product_instance_from_json(const Json& j) {
  return guarded("product instance", [&] {
    const auto q = j.at("q").get<std::size_t>();
    const auto n = j.at("N").get<std::size_t>();
    std::vector<double> weights;
    if (j.contains("weights")) {
      weights = j.at("weights").get<std::vector<double>>();
    } else {
      weights.assign(q, q == 0 ? 0.0 : 1.0 / static_cast<double>(q));
    }
    std::vector<concentration::Point> set;
    for (const auto& row : j.at("A")) {
      concentration::Point y;
      for (const auto& v : row) {
        const int x = v.get<int>();
        if (x < 0 || x > 255) throw ConfigError("point coordinate out of range");
        y.push_back(static_cast<std::uint8_t>(x));
      }
      set.push_back(std::move(y));
    }
    return concentration::ProductSpaceInstance::create(q, n, std::move(weights), std::move(set));
  });
}

Json sk_instance_to_json(const spinglass::SKInstance& inst) {
  return Json{{"N", inst.size()}, {"h", inst.field()}, {"couplings", inst.couplings()}};
}

spinglass::SKInstance sk_instance_from_json(const Json& j) {
  return guarded("sk instance", [&] {
    return spinglass::SKInstance(j.at("N").get<std::size_t>(),
                                 j.at("couplings").get<std::vector<double>>(),
                                 j.value("h", 0.0));
  });
}

Json tail_point_to_json(const TailPoint& p) {
  return Json{{"parameter", p.parameter},
              {"empirical", p.empirical},
              {"bound", p.bound},
              {"stderr", p.stderr_},
              {"violation", p.violation}};
}

Json chaining_report_to_json(const chaining::ChainingReport& r) {
  Json tails = Json::array();
  for (const auto& c : r.chain_tail) {
    Json t = tail_point_to_json(c.tail);
    t["u"] = c.u;
    t["threshold"] = c.threshold;
    tails.push_back(std::move(t));
  }
  Json out{{"esup", r.esup_mc.mean},
           {"esup_stderr", r.esup_mc.std_error},
           {"n_samples", r.esup_mc.n_samples},
           {"entropy_mode", r.entropy_mode == metric::CoverMode::exact ? "exact" : "greedy"},
           {"sudakov", r.sudakov},
           {"dudley", r.dudley},
           {"gamma2_greedy", r.gamma2_greedy},
           {"S", r.S},
           {"ratio_gamma2", r.ratio_gamma2()},
           {"ratio_dudley", r.ratio_dudley()},
           {"ratio_sudakov", r.ratio_sudakov()},
           {"chain_tail", tails}};
  out["gamma2_exact"] = r.gamma2_exact ? Json(*r.gamma2_exact) : Json(nullptr);
  return out;
}

std::string pair_tails_csv(const std::vector<gp::PairTailRecord>& records) {
  std::string out = "pair,lambda,distance,empirical,bound,stderr\n";
  for (const auto& r : records) {
    out += std::to_string(r.a) + "-" + std::to_string(r.b) + "," + format_number(r.tail.parameter) +
           "," + format_number(r.distance) + "," + format_number(r.tail.empirical) + "," +
           format_number(r.tail.bound) + "," + format_number(r.tail.stderr_) + "\n";
  }
  return out;
}

}  // namespace chainlab::io
