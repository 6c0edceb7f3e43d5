#include "chainlab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

#include "chainlab/chaining.hpp"
#include "chainlab/concentration.hpp"
#include "chainlab/errors.hpp"
#include "chainlab/gp.hpp"
#include "chainlab/metric.hpp"
#include "chainlab/parallel.hpp"
#include "chainlab/rng.hpp"
#include "chainlab/spinglass.hpp"
#include "chainlab/transport.hpp"

namespace chainlab::experiment {

namespace fs = std::filesystem;
using io::Json;
using io::format_number;

namespace {

// Child-seed labels; a suite sees the same seed whether run alone or under "all".
constexpr std::uint64_t kChainingLabel = 1;
constexpr std::uint64_t kConcentrationLabel = 2;
constexpr std::uint64_t kTransportLabel = 3;
constexpr std::uint64_t kSkLabel = 4;
constexpr std::uint64_t kGenerateLabel = 5;

const std::vector<Suite> kAllSuites = {Suite::chaining, Suite::concentration, Suite::transport,
                                       Suite::sk};

std::string fmt(double v) { return format_number(v); }

// Short form for check names ("0.3" rather than "0.29999999999999999").
std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Typed, range-checked access to one parameter block. Every key must be
// consumed; leftovers are reported as unknown parameters.
class ParamBlock {
 public:
  ParamBlock(const Json& block, std::string where) : block_(block), where_(std::move(where)) {
    if (!block_.is_null() && !block_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  double number(const std::string& key, double fallback, double lo, double hi) {
    const double v = get<double>(key, fallback);
    if (!std::isfinite(v) || v < lo || v > hi) {
      throw ConfigError(where_ + "." + key + " = " + fmt(v) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
    }
    return v;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t lo, std::size_t hi) {
    const auto v = get<std::size_t>(key, fallback);
    check_count(key, v, lo, hi);
    return v;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback, double lo,
                              double hi) {
    auto v = get<std::vector<double>>(key, std::move(fallback));
    if (v.empty()) throw ConfigError(where_ + "." + key + " must not be empty");
    for (double x : v) {
      if (!std::isfinite(x) || x < lo || x > hi) {
        throw ConfigError(where_ + "." + key + " entry " + fmt(x) + " outside [" + fmt(lo) + ", " + fmt(hi) + "]");
      }
    }
    return v;
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback,
                                  std::size_t lo, std::size_t hi) {
    auto v = get<std::vector<std::size_t>>(key, std::move(fallback));
    if (v.empty()) throw ConfigError(where_ + "." + key + " must not be empty");
    for (std::size_t x : v) check_count(key, x, lo, hi);
    return v;
  }

  std::vector<std::string> strings(const std::string& key) {
    return get<std::vector<std::string>>(key, {});
  }

  std::string text(const std::string& key, std::string fallback) {
    return get<std::string>(key, std::move(fallback));
  }

  void finish() const {
    if (!block_.is_object()) return;
    for (const auto& [key, value] : block_.items()) {
      if (used_.count(key) == 0) throw ConfigError("unknown parameter " + where_ + "." + key);
    }
  }

 private:
  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!block_.is_object() || !block_.contains(key)) return fallback;
    const Json& v = block_.at(key);
    if constexpr (std::is_same_v<T, std::size_t>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError(where_ + "." + key + " must be a nonnegative integer");
      }
    }
    try {
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  void check_count(const std::string& key, std::size_t v, std::size_t lo, std::size_t hi) const {
    if (v < lo || v > hi) {
      throw ConfigError(where_ + "." + key + " = " + std::to_string(v) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
  }

  Json block_;
  std::string where_;
  std::set<std::string> used_;
};

// Module maxima, halved under scale=small.
std::size_t cap(std::size_t full, Scale s) { return s == Scale::small ? full / 2 : full; }
std::size_t pick(Scale s, std::size_t small, std::size_t full) { return s == Scale::small ? small : full; }

const Json& block_for(const ExperimentConfig& c, Suite s) {
  static const Json empty;
  const std::string key = to_string(s);
  if (c.params.is_object() && c.params.contains(key)) return c.params.at(key);
  return empty;
}

// ---------------------------------------------------------------- chaining

struct ChainingParams {
  std::size_t instances, n, dim, samples, pair_samples;
  std::vector<double> tail_us, pair_lambdas;
  std::vector<std::string> spec_files;
};

ChainingParams chaining_params(const ExperimentConfig& c) {
  ParamBlock b(block_for(c, Suite::chaining), "chaining");
  const Scale s = c.scale;
  ChainingParams p;
  p.instances = b.count("instances", pick(s, 4, 10), 0, 1000);
  p.n = b.count("n", pick(s, 8, 16), 2, cap(metric::kExactCoverMaxPoints, s));
  p.dim = b.count("dim", pick(s, 4, 8), 1, 256);
  p.samples = b.count("samples", pick(s, 20000, 50000), 100, cap(20000000, s));
  p.pair_samples = b.count("pair_samples", pick(s, 50000, 100000), 100, cap(20000000, s));
  p.tail_us = b.numbers("tail_u", {4.0, 5.0, 6.0}, 0.0, 100.0);
  p.pair_lambdas = b.numbers("pair_lambda", {0.5, 1.0, 2.0}, 0.0, 100.0);
  p.spec_files = b.strings("spec_files");
  b.finish();
  return p;
}

std::string chaining_instance_label(const ChainingParams& p, std::size_t i) {
  if (i < p.instances) return "i" + std::to_string(i);
  return "file" + std::to_string(i - p.instances);
}

std::vector<std::string> chaining_names_for(const ChainingParams& p, std::size_t i, std::size_t n) {
  const std::string pre = "chaining/" + chaining_instance_label(p, i) + "/";
  std::vector<std::string> out = {pre + "sudakov_le_dudley", pre + "esup_over_gamma2"};
  if (n <= chaining::kExactGamma2MaxPoints) out.push_back(pre + "gamma2_exact_le_greedy");
  for (double u : p.tail_us) out.push_back(pre + "chain_tail/u" + tag(u));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> probe_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}};
  if (n > 2) pairs.emplace_back(0, n - 1);
  return pairs;
}

std::vector<gp::GaussianProcessSpec> chaining_specs(const ChainingParams& p, std::uint64_t seed) {
  std::vector<gp::GaussianProcessSpec> specs;
  for (std::size_t i = 0; i < p.instances; ++i) {
    Philox4x32 rng(seed, i);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(p.n), static_cast<Eigen::Index>(p.dim));
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      for (Eigen::Index col = 0; col < pts.cols(); ++col) pts(r, col) = rng.normal();
      // odd instances live on the unit sphere, even ones are Gaussian clouds
      if (i % 2 == 1) pts.row(r).normalize();
    }
    specs.push_back(gp::GaussianProcessSpec::from_embedding(std::move(pts)));
  }
  return specs;
}

std::vector<gp::GaussianProcessSpec> load_chaining_files(const ChainingParams& p, Scale s) {
  std::vector<gp::GaussianProcessSpec> specs;
  for (const auto& f : p.spec_files) {
    gp::GaussianProcessSpec spec = [&] {
      try {
        return io::load_gp_spec(f);
      } catch (const InvalidArgument& e) {
        throw ConfigError("chaining.spec_files " + f + ": " + e.what());
      } catch (const DegenerateCovariance& e) {
        throw ConfigError("chaining.spec_files " + f + ": " + e.what());
      }
    }();
    if (spec.size() < 2 || spec.size() > cap(metric::kExactCoverMaxPoints, s)) {
      throw ConfigError("chaining.spec_files " + f + " has " + std::to_string(spec.size()) +
                        " points, outside the allowed range");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<std::string> chaining_plan(const ExperimentConfig& c) {
  const ChainingParams p = chaining_params(c);
  const auto files = load_chaining_files(p, c.scale);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < p.instances + files.size(); ++i) {
    const std::size_t n = i < p.instances ? p.n : files[i - p.instances].size();
    for (auto& name : chaining_names_for(p, i, n)) out.push_back(std::move(name));
  }
  if (p.instances > 0) {
    for (auto [a, b] : probe_pairs(p.n)) {
      for (double l : p.pair_lambdas) {
        out.push_back("chaining/pair_tail/" + std::to_string(a) + "-" + std::to_string(b) + "/l" + tag(l));
      }
    }
  }
  return out;
}

void run_chaining(const ExperimentConfig& c, RunOutput& out) {
  const ChainingParams p = chaining_params(c);
  const std::uint64_t seed = derive_seed(c.seed, kChainingLabel);
  auto specs = chaining_specs(p, seed);
  for (auto& s : load_chaining_files(p, c.scale)) specs.push_back(std::move(s));

  std::string table =
      "instance,n,esup,esup_stderr,sudakov,dudley,gamma2_greedy,gamma2_exact,S,ratio_gamma2,"
      "ratio_dudley,ratio_sudakov\n";
  auto& records = out.report.records;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const std::string label = chaining_instance_label(p, i);
    const std::string pre = "chaining/" + label + "/";
    const auto r = chaining::sandwich_report(spec, p.samples, derive_seed(seed, 1000 + i), p.tail_us);
    const Json params{{"instance", label}, {"n", spec.size()}, {"samples", p.samples}};

    records.push_back({pre + "sudakov_le_dudley", params, r.sudakov, r.dudley,
                       r.sudakov <= r.dudley * (1.0 + 1e-12) + 1e-300});
    const double ratio = r.ratio_gamma2();
    Json rp = params;
    rp["range"] = {0.05, 5.0};
    records.push_back({pre + "esup_over_gamma2", rp, ratio, 5.0, ratio >= 0.05 && ratio <= 5.0});
    if (r.gamma2_exact) {
      records.push_back({pre + "gamma2_exact_le_greedy", params, *r.gamma2_exact, r.gamma2_greedy,
                         *r.gamma2_exact <= r.gamma2_greedy * (1.0 + 1e-12)});
    }
    for (const auto& t : r.chain_tail) {
      Json tp = params;
      tp["u"] = t.u;
      tp["threshold"] = t.threshold;
      records.push_back({pre + "chain_tail/u" + tag(t.u), tp, t.tail.empirical,
                         t.tail.bound + kViolationSigmas * t.tail.stderr_, !t.tail.violation});
    }
    table += label + "," + std::to_string(spec.size()) + "," + fmt(r.esup_mc.mean) + "," +
             fmt(r.esup_mc.std_error) + "," + fmt(r.sudakov) + "," + fmt(r.dudley) + "," +
             fmt(r.gamma2_greedy) + "," + (r.gamma2_exact ? fmt(*r.gamma2_exact) : "") + "," +
             fmt(r.S) + "," + fmt(r.ratio_gamma2()) + "," + fmt(r.ratio_dudley()) + "," +
             fmt(r.ratio_sudakov()) + "\n";
  }
  out.tables["chaining_instances.csv"] = table;

  std::vector<gp::PairTailRecord> pairs;
  if (p.instances > 0) {
    pairs = gp::pairwise_tail_check(specs.front(), probe_pairs(p.n), p.pair_lambdas, p.pair_samples,
                                    derive_seed(seed, 999));
    for (const auto& pr : pairs) {
      const Json params{{"instance", "i0"}, {"lambda", pr.tail.parameter}, {"distance", pr.distance},
                        {"samples", p.pair_samples}};
      records.push_back({"chaining/pair_tail/" + std::to_string(pr.a) + "-" + std::to_string(pr.b) +
                             "/l" + tag(pr.tail.parameter),
                         params, pr.tail.empirical,
                         pr.tail.bound + kViolationSigmas * pr.tail.stderr_, !pr.tail.violation});
    }
  }
  out.tables["chaining_pair_tails.csv"] = io::pair_tails_csv(pairs);
}

// ----------------------------------------------------------- concentration

struct ConcentrationParams {
  std::size_t trials, vectors, vector_dim, sphere_n;
  std::vector<std::size_t> gauss_n;
  std::vector<double> vector_t, sphere_eps, gauss_t;
  std::size_t convex_instances, convex_q, convex_N, dual_directions;
  std::vector<double> enlargement_t;
  std::vector<double> two_smooth_p;
  std::size_t two_smooth_dim, two_smooth_trials;
  std::vector<std::string> product_files;
};

ConcentrationParams concentration_params(const ExperimentConfig& c) {
  ParamBlock b(block_for(c, Suite::concentration), "concentration");
  const Scale s = c.scale;
  ConcentrationParams p;
  p.trials = b.count("trials", pick(s, 50000, 100000), 100, cap(10000000, s));
  p.vectors = b.count("vectors", pick(s, 10, 20), 1, cap(1000, s));
  p.vector_dim = b.count("vector_dim", pick(s, 5, 10), 1, cap(1000, s));
  p.vector_t = b.numbers("vector_t", {1.0, 2.0, 3.0, 4.0}, 0.0, 1e6);
  p.sphere_n = b.count("sphere_n", pick(s, 50, 100), 2, cap(10000, s));
  p.sphere_eps = b.numbers("sphere_eps", {0.1, 0.2, 0.3}, 0.0, 2.0);
  // several dimensions, since the Gaussian bound does not depend on n
  p.gauss_n = b.counts("gauss_n", s == Scale::small ? std::vector<std::size_t>{2, 32, 256}
                                                    : std::vector<std::size_t>{2, 64, 512},
                       1, cap(10000, s));
  p.gauss_t = b.numbers("gauss_t", {1.0, 2.0, 3.0}, 0.0, 1e6);
  p.convex_instances = b.count("convex_instances", pick(s, 10, 20), 0, 100000);
  p.convex_q = b.count("convex_q", 2, 2, 255);
  p.convex_N = b.count("convex_N", 4, 1, 20);
  p.enlargement_t = b.numbers("enlargement_t", {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}, 0.0, 1e6);
  p.dual_directions = b.count("dual_directions", pick(s, 50, 200), 1, 100000);
  p.two_smooth_p = b.numbers("two_smooth_p", {2.0, 3.0, 4.0}, 2.0, 1e3);
  p.two_smooth_dim = b.count("two_smooth_dim", pick(s, 3, 5), 1, cap(1000, s));
  p.two_smooth_trials = b.count("two_smooth_trials", pick(s, 5000, 20000), 1, cap(10000000, s));
  p.product_files = b.strings("product_files");
  b.finish();

  const double space = std::pow(static_cast<double>(p.convex_q), static_cast<double>(p.convex_N));
  const double limit = static_cast<double>(cap(static_cast<std::size_t>(concentration::kExhaustiveLimit), s));
  if (p.convex_instances > 0 && (space > limit || space < 2.0)) {
    throw ConfigError("concentration.convex_q^convex_N = " + fmt(space) + " outside [2, " + fmt(limit) + "]");
  }
  return p;
}

std::vector<concentration::ProductSpaceInstance> load_product_files(const ConcentrationParams& p,
                                                                    Scale s) {
  std::vector<concentration::ProductSpaceInstance> out;
  for (const auto& f : p.product_files) {
    try {
      auto inst = io::product_instance_from_json(io::parse_json(io::read_text_file(f), f));
      if (inst.space_size() > cap(static_cast<std::size_t>(concentration::kExhaustiveLimit), s)) {
        throw ConfigError("product space too large for exhaustive checks");
      }
      out.push_back(std::move(inst));
    } catch (const InvalidArgument& e) {
      throw ConfigError("concentration.product_files " + f + ": " + e.what());
    } catch (const EmptySet& e) {
      throw ConfigError("concentration.product_files " + f + ": " + e.what());
    }
  }
  return out;
}

// Random product-space instance: |A| uniform in [1, q^N - 1], A a uniform subset of that size.
concentration::ProductSpaceInstance random_product_instance(std::size_t q, std::size_t n,
                                                            Philox4x32& rng) {
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < n; ++i) space *= q;
  const std::uint64_t size = 1 + rng.below(space - 1);
  std::vector<std::uint64_t> idx(space);
  std::iota(idx.begin(), idx.end(), std::uint64_t{0});
  for (std::uint64_t i = 0; i < size; ++i) std::swap(idx[i], idx[i + rng.below(space - i)]);
  idx.resize(size);
  std::sort(idx.begin(), idx.end());

  // decode with a throwaway instance so the digit order matches point_at()
  const auto proto = concentration::ProductSpaceInstance::uniform(q, n, {concentration::Point(n, 0)});
  std::vector<concentration::Point> set;
  set.reserve(size);
  for (auto k : idx) set.push_back(proto.point_at(k));
  return concentration::ProductSpaceInstance::uniform(q, n, std::move(set));
}

std::string law_name(concentration::BoundedLaw l) {
  return l == concentration::BoundedLaw::rademacher ? "rademacher" : "uniform";
}
std::string norm_name(concentration::VectorNorm v) {
  return v == concentration::VectorNorm::l2 ? "l2" : "linf";
}

struct TailCheckSpec {
  std::string name;
  std::vector<double> grid;
};

std::vector<TailCheckSpec> tail_check_specs(const ConcentrationParams& p) {
  std::vector<TailCheckSpec> out;
  for (auto norm : {concentration::VectorNorm::l2, concentration::VectorNorm::linf}) {
    for (auto law : {concentration::BoundedLaw::rademacher, concentration::BoundedLaw::uniform}) {
      out.push_back({"vector_sum/" + norm_name(norm) + "/" + law_name(law), p.vector_t});
    }
  }
  out.push_back({"sphere/coordinate", p.sphere_eps});
  out.push_back({"sphere/distance_to_point", p.sphere_eps});
  for (const char* f : {"euclidean_norm", "max_coordinate", "distance_to_point"}) {
    for (std::size_t n : p.gauss_n) {
      out.push_back({"gauss/" + std::string(f) + "/n" + std::to_string(n), p.gauss_t});
    }
  }
  return out;
}

std::vector<std::string> convex_names(const ConcentrationParams& p, const std::string& label) {
  const std::string pre = "concentration/convex/" + label + "/";
  std::vector<std::string> out = {pre + "exp_moment"};
  for (double t : p.enlargement_t) out.push_back(pre + "enlargement/t" + tag(t));
  out.push_back(pre + "dual");
  return out;
}

std::vector<std::string> concentration_plan(const ExperimentConfig& c) {
  const ConcentrationParams p = concentration_params(c);
  const auto files = load_product_files(p, c.scale);
  std::vector<std::string> out;
  for (const auto& spec : tail_check_specs(p)) {
    for (double t : spec.grid) out.push_back("concentration/" + spec.name + "/" + tag(t));
  }
  for (std::size_t i = 0; i < p.convex_instances + files.size(); ++i) {
    const std::string label = i < p.convex_instances ? "i" + std::to_string(i)
                                                     : "file" + std::to_string(i - p.convex_instances);
    for (auto& n : convex_names(p, label)) out.push_back(std::move(n));
  }
  for (double q : p.two_smooth_p) out.push_back("concentration/two_smooth/p" + tag(q));
  return out;
}

void run_concentration(const ExperimentConfig& c, RunOutput& out) {
  namespace cc = concentration;
  const ConcentrationParams p = concentration_params(c);
  const std::uint64_t seed = derive_seed(c.seed, kConcentrationLabel);
  auto& records = out.report.records;
  std::string table = "check,parameter,empirical,bound,stderr,verdict\n";

  auto emit = [&](const std::string& name, const cc::TailReport& r, const Json& base) {
    for (const auto& t : r.asserted_tail()) {
      Json params = base;
      params["parameter"] = t.parameter;
      params["center"] = r.asserted == cc::Center::median ? "median" : "mean";
      params["trials"] = r.trials;
      records.push_back({"concentration/" + name + "/" + tag(t.parameter), params, t.empirical,
                         t.bound + kViolationSigmas * t.stderr_, !t.violation});
      table += name + "," + fmt(t.parameter) + "," + fmt(t.empirical) + "," + fmt(t.bound) + "," +
               fmt(t.stderr_) + "," + (t.violation ? "fail" : "pass") + "\n";
    }
    // the other centering is reported for comparison only
    const auto& other = r.asserted == cc::Center::median ? r.mean_tail : r.median_tail;
    const std::string suffix = r.asserted == cc::Center::median ? "/mean_centered" : "/median_centered";
    for (const auto& t : other) {
      table += name + suffix + "," + fmt(t.parameter) + "," + fmt(t.empirical) + "," + fmt(t.bound) +
               "," + fmt(t.stderr_) + ",info\n";
    }
  };

  // vector sums
  {
    Philox4x32 rng(seed, 0);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(p.vectors), static_cast<Eigen::Index>(p.vector_dim));
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal();
    }
    std::uint64_t k = 10;
    for (auto norm : {cc::VectorNorm::l2, cc::VectorNorm::linf}) {
      for (auto law : {cc::BoundedLaw::rademacher, cc::BoundedLaw::uniform}) {
        const auto r = cc::vector_sum_tail_check(v, norm, law, p.trials, derive_seed(seed, k++), p.vector_t);
        emit("vector_sum/" + norm_name(norm) + "/" + law_name(law), r,
             Json{{"vectors", p.vectors}, {"dim", p.vector_dim}, {"sigma", r.scale}});
      }
    }
  }
  {
    const auto a = cc::sphere_tail_check(p.sphere_n, cc::SphereFunctional::coordinate, p.trials,
                                         derive_seed(seed, 20), p.sphere_eps);
    emit("sphere/coordinate", a, Json{{"n", p.sphere_n}});
    const auto b = cc::sphere_tail_check(p.sphere_n, cc::SphereFunctional::distance_to_point, p.trials,
                                         derive_seed(seed, 21), p.sphere_eps);
    emit("sphere/distance_to_point", b, Json{{"n", p.sphere_n}});
  }
  {
    const std::pair<cc::GaussFunctional, const char*> fs[] = {
        {cc::GaussFunctional::euclidean_norm, "gauss/euclidean_norm"},
        {cc::GaussFunctional::max_coordinate, "gauss/max_coordinate"},
        {cc::GaussFunctional::distance_to_point, "gauss/distance_to_point"}};
    std::uint64_t k = 30;
    for (const auto& [f, name] : fs) {
      for (std::size_t n : p.gauss_n) {
        emit(std::string(name) + "/n" + std::to_string(n),
             cc::gauss_tail_check(n, f, p.trials, derive_seed(seed, k++), p.gauss_t), Json{{"n", n}});
      }
    }
  }
  out.tables["concentration_tails.csv"] = table;

  // convex distance, exhaustive over the product space
  std::vector<cc::ProductSpaceInstance> instances;
  {
    Philox4x32 rng(derive_seed(seed, 40), 0);
    for (std::size_t i = 0; i < p.convex_instances; ++i) {
      instances.push_back(random_product_instance(p.convex_q, p.convex_N, rng));
    }
    for (auto& f : load_product_files(p, c.scale)) instances.push_back(std::move(f));
  }
  std::string convex_table = "instance,q,N,set_size,check,parameter,value,bound,verdict\n";
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    const std::string label = i < p.convex_instances ? "i" + std::to_string(i)
                                                     : "file" + std::to_string(i - p.convex_instances);
    const std::string pre = "concentration/convex/" + label + "/";
    const Json base{{"q", inst.alphabet()}, {"N", inst.factors()}, {"set_size", inst.set().size()}};
    const std::string row_pre = label + "," + std::to_string(inst.alphabet()) + "," +
                                std::to_string(inst.factors()) + "," +
                                std::to_string(inst.set().size()) + ",";
    const auto table_fc = cc::convex_distance_table(inst);

    const auto em = cc::check_exp_moment(inst, table_fc);
    const bool em_ok = em.margin >= -1e-9;
    records.push_back({pre + "exp_moment", base, em.lhs, em.rhs, em_ok});
    convex_table += row_pre + "exp_moment,," + fmt(em.lhs) + "," + fmt(em.rhs) + "," + (em_ok ? "pass" : "fail") + "\n";

    for (double t : p.enlargement_t) {
      const auto en = cc::enlargement_measure(inst, table_fc, t);
      Json params = base;
      params["t"] = t;
      records.push_back({pre + "enlargement/t" + tag(t), params, en.measure, en.corollary_bound, en.holds});
      convex_table += row_pre + "enlargement," + fmt(t) + "," + fmt(en.measure) + "," +
                      fmt(en.corollary_bound) + "," + (en.holds ? "pass" : "fail") + "\n";
    }

    // probe the point farthest (in f_c) from A with t at half that distance
    const auto far = static_cast<std::uint64_t>(
        std::max_element(table_fc.begin(), table_fc.end()) - table_fc.begin());
    const double t = 0.5 * table_fc[far];
    const auto dc = cc::dual_check(inst, inst.point_at(far), t, p.dual_directions, derive_seed(derive_seed(seed, 50), i));
    Json params = base;
    params["t"] = t;
    params["point_index"] = far;
    params["directions"] = dc.directions_checked;
    records.push_back({pre + "dual", params, dc.convex_distance, t, dc.ok});
    convex_table += row_pre + "dual," + fmt(t) + "," + fmt(dc.convex_distance) + "," + fmt(t) + "," +
                    (dc.ok ? "pass" : "fail") + "\n";
  }
  out.tables["concentration_convex.csv"] = convex_table;

  std::string smooth_table = "p,dim,trials,constant,max_violation,verdict\n";
  std::uint64_t k = 60;
  for (double q : p.two_smooth_p) {
    const auto r = cc::two_smooth_check(q, p.two_smooth_dim, p.two_smooth_trials, derive_seed(seed, k++));
    const bool ok = r.max_violation <= 1e-10;
    records.push_back({"concentration/two_smooth/p" + tag(q),
                       Json{{"p", q}, {"dim", p.two_smooth_dim}, {"trials", r.trials}, {"C", r.constant}},
                       r.max_violation, 1e-10, ok});
    smooth_table += fmt(q) + "," + std::to_string(p.two_smooth_dim) + "," + std::to_string(r.trials) +
                    "," + fmt(r.constant) + "," + fmt(r.max_violation) + "," + (ok ? "pass" : "fail") + "\n";
  }
  out.tables["concentration_two_smooth.csv"] = smooth_table;
}

// --------------------------------------------------------------- transport

struct TransportParams {
  std::size_t m, perturbed;
  double half_width, shift, tolerance;
};

TransportParams transport_params(const ExperimentConfig& c) {
  ParamBlock b(block_for(c, Suite::transport), "transport");
  const Scale s = c.scale;
  TransportParams p;
  p.m = b.count("m", pick(s, 201, 401), 41, cap(transport::kMaxTotalAtoms / 2, s));
  if (p.m % 2 == 0) throw ConfigError("transport.m must be odd");
  p.half_width = b.number("L", 8.0, 6.0, 100.0);
  p.shift = b.number("shift", 0.5, -3.0, 3.0);
  p.perturbed = b.count("perturbed", pick(s, 10, 20), 0, 10000);
  // T on a grid of spacing h sits about h^2/6 above its continuum value
  const double h = 2.0 * p.half_width / static_cast<double>(p.m - 1);
  p.tolerance = b.number("tolerance", 1e-3 + h * h / 6.0, 0.0, 1.0);
  b.finish();
  return p;
}

std::vector<double> grid_points(std::size_t m, double half_width) {
  std::vector<double> x(m);
  const double den = static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    x[i] = half_width * (2.0 * static_cast<double>(i) - den) / den;
  }
  return x;
}

std::vector<std::string> transport_plan(const ExperimentConfig& c) {
  const TransportParams p = transport_params(c);
  std::vector<std::string> out = {"transport/shift/transport", "transport/shift/two_kl",
                                  "transport/shift/margin"};
  for (std::size_t i = 0; i < p.perturbed; ++i) out.push_back("transport/perturbed/" + std::to_string(i));
  return out;
}

void run_transport(const ExperimentConfig& c, RunOutput& out) {
  const TransportParams p = transport_params(c);
  const std::uint64_t seed = derive_seed(c.seed, kTransportLabel);
  const auto x = grid_points(p.m, p.half_width);
  auto& records = out.report.records;
  std::string table = "probe,index,T,bound,margin\n";
  const Json base{{"m", p.m}, {"L", p.half_width}};

  // density of N(a, 1) relative to N(0, 1): equality case of the inequality
  std::vector<double> density(p.m);
  const double a = p.shift;
  for (std::size_t i = 0; i < p.m; ++i) density[i] = std::exp(a * x[i] - a * a / 2.0);
  const auto shift = transport::t2_check(density, p.m, p.half_width);
  const double target = a * a;
  Json sp = base;
  sp["shift"] = a;
  sp["tolerance"] = p.tolerance;
  records.push_back({"transport/shift/transport", sp, shift.transport, target,
                     std::abs(shift.transport - target) <= p.tolerance});
  records.push_back({"transport/shift/two_kl", sp, shift.bound, target,
                     std::abs(shift.bound - target) <= p.tolerance});
  records.push_back({"transport/shift/margin", sp, shift.margin, -p.tolerance,
                     shift.margin >= -p.tolerance});
  table += "shift,0," + fmt(shift.transport) + "," + fmt(shift.bound) + "," + fmt(shift.margin) + "\n";

  // exp(b x + c cos(w x)) with random b, c, w
  const auto results = parallel_map(p.perturbed, [&](std::size_t i) {
    Philox4x32 rng(seed, i);
    const double b = 2.0 * rng.uniform() - 1.0;
    const double amp = rng.uniform() - 0.5;
    const double w = 0.5 + 1.5 * rng.uniform();
    std::vector<double> d(p.m);
    for (std::size_t j = 0; j < p.m; ++j) d[j] = std::exp(b * x[j] + amp * std::cos(w * x[j]));
    return std::make_pair(Json{{"slope", b}, {"amplitude", amp}, {"frequency", w}},
                          transport::t2_check(d, p.m, p.half_width));
  });
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [shape, r] = results[i];
    Json params = base;
    params["density"] = shape;
    params["tolerance"] = p.tolerance;
    records.push_back({"transport/perturbed/" + std::to_string(i), params, r.transport, r.bound,
                       r.margin >= -p.tolerance});
    table += "perturbed," + std::to_string(i) + "," + fmt(r.transport) + "," + fmt(r.bound) + "," +
             fmt(r.margin) + "\n";
  }
  out.tables["transport_t2.csv"] = table;
}

// ---------------------------------------------------------------------- sk

struct SkParams {
  std::vector<std::size_t> sizes;
  double beta, h;
  std::size_t n_disorder, convexity_points;
  std::string instance_file;
};

SkParams sk_params(const ExperimentConfig& c) {
  ParamBlock b(block_for(c, Suite::sk), "sk");
  const Scale s = c.scale;
  SkParams p;
  const std::vector<std::size_t> sizes =
      s == Scale::small ? std::vector<std::size_t>{4, 6, 8, 10} : std::vector<std::size_t>{8, 12, 16, 20};
  p.sizes = b.counts("N_list", sizes, 1, cap(spinglass::kMaxExactSpins, s));
  p.beta = b.number("beta", 0.5, 0.0, 50.0);
  p.h = b.number("h", 0.0, -50.0, 50.0);
  p.n_disorder = b.count("n_disorder", pick(s, 100, 200), 10, cap(1000000, s));
  p.convexity_points = b.count("convexity_points", 9, 3, 1000);
  p.instance_file = b.text("instance_file", "");
  b.finish();
  return p;
}

bool in_reference_regime(const SkParams& p) { return p.beta <= 1.0 && p.h == 0.0; }

std::optional<spinglass::SKInstance> load_sk_file(const SkParams& p, Scale s) {
  if (p.instance_file.empty()) return std::nullopt;
  try {
    auto inst = io::sk_instance_from_json(io::parse_json(io::read_text_file(p.instance_file), p.instance_file));
    if (inst.size() > cap(spinglass::kMaxExactSpins, s)) throw ConfigError("sk instance too large");
    return inst;
  } catch (const InvalidArgument& e) {
    throw ConfigError("sk.instance_file: " + std::string(e.what()));
  }
}

std::vector<std::string> sk_plan(const ExperimentConfig& c) {
  const SkParams p = sk_params(c);
  (void)load_sk_file(p, c.scale);
  std::vector<std::string> out;
  for (std::size_t n : p.sizes) {
    const std::string pre = "sk/N" + std::to_string(n) + "/";
    if (p.beta == 0.0) out.push_back(pre + "beta0_exact");
    if (p.h == 0.0) out.push_back(pre + "jensen_lower");
    if (in_reference_regime(p)) out.push_back(pre + "annealed_bound");
  }
  out.push_back("sk/convexity");
  return out;
}

void run_sk(const ExperimentConfig& c, RunOutput& out) {
  namespace sg = spinglass;
  const SkParams p = sk_params(c);
  const std::uint64_t seed = derive_seed(c.seed, kSkLabel);
  auto& records = out.report.records;
  std::string table = "N,beta,h,phi,stderr,reference,annealed_bound,gap\n";

  std::vector<sg::ParisiGapRow> rows;
  if (in_reference_regime(p)) {
    rows = sg::parisi_gap_report(p.beta, p.h, p.sizes, p.n_disorder, seed);
  } else {
    for (std::size_t n : p.sizes) {
      const auto est = sg::quenched_free_energy(n, p.beta, p.h, p.n_disorder, derive_seed(seed, n));
      sg::ParisiGapRow row;
      row.n_spins = n;
      row.phi = est.phi;
      row.std_error = est.std_error;
      row.reference = row.annealed = row.gap = std::numeric_limits<double>::quiet_NaN();
      rows.push_back(row);
    }
  }
  for (const auto& row : rows) {
    const std::string pre = "sk/N" + std::to_string(row.n_spins) + "/";
    const Json params{{"N", row.n_spins}, {"beta", p.beta}, {"h", p.h}, {"n_disorder", p.n_disorder}};
    if (p.beta == 0.0) {
      records.push_back({pre + "beta0_exact", params, row.phi, std::numbers::ln2,
                         std::abs(row.phi - std::numbers::ln2) <= 1e-12});
    }
    if (p.h == 0.0) {
      const double lo = std::numbers::ln2 - 1e-12;
      records.push_back({pre + "jensen_lower", params, row.phi, lo, row.phi >= lo});
    }
    if (in_reference_regime(p)) {
      records.push_back({pre + "annealed_bound", params, row.phi,
                         row.annealed + kViolationSigmas * row.std_error, row.below_annealed});
    }
    table += std::to_string(row.n_spins) + "," + fmt(p.beta) + "," + fmt(p.h) + "," + fmt(row.phi) +
             "," + fmt(row.std_error) + "," + fmt(row.reference) + "," + fmt(row.annealed) + "," +
             fmt(row.gap) + "\n";
  }
  out.tables["sk_free_energy.csv"] = table;

  const auto file = load_sk_file(p, c.scale);
  const sg::SKInstance inst =
      file ? *file : sg::SKInstance::random(*std::min_element(p.sizes.begin(), p.sizes.end()), p.h,
                                            derive_seed(seed, 7), 0);
  const double top = std::max(2.0 * p.beta, 1.0);
  std::vector<double> grid(p.convexity_points);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = top * static_cast<double>(i) / static_cast<double>(grid.size() - 1);
  }
  const double worst = sg::beta_convexity_check(inst, grid);
  records.push_back({"sk/convexity",
                     Json{{"N", inst.size()}, {"h", inst.field()}, {"beta_max", top},
                          {"points", grid.size()}, {"source", file ? "file" : "random"}},
                     worst, -1e-9, worst >= -1e-9});
}

// ------------------------------------------------------------------ common

std::vector<Suite> selected(Suite s) {
  return s == Suite::all ? kAllSuites : std::vector<Suite>{s};
}

std::vector<std::string> plan_for(Suite s, const ExperimentConfig& c) {
  switch (s) {
    case Suite::chaining: return chaining_plan(c);
    case Suite::concentration: return concentration_plan(c);
    case Suite::transport: return transport_plan(c);
    case Suite::sk: return sk_plan(c);
    case Suite::all: break;
  }
  return {};
}

void run_suite(Suite s, const ExperimentConfig& c, RunOutput& out) {
  switch (s) {
    case Suite::chaining: run_chaining(c, out); break;
    case Suite::concentration: run_concentration(c, out); break;
    case Suite::transport: run_transport(c, out); break;
    case Suite::sk: run_sk(c, out); break;
    case Suite::all: break;
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void check_params_object(const ExperimentConfig& c) {
  if (!c.params.is_object()) throw ConfigError("params must be an object");
  for (const auto& [key, value] : c.params.items()) {
    const Suite s = parse_suite(key);
    if (s == Suite::all) throw ConfigError("params block \"all\" is not allowed");
  }
}

}  // namespace

std::string to_string(Suite suite) {
  switch (suite) {
    case Suite::chaining: return "chaining";
    case Suite::concentration: return "concentration";
    case Suite::transport: return "transport";
    case Suite::sk: return "sk";
    case Suite::all: return "all";
  }
  return "all";
}

std::string to_string(Scale scale) { return scale == Scale::small ? "small" : "full"; }

Suite parse_suite(const std::string& name) {
  for (Suite s : {Suite::chaining, Suite::concentration, Suite::transport, Suite::sk, Suite::all}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown suite \"" + name + "\"");
}

Scale parse_scale(const std::string& name) {
  if (name == "small") return Scale::small;
  if (name == "full") return Scale::full;
  throw ConfigError("unknown scale \"" + name + "\" (expected small or full)");
}

namespace {

bool nonnegative_integer(const Json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  Json extra = Json::object();
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "suite") {
        c.suite = parse_suite(value.get<std::string>());
      } else if (key == "seed") {
        if (!nonnegative_integer(value)) throw ConfigError("seed must be a nonnegative integer");
        c.seed = value.get<std::uint64_t>();
      } else if (key == "scale") {
        c.scale = parse_scale(value.get<std::string>());
      } else if (key == "output_dir") {
        c.output_dir = value.get<std::string>();
      } else if (key == "workers") {
        if (!nonnegative_integer(value)) throw ConfigError("workers must be a nonnegative integer");
        c.workers = value.get<unsigned>();
      } else if (key == "params") {
        c.params = value;
      } else {
        extra[key] = value;
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!extra.empty()) {
    if (c.suite == Suite::all) {
      throw ConfigError("unknown config key \"" + extra.begin().key() + "\"");
    }
    if (!c.params.is_object()) throw ConfigError("params must be an object");
    Json& block = c.params[to_string(c.suite)];
    if (block.is_null()) block = Json::object();
    for (const auto& [key, value] : extra.items()) {
      if (block.contains(key)) throw ConfigError("parameter \"" + key + "\" given twice");
      block[key] = value;
    }
  }
  check_params_object(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(io::parse_json(text, path.string()));
}

bool RunReport::pass() const noexcept { return failures() == 0; }

std::size_t RunReport::failures() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return !r.pass; }));
}

std::vector<std::string> check_plan(const ExperimentConfig& config) {
  check_params_object(config);
  std::vector<std::string> out;
  for (Suite s : selected(config.suite)) {
    for (auto& n : plan_for(s, config)) out.push_back(std::move(n));
  }
  return out;
}

RunOutput run(const ExperimentConfig& config) {
  const auto plan = check_plan(config);
  set_worker_count(config.workers);
  RunOutput out;
  out.report.suite = to_string(config.suite);
  out.report.seed = config.seed;
  out.report.scale = to_string(config.scale);
  out.report.started = utc_now();
  for (Suite s : selected(config.suite)) run_suite(s, config, out);
  out.report.finished = utc_now();

  if (out.report.records.size() != plan.size()) {
    throw std::logic_error("recorded " + std::to_string(out.report.records.size()) +
                           " checks but the plan declares " + std::to_string(plan.size()));
  }
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (out.report.records[i].name != plan[i]) {
      throw std::logic_error("record " + out.report.records[i].name + " does not match plan entry " + plan[i]);
    }
  }
  return out;
}

Json report_to_json(const RunReport& report) {
  Json records = Json::array();
  for (const auto& r : report.records) {
    records.push_back(Json{{"name", r.name},
                           {"params", r.params},
                           {"value", r.value},
                           {"bound", r.bound},
                           {"verdict", r.pass ? "pass" : "fail"}});
  }
  return Json{{"suite", report.suite},
              {"seed", report.seed},
              {"scale", report.scale},
              {"started", report.started},
              {"finished", report.finished},
              {"checks", report.records.size()},
              {"failures", report.failures()},
              {"pass", report.pass()},
              {"records", records}};
}

void write_outputs(const ExperimentConfig& config, const RunOutput& output) {
  for (const auto& [name, body] : output.tables) io::write_text_file(config.output_dir / name, body);
  io::write_text_file(config.output_dir / "report.json", report_to_json(output.report).dump(2) + "\n");
}

int run_to_directory(const ExperimentConfig& config, std::string& log) {
  RunOutput output;
  try {
    output = run(config);
  } catch (const ConfigError& e) {
    log = std::string("config error: ") + e.what();
    return kExitConfigError;
  } catch (const IoError& e) {
    log = std::string("io error: ") + e.what();
    return kExitIoError;
  } catch (const Error& e) {
    // parameters the plan accepted but a module rejected
    log = std::string("config error: ") + e.what();
    return kExitConfigError;
  }
  try {
    write_outputs(config, output);
  } catch (const IoError& e) {
    log = std::string("io error: ") + e.what();
    return kExitIoError;
  }
  const auto& r = output.report;
  log = std::to_string(r.records.size()) + " checks, " + std::to_string(r.failures()) + " failed";
  for (const auto& rec : r.records) {
    if (!rec.pass) log += "\nFAIL " + rec.name + ": value " + fmt(rec.value) + ", bound " + fmt(rec.bound);
  }
  return r.pass() ? kExitPass : kExitCheckFailure;
}

std::vector<std::string> instance_kinds() {
  return {"gp-random-embed", "gp-random-cov", "product-space", "sk"};
}

fs::path generate_instance(const std::string& kind, const Json& params, std::uint64_t seed,
                           const fs::path& out_dir) {
  Philox4x32 rng(derive_seed(seed, kGenerateLabel), 0);
  ParamBlock b(params, kind);
  if (kind == "gp-random-embed") {
    const auto n = b.count("n", 16, 1, metric::kExactCoverMaxPoints);
    const auto dim = b.count("dim", 8, 1, 4096);
    const std::string cloud = b.text("cloud", "gaussian");
    b.finish();
    if (cloud != "gaussian" && cloud != "sphere") throw ConfigError("cloud must be gaussian or sphere");
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = rng.normal();
      if (cloud == "sphere") pts.row(i).normalize();
    }
    const fs::path path = out_dir / "gp_embed.csv";
    io::write_matrix_csv(path, pts);
    return path;
  }
  if (kind == "gp-random-cov") {
    const auto n = b.count("n", 16, 1, metric::kExactCoverMaxPoints);
    const auto m = b.count("m", 8, 1, 4096);
    b.finish();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
    }
    Eigen::MatrixXd cov = a * a.transpose() / static_cast<double>(m);
    cov = 0.5 * (cov + cov.transpose()).eval();
    const fs::path path = out_dir / "gp_cov.json";
    io::write_text_file(path, io::gp_spec_to_json(gp::GaussianProcessSpec::from_covariance(cov)).dump(2) + "\n");
    return path;
  }
  if (kind == "product-space") {
    const auto q = b.count("q", 2, 2, 255);
    const auto n = b.count("N", 4, 1, 64);
    b.finish();
    const double space = std::pow(static_cast<double>(q), static_cast<double>(n));
    if (space > static_cast<double>(concentration::kExhaustiveLimit)) {
      throw ConfigError("q^N = " + fmt(space) + " exceeds the exhaustive limit");
    }
    const auto inst = random_product_instance(q, n, rng);
    const fs::path path = out_dir / "product_space.json";
    io::write_text_file(path, io::product_instance_to_json(inst).dump() + "\n");
    return path;
  }
  if (kind == "sk") {
    const auto n = b.count("N", 20, 1, spinglass::kMaxExactSpins);
    const double h = b.number("h", 0.0, -1e6, 1e6);
    b.finish();
    const auto inst = spinglass::SKInstance::random(n, h, derive_seed(seed, kGenerateLabel), 0);
    const fs::path path = out_dir / "sk.json";
    io::write_text_file(path, io::sk_instance_to_json(inst).dump() + "\n");
    return path;
  }
  throw ConfigError("unknown instance kind \"" + kind + "\"");
}

}  // namespace chainlab::experiment
