#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace oracle {

namespace {

bool covers(const Eigen::MatrixXd& d, const std::vector<std::size_t>& centers, double eps) {
  for (Eigen::Index t = 0; t < d.rows(); ++t) {
    bool hit = false;
    for (auto c : centers) hit = hit || d(t, static_cast<Eigen::Index>(c)) <= eps;
    if (!hit) return false;
  }
  return true;
}

// Visits all k-subsets of {0..n-1} in lexicographic order until fn returns true.
bool for_each_subset(std::size_t n, std::size_t k,
                     const std::function<bool(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    if (fn(idx)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2 == 1) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
double big_phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::size_t covering_number(const Eigen::MatrixXd& dist, double eps) {
  const auto n = static_cast<std::size_t>(dist.rows());
  for (std::size_t k = 1; k <= n; ++k) {
    if (for_each_subset(n, k, [&](const std::vector<std::size_t>& c) { return covers(dist, c, eps); })) {
      return k;
    }
  }
  return n;
}

Profile entropy_profile(const Eigen::MatrixXd& dist) {
  std::set<double> distinct;
  for (Eigen::Index i = 0; i < dist.rows(); ++i) {
    for (Eigen::Index j = 0; j < dist.cols(); ++j) {
      if (dist(i, j) > 0.0) distinct.insert(dist(i, j));
    }
  }
  Profile p;
  p.breakpoints.assign(distinct.begin(), distinct.end());
  double lo = 0.0;
  for (double b : p.breakpoints) {
    p.counts.push_back(covering_number(dist, 0.5 * (lo + b)));
    lo = b;
  }
  p.counts.push_back(1);
  return p;
}

double dudley(const Profile& p) {
  double area = 0.0;
  double lo = 0.0;
  for (std::size_t j = 0; j < p.breakpoints.size(); ++j) {
    area += (p.breakpoints[j] - lo) * std::sqrt(std::log2(static_cast<double>(p.counts[j])));
    lo = p.breakpoints[j];
  }
  return area;
}

double sudakov(const Profile& p) {
  double best = 0.0;
  for (std::size_t j = 0; j < p.breakpoints.size(); ++j) {
    best = std::max(best, p.breakpoints[j] * std::sqrt(std::log2(static_cast<double>(p.counts[j]))));
  }
  return best;
}

double gamma2_small(const Eigen::MatrixXd& dist) {
  const auto n = static_cast<std::size_t>(dist.rows());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t0 = 0; t0 < n; ++t0) {
    for (std::size_t k = 1; k <= std::min<std::size_t>(4, n); ++k) {
      for_each_subset(n, k, [&](const std::vector<std::size_t>& t1) {
        double sup = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          double near = std::numeric_limits<double>::infinity();
          for (auto c : t1) near = std::min(near, dist(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)));
          sup = std::max(sup, dist(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t0)) +
                                  std::sqrt(2.0) * near);
        }
        best = std::min(best, sup);
        return false;
      });
    }
  }
  return best;
}

double min_norm_over_hull(const std::vector<Eigen::VectorXd>& points) {
  const std::size_t m = points.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1U << m); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < m; ++i) {
      if ((mask >> i) & 1U) s.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(s.size());
    const Eigen::Index dim = points.front().size();
    Eigen::MatrixXd p(dim, k);
    for (Eigen::Index j = 0; j < k; ++j) p.col(j) = points[s[static_cast<std::size_t>(j)]];
    // [P^T P  1; 1^T 0] [lambda; mu] = [0; 1]
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = p.transpose() * p;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs(k) = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const Eigen::VectorXd lambda = sol.head(k);
    if (std::abs(lambda.sum() - 1.0) > 1e-9 || lambda.minCoeff() < -1e-12) continue;
    best = std::min(best, (p * lambda).norm());
  }
  return best;
}

double min_norm_over_hull_grid(const std::vector<Eigen::VectorXd>& points, int steps) {
  const std::size_t m = points.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> w(m, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i + 1 == m) {
      w[i] = left;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(points.front().size());
      for (std::size_t j = 0; j < m; ++j) x += (static_cast<double>(w[j]) / steps) * points[j];
      best = std::min(best, x.norm());
      return;
    }
    for (int v = 0; v <= left; ++v) {
      w[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, steps);
  return best;
}

double monotone_transport(std::vector<double> x, std::vector<double> a, std::vector<double> y,
                          std::vector<double> b) {
  auto sort_by_atom = [](std::vector<double>& atoms, std::vector<double>& w) {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return atoms[i] < atoms[j]; });
    std::vector<double> sa, sw;
    for (auto i : order) {
      sa.push_back(atoms[i]);
      sw.push_back(w[i]);
    }
    atoms = sa;
    w = sw;
  };
  sort_by_atom(x, a);
  sort_by_atom(y, b);
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double m = std::min(a[i], b[j]);
    cost += m * (x[i] - y[j]) * (x[i] - y[j]);
    a[i] -= m;
    b[j] -= m;
    if (a[i] <= 1e-15) ++i;
    if (j < y.size() && b[j] <= 1e-15) ++j;
  }
  return cost;
}

double gauss_expect(const std::function<double(double)>& f, int intervals) {
  return simpson([&](double x) { return f(x) * phi(x); }, -12.0, 12.0, intervals);
}

double expected_max_normals(std::size_t n) {
  const double dn = static_cast<double>(n);
  return simpson([&](double x) { return x * dn * phi(x) * std::pow(big_phi(x), dn - 1.0); }, -12.0,
                 12.0, 40000);
}

double sphere_coordinate_tail(std::size_t n, double eps) {
  const double e = (static_cast<double>(n) - 3.0) / 2.0;
  auto dens = [&](double x) { return std::pow(std::max(0.0, 1.0 - x * x), e); };
  const double total = simpson(dens, -1.0, 1.0, 200000);
  const double inner = simpson(dens, -eps, eps, 200000);
  return 1.0 - inner / total;
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double sk_energy(std::size_t n, const std::vector<double>& couplings, double h,
                 const std::vector<int>& sigma) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = couplings[p];
      g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = couplings[p];
      ++p;
    }
  }
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      quad += g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sigma[i] * sigma[j];
    }
  }
  double mag = 0.0;
  for (int s : sigma) mag += s;
  return -0.5 * quad / std::sqrt(static_cast<double>(n)) - h * mag;
}

namespace {

std::vector<double> all_energies(std::size_t n, const std::vector<double>& couplings, double h) {
  std::vector<double> e(std::size_t{1} << n);
  std::vector<int> sigma(n);
  for (std::size_t s = 0; s < e.size(); ++s) {
    for (std::size_t i = 0; i < n; ++i) sigma[i] = (s >> i) & 1U ? 1 : -1;
    e[s] = sk_energy(n, couplings, h, sigma);
  }
  return e;
}

}  // namespace

double sk_log_partition(std::size_t n, const std::vector<double>& couplings, double h, double beta) {
  const auto e = all_energies(n, couplings, h);
  const double top = -beta * *std::min_element(e.begin(), e.end());
  long double sum = 0.0L;
  for (double x : e) sum += std::exp(static_cast<long double>(-beta * x - top));
  return top + static_cast<double>(std::log(sum));
}

double sk_gibbs_energy(std::size_t n, const std::vector<double>& couplings, double h, double beta) {
  const auto e = all_energies(n, couplings, h);
  const double top = -beta * *std::min_element(e.begin(), e.end());
  long double z = 0.0L, acc = 0.0L;
  for (double x : e) {
    const long double w = std::exp(static_cast<long double>(-beta * x - top));
    z += w;
    acc += w * x;
  }
  return static_cast<double>(acc / z);
}

}  // namespace oracle
