#pragma once

// Random instance generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cournot/model.hpp"
#include "cournot/polytope.hpp"
#include "cournot/twonode.hpp"

namespace testing {

using cournot::Line;
using cournot::MarketParams;
using cournot::NetworkModel;
using cournot::Vector;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Random spanning tree plus a few extra lines; some capacities infinite.
inline std::vector<Line> random_lines(std::mt19937_64& rng, std::size_t n) {
  std::vector<Line> lines;
  for (std::size_t k = 1; k < n; ++k) {
    Line l;
    l.from = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    l.to = k;
    l.susceptance = uniform(rng, 0.5, 3.0);
    l.capacity = uniform(rng, 0.0, 1.0) < 0.2 ? cournot::kInfinity : uniform(rng, 0.2, 5.0);
    lines.push_back(l);
  }
  if (n >= 3) {
    for (std::size_t e = 0; e < n - 2; ++e) {
      Line l;
      l.from = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      do {
        l.to = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      } while (l.to == l.from);
      l.susceptance = uniform(rng, 0.5, 3.0);
      l.capacity = uniform(rng, 0.2, 5.0);
      lines.push_back(l);
    }
  }
  return lines;
}

inline NetworkModel random_network(std::mt19937_64& rng, std::size_t n) {
  if (n == 1) return NetworkModel::single_node();
  const auto lines = random_lines(rng, n);
  return NetworkModel::from_lines(n, lines, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
}

inline MarketParams random_params(std::mt19937_64& rng, std::size_t n) {
  Vector a(static_cast<Eigen::Index>(n)), b(a.size()), c(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    a[k] = uniform(rng, 1.0, 20.0);
    b[k] = uniform(rng, 0.3, 3.0);
    c[k] = uniform(rng, 0.3, 2.0);
  }
  return MarketParams(a, b, c);
}

inline Vector random_production(std::mt19937_64& rng, const MarketParams& p) {
  Vector q(p.a.size());
  for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = uniform(rng, 0.0, p.a[k] / p.b[k]);
  return q;
}

/// A random point of S^M(q): a random balanced direction from r = 0,
/// scaled to a random fraction of the largest feasible step.
inline Vector random_feasible_rebalance(std::mt19937_64& rng, const NetworkModel& net,
                                        const Vector& q) {
  const auto poly = cournot::build_polytope(net, q);
  const Eigen::Index n = q.size();
  Vector w(n);
  for (Eigen::Index k = 0; k < n; ++k) w[k] = uniform(rng, -1.0, 1.0);
  w.array() -= w.mean();
  double t = std::numeric_limits<double>::infinity();
  const Vector aw = poly.A * w;
  for (Eigen::Index i = 0; i < aw.size(); ++i) {
    if (aw[i] > 0.0) t = std::min(t, poly.u[i] / aw[i]);
  }
  if (!std::isfinite(t)) t = 1.0;
  return w * (t * uniform(rng, 0.0, 1.0));
}

/// Parameters in the analytic regime: 1 < b1/b2 <= 3.
inline cournot::twonode::TwoNodeParams random_two_node(std::mt19937_64& rng) {
  cournot::twonode::TwoNodeParams p;
  p.a = uniform(rng, 1.0, 10.0);
  p.b2 = uniform(rng, 0.5, 1.5);
  p.b1 = p.b2 * uniform(rng, 1.01, 3.0);
  p.c = uniform(rng, 0.5, 2.0);
  return p;
}

inline double rel_err(double x, double y) {
  return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace testing
