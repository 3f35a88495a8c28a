#include "cournot/model.hpp"

#include <cmath>
#include <numeric>

namespace cournot {

namespace {

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(v.size()) != n) {
    throw ModelError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                     std::to_string(v.size()));
  }
}

void require_index(std::size_t k, std::size_t n) {
  if (k >= n) {
    throw std::out_of_range("node index " + std::to_string(k) + " out of range for " +
                            std::to_string(n) + " nodes");
  }
}

// Utility integral of p_k from 0 to d, in closed form.
double utility(double a, double b, double d) { return a * d - 0.5 * b * d * d; }

}  // namespace

NetworkModel::NetworkModel(Matrix shift_factors, Vector capacities)
    : h_(std::move(shift_factors)), f_(std::move(capacities)) {
  if (h_.cols() < 1) throw ModelError("network needs at least one node");
  if (h_.rows() != f_.size()) {
    throw ModelError("shift-factor matrix has " + std::to_string(h_.rows()) +
                     " rows but there are " + std::to_string(f_.size()) + " capacities");
  }
  for (Eigen::Index l = 0; l < f_.size(); ++l) {
    if (std::isnan(f_[l]) || f_[l] < 0.0) {
      throw ModelError("line capacity " + std::to_string(l) + " must be nonnegative");
    }
  }
  if (!h_.allFinite()) throw ModelError("shift-factor matrix has non-finite entries");
}

NetworkModel NetworkModel::from_lines(std::size_t nodes, const std::vector<Line>& lines,
                                      std::size_t slack) {
  Matrix h = shift_factors_from_susceptances(nodes, lines, slack);
  Vector f(static_cast<Eigen::Index>(lines.size()));
  for (std::size_t l = 0; l < lines.size(); ++l) f[static_cast<Eigen::Index>(l)] = lines[l].capacity;
  return NetworkModel(std::move(h), std::move(f));
}

NetworkModel NetworkModel::two_node(double capacity) {
  Matrix h(1, 2);
  h << 1.0, 0.0;
  Vector f(1);
  f << capacity;
  return NetworkModel(std::move(h), std::move(f));
}

NetworkModel NetworkModel::single_node() { return NetworkModel(Matrix(0, 1), Vector(0)); }

Vector NetworkModel::flows(const Vector& r) const {
  require_size(r, nodes(), "re-balancing vector");
  return h_ * (-r);
}

NetworkModel NetworkModel::with_capacities(const Vector& capacities) const {
  return NetworkModel(h_, capacities);
}

MarketParams::MarketParams(Vector intercepts, Vector slopes, Vector costs)
    : a(std::move(intercepts)), b(std::move(slopes)), c(std::move(costs)) {
  if (a.size() < 1) throw ModelError("market needs at least one node");
  require_size(b, nodes(), "demand slopes");
  require_size(c, nodes(), "cost coefficients");
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (!(a[k] > 0.0) || !std::isfinite(a[k])) throw ModelError("demand intercept a must be > 0");
    if (!(b[k] >= 0.0) || !std::isfinite(b[k])) throw ModelError("demand slope b must be >= 0");
    if (!(c[k] > 0.0) || !std::isfinite(c[k])) throw ModelError("cost coefficient c must be > 0");
  }
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::SocialWelfare: return "social_welfare";
    case Objective::ResidualSocialWelfare: return "residual_social_welfare";
    case Objective::ConsumerSurplus: return "consumer_surplus";
  }
  return "unknown";
}

std::string_view short_name(Objective objective) {
  switch (objective) {
    case Objective::SocialWelfare: return "soc";
    case Objective::ResidualSocialWelfare: return "res";
    case Objective::ConsumerSurplus: return "con";
  }
  return "unknown";
}

Objective parse_objective(std::string_view text) {
  for (Objective o : kAllObjectives) {
    if (text == short_name(o) || text == to_string(o)) return o;
  }
  throw ModelError("unknown objective '" + std::string(text) + "' (expected soc, res or con)");
}

double SeparableQuadratic::value(const Vector& r) const {
  return constant + linear.dot(r) + 0.5 * (curvature.array() * r.array().square()).sum();
}

Vector SeparableQuadratic::gradient(const Vector& r) const {
  return linear + curvature.cwiseProduct(r);
}

double price(const MarketParams& params, std::size_t k, double demand) {
  require_index(k, params.nodes());
  const auto i = static_cast<Eigen::Index>(k);
  return params.a[i] - params.b[i] * demand;
}

double generator_profit(const MarketParams& params, std::size_t k, const Vector& q,
                        const Vector& r) {
  require_index(k, params.nodes());
  require_size(q, params.nodes(), "production vector");
  require_size(r, params.nodes(), "re-balancing vector");
  const auto i = static_cast<Eigen::Index>(k);
  return q[i] * price(params, k, q[i] + r[i]) - params.c[i] * q[i] * q[i];
}

double welfare(const MarketParams& params, const Vector& q, const Vector& r,
               Objective objective) {
  require_size(q, params.nodes(), "production vector");
  require_size(r, params.nodes(), "re-balancing vector");
  double total = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    const double d = q[k] + r[k];
    const double p = params.a[k] - params.b[k] * d;
    double term = utility(params.a[k], params.b[k], d);
    switch (objective) {
      case Objective::SocialWelfare: term -= params.c[k] * q[k] * q[k]; break;
      case Objective::ResidualSocialWelfare: term -= q[k] * p; break;
      case Objective::ConsumerSurplus: term -= d * p; break;
    }
    total += term;
  }
  return total;
}

double merchandising_surplus(const MarketParams& params, const Vector& q, const Vector& r) {
  require_size(q, params.nodes(), "production vector");
  require_size(r, params.nodes(), "re-balancing vector");
  double total = 0.0;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    total += r[k] * (params.a[k] - params.b[k] * (q[k] + r[k]));
  }
  return total;
}

SeparableQuadratic objective_in_rebalance(const MarketParams& params, const Vector& q,
                                          Objective objective) {
  require_size(q, params.nodes(), "production vector");
  const Vector& a = params.a;
  const Vector& b = params.b;
  const Vector& c = params.c;
  SeparableQuadratic quad;
  switch (objective) {
    case Objective::SocialWelfare:
      quad.linear = a - b.cwiseProduct(q);
      quad.curvature = -b;
      quad.constant = a.dot(q) - 0.5 * b.dot(q.cwiseProduct(q)) - c.dot(q.cwiseProduct(q));
      break;
    case Objective::ResidualSocialWelfare:
      quad.linear = a;
      quad.curvature = -b;
      quad.constant = 0.5 * b.dot(q.cwiseProduct(q));
      break;
    case Objective::ConsumerSurplus:
      // Utility minus payment collapses to (b/2) d^2 at every node.
      quad.linear = b.cwiseProduct(q);
      quad.curvature = b;
      quad.constant = 0.5 * b.dot(q.cwiseProduct(q));
      break;
  }
  return quad;
}

bool is_feasible_rebalance(const NetworkModel& net, const Vector& q, const Vector& r,
                           double tol) {
  require_size(q, net.nodes(), "production vector");
  require_size(r, net.nodes(), "re-balancing vector");
  if (((q + r).array() < -tol).any()) return false;
  if (std::abs(r.sum()) > tol) return false;
  const Vector hr = net.shift_factors() * r;
  for (Eigen::Index l = 0; l < hr.size(); ++l) {
    if (std::abs(hr[l]) > net.capacities()[l] + tol) return false;
  }
  return true;
}

Matrix shift_factors_from_susceptances(std::size_t nodes, const std::vector<Line>& lines,
                                       std::size_t slack) {
  if (nodes < 1) throw ModelError("network needs at least one node");
  require_index(slack, nodes);

  // Connectivity by union-find.
  std::vector<std::size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto n = static_cast<Eigen::Index>(nodes);
  Matrix laplacian = Matrix::Zero(n, n);
  for (const Line& line : lines) {
    require_index(line.from, nodes);
    require_index(line.to, nodes);
    if (line.from == line.to) throw ModelError("line connects a node to itself");
    if (!(line.susceptance > 0.0) || !std::isfinite(line.susceptance)) {
      throw ModelError("line susceptance must be positive");
    }
    const auto i = static_cast<Eigen::Index>(line.from);
    const auto j = static_cast<Eigen::Index>(line.to);
    laplacian(i, i) += line.susceptance;
    laplacian(j, j) += line.susceptance;
    laplacian(i, j) -= line.susceptance;
    laplacian(j, i) -= line.susceptance;
    parent[find(line.from)] = find(line.to);
  }
  for (std::size_t k = 0; k < nodes; ++k) {
    if (find(k) != find(slack)) throw ModelError("network is not connected");
  }

  // Angles for a unit injection at each non-slack node, withdrawn at the slack.
  Matrix angles = Matrix::Zero(n, n);
  if (n > 1) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != static_cast<Eigen::Index>(slack)) keep.push_back(k);
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Matrix reduced(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) reduced(i, j) = laplacian(keep[i], keep[j]);
    const Matrix x = reduced.ldlt().solve(Matrix::Identity(m, m));
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) angles(keep[i], keep[j]) = x(i, j);
  }

  Matrix h(static_cast<Eigen::Index>(lines.size()), n);
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(lines[l].from);
    const auto j = static_cast<Eigen::Index>(lines[l].to);
    h.row(static_cast<Eigen::Index>(l)) = lines[l].susceptance * (angles.row(i) - angles.row(j));
  }
  return h;
}

MarketOutcome make_outcome(const NetworkModel& net, const MarketParams& params, const Vector& q,
                           const Vector& r) {
  check_sizes(net, params);
  require_size(q, net.nodes(), "production vector");
  require_size(r, net.nodes(), "re-balancing vector");
  MarketOutcome out;
  out.q = q;
  out.r = r;
  out.d = q + r;
  out.prices = params.a - params.b.cwiseProduct(out.d);
  out.flows = net.flows(r);
  out.profits.resize(q.size());
  for (std::size_t k = 0; k < params.nodes(); ++k) {
    out.profits[static_cast<Eigen::Index>(k)] = generator_profit(params, k, q, r);
  }
  out.w_soc = welfare(params, q, r, Objective::SocialWelfare);
  out.w_res = welfare(params, q, r, Objective::ResidualSocialWelfare);
  out.w_con = welfare(params, q, r, Objective::ConsumerSurplus);
  out.merch_surplus = merchandising_surplus(params, q, r);
  return out;
}

void check_sizes(const NetworkModel& net, const MarketParams& params) {
  if (net.nodes() != params.nodes()) {
    throw ModelError("network has " + std::to_string(net.nodes()) + " nodes but market has " +
                     std::to_string(params.nodes()));
  }
}

}  // namespace cournot
