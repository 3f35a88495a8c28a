#include "cournot/responses.hpp"

#include <algorithm>

namespace cournot {

double generator_best_response(const MarketParams& params, std::size_t k, double r_k) {
  if (k >= params.nodes()) throw std::out_of_range("generator index out of range");
  const auto i = static_cast<Eigen::Index>(k);
  const double a = params.a[i];
  const double b = params.b[i];
  const double c = params.c[i];
  return std::max(0.0, (a - b * r_k) / (2.0 * (b + c)));
}

ResponseReport generator_response(const MarketParams& params, std::size_t k, const Vector& q,
                                  const Vector& r) {
  ResponseReport report;
  report.player = Player::generator_at(k);
  Vector best_q = q;
  best_q[static_cast<Eigen::Index>(k)] = generator_best_response(params, k, r[static_cast<Eigen::Index>(k)]);
  report.argmax = Vector::Constant(1, best_q[static_cast<Eigen::Index>(k)]);
  report.payoff_at_argmax = generator_profit(params, k, best_q, r);
  return report;
}

ResponseReport market_maker_response(const NetworkModel& net, const MarketParams& params,
                                     const Vector& q, Objective objective,
                                     const ResponseOptions& options) {
  check_sizes(net, params);
  if ((q.array() < 0.0).any()) throw EmptyPolytopeError("production must be nonnegative");
  const RebalancePolytope poly = build_polytope(net, q);
  const SeparableQuadratic quad = objective_in_rebalance(params, q, objective);

  ResponseReport report;
  report.player = Player::market_maker();
  if (objective == Objective::ConsumerSurplus) {
    ConvexSolution sol =
        maximize_convex_quadratic_on_vertices(poly, quad, options.tie_tol, options.vertex_dim_limit);
    report.argmax = std::move(sol.argmax);
    report.payoff_at_argmax = welfare(params, q, report.argmax, objective);
    report.alternatives = std::move(sol.near_optimal);
    return report;
  }
  if (!params.strictly_sloped()) {
    throw ModelError("social and residual welfare responses need every demand slope b > 0");
  }
  const ConcaveSolution sol = maximize_concave_quadratic(poly, quad, options.solver_tol);
  report.argmax = sol.r;
  report.payoff_at_argmax = welfare(params, q, sol.r, objective);
  return report;
}

}  // namespace cournot
