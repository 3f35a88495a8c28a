#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cournot/model.hpp"
#include "cournot/polytope.hpp"

namespace cournot {

/// Identifies a player: a generator (by node) or the market maker.
struct Player {
  std::optional<std::size_t> generator;

  static Player market_maker() { return Player{}; }
  static Player generator_at(std::size_t k) { return Player{k}; }
  bool is_market_maker() const { return !generator.has_value(); }
};

struct ResponseReport {
  Player player;
  Vector argmax;
  double payoff_at_argmax = 0.0;
  std::vector<Vector> alternatives;  // tied maximizers, consumer-surplus objective only
};

struct ResponseOptions {
  double tie_tol = kDefaultTieTol;
  double solver_tol = 1e-12;
  std::size_t vertex_dim_limit = kDefaultVertexDimLimit;
};

/// Unique maximizer over q_k >= 0 of q_k p_k(q_k + r_k) - c_k q_k^2.
double generator_best_response(const MarketParams& params, std::size_t k, double r_k);

ResponseReport generator_response(const MarketParams& params, std::size_t k, const Vector& q,
                                  const Vector& r);

/// Exact market-maker response to q. Social and residual welfare are
/// strictly concave in r and solved by the active-set method; consumer
/// surplus is convex in r and solved by a vertex scan that reports ties.
ResponseReport market_maker_response(const NetworkModel& net, const MarketParams& params,
                                     const Vector& q, Objective objective,
                                     const ResponseOptions& options = {});

}  // namespace cournot
