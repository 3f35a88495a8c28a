#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cournot/model.hpp"

namespace cournot::twonode {

/// Symmetric two-node market: shared intercept a and cost c, demand slopes
/// b1 > b2, and an optional line capacity (absent means unconstrained).
struct TwoNodeParams {
  double a = 1.0;
  double b1 = 1.0;
  double b2 = 1.0;
  double c = 1.0;
  std::optional<double> f;

  /// Throws ModelError unless a, c, b2 > 0 and 1 < b1/b2 <= 3.
  void validate() const;
  TwoNodeParams with_capacity(std::optional<double> capacity) const;
};

/// Equilibrium in the scalar notation r = r_1 = -r_2.
struct TwoNodePoint {
  double q1 = 0.0;
  double q2 = 0.0;
  double r = 0.0;

  Vector q() const;
  Vector rebalance() const;  // (r, -r)
};

struct Thresholds {
  double uncongested = 0.0;   // a / (b2 + 2c)
  double node1_idle = 0.0;    // a / b1
  double node1_bound = 0.0;   // a / (3 b1 + 2c)
  double f0 = 0.0;
  double f1 = 0.0;

  std::array<double, 5> values() const { return {uncongested, node1_idle, node1_bound, f0, f1}; }
};

struct ExistenceVerdict {
  bool exists = false;
  std::optional<int> condition;  // 1..4, the first disjunct that holds
  Thresholds thresholds;
  std::optional<TwoNodePoint> equilibrium;
  bool boundary = false;  // capacity within 1e-9 of a threshold
};

double threshold_f0(const TwoNodeParams& p);
double threshold_f1(const TwoNodeParams& p);
Thresholds thresholds(const TwoNodeParams& p);

/// Existence of an equilibrium when the market maker maximizes consumer
/// surplus, by the four-disjunct partition in the line capacity.
ExistenceVerdict classify_existence(const TwoNodeParams& p);

/// Closed-form equilibrium for an unconstrained line.
TwoNodePoint theorem2_equilibrium(const TwoNodeParams& p, Objective objective);

/// A consumer-surplus equilibrium candidate in which the market maker picks
/// a fixed vertex of [-q1, q2] intersected with [-f, f], and both generators
/// best-respond to it.
struct VertexCandidate {
  enum class Vertex { ImportAll, LineForward, ExportAll, LineBackward };  // r = q2, f, -q1, -f
  Vertex vertex = Vertex::ImportAll;
  TwoNodePoint point;
  double feasibility_gap = 0.0;   // how far r lies outside the interval
  double optimality_gap = 0.0;    // best vertex surplus minus surplus at r
  bool is_equilibrium(double tol = 1e-12) const;
};

/// The four candidate families; an equilibrium exists iff one of them has
/// zero gaps.
std::vector<VertexCandidate> vertex_candidates(const TwoNodeParams& p);

struct RegionInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = true;
  bool upper_closed = true;
  bool exists = false;
  std::optional<int> condition;
  std::string label() const;
};

struct RegionReport {
  Thresholds thresholds;
  std::vector<RegionInterval> intervals;
  bool has_no_gne() const;
};

/// Splits [from, to] at the thresholds and labels each piece with the
/// classification it receives. Points where the label changes get their
/// own degenerate interval when they differ from both sides.
RegionReport existence_partition(const TwoNodeParams& p, double from, double to);

NetworkModel network(const TwoNodeParams& p);
MarketParams market(const TwoNodeParams& p);

/// Recognizes a two-node instance that satisfies the regime assumptions.
std::optional<TwoNodeParams> from_model(const NetworkModel& net, const MarketParams& params);

}  // namespace cournot::twonode
