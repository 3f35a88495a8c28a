#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "cournot/model.hpp"

namespace cournot {

class EmptyPolytopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultVertexDimLimit = 8;
inline constexpr double kDefaultTieTol = 1e-8;

/// Where an inequality row of the re-balancing polytope comes from.
struct ConstraintOrigin {
  enum class Kind { Demand, LineUpper, LineLower };
  Kind kind = Kind::Demand;
  std::size_t index = 0;  // node for Demand, line otherwise
};

/// { r : A r <= u, 1'r = 0 }, the market maker's feasible set S^M(q).
///
/// Rows are, in order: -r_k <= q_k for every node, then H_l r <= f_l and
/// -H_l r <= f_l for every line with finite capacity.
struct RebalancePolytope {
  Matrix A;
  Vector u;
  std::vector<ConstraintOrigin> origins;

  std::size_t dimension() const { return static_cast<std::size_t>(A.cols()); }
  std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
  bool contains(const Vector& r, double tol = kDefaultFeasibilityTol) const;
};

RebalancePolytope build_polytope(const NetworkModel& net, const Vector& q);

/// All vertices, deduplicated and sorted lexicographically. Bases are
/// formed from n-1 inequality rows plus the balance equation; singular
/// bases are skipped.
std::vector<Vector> enumerate_vertices(const RebalancePolytope& poly,
                                       double tol = kDefaultFeasibilityTol,
                                       std::size_t dim_limit = kDefaultVertexDimLimit);

struct ConcaveSolution {
  Vector r;
  double value = 0.0;
  std::vector<std::size_t> active;  // working set at termination
  Vector multipliers;               // one per active row, >= 0
  double balance_multiplier = 0.0;
  std::size_t iterations = 0;
};

/// Maximizes a separable quadratic with nonpositive curvature over the
/// polytope using a primal active-set method started from r = 0.
/// Zero-curvature coordinates are handled by stepping along the
/// reduced gradient until a constraint blocks.
ConcaveSolution maximize_concave_quadratic(const RebalancePolytope& poly,
                                           const SeparableQuadratic& objective,
                                           double tol = 1e-12);

struct ConvexSolution {
  Vector argmax;
  double value = 0.0;
  std::vector<Vector> near_optimal;  // lexicographic order, includes argmax
  std::vector<Vector> vertices;
  std::vector<double> vertex_values;
};

/// Maximizes a separable quadratic with nonnegative curvature by scanning
/// vertices. Ties within tie_tol go to the lexicographically smallest
/// vertex; every tied vertex is reported in near_optimal.
ConvexSolution maximize_convex_quadratic_on_vertices(
    const RebalancePolytope& poly, const SeparableQuadratic& objective,
    double tie_tol = kDefaultTieTol, std::size_t dim_limit = kDefaultVertexDimLimit);

struct KktResidual {
  double stationarity = 0.0;     // min over multipliers >= 0 of the Lagrangian gradient norm
  double primal = 0.0;           // largest constraint violation
  double complementarity = 0.0;  // largest |lambda_i * slack_i|
  double worst() const;
};

/// KKT residual of r as a maximizer of `objective` over the polytope,
/// with nonnegative multipliers fitted on the rows active within
/// active_tol (nonnegative least squares, balance multiplier eliminated).
KktResidual kkt_residual(const RebalancePolytope& poly, const SeparableQuadratic& objective,
                         const Vector& r, double active_tol = 1e-9);

/// Nonnegative least squares: argmin_{x >= 0} |M x - y|.
Vector nonnegative_least_squares(const Matrix& m, const Vector& y);

/// True when a is lexicographically smaller than b.
bool lexicographically_less(const Vector& a, const Vector& b);

}  // namespace cournot
