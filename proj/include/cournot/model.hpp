#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cournot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultFeasibilityTol = 1e-9;

/// Raised when inputs have inconsistent sizes or violate a type invariant.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A transmission line between two nodes (0-based indices).
struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double susceptance = 1.0;
  double capacity = kInfinity;  // infinite capacity means no flow limit
};

/// DC network: shift-factor matrix H (lines x nodes) and line capacities f.
///
/// Flows are H * (-r): a positive re-balancing quantity r_k means node k
/// imports. A capacity of +inf removes both limit rows for that line.
class NetworkModel {
 public:
  NetworkModel(Matrix shift_factors, Vector capacities);

  /// Builds H from susceptances with `slack` as the reference node.
  static NetworkModel from_lines(std::size_t nodes, const std::vector<Line>& lines,
                                 std::size_t slack);

  /// The two-node, one-line network used throughout the analytic results.
  static NetworkModel two_node(double capacity);

  /// A single node with no lines.
  static NetworkModel single_node();

  std::size_t nodes() const { return static_cast<std::size_t>(h_.cols()); }
  std::size_t lines() const { return static_cast<std::size_t>(h_.rows()); }
  const Matrix& shift_factors() const { return h_; }
  const Vector& capacities() const { return f_; }

  /// Line flows for a re-balancing vector r.
  Vector flows(const Vector& r) const;

  /// Copy with a different capacity on every line.
  NetworkModel with_capacities(const Vector& capacities) const;

 private:
  Matrix h_;
  Vector f_;
};

/// Inverse demand p_k(d) = a_k - b_k d and generation cost c_k q^2.
struct MarketParams {
  Vector a;
  Vector b;
  Vector c;

  MarketParams(Vector intercepts, Vector slopes, Vector costs);

  std::size_t nodes() const { return static_cast<std::size_t>(a.size()); }
  bool strictly_sloped() const { return (b.array() > 0.0).all(); }
};

enum class Objective { SocialWelfare, ResidualSocialWelfare, ConsumerSurplus };

std::string_view to_string(Objective objective);
std::string_view short_name(Objective objective);  // soc | res | con
Objective parse_objective(std::string_view text);

inline constexpr Objective kAllObjectives[] = {
    Objective::SocialWelfare, Objective::ResidualSocialWelfare, Objective::ConsumerSurplus};

/// Quadratic in r that separates across nodes:
///   constant + sum_k linear_k r_k + 0.5 curvature_k r_k^2
struct SeparableQuadratic {
  Vector linear;
  Vector curvature;
  double constant = 0.0;

  double value(const Vector& r) const;
  Vector gradient(const Vector& r) const;
};

double price(const MarketParams& params, std::size_t k, double demand);

double generator_profit(const MarketParams& params, std::size_t k, const Vector& q,
                        const Vector& r);

/// Consumer utility a d - (b/2) d^2 summed over nodes, minus generation cost
/// (SocialWelfare), generator revenue (ResidualSocialWelfare) or consumer
/// payments (ConsumerSurplus). d = q + r.
double welfare(const MarketParams& params, const Vector& q, const Vector& r,
               Objective objective);

/// Total demand payment minus total generator revenue.
double merchandising_surplus(const MarketParams& params, const Vector& q, const Vector& r);

/// The market-maker payoff for fixed q written as a separable quadratic in r.
SeparableQuadratic objective_in_rebalance(const MarketParams& params, const Vector& q,
                                          Objective objective);

bool is_feasible_rebalance(const NetworkModel& net, const Vector& q, const Vector& r,
                           double tol = kDefaultFeasibilityTol);

/// PTDF matrix for a connected network. Column `slack` is zero.
Matrix shift_factors_from_susceptances(std::size_t nodes, const std::vector<Line>& lines,
                                       std::size_t slack);

struct MarketOutcome {
  Vector q;
  Vector r;
  Vector d;
  Vector prices;
  Vector flows;
  Vector profits;
  double w_soc = 0.0;
  double w_res = 0.0;
  double w_con = 0.0;
  double merch_surplus = 0.0;
};

MarketOutcome make_outcome(const NetworkModel& net, const MarketParams& params, const Vector& q,
                           const Vector& r);

void check_sizes(const NetworkModel& net, const MarketParams& params);

}  // namespace cournot
