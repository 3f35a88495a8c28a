#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cournot/model.hpp"
#include "cournot/responses.hpp"

namespace cournot {

/// A joint action: production q for every generator and re-balancing r.
struct Profile {
  Vector q;
  Vector r;
};

struct SearchConfig {
  std::size_t max_iter = 10000;
  double point_tol = 1e-8;       // max-norm change that counts as converged
  std::size_t cycle_window = 64;  // profiles kept for recurrence checks
  double cycle_tol = 1e-7;       // max-norm distance that counts as a recurrence
  double verify_tol = 1e-7;
  std::size_t grid_steps = 200;  // brute-force grid intervals per axis
  std::optional<Vector> box;     // overrides search_box() for the scan
  std::size_t threads = 0;       // 0 picks the hardware concurrency
  ResponseOptions response;
};

enum class GneStatus { Converged, CycleDetected, IterationLimit, Infeasible };

std::string_view to_string(GneStatus status);

class InfeasibleProfileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlayerCertificate {
  Player player;
  double payoff = 0.0;       // payoff at the candidate profile
  double best_payoff = 0.0;  // payoff of an exact best response
  double regret = 0.0;       // best_payoff - payoff
  Vector best_response;
  bool satisfied = false;
};

struct GneVerification {
  bool is_gne = false;
  std::vector<PlayerCertificate> certificates;  // generators first, market maker last
};

struct BestResponseCycle {
  std::size_t period = 0;
  std::vector<Profile> profiles;  // one round maps profiles[i] to profiles[(i+1) % period]
};

struct GneResult {
  GneStatus status = GneStatus::IterationLimit;
  Objective objective = Objective::SocialWelfare;
  std::optional<MarketOutcome> point;
  std::optional<BestResponseCycle> cycle;
  std::optional<GneVerification> verification;
  std::vector<double> trace;  // max-norm profile change per round
  std::size_t iterations = 0;
  std::string message;
};

/// One round of the search: every generator responds to the current r,
/// then the market maker responds to the new q.
Profile best_response_round(const NetworkModel& net, const MarketParams& params,
                            Objective objective, const Profile& current,
                            const ResponseOptions& options = {});

/// Bound on |r_k| at any equilibrium: the smaller of the line-limited
/// extent of {|Hr| <= f, 1'r = 0} and sum_j a_j / (b_j + 2 c_j).
double rebalance_bound(const NetworkModel& net, const MarketParams& params);

/// Per-node production bound a_k/b_k + (n-1) rbar / b_k. Needs b > 0.
Vector search_box(const NetworkModel& net, const MarketParams& params);

GneResult gne_search(const NetworkModel& net, const MarketParams& params, Objective objective,
                     const Profile& init, const SearchConfig& config = {});

/// Checks both GNE inequalities. Generators must sit within tol of their
/// best response; the market maker's payoff must be within tol of its
/// optimum (any tied maximizer is accepted).
GneVerification verify_gne(const NetworkModel& net, const MarketParams& params,
                           Objective objective, const Vector& q, const Vector& r,
                           double tol = 1e-7, const ResponseOptions& options = {});

/// A connected group of grid points that passed the scan.
struct ScanCell {
  Vector lower;  // bounding box of the group, widened by half a grid step
  Vector upper;
  Vector q;  // grid point with the smallest regret
  Vector r;
  double max_regret = 0.0;
  std::size_t grid_points = 0;
};

/// Tolerances that make the grid test sound: if an equilibrium exists, the
/// grid point nearest to it passes.
struct ScanSlack {
  Vector grid_step;
  double response_sensitivity = 0.0;  // max-norm Lipschitz bound of r(q)
  double response_shift = 0.0;        // sensitivity * half the largest step
  Vector generator_slack;             // allowed regret per generator
};

struct ScanResult {
  std::vector<ScanCell> cells;
  ScanSlack slack;
  Vector box;
  std::size_t grid_points = 0;
  double min_regret = 0.0;  // smallest worst-generator regret over the grid
  bool nonexistence_evidence() const { return cells.empty(); }
};

/// Largest max-norm derivative of the market-maker response with respect
/// to q, over every basis (consumer surplus) or active set (concave
/// objectives) the response can use.
double response_sensitivity(const NetworkModel& net, const MarketParams& params,
                            Objective objective);

/// How far below the best vertex value a consumer-surplus vertex may sit at
/// a grid point and still be the image of an exact maximizer nearby.
double market_maker_slack(const MarketParams& params, const Vector& q, const Vector& vertex,
                          const Vector& best_vertex, const Vector& grid_step, double response_shift);

/// Grid oracle over q in [0, box]^n (n <= 3): the market maker's response is
/// solved exactly at each grid point and generator regrets are measured
/// against the best grid production.
ScanResult brute_force_gne_scan(const NetworkModel& net, const MarketParams& params,
                                Objective objective, const SearchConfig& config = {});

nlohmann::json to_json(const MarketOutcome& outcome);
nlohmann::json to_json(const GneVerification& verification);
nlohmann::json to_json(const GneResult& result);
nlohmann::json to_json(const ScanResult& result);

}  // namespace cournot
