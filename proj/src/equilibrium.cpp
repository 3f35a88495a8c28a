#include "cournot/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <thread>

#include "cournot/polytope.hpp"

namespace cournot {

namespace {

constexpr double kCycleRatio = 1e-6;

double max_abs_diff(const Profile& x, const Profile& y) {
  return std::max((x.q - y.q).lpNorm<Eigen::Infinity>(), (x.r - y.r).lpNorm<Eigen::Infinity>());
}

double row_sum_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

// Euclidean projection of r0 onto S^M(q).
Vector project_rebalance(const NetworkModel& net, const Vector& q, const Vector& r0) {
  SeparableQuadratic dist;
  dist.linear = r0;
  dist.curvature = Vector::Constant(r0.size(), -1.0);
  return maximize_concave_quadratic(build_polytope(net, q), dist).r;
}

template <typename Visit>
void for_each_subset(std::size_t m, std::size_t k, Visit&& visit) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  if (k > m) return;
  while (true) {
    visit(idx);
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

bool has_parallel_pair(const RebalancePolytope& poly, const std::vector<std::size_t>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const auto& x = poly.origins[rows[i]];
      const auto& y = poly.origins[rows[j]];
      if (x.kind != ConstraintOrigin::Kind::Demand && y.kind != ConstraintOrigin::Kind::Demand &&
          x.index == y.index) {
        return true;
      }
    }
  }
  return false;
}

// Largest profit over the production grid {0, h, ..., steps h}; profit is
// strictly concave in q so the discrete slope changes sign once.
double grid_best_profit(double a, double b, double c, double r, double h, std::size_t steps) {
  auto profit = [&](std::size_t j) {
    const double x = static_cast<double>(j) * h;
    return x * (a - b * (x + r)) - c * x * x;
  };
  std::size_t lo = 0;
  std::size_t hi = steps;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (profit(mid + 1) > profit(mid)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return profit(lo);
}

struct PassRecord {
  std::size_t index;
  Vector r;
  double regret;
};

}  // namespace

std::string_view to_string(GneStatus status) {
  switch (status) {
    case GneStatus::Converged: return "converged";
    case GneStatus::CycleDetected: return "cycle_detected";
    case GneStatus::IterationLimit: return "iteration_limit";
    case GneStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

Profile best_response_round(const NetworkModel& net, const MarketParams& params,
                            Objective objective, const Profile& current,
                            const ResponseOptions& options) {
  Profile next;
  next.q.resize(current.q.size());
  for (std::size_t k = 0; k < params.nodes(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    next.q[i] = generator_best_response(params, k, current.r[i]);
  }
  next.r = market_maker_response(net, params, next.q, objective, options).argmax;
  return next;
}

double rebalance_bound(const NetworkModel& net, const MarketParams& params) {
  check_sizes(net, params);
  const Vector cap = (params.b + 2.0 * params.c);
  double bound = params.a.cwiseQuotient(cap).sum();

  const std::size_t n = net.nodes();
  const bool all_finite = net.capacities().allFinite();
  if (n > 1 && n <= kDefaultVertexDimLimit && all_finite && net.lines() > 0) {
    Eigen::FullPivLU<Matrix> lu(net.shift_factors());
    if (static_cast<std::size_t>(lu.rank()) == n - 1) {
      // Vertices of {|Hr| <= f, 1'r = 0}: reuse the polytope machinery with
      // demand rows relaxed far enough to never bind.
      RebalancePolytope lines_only = build_polytope(net, Vector::Zero(static_cast<Eigen::Index>(n)));
      const auto rows = static_cast<Eigen::Index>(lines_only.rows() - n);
      RebalancePolytope trimmed;
      trimmed.A = lines_only.A.bottomRows(rows);
      trimmed.u = lines_only.u.tail(rows);
      trimmed.origins.assign(lines_only.origins.begin() + static_cast<std::ptrdiff_t>(n),
                             lines_only.origins.end());
      double line_bound = 0.0;
      for (const Vector& v : enumerate_vertices(trimmed)) {
        line_bound = std::max(line_bound, v.lpNorm<Eigen::Infinity>());
      }
      bound = std::min(bound, line_bound);
    }
  }
  return n > 1 ? bound : 0.0;
}

Vector search_box(const NetworkModel& net, const MarketParams& params) {
  check_sizes(net, params);
  if (!params.strictly_sloped()) throw ModelError("search box needs every demand slope b > 0");
  const double rbar = rebalance_bound(net, params);
  const double spread = static_cast<double>(net.nodes() - 1) * rbar;
  return (params.a.array() + spread) / params.b.array();
}

GneVerification verify_gne(const NetworkModel& net, const MarketParams& params,
                           Objective objective, const Vector& q, const Vector& r, double tol,
                           const ResponseOptions& options) {
  check_sizes(net, params);
  if (static_cast<std::size_t>(q.size()) != net.nodes() ||
      static_cast<std::size_t>(r.size()) != net.nodes()) {
    throw ModelError("profile size does not match the network");
  }
  if ((q.array() < -tol).any() || !is_feasible_rebalance(net, q, r, tol)) {
    throw InfeasibleProfileError("profile is not feasible: need q >= 0 and r in S^M(q)");
  }
  const Vector q_clamped = q.cwiseMax(0.0);

  GneVerification out;
  out.is_gne = true;
  for (std::size_t k = 0; k < params.nodes(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    PlayerCertificate cert;
    cert.player = Player::generator_at(k);
    const double best = generator_best_response(params, k, r[i]);
    Vector alt = q;
    alt[i] = best;
    cert.payoff = generator_profit(params, k, q, r);
    cert.best_payoff = generator_profit(params, k, alt, r);
    cert.regret = cert.best_payoff - cert.payoff;
    cert.best_response = Vector::Constant(1, best);
    cert.satisfied = std::abs(q[i] - best) <= tol;
    out.is_gne = out.is_gne && cert.satisfied;
    out.certificates.push_back(std::move(cert));
  }

  const ResponseReport mm = market_maker_response(net, params, q_clamped, objective, options);
  PlayerCertificate cert;
  cert.player = Player::market_maker();
  cert.payoff = welfare(params, q, r, objective);
  cert.best_payoff = std::max(mm.payoff_at_argmax, cert.payoff);
  cert.regret = cert.best_payoff - cert.payoff;
  cert.best_response = mm.argmax;
  cert.satisfied = cert.regret <= tol;
  out.is_gne = out.is_gne && cert.satisfied;
  out.certificates.push_back(std::move(cert));
  return out;
}

GneResult gne_search(const NetworkModel& net, const MarketParams& params, Objective objective,
                     const Profile& init, const SearchConfig& config) {
  check_sizes(net, params);
  const auto n = static_cast<Eigen::Index>(net.nodes());
  GneResult result;
  result.objective = objective;

  if (init.q.size() != n) throw ModelError("initial production has the wrong length");
  if ((init.q.array() < 0.0).any() || !init.q.allFinite()) {
    result.status = GneStatus::Infeasible;
    result.message = "initial production must be finite and nonnegative";
    return result;
  }
  Profile current{init.q, init.r.size() == 0 ? Vector(Vector::Zero(n)) : init.r};
  if (current.r.size() != n) throw ModelError("initial re-balancing has the wrong length");
  if (!is_feasible_rebalance(net, current.q, current.r)) {
    try {
      current.r = project_rebalance(net, current.q, current.r);
    } catch (const EmptyPolytopeError& e) {
      result.status = GneStatus::Infeasible;
      result.message = e.what();
      return result;
    }
  }

  std::deque<Profile> history{current};
  for (std::size_t iter = 1; iter <= config.max_iter; ++iter) {
    Profile next = best_response_round(net, params, objective, current, config.response);
    const double change = max_abs_diff(next, current);
    result.trace.push_back(change);
    result.iterations = iter;

    if (change < config.point_tol) {
      GneVerification check =
          verify_gne(net, params, objective, next.q, next.r, config.verify_tol, config.response);
      result.point = make_outcome(net, params, next.q, next.r);
      if (check.is_gne) {
        result.status = GneStatus::Converged;
      } else {
        result.status = GneStatus::IterationLimit;
        result.message = "iteration stalled at a profile that fails verification";
      }
      result.verification = std::move(check);
      return result;
    }

    // history.back() is `current`; a match further back is a cycle of period >= 2.
    for (std::size_t period = 2; period <= history.size(); ++period) {
      const Profile& earlier = history[history.size() - period];
      // A converging oscillation also comes back close to where it was, but
      // only by a fixed fraction of its step; a genuine cycle repeats to
      // rounding error.
      const double gap = max_abs_diff(next, earlier);
      if (gap <= config.cycle_tol && gap <= kCycleRatio * change) {
        BestResponseCycle cycle;
        cycle.period = period;
        for (std::size_t j = history.size() - period + 1; j < history.size(); ++j) {
          cycle.profiles.push_back(history[j]);
        }
        cycle.profiles.push_back(next);
        result.status = GneStatus::CycleDetected;
        result.cycle = std::move(cycle);
        result.message = "best responses recur with period " + std::to_string(period) +
                         "; evidence that no equilibrium exists, not a proof";
        return result;
      }
    }

    history.push_back(next);
    while (history.size() > std::max<std::size_t>(config.cycle_window, 2)) history.pop_front();
    current = std::move(next);
  }
  result.status = GneStatus::IterationLimit;
  result.message = "no convergence or recurrence within the iteration limit";
  return result;
}

double response_sensitivity(const NetworkModel& net, const MarketParams& params,
                            Objective objective) {
  check_sizes(net, params);
  const std::size_t n = net.nodes();
  const auto ni = static_cast<Eigen::Index>(n);
  const RebalancePolytope poly = build_polytope(net, Vector::Zero(ni));

  // Derivative of the right-hand side u(q) with respect to q, per row.
  auto rhs_rows = [&](const std::vector<std::size_t>& rows) {
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), ni);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& origin = poly.origins[rows[i]];
      if (origin.kind == ConstraintOrigin::Kind::Demand) {
        p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(origin.index)) = 1.0;
      }
    }
    return p;
  };

  double sensitivity = 0.0;
  if (objective == Objective::ConsumerSurplus) {
    if (n < 1) return 0.0;
    for_each_subset(poly.rows(), n - 1, [&](const std::vector<std::size_t>& rows) {
      if (has_parallel_pair(poly, rows)) return;
      Matrix basis(ni, ni);
      for (std::size_t i = 0; i < rows.size(); ++i)
        basis.row(static_cast<Eigen::Index>(i)) = poly.A.row(static_cast<Eigen::Index>(rows[i]));
      basis.row(ni - 1).setOnes();
      Eigen::FullPivLU<Matrix> lu(basis);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) return;
      Matrix rhs = Matrix::Zero(ni, ni);
      rhs.topRows(ni - 1) = rhs_rows(rows);
      sensitivity = std::max(sensitivity, row_sum_norm(lu.solve(rhs)));
    });
    return sensitivity;
  }

  // Concave objectives: KKT system of each candidate active set,
  //   G dr + dg/dq + A_S' dlambda + 1 dmu = 0,  A_S dr = du_S/dq,  1' dr = 0,
  // for minimizing the negated objective with G = diag(b).
  const Matrix g_hess = params.b.asDiagonal();
  const Matrix dg_dq = objective == Objective::SocialWelfare ? Matrix(params.b.asDiagonal())
                                                            : Matrix(Matrix::Zero(ni, ni));
  for (std::size_t size = 0; size + 1 <= n; ++size) {
    for_each_subset(poly.rows(), size, [&](const std::vector<std::size_t>& rows) {
      if (has_parallel_pair(poly, rows)) return;
      const auto s = static_cast<Eigen::Index>(rows.size());
      const Eigen::Index dim = ni + s + 1;
      Matrix kkt = Matrix::Zero(dim, dim);
      kkt.topLeftCorner(ni, ni) = g_hess;
      for (Eigen::Index i = 0; i < s; ++i) {
        const auto row = poly.A.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]));
        kkt.block(0, ni + i, ni, 1) = row.transpose();
        kkt.block(ni + i, 0, 1, ni) = row;
      }
      kkt.block(0, ni + s, ni, 1).setOnes();
      kkt.block(ni + s, 0, 1, ni).setOnes();
      Eigen::FullPivLU<Matrix> lu(kkt);
      lu.setThreshold(1e-10);
      if (!lu.isInvertible()) return;
      Matrix rhs = Matrix::Zero(dim, ni);
      rhs.topRows(ni) = -dg_dq;
      rhs.middleRows(ni, s) = rhs_rows(rows);
      sensitivity = std::max(sensitivity, row_sum_norm(lu.solve(rhs).topRows(ni)));
    });
  }
  return sensitivity;
}

double market_maker_slack(const MarketParams& params, const Vector& q, const Vector& vertex,
                          const Vector& best_vertex, const Vector& grid_step,
                          double response_shift) {
  // Consumer surplus is sum_k (b_k/2) d_k^2; moving q by half a step and the
  // vertex by response_shift changes d_k by at most delta_k.
  auto drift = [&](const Vector& v) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      const double delta = 0.5 * grid_step[k] + response_shift;
      total += 0.5 * params.b[k] * delta * (2.0 * std::abs(q[k] + v[k]) + delta);
    }
    return total;
  };
  return drift(vertex) + drift(best_vertex);
}

ScanResult brute_force_gne_scan(const NetworkModel& net, const MarketParams& params,
                                Objective objective, const SearchConfig& config) {
  check_sizes(net, params);
  const std::size_t n = net.nodes();
  if (n > 3) throw DimensionLimitError("brute-force scan supports at most 3 nodes");
  if (config.grid_steps < 1) throw std::invalid_argument("grid needs at least one step per axis");
  if (!params.strictly_sloped()) throw ModelError("brute-force scan needs every demand slope b > 0");
  const auto ni = static_cast<Eigen::Index>(n);
  const std::size_t steps = config.grid_steps;

  ScanResult result;
  result.box = config.box ? *config.box : search_box(net, params);
  if (static_cast<std::size_t>(result.box.size()) != n || (result.box.array() <= 0.0).any()) {
    throw ModelError("scan box must be positive with one entry per node");
  }
  ScanSlack& slack = result.slack;
  slack.grid_step = result.box / static_cast<double>(steps);
  slack.response_sensitivity = response_sensitivity(net, params, objective);
  slack.response_shift = slack.response_sensitivity * 0.5 * slack.grid_step.maxCoeff();
  slack.generator_slack.resize(ni);
  for (Eigen::Index k = 0; k < ni; ++k) {
    // Regret is (b+c)(q - q_br)^2 near an interior best response, and the
    // best response moves by b/(2(b+c)) per unit of r.
    const double bc = params.b[k] + params.c[k];
    const double reach = 0.5 * slack.grid_step[k] + params.b[k] * slack.response_shift / (2.0 * bc);
    slack.generator_slack[k] = bc * reach * reach;
  }

  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= steps + 1;
  result.grid_points = total;

  auto grid_point = [&](std::size_t flat) {
    Vector q(ni);
    for (Eigen::Index k = 0; k < ni; ++k) {
      q[k] = static_cast<double>(flat % (steps + 1)) * slack.grid_step[k];
      flat /= steps + 1;
    }
    return q;
  };

  // Worst generator regret at (q, r) and whether every regret is within slack.
  auto assess = [&](const Vector& q, const Vector& r) {
    double worst = 0.0;
    bool pass = true;
    for (Eigen::Index k = 0; k < ni; ++k) {
      const double a = params.a[k];
      const double b = params.b[k];
      const double c = params.c[k];
      const double here = q[k] * (a - b * (q[k] + r[k])) - c * q[k] * q[k];
      const double regret =
          std::max(0.0, grid_best_profit(a, b, c, r[k], slack.grid_step[k], steps) - here);
      worst = std::max(worst, regret);
      pass = pass && regret <= slack.generator_slack[k];
    }
    return std::pair{worst, pass};
  };

  std::vector<std::uint8_t> passed(total, 0);
  std::size_t workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, total / 64));
  std::vector<std::vector<PassRecord>> records(workers);
  std::vector<double> min_regret(workers, std::numeric_limits<double>::infinity());
  std::vector<std::exception_ptr> errors(workers);

  auto work = [&](std::size_t w, std::size_t begin, std::size_t end) {
    try {
      for (std::size_t flat = begin; flat < end; ++flat) {
        const Vector q = grid_point(flat);
        std::pair<double, bool> best{std::numeric_limits<double>::infinity(), false};
        Vector best_r;
        auto consider = [&](const Vector& r) {
          const auto verdict = assess(q, r);
          if ((verdict.second && !best.second) ||
              (verdict.second == best.second && verdict.first < best.first)) {
            best = verdict;
            best_r = r;
          }
        };
        if (objective == Objective::ConsumerSurplus) {
          const RebalancePolytope poly = build_polytope(net, q);
          const SeparableQuadratic quad = objective_in_rebalance(params, q, objective);
          const std::vector<Vector> vertices =
              enumerate_vertices(poly, kDefaultFeasibilityTol, config.response.vertex_dim_limit);
          std::size_t top = 0;
          std::vector<double> values;
          for (std::size_t i = 0; i < vertices.size(); ++i) {
            values.push_back(quad.value(vertices[i]));
            if (values[i] > values[top]) top = i;
          }
          for (std::size_t i = 0; i < vertices.size(); ++i) {
            const double allowance =
                market_maker_slack(params, q, vertices[i], vertices[top], slack.grid_step,
                                   slack.response_shift) +
                config.response.tie_tol;
            if (values[i] >= values[top] - allowance) consider(vertices[i]);
          }
        } else {
          consider(market_maker_response(net, params, q, objective, config.response).argmax);
        }
        min_regret[w] = std::min(min_regret[w], best.first);
        if (best.second) {
          passed[flat] = 1;
          records[w].push_back({flat, best_r, best.first});
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  const std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(total, w * chunk);
    const std::size_t end = std::min(total, begin + chunk);
    if (w + 1 == workers) {
      work(w, begin, end);
    } else {
      pool.emplace_back(work, w, begin, end);
    }
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  result.min_regret = *std::min_element(min_regret.begin(), min_regret.end());
  std::map<std::size_t, PassRecord> by_index;
  for (auto& list : records)
    for (auto& rec : list) by_index.emplace(rec.index, std::move(rec));

  // Group passing points that touch (including diagonally) into cells.
  std::vector<std::uint8_t> seen(total, 0);
  for (const auto& [start, unused] : by_index) {
    if (seen[start]) continue;
    ScanCell cell;
    cell.lower = grid_point(start);
    cell.upper = cell.lower;
    cell.max_regret = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t flat = stack.back();
      stack.pop_back();
      const PassRecord& rec = by_index.at(flat);
      const Vector q = grid_point(flat);
      cell.lower = cell.lower.cwiseMin(q);
      cell.upper = cell.upper.cwiseMax(q);
      ++cell.grid_points;
      if (rec.regret < cell.max_regret) {
        cell.max_regret = rec.regret;
        cell.q = q;
        cell.r = rec.r;
      }
      std::vector<long long> coord(n);
      std::size_t rest = flat;
      for (std::size_t k = 0; k < n; ++k) {
        coord[k] = static_cast<long long>(rest % (steps + 1));
        rest /= steps + 1;
      }
      std::size_t neighbours = 1;
      for (std::size_t k = 0; k < n; ++k) neighbours *= 3;
      for (std::size_t code = 0; code < neighbours; ++code) {
        std::size_t c = code;
        std::size_t idx = 0;
        std::size_t stride = 1;
        bool inside = true;
        for (std::size_t k = 0; k < n; ++k) {
          const long long v = coord[k] + static_cast<long long>(c % 3) - 1;
          c /= 3;
          if (v < 0 || v > static_cast<long long>(steps)) {
            inside = false;
            break;
          }
          idx += static_cast<std::size_t>(v) * stride;
          stride *= steps + 1;
        }
        if (inside && passed[idx] && !seen[idx]) {
          seen[idx] = 1;
          stack.push_back(idx);
        }
      }
    }
    cell.lower = (cell.lower - 0.5 * slack.grid_step).cwiseMax(0.0);
    cell.upper = cell.upper + 0.5 * slack.grid_step;
    result.cells.push_back(std::move(cell));
  }
  return result;
}

namespace {

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

nlohmann::json player_json(const Player& p) {
  if (p.is_market_maker()) return "market_maker";
  return nlohmann::json{{"generator", *p.generator}};
}

}  // namespace

nlohmann::json to_json(const MarketOutcome& outcome) {
  return {{"q", to_std(outcome.q)},
          {"r", to_std(outcome.r)},
          {"d", to_std(outcome.d)},
          {"prices", to_std(outcome.prices)},
          {"flows", to_std(outcome.flows)},
          {"profits", to_std(outcome.profits)},
          {"w_soc", outcome.w_soc},
          {"w_res", outcome.w_res},
          {"w_con", outcome.w_con},
          {"merch_surplus", outcome.merch_surplus}};
}

nlohmann::json to_json(const GneVerification& verification) {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : verification.certificates) {
    certs.push_back({{"player", player_json(c.player)},
                     {"payoff", c.payoff},
                     {"best_payoff", c.best_payoff},
                     {"regret", c.regret},
                     {"best_response", to_std(c.best_response)},
                     {"satisfied", c.satisfied}});
  }
  return {{"is_gne", verification.is_gne}, {"certificates", certs}};
}

nlohmann::json to_json(const GneResult& result) {
  nlohmann::json doc;
  doc["status"] = std::string(to_string(result.status));
  doc["objective"] = std::string(short_name(result.objective));
  doc["iterations"] = result.iterations;
  doc["message"] = result.message;
  doc["point"] = result.point ? to_json(*result.point) : nlohmann::json(nullptr);
  if (result.cycle) {
    nlohmann::json profiles = nlohmann::json::array();
    for (const auto& p : result.cycle->profiles) profiles.push_back({{"q", to_std(p.q)}, {"r", to_std(p.r)}});
    doc["cycle"] = {{"period", result.cycle->period}, {"profiles", profiles}};
  } else {
    doc["cycle"] = nullptr;
  }
  doc["certificates"] = result.verification ? to_json(*result.verification) : nlohmann::json(nullptr);
  doc["trace"] = nlohmann::json{{"rounds", result.trace.size()},
                                {"max_change", result.trace}};
  return doc;
}

nlohmann::json to_json(const ScanResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"lower", to_std(c.lower)},
                     {"upper", to_std(c.upper)},
                     {"q", to_std(c.q)},
                     {"r", to_std(c.r)},
                     {"max_regret", c.max_regret},
                     {"grid_points", c.grid_points}});
  }
  return {{"cells", cells},
          {"nonexistence_evidence", result.nonexistence_evidence()},
          {"grid_points", result.grid_points},
          {"box", to_std(result.box)},
          {"min_regret", finite_or_null(result.min_regret)},
          {"slack",
           {{"grid_step", to_std(result.slack.grid_step)},
            {"response_sensitivity", result.slack.response_sensitivity},
            {"response_shift", result.slack.response_shift},
            {"generator_slack", to_std(result.slack.generator_slack)}}}};
}

}  // namespace cournot
