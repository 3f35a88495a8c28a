#include "cournot/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cournot {

namespace {

void require_objective_size(const SeparableQuadratic& objective, std::size_t n) {
  if (static_cast<std::size_t>(objective.linear.size()) != n ||
      static_cast<std::size_t>(objective.curvature.size()) != n) {
    throw ModelError("objective size does not match polytope dimension");
  }
}

// Orthonormal basis for { p : C p = 0 }.
Matrix null_space(const Matrix& c) {
  const Eigen::Index n = c.cols();
  if (c.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

Matrix working_matrix(const RebalancePolytope& poly, const std::vector<std::size_t>& working) {
  const auto n = static_cast<Eigen::Index>(poly.dimension());
  Matrix c(static_cast<Eigen::Index>(working.size()) + 1, n);
  c.row(0).setOnes();
  for (std::size_t w = 0; w < working.size(); ++w) {
    c.row(static_cast<Eigen::Index>(w) + 1) = poly.A.row(static_cast<Eigen::Index>(working[w]));
  }
  return c;
}

bool same_line_pair(const ConstraintOrigin& x, const ConstraintOrigin& y) {
  return x.kind != ConstraintOrigin::Kind::Demand && y.kind != ConstraintOrigin::Kind::Demand &&
         x.index == y.index;
}

// Calls visit(indices) for every size-k subset of {0..m-1} in lexicographic order.
template <typename Visit>
void for_each_combination(std::size_t m, std::size_t k, Visit&& visit) {
  if (k > m) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
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

}  // namespace

bool lexicographically_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool RebalancePolytope::contains(const Vector& r, double tol) const {
  if (static_cast<std::size_t>(r.size()) != dimension()) return false;
  if (std::abs(r.sum()) > tol) return false;
  if (A.rows() == 0) return true;
  return ((A * r - u).array() <= tol).all();
}

RebalancePolytope build_polytope(const NetworkModel& net, const Vector& q) {
  const std::size_t n = net.nodes();
  if (static_cast<std::size_t>(q.size()) != n) {
    throw ModelError("production vector length does not match the network");
  }
  std::size_t finite_lines = 0;
  for (Eigen::Index l = 0; l < net.capacities().size(); ++l)
    if (std::isfinite(net.capacities()[l])) ++finite_lines;

  RebalancePolytope poly;
  const auto rows = static_cast<Eigen::Index>(n + 2 * finite_lines);
  poly.A = Matrix::Zero(rows, static_cast<Eigen::Index>(n));
  poly.u = Vector::Zero(rows);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < n; ++k, ++row) {
    poly.A(row, static_cast<Eigen::Index>(k)) = -1.0;
    poly.u[row] = q[static_cast<Eigen::Index>(k)];
    poly.origins.push_back({ConstraintOrigin::Kind::Demand, k});
  }
  const Matrix& h = net.shift_factors();
  for (std::size_t l = 0; l < net.lines(); ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    const double cap = net.capacities()[li];
    if (!std::isfinite(cap)) continue;
    poly.A.row(row) = h.row(li);
    poly.u[row] = cap;
    poly.origins.push_back({ConstraintOrigin::Kind::LineUpper, l});
    ++row;
    poly.A.row(row) = -h.row(li);
    poly.u[row] = cap;
    poly.origins.push_back({ConstraintOrigin::Kind::LineLower, l});
    ++row;
  }
  return poly;
}

std::vector<Vector> enumerate_vertices(const RebalancePolytope& poly, double tol,
                                       std::size_t dim_limit) {
  const std::size_t n = poly.dimension();
  if (n > dim_limit) {
    throw DimensionLimitError("vertex enumeration limited to " + std::to_string(dim_limit) +
                              " nodes, got " + std::to_string(n));
  }
  std::vector<Vector> vertices;
  if (n == 0) return vertices;
  const auto ni = static_cast<Eigen::Index>(n);

  Matrix basis(ni, ni);
  Vector rhs(ni);
  for_each_combination(poly.rows(), n - 1, [&](const std::vector<std::size_t>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = i + 1; j < rows.size(); ++j)
        if (same_line_pair(poly.origins[rows[i]], poly.origins[rows[j]])) return;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      basis.row(static_cast<Eigen::Index>(i)) = poly.A.row(static_cast<Eigen::Index>(rows[i]));
      rhs[static_cast<Eigen::Index>(i)] = poly.u[static_cast<Eigen::Index>(rows[i])];
    }
    basis.row(ni - 1).setOnes();
    rhs[ni - 1] = 0.0;
    Eigen::FullPivLU<Matrix> lu(basis);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return;
    const Vector v = lu.solve(rhs);
    if (!poly.contains(v, tol * (1.0 + v.lpNorm<Eigen::Infinity>()))) return;
    for (const Vector& w : vertices)
      if ((w - v).lpNorm<Eigen::Infinity>() <= tol) return;
    vertices.push_back(v);
  });
  std::sort(vertices.begin(), vertices.end(), lexicographically_less);
  return vertices;
}

ConcaveSolution maximize_concave_quadratic(const RebalancePolytope& poly,
                                           const SeparableQuadratic& objective, double tol) {
  const std::size_t n = poly.dimension();
  require_objective_size(objective, n);
  if ((objective.curvature.array() > 0.0).any()) {
    throw std::invalid_argument("concave maximization needs nonpositive curvature");
  }
  const auto ni = static_cast<Eigen::Index>(n);
  Vector x = Vector::Zero(ni);
  if (!poly.contains(x, 1e-12)) {
    throw EmptyPolytopeError("r = 0 is infeasible: production must be nonnegative");
  }

  // Minimize 0.5 x'Gx + g'x with G = -curvature, g = -linear.
  const Vector g_diag = -objective.curvature;
  const Vector g = -objective.linear;
  const double curvature_scale = std::max(1.0, g_diag.lpNorm<Eigen::Infinity>());

  std::vector<std::size_t> working;
  std::vector<bool> in_working(poly.rows(), false);
  const std::size_t max_iter = 100 * (poly.rows() + n) + 100;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const Vector grad = g_diag.cwiseProduct(x) + g;
    const Matrix c = working_matrix(poly, working);
    const Matrix z = null_space(c);

    Vector p = Vector::Zero(ni);
    bool ray = false;
    if (z.cols() > 0) {
      const Matrix reduced = z.transpose() * g_diag.asDiagonal() * z;
      const Vector reduced_grad = z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
      const Vector& evals = eig.eigenvalues();
      const Matrix& evecs = eig.eigenvectors();
      const Vector comps = evecs.transpose() * reduced_grad;
      const double flat_cut = 1e-12 * curvature_scale;
      Vector flat = Vector::Zero(comps.size());
      Vector newton = Vector::Zero(comps.size());
      for (Eigen::Index i = 0; i < comps.size(); ++i) {
        if (evals[i] <= flat_cut) {
          flat[i] = comps[i];
        } else {
          newton[i] = comps[i] / evals[i];
        }
      }
      if (flat.lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + reduced_grad.lpNorm<Eigen::Infinity>())) {
        p = -z * (evecs * flat);
        ray = true;
      } else {
        p = -z * (evecs * newton);
      }
    }

    if (p.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      const Vector y = c.transpose().completeOrthogonalDecomposition().solve(-grad);
      const double mult_tol = 1e-10 * (1.0 + grad.lpNorm<Eigen::Infinity>());
      std::size_t drop = working.size();
      for (std::size_t w = 0; w < working.size(); ++w) {
        if (y[static_cast<Eigen::Index>(w) + 1] < -mult_tol &&
            (drop == working.size() || working[w] < working[drop])) {
          drop = w;
        }
      }
      if (drop == working.size()) {
        ConcaveSolution sol;
        sol.r = x;
        sol.value = objective.value(x);
        sol.iterations = iter + 1;
        sol.balance_multiplier = y[0];
        std::vector<std::size_t> order(working.size());
        for (std::size_t w = 0; w < order.size(); ++w) order[w] = w;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t i, std::size_t j) { return working[i] < working[j]; });
        sol.multipliers.resize(static_cast<Eigen::Index>(working.size()));
        for (std::size_t w = 0; w < order.size(); ++w) {
          sol.active.push_back(working[order[w]]);
          sol.multipliers[static_cast<Eigen::Index>(w)] =
              std::max(0.0, y[static_cast<Eigen::Index>(order[w]) + 1]);
        }
        return sol;
      }
      in_working[working[drop]] = false;
      working.erase(working.begin() + static_cast<std::ptrdiff_t>(drop));
      continue;
    }

    double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
    std::size_t blocking = poly.rows();
    const double p_scale = p.lpNorm<Eigen::Infinity>();
    for (std::size_t i = 0; i < poly.rows(); ++i) {
      if (in_working[i]) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const double ap = poly.A.row(ii).dot(p);
      if (ap <= 1e-14 * p_scale * std::max(1.0, poly.A.row(ii).lpNorm<Eigen::Infinity>())) continue;
      const double slack = std::max(0.0, poly.u[ii] - poly.A.row(ii).dot(x));
      const double step = slack / ap;
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    if (!std::isfinite(alpha)) {
      throw std::logic_error("unbounded descent direction in a bounded polytope");
    }
    x += alpha * p;
    if (blocking < poly.rows()) {
      working.push_back(blocking);
      in_working[blocking] = true;
    }
  }
  throw std::runtime_error("active-set iteration limit reached");
}

ConvexSolution maximize_convex_quadratic_on_vertices(const RebalancePolytope& poly,
                                                     const SeparableQuadratic& objective,
                                                     double tie_tol, std::size_t dim_limit) {
  require_objective_size(objective, poly.dimension());
  if ((objective.curvature.array() < 0.0).any()) {
    throw std::invalid_argument("convex vertex scan needs nonnegative curvature");
  }
  ConvexSolution sol;
  sol.vertices = enumerate_vertices(poly, kDefaultFeasibilityTol, dim_limit);
  if (sol.vertices.empty()) throw EmptyPolytopeError("re-balancing polytope is empty");
  sol.vertex_values.reserve(sol.vertices.size());
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& v : sol.vertices) {
    sol.vertex_values.push_back(objective.value(v));
    best = std::max(best, sol.vertex_values.back());
  }
  // Vertices are already in lexicographic order, so the first tied one wins.
  for (std::size_t i = 0; i < sol.vertices.size(); ++i) {
    if (sol.vertex_values[i] >= best - tie_tol) sol.near_optimal.push_back(sol.vertices[i]);
  }
  sol.argmax = sol.near_optimal.front();
  sol.value = objective.value(sol.argmax);
  return sol;
}

double KktResidual::worst() const { return std::max({stationarity, primal, complementarity}); }

KktResidual kkt_residual(const RebalancePolytope& poly, const SeparableQuadratic& objective,
                         const Vector& r, double active_tol) {
  const std::size_t n = poly.dimension();
  require_objective_size(objective, n);
  const auto ni = static_cast<Eigen::Index>(n);
  KktResidual res;

  res.primal = std::abs(r.sum());
  const Vector slack = poly.A.rows() > 0 ? Vector(poly.u - poly.A * r) : Vector(Vector::Zero(0));
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    res.primal = std::max(res.primal, -slack[i]);
    if (slack[i] <= active_tol * (1.0 + std::abs(poly.u[i]))) active.push_back(i);
  }

  // Stationarity for a maximizer: grad = A_act' lambda + 1 mu, lambda >= 0.
  // The balance multiplier is eliminated by projecting out the ones direction.
  const Matrix proj = Matrix::Identity(ni, ni) - Matrix::Constant(ni, ni, 1.0 / static_cast<double>(n));
  const Vector grad = objective.gradient(r);
  Matrix m(ni, static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = proj * poly.A.row(active[j]).transpose();
  const Vector target = proj * grad;
  Vector lambda = Vector::Zero(static_cast<Eigen::Index>(active.size()));
  if (!active.empty()) lambda = nonnegative_least_squares(m, target);
  res.stationarity = (m * lambda - target).norm();
  for (std::size_t j = 0; j < active.size(); ++j) {
    res.complementarity = std::max(
        res.complementarity, std::abs(lambda[static_cast<Eigen::Index>(j)] * slack[active[j]]));
  }
  return res;
}

Vector nonnegative_least_squares(const Matrix& m, const Vector& y) {
  const Eigen::Index cols = m.cols();
  Vector x = Vector::Zero(cols);
  std::vector<bool> passive(static_cast<std::size_t>(cols), false);
  const double eps = 1e-14 * std::max(1.0, m.lpNorm<Eigen::Infinity>() * y.lpNorm<Eigen::Infinity>());

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < cols; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix sub(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = m.col(idx[j]);
    const Vector zs = sub.completeOrthogonalDecomposition().solve(y);
    Vector z = Vector::Zero(cols);
    for (std::size_t j = 0; j < idx.size(); ++j) z[idx[j]] = zs[static_cast<Eigen::Index>(j)];
    return z;
  };

  for (Eigen::Index outer = 0; outer < 3 * cols + 3; ++outer) {
    const Vector w = m.transpose() * (y - m * x);
    Eigen::Index enter = -1;
    double best = eps;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
        best = w[j];
        enter = j;
      }
    }
    if (enter < 0) break;
    passive[static_cast<std::size_t>(enter)] = true;
    for (Eigen::Index inner = 0; inner < 3 * cols + 3; ++inner) {
      const Vector z = solve_passive();
      double alpha = 1.0;
      bool feasible = true;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          feasible = false;
          const double denom = x[j] - z[j];
          if (denom > 0.0) alpha = std::min(alpha, x[j] / denom);
        }
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= eps) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  return x;
}

}  // namespace cournot
