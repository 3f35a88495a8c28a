#include <doctest.h>

#include <random>

#include "cournot/polytope.hpp"
#include "support.hpp"

using namespace cournot;
using testing::vec;

namespace {

bool same_points(std::vector<Vector> got, std::vector<Vector> want, double tol = 1e-12) {
  if (got.size() != want.size()) return false;
  auto less = [](const Vector& x, const Vector& y) { return lexicographically_less(x, y); };
  std::sort(got.begin(), got.end(), less);
  std::sort(want.begin(), want.end(), less);
  for (std::size_t i = 0; i < got.size(); ++i) {
    if ((got[i] - want[i]).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

SeparableQuadratic quadratic(const Vector& linear, const Vector& curvature) {
  return SeparableQuadratic{linear, curvature, 0.0};
}

}  // namespace

TEST_CASE("build_polytope transcribes the constraints") {
  const auto poly = build_polytope(NetworkModel::two_node(3.0), vec({1, 2}));
  REQUIRE(poly.rows() == 4);
  Matrix a(4, 2);
  a << -1, 0, 0, -1, 1, 0, -1, 0;
  CHECK(poly.A == a);
  CHECK(poly.u == vec({1, 2, 3, 3}));
  CHECK(poly.origins[2].kind == ConstraintOrigin::Kind::LineUpper);
  CHECK(poly.origins[3].kind == ConstraintOrigin::Kind::LineLower);

  // Infinite capacity drops the line rows.
  CHECK(build_polytope(NetworkModel::two_node(kInfinity), vec({1, 2})).rows() == 2);
  CHECK_THROWS_AS(build_polytope(NetworkModel::two_node(1.0), vec({1, 2, 3})), ModelError);
}

TEST_CASE("vertex enumeration on small cases") {
  CHECK(same_points(enumerate_vertices(build_polytope(NetworkModel::two_node(3.0), vec({1, 2}))),
                    {vec({-1, 1}), vec({2, -2})}));
  CHECK(same_points(enumerate_vertices(build_polytope(NetworkModel::two_node(2.0), vec({5, 5}))),
                    {vec({-2, 2}), vec({2, -2})}));
  CHECK(same_points(enumerate_vertices(build_polytope(NetworkModel::two_node(2.0), vec({0, 0}))),
                    {vec({0, 0})}));
  CHECK(same_points(enumerate_vertices(build_polytope(NetworkModel::single_node(), vec({4}))),
                    {vec({0})}));
  // Empty: negative production leaves nothing.
  CHECK(enumerate_vertices(build_polytope(NetworkModel::two_node(2.0), vec({-1, -1}))).empty());
}

TEST_CASE("two-node vertices are the interval endpoints") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const double q1 = testing::uniform(rng, 0, 5), q2 = testing::uniform(rng, 0, 5);
    const double f = testing::uniform(rng, 0.01, 6);
    const double lo = std::max(-q1, -f), hi = std::min(q2, f);
    const auto poly = build_polytope(NetworkModel::two_node(f), vec({q1, q2}));
    CHECK(same_points(enumerate_vertices(poly), {vec({lo, -lo}), vec({hi, -hi})}, 1e-12));
  }
}

TEST_CASE("vertices of random polytopes are feasible basic points") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + i % 3;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector q = testing::random_production(rng, p);
    const auto poly = build_polytope(net, q);
    const auto vs = enumerate_vertices(poly);
    REQUIRE_FALSE(vs.empty());
    for (std::size_t j = 0; j < vs.size(); ++j) {
      CHECK(poly.contains(vs[j], 1e-9));
      CHECK(std::abs(vs[j].sum()) <= 1e-9);
      // At least n-1 linearly independent active rows.
      std::vector<Eigen::Index> active;
      const Vector slack = poly.u - poly.A * vs[j];
      for (Eigen::Index r = 0; r < slack.size(); ++r)
        if (slack[r] <= 1e-9) active.push_back(r);
      Matrix rows(static_cast<Eigen::Index>(active.size()) + 1, static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < active.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = poly.A.row(active[r]);
      rows.row(rows.rows() - 1).setOnes();
      CHECK(static_cast<std::size_t>(Eigen::FullPivLU<Matrix>(rows).rank()) == n);
      if (j > 0) CHECK(lexicographically_less(vs[j - 1], vs[j]));
    }
  }
}

TEST_CASE("vertex enumeration respects the dimension limit") {
  std::mt19937_64 rng(1);
  const NetworkModel net = testing::random_network(rng, 9);
  const MarketParams p = testing::random_params(rng, 9);
  CHECK_THROWS_AS(enumerate_vertices(build_polytope(net, testing::random_production(rng, p))),
                  DimensionLimitError);
}

TEST_CASE("concave maximization: closed-form cases") {
  const MarketParams lemma(vec({10, 10}), vec({1.2, 1.0}), vec({1, 1}));
  // Interior optimum of social welfare: b1(q1 + r) = b2(q2 - r).
  const Vector q = vec({2.0, 3.5});
  const auto soc = maximize_concave_quadratic(build_polytope(NetworkModel::two_node(1e6), q),
                                              objective_in_rebalance(lemma, q, Objective::SocialWelfare));
  const double r = (1.0 * 3.5 - 1.2 * 2.0) / 2.2;
  CHECK(soc.r[0] == doctest::Approx(r).epsilon(1e-12));
  CHECK(soc.r[1] == doctest::Approx(-r).epsilon(1e-12));

  const auto res = maximize_concave_quadratic(build_polytope(NetworkModel::two_node(2.0), q),
                                              objective_in_rebalance(lemma, q, Objective::ResidualSocialWelfare));
  CHECK(res.r.cwiseAbs().maxCoeff() <= 1e-12);

  // Unconstrained r = 5 clipped by the line to 1.
  const MarketParams unit(vec({10, 10}), vec({1, 1}), vec({1, 1}));
  const Vector q2 = vec({0, 10});
  const auto bind = maximize_concave_quadratic(build_polytope(NetworkModel::two_node(1.0), q2),
                                               objective_in_rebalance(unit, q2, Objective::SocialWelfare));
  CHECK(bind.r[0] == doctest::Approx(1.0));
  CHECK(bind.r[1] == doctest::Approx(-1.0));
  REQUIRE(bind.multipliers.size() == 1);
  CHECK(bind.multipliers[0] > 0.0);
}

TEST_CASE("concave maximization: KKT and sampled dominance") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    const std::size_t n = 1 + i % 4;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector q = testing::random_production(rng, p);
    const Objective o = i % 2 ? Objective::SocialWelfare : Objective::ResidualSocialWelfare;
    const auto poly = build_polytope(net, q);
    const auto f = objective_in_rebalance(p, q, o);
    const auto sol = maximize_concave_quadratic(poly, f);
    CHECK(poly.contains(sol.r, 1e-9));
    CHECK(std::abs(sol.r.sum()) <= 1e-9);
    CHECK(kkt_residual(poly, f, sol.r).worst() < 1e-7);
    CHECK(sol.value == doctest::Approx(f.value(sol.r)));
    for (const Vector& v : enumerate_vertices(poly)) CHECK(f.value(v) <= sol.value + 1e-7);
    for (int s = 0; s < 1000; ++s) {
      CHECK(f.value(testing::random_feasible_rebalance(rng, net, q)) <= sol.value + 1e-7);
    }
  }
}

TEST_CASE("concave maximization with zero curvature coordinates") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 2 + i % 3;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector q = testing::random_production(rng, p);
    Vector curv = -p.b;
    curv[0] = 0.0;
    if (i % 4 == 0) curv.setZero();  // purely linear
    const SeparableQuadratic f = quadratic(p.a - p.b.cwiseProduct(q), curv);
    const auto poly = build_polytope(net, q);
    const auto sol = maximize_concave_quadratic(poly, f);
    CHECK(poly.contains(sol.r, 1e-9));
    for (const Vector& v : enumerate_vertices(poly)) CHECK(f.value(v) <= sol.value + 1e-7);
    for (int s = 0; s < 200; ++s) {
      CHECK(f.value(testing::random_feasible_rebalance(rng, net, q)) <= sol.value + 1e-7);
    }
  }
}

TEST_CASE("concave maximization errors") {
  const auto poly = build_polytope(NetworkModel::two_node(1.0), vec({1, 1}));
  CHECK_THROWS_AS(maximize_concave_quadratic(poly, quadratic(vec({1, 1}), vec({1, -1}))),
                  std::invalid_argument);
  CHECK_THROWS_AS(maximize_concave_quadratic(build_polytope(NetworkModel::two_node(1.0), vec({-1, 1})),
                                             quadratic(vec({1, 1}), vec({-1, -1}))),
                  EmptyPolytopeError);
  CHECK_THROWS_AS(maximize_concave_quadratic(poly, quadratic(vec({1, 1, 1}), vec({-1, -1, -1}))),
                  ModelError);
}

TEST_CASE("convex maximization on vertices") {
  // q = (5,5), f = 2, b = (2,1): W_con(2) = 49 + 4.5 beats W_con(-2) = 9 + 24.5.
  const MarketParams p(vec({10, 10}), vec({2, 1}), vec({1, 1}));
  const Vector q = vec({5, 5});
  const auto poly = build_polytope(NetworkModel::two_node(2.0), q);
  const auto f = objective_in_rebalance(p, q, Objective::ConsumerSurplus);
  const auto sol = maximize_convex_quadratic_on_vertices(poly, f);
  CHECK(sol.argmax == vec({2, -2}));
  CHECK(sol.value == doctest::Approx(53.5));
  CHECK(f.value(vec({-2, 2})) == doctest::Approx(33.5));
  CHECK(sol.near_optimal.size() == 1);

  // Symmetric tie: both endpoints, lexicographically smaller reported.
  const MarketParams sym(vec({10, 10}), vec({1, 1}), vec({1, 1}));
  const auto tie = maximize_convex_quadratic_on_vertices(
      build_polytope(NetworkModel::two_node(3.0), vec({1, 1})),
      objective_in_rebalance(sym, vec({1, 1}), Objective::ConsumerSurplus));
  CHECK(tie.argmax == vec({-1, 1}));
  REQUIRE(tie.near_optimal.size() == 2);
  CHECK(tie.near_optimal[1] == vec({1, -1}));

  // b1 > b2 at the unconstrained case-1 production: importing all of q2 wins.
  const MarketParams lemma(vec({10, 10}), vec({1.2, 1.0}), vec({1, 1}));
  const Vector qs = vec({18.0 / 13.2, 10.0 / 3.0});
  const auto imp = maximize_convex_quadratic_on_vertices(
      build_polytope(NetworkModel::two_node(kInfinity), qs),
      objective_in_rebalance(lemma, qs, Objective::ConsumerSurplus));
  CHECK(imp.argmax[0] == doctest::Approx(10.0 / 3.0));

  CHECK_THROWS_AS(maximize_convex_quadratic_on_vertices(poly, quadratic(vec({0, 0}), vec({-1, 1}))),
                  std::invalid_argument);
  CHECK_THROWS_AS(maximize_convex_quadratic_on_vertices(
                      build_polytope(NetworkModel::two_node(1.0), vec({-1, -1})), f),
                  EmptyPolytopeError);
}

TEST_CASE("convex maximization dominates random feasible points") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 2 + i % 3;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector q = testing::random_production(rng, p);
    const auto poly = build_polytope(net, q);
    const auto f = objective_in_rebalance(p, q, Objective::ConsumerSurplus);
    const auto sol = maximize_convex_quadratic_on_vertices(poly, f);
    for (int s = 0; s < 1000; ++s) {
      CHECK(f.value(testing::random_feasible_rebalance(rng, net, q)) <= sol.value + 1e-9);
    }
    for (double v : sol.vertex_values) CHECK(v <= sol.value + 1e-12);
  }
}

TEST_CASE("solvers are deterministic") {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + i % 3;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector q = testing::random_production(rng, p);
    const auto poly = build_polytope(net, q);
    const auto fs = objective_in_rebalance(p, q, Objective::SocialWelfare);
    const auto fc = objective_in_rebalance(p, q, Objective::ConsumerSurplus);
    CHECK(maximize_concave_quadratic(poly, fs).r == maximize_concave_quadratic(poly, fs).r);
    CHECK(maximize_convex_quadratic_on_vertices(poly, fc).argmax ==
          maximize_convex_quadratic_on_vertices(poly, fc).argmax);
  }
}

TEST_CASE("nonnegative least squares") {
  Matrix m(3, 2);
  m << 1, 0, 0, 1, 1, 1;
  // Unconstrained solution has a negative entry; NNLS clamps it.
  const Vector x = nonnegative_least_squares(m, vec({-1, 2, 1}));
  CHECK(x[0] == doctest::Approx(0.0));
  CHECK(x[1] == doctest::Approx(1.5));
  const Vector y = nonnegative_least_squares(m, vec({1, 2, 3}));
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(2.0));
}
