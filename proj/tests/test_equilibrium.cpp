#include <doctest.h>

#include <random>

#include "cournot/equilibrium.hpp"
#include "cournot/polytope.hpp"
#include "cournot/twonode.hpp"
#include "support.hpp"

using namespace cournot;
using testing::vec;

namespace {

const MarketParams& lemma() {
  static const MarketParams p(vec({10, 10}), vec({1.2, 1.0}), vec({1, 1}));
  return p;
}

Profile zero(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return Profile{Vector::Zero(m), Vector::Zero(m)};
}

bool inside(const ScanCell& cell, const Vector& q) {
  return ((q - cell.lower).array() >= -1e-12).all() && ((cell.upper - q).array() >= -1e-12).all();
}

bool in_some_cell(const ScanResult& scan, const Vector& q) {
  for (const auto& c : scan.cells)
    if (inside(c, q)) return true;
  return false;
}

}  // namespace

TEST_CASE("search on the residual-welfare objective") {
  const GneResult res = gne_search(NetworkModel::two_node(2.0), lemma(), Objective::ResidualSocialWelfare, zero(2));
  REQUIRE(res.status == GneStatus::Converged);
  CHECK(res.point->r.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(res.point->q[0] == doctest::Approx(10 / 4.4));
  CHECK(res.point->q[1] == doctest::Approx(2.5));
  CHECK(res.verification->is_gne);
  CHECK(res.trace.size() == res.iterations);
}

TEST_CASE("search on the consumer-surplus objective") {
  SUBCASE("no equilibrium at f = 2: a best-response cycle") {
    const NetworkModel net = NetworkModel::two_node(2.0);
    const GneResult res = gne_search(net, lemma(), Objective::ConsumerSurplus, zero(2));
    REQUIRE(res.status == GneStatus::CycleDetected);
    REQUIRE(res.cycle);
    CHECK_FALSE(res.point);
    CHECK(res.message.find("not a proof") != std::string::npos);
    const auto& cyc = *res.cycle;
    REQUIRE(cyc.period >= 2);
    REQUIRE(cyc.profiles.size() == cyc.period);
    for (std::size_t i = 0; i < cyc.period; ++i) {
      const Profile next = best_response_round(net, lemma(), Objective::ConsumerSurplus, cyc.profiles[i]);
      const Profile& want = cyc.profiles[(i + 1) % cyc.period];
      CHECK((next.q - want.q).cwiseAbs().maxCoeff() <= 1e-7);
      CHECK((next.r - want.r).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
  SUBCASE("case-1 equilibrium at f = 4") {
    const GneResult res = gne_search(NetworkModel::two_node(4.0), lemma(), Objective::ConsumerSurplus, zero(2));
    REQUIRE(res.status == GneStatus::Converged);
    CHECK(res.point->q[1] == doctest::Approx(10.0 / 3).epsilon(1e-7));
    CHECK(res.point->r[0] == doctest::Approx(10.0 / 3).epsilon(1e-7));
    CHECK(res.point->q[0] == doctest::Approx(18 / 13.2).epsilon(1e-7));
  }
}

TEST_CASE("search start handling") {
  const NetworkModel net = NetworkModel::two_node(1.0);
  const GneResult bad = gne_search(net, lemma(), Objective::SocialWelfare, Profile{vec({-1, 1}), vec({0, 0})});
  CHECK(bad.status == GneStatus::Infeasible);

  // An infeasible starting r is projected, not rejected.
  const GneResult moved = gne_search(net, lemma(), Objective::SocialWelfare, Profile{vec({1, 1}), vec({5, -5})});
  CHECK(moved.status == GneStatus::Converged);

  SearchConfig tight;
  tight.max_iter = 2;
  const GneResult limited = gne_search(NetworkModel::two_node(kInfinity), lemma(), Objective::SocialWelfare, zero(2), tight);
  CHECK(limited.status == GneStatus::IterationLimit);
  CHECK(limited.iterations == 2);

  CHECK_THROWS_AS(gne_search(net, lemma(), Objective::SocialWelfare, zero(3)), ModelError);
}

TEST_CASE("search is deterministic") {
  std::mt19937_64 rng(71);
  const NetworkModel net = testing::random_network(rng, 3);
  const MarketParams p = testing::random_params(rng, 3);
  for (Objective o : kAllObjectives) {
    const GneResult a = gne_search(net, p, o, zero(3));
    const GneResult b = gne_search(net, p, o, zero(3));
    CHECK(a.status == b.status);
    CHECK(a.trace == b.trace);
    if (a.point) CHECK(a.point->r == b.point->r);
  }
}

TEST_CASE("concave objectives never report an infeasible search") {
  std::mt19937_64 rng(73);
  SearchConfig cfg;
  cfg.max_iter = 2000;
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 1 + i % 4;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    for (Objective o : {Objective::SocialWelfare, Objective::ResidualSocialWelfare}) {
      const GneResult res = gne_search(net, p, o, zero(n), cfg);
      CHECK((res.status == GneStatus::Converged || res.status == GneStatus::IterationLimit));
      if (res.status == GneStatus::Converged) {
        CHECK(verify_gne(net, p, o, res.point->q, res.point->r, cfg.verify_tol).is_gne);
      }
    }
  }
}

TEST_CASE("verification certificates") {
  twonode::TwoNodeParams tp{10, 1.2, 1.0, 1.0, std::nullopt};
  const NetworkModel free = twonode::network(tp);
  const auto soc = twonode::theorem2_equilibrium(tp, Objective::SocialWelfare);
  const auto ok = verify_gne(free, lemma(), Objective::SocialWelfare, soc.q(), soc.rebalance());
  CHECK(ok.is_gne);
  REQUIRE(ok.certificates.size() == 3);
  CHECK(ok.certificates[2].player.is_market_maker());
  for (const auto& c : ok.certificates) CHECK(c.regret <= 1e-9);

  Vector q = soc.q();
  q[0] += 0.1;
  const auto off = verify_gne(free, lemma(), Objective::SocialWelfare, q, soc.rebalance());
  CHECK_FALSE(off.is_gne);
  CHECK_FALSE(off.certificates[0].satisfied);
  CHECK(off.certificates[0].regret > 0.0);
  CHECK(off.certificates[1].satisfied);

  const auto case1 = twonode::theorem2_equilibrium(tp, Objective::ConsumerSurplus);
  CHECK(verify_gne(NetworkModel::two_node(4.0), lemma(), Objective::ConsumerSurplus, case1.q(),
                   case1.rebalance())
            .is_gne);

  CHECK_THROWS_AS(verify_gne(NetworkModel::two_node(1.0), lemma(), Objective::SocialWelfare, vec({1, 1}),
                             vec({2, -2})),
                  InfeasibleProfileError);
}

TEST_CASE("weak equilibrium accepts any tied maximizer") {
  // Symmetric market: both line directions give the same consumer surplus.
  const MarketParams sym(vec({10, 10}), vec({1, 1}), vec({1, 1}));
  const NetworkModel net = NetworkModel::two_node(1.0);
  const Vector q = vec({1, 1});
  const auto a = verify_gne(net, sym, Objective::ConsumerSurplus, q, vec({1, -1}));
  const auto b = verify_gne(net, sym, Objective::ConsumerSurplus, q, vec({-1, 1}));
  CHECK(a.certificates.back().satisfied);
  CHECK(b.certificates.back().satisfied);
}

TEST_CASE("search box and rebalance bound") {
  std::mt19937_64 rng(79);
  for (int i = 0; i < 30; ++i) {
    const std::size_t n = 1 + i % 4;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    const Vector box = search_box(net, p);
    CHECK(((box - p.a.cwiseQuotient(p.b)).array() >= 0.0).all());
    const double rbar = rebalance_bound(net, p);
    CHECK(rbar <= p.a.cwiseQuotient(p.b + 2 * p.c).sum() + 1e-12);
    // Any equilibrium production is below a/(b + 2c), so feasible r stays within rbar.
    const Vector qmax = p.a.cwiseQuotient(p.b + 2 * p.c);
    for (int s = 0; s < 50; ++s) {
      Vector q(static_cast<Eigen::Index>(n));
      for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = testing::uniform(rng, 0, qmax[k]);
      CHECK(testing::random_feasible_rebalance(rng, net, q).lpNorm<Eigen::Infinity>() <= rbar + 1e-9);
    }
  }
  CHECK(rebalance_bound(NetworkModel::two_node(2.0), lemma()) == doctest::Approx(2.0));
}

TEST_CASE("brute-force scan: documented cases") {
  SUBCASE("residual welfare has one cell at the closed form") {
    const ScanResult scan = brute_force_gne_scan(NetworkModel::two_node(2.0), lemma(),
                                                 Objective::ResidualSocialWelfare);
    REQUIRE(scan.cells.size() == 1);
    CHECK(inside(scan.cells[0], vec({10 / 4.4, 2.5})));
    CHECK(scan.cells[0].r.cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("consumer surplus at f = 2 has none") {
    const ScanResult scan = brute_force_gne_scan(NetworkModel::two_node(2.0), lemma(),
                                                 Objective::ConsumerSurplus);
    CHECK(scan.cells.empty());
    CHECK(scan.nonexistence_evidence());
    CHECK(scan.grid_points == 201 * 201);
    CHECK(scan.min_regret > scan.slack.generator_slack.maxCoeff());
  }
  SUBCASE("symmetric social welfare has one cell with r = 0") {
    const MarketParams sym(vec({10, 10}), vec({1, 1}), vec({1, 1}));
    const ScanResult scan = brute_force_gne_scan(NetworkModel::two_node(kInfinity), sym,
                                                 Objective::SocialWelfare);
    REQUIRE(scan.cells.size() == 1);
    CHECK(std::abs(scan.cells[0].r[0]) <= scan.slack.response_shift + 1e-12);
    CHECK(inside(scan.cells[0], vec({2.5, 2.5})));
  }
  CHECK_THROWS_AS(brute_force_gne_scan(NetworkModel::from_lines(4, {{0, 1}, {1, 2}, {2, 3}}, 3),
                                       MarketParams(Vector::Ones(4), Vector::Ones(4), Vector::Ones(4)),
                                       Objective::SocialWelfare),
                  DimensionLimitError);
}

TEST_CASE("verified equilibria lie in scan cells") {
  std::mt19937_64 rng(83);
  SearchConfig cfg;
  cfg.grid_steps = 120;
  for (int i = 0; i < 12; ++i) {
    // Three-node grids grow cubically; keep them coarse.
    const std::size_t n = i < 9 ? 2 : 3;
    SearchConfig grid = cfg;
    if (n == 3) grid.grid_steps = 30;
    const NetworkModel net = testing::random_network(rng, n);
    const MarketParams p = testing::random_params(rng, n);
    for (Objective o : {Objective::SocialWelfare, Objective::ResidualSocialWelfare}) {
      const GneResult res = gne_search(net, p, o, zero(n));
      REQUIRE(res.status == GneStatus::Converged);
      const ScanResult scan = brute_force_gne_scan(net, p, o, grid);
      CHECK(in_some_cell(scan, res.point->q));
    }
  }
  for (int i = 0; i < 10; ++i) {
    auto tp = testing::random_two_node(rng);
    tp.f = testing::uniform(rng, 0.1, 2 * tp.a / tp.b2);
    const auto verdict = twonode::classify_existence(tp);
    if (!verdict.exists) continue;
    const ScanResult scan = brute_force_gne_scan(twonode::network(tp), twonode::market(tp),
                                                 Objective::ConsumerSurplus, cfg);
    CHECK(in_some_cell(scan, verdict.equilibrium->q()));
  }
}

TEST_CASE("result documents") {
  const GneResult res = gne_search(NetworkModel::two_node(2.0), lemma(), Objective::ConsumerSurplus, zero(2));
  const auto doc = to_json(res);
  CHECK(doc["status"] == "cycle_detected");
  CHECK(doc["objective"] == "con");
  CHECK(doc["cycle"]["period"] == res.cycle->period);
  CHECK(doc["point"].is_null());

  const GneResult ok = gne_search(NetworkModel::two_node(2.0), lemma(), Objective::ResidualSocialWelfare, zero(2));
  const auto okdoc = to_json(ok);
  CHECK(okdoc["status"] == "converged");
  CHECK(okdoc["certificates"]["is_gne"] == true);
  CHECK(okdoc["point"]["q"].size() == 2);
}
