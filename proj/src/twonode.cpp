#include "cournot/twonode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cournot::twonode {

namespace {

constexpr double kBoundaryTol = 1e-9;

TwoNodePoint best_response_point(const TwoNodeParams& p, double r) {
  TwoNodePoint pt;
  pt.r = r;
  pt.q1 = std::max(0.0, (p.a - p.b1 * r) / (2.0 * (p.b1 + p.c)));
  pt.q2 = std::max(0.0, (p.a + p.b2 * r) / (2.0 * (p.b2 + p.c)));
  return pt;
}

TwoNodePoint case1_point(const TwoNodeParams& p) {
  TwoNodePoint pt;
  pt.q2 = p.a / (p.b2 + 2.0 * p.c);
  pt.r = pt.q2;
  pt.q1 = p.b1 < p.b2 + 2.0 * p.c
              ? p.a * (2.0 * p.c + p.b2 - p.b1) / (2.0 * (p.b1 + p.c) * (p.b2 + 2.0 * p.c))
              : 0.0;
  return pt;
}

// Consumer surplus in the scalar notation (half of the convex Pi(r)).
double surplus(const TwoNodeParams& p, double q1, double q2, double r) {
  return 0.5 * p.b1 * (q1 + r) * (q1 + r) + 0.5 * p.b2 * (q2 - r) * (q2 - r);
}

}  // namespace

void TwoNodeParams::validate() const {
  if (!(a > 0.0) || !(c > 0.0) || !(b2 > 0.0)) {
    throw ModelError("two-node parameters need a > 0, c > 0 and b2 > 0");
  }
  const double ratio = b1 / b2;
  if (!(ratio > 1.0) || !(ratio <= 3.0)) {
    throw ModelError("two-node analysis needs 1 < b1/b2 <= 3");
  }
  if (f && (std::isnan(*f) || *f < 0.0)) throw ModelError("line capacity must be nonnegative");
}

TwoNodeParams TwoNodeParams::with_capacity(std::optional<double> capacity) const {
  TwoNodeParams copy = *this;
  copy.f = capacity;
  return copy;
}

Vector TwoNodePoint::q() const {
  Vector v(2);
  v << q1, q2;
  return v;
}

Vector TwoNodePoint::rebalance() const {
  Vector v(2);
  v << r, -r;
  return v;
}

double threshold_f0(const TwoNodeParams& p) {
  p.validate();
  const double a = p.a, b1 = p.b1, b2 = p.b2, c = p.c;
  return a * b2 * (b1 + b2 + c * (3.0 - b1 / b2)) /
         (b1 * b2 * (b1 + b2) + b1 * (b1 + 5.0 * b2) * c + 2.0 * (b1 + b2) * c * c);
}

double threshold_f1(const TwoNodeParams& p) {
  p.validate();
  const double a = p.a, b1 = p.b1, b2 = p.b2, c = p.c;
  return a * c * (b1 - b2) / (b1 * b2 * (b1 + b2) + c * (b1 * b1 + b2 * b2));
}

Thresholds thresholds(const TwoNodeParams& p) {
  p.validate();
  Thresholds t;
  t.uncongested = p.a / (p.b2 + 2.0 * p.c);
  t.node1_idle = p.a / p.b1;
  t.node1_bound = p.a / (3.0 * p.b1 + 2.0 * p.c);
  t.f0 = threshold_f0(p);
  t.f1 = threshold_f1(p);
  return t;
}

ExistenceVerdict classify_existence(const TwoNodeParams& p) {
  p.validate();
  ExistenceVerdict v;
  v.thresholds = thresholds(p);
  const Thresholds& t = v.thresholds;
  if (!p.f || std::isinf(*p.f)) {
    v.exists = true;
    v.condition = 1;
    v.equilibrium = case1_point(p);
    return v;
  }
  const double f = *p.f;
  for (double x : t.values()) {
    if (std::abs(f - x) <= kBoundaryTol) v.boundary = true;
  }
  if (f >= t.uncongested) {
    v.condition = 1;
  } else if (f <= t.node1_idle && f >= t.node1_bound && f >= t.f0) {
    v.condition = 2;
  } else if (f > t.node1_idle) {
    v.condition = 3;
  } else if (f <= t.node1_idle && f <= t.node1_bound && f <= t.f1) {
    v.condition = 4;
  }
  v.exists = v.condition.has_value();
  if (v.condition == 1) {
    v.equilibrium = case1_point(p);
  } else if (v.exists) {
    // Conditions 2-4 all have the line binding toward node 1.
    v.equilibrium = best_response_point(p, f);
  }
  return v;
}

TwoNodePoint theorem2_equilibrium(const TwoNodeParams& p, Objective objective) {
  p.validate();
  if (p.f && std::isfinite(*p.f)) {
    throw std::invalid_argument("closed forms hold only for an unconstrained line");
  }
  const double a = p.a, b1 = p.b1, b2 = p.b2, c = p.c;
  switch (objective) {
    case Objective::SocialWelfare: {
      const double r = a * c * (b2 - b1) /
                       ((b1 + b2) * (b1 * b2 + 2.0 * c * c) + c * (b1 * b1 + b2 * b2 + 4.0 * b1 * b2));
      return TwoNodePoint{(a - b1 * r) / (2.0 * (b1 + c)), (a + b2 * r) / (2.0 * (b2 + c)), r};
    }
    case Objective::ResidualSocialWelfare:
      return TwoNodePoint{a / (2.0 * (b1 + c)), a / (2.0 * (b2 + c)), 0.0};
    case Objective::ConsumerSurplus:
      return case1_point(p);
  }
  throw std::logic_error("unknown objective");
}

bool VertexCandidate::is_equilibrium(double tol) const {
  return feasibility_gap <= tol && optimality_gap <= tol;
}

std::vector<VertexCandidate> vertex_candidates(const TwoNodeParams& p) {
  p.validate();
  const double f = p.f ? *p.f : std::numeric_limits<double>::infinity();
  std::vector<VertexCandidate> out;

  auto add = [&](VertexCandidate::Vertex vertex, TwoNodePoint pt) {
    VertexCandidate cand;
    cand.vertex = vertex;
    cand.point = pt;
    const double lo = std::max(-pt.q1, -f);
    const double hi = std::min(pt.q2, f);
    cand.feasibility_gap = std::max({0.0, lo - pt.r, pt.r - hi});
    if (lo <= hi) {
      const double best = std::max(surplus(p, pt.q1, pt.q2, lo), surplus(p, pt.q1, pt.q2, hi));
      cand.optimality_gap = std::max(0.0, best - surplus(p, pt.q1, pt.q2, pt.r));
    } else {
      cand.optimality_gap = std::numeric_limits<double>::infinity();
    }
    out.push_back(cand);
  };

  TwoNodePoint import_all;
  import_all.q2 = p.a / (p.b2 + 2.0 * p.c);
  import_all.r = import_all.q2;
  import_all.q1 = std::max(0.0, (p.a - p.b1 * import_all.r) / (2.0 * (p.b1 + p.c)));
  add(VertexCandidate::Vertex::ImportAll, import_all);

  TwoNodePoint export_all;
  export_all.q1 = p.a / (p.b1 + 2.0 * p.c);
  export_all.r = -export_all.q1;
  export_all.q2 = std::max(0.0, (p.a + p.b2 * export_all.r) / (2.0 * (p.b2 + p.c)));
  add(VertexCandidate::Vertex::ExportAll, export_all);

  if (std::isfinite(f)) {
    add(VertexCandidate::Vertex::LineForward, best_response_point(p, f));
    add(VertexCandidate::Vertex::LineBackward, best_response_point(p, -f));
  }
  return out;
}

std::string RegionInterval::label() const {
  if (!exists) return "no-gne";
  return "exists (condition " + std::to_string(*condition) + ")";
}

bool RegionReport::has_no_gne() const {
  return std::any_of(intervals.begin(), intervals.end(),
                     [](const RegionInterval& i) { return !i.exists; });
}

RegionReport existence_partition(const TwoNodeParams& p, double from, double to) {
  p.validate();
  if (!(from >= 0.0) || !(to >= from)) throw ModelError("capacity range must satisfy 0 <= from <= to");
  RegionReport report;
  report.thresholds = thresholds(p);

  std::vector<double> cuts{from, to};
  for (double t : report.thresholds.values())
    if (t > from && t < to) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto classify_at = [&](double f) { return classify_existence(p.with_capacity(f)); };
  auto same = [](const RegionInterval& x, const ExistenceVerdict& v) {
    return x.exists == v.exists && x.condition == v.condition;
  };

  // Alternate point pieces and open pieces, merging equal labels.
  std::vector<RegionInterval>& out = report.intervals;
  auto push_piece = [&](double lo, double hi, bool lo_closed, bool hi_closed, const ExistenceVerdict& v) {
    if (!out.empty() && same(out.back(), v) && (out.back().upper_closed || lo_closed)) {
      out.back().upper = hi;
      out.back().upper_closed = hi_closed;
      return;
    }
    out.push_back(RegionInterval{lo, hi, lo_closed, hi_closed, v.exists, v.condition});
  };
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    push_piece(cuts[i], cuts[i], true, true, classify_at(cuts[i]));
    if (i + 1 < cuts.size()) {
      const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
      push_piece(cuts[i], cuts[i + 1], false, false, classify_at(mid));
    }
  }
  return report;
}

NetworkModel network(const TwoNodeParams& p) {
  return NetworkModel::two_node(p.f ? *p.f : kInfinity);
}

MarketParams market(const TwoNodeParams& p) {
  Vector a(2), b(2), c(2);
  a << p.a, p.a;
  b << p.b1, p.b2;
  c << p.c, p.c;
  return MarketParams(a, b, c);
}

std::optional<TwoNodeParams> from_model(const NetworkModel& net, const MarketParams& params) {
  if (net.nodes() != 2 || params.nodes() != 2 || net.lines() != 1) return std::nullopt;
  const Matrix& h = net.shift_factors();
  if (std::abs(std::abs(h(0, 0) - h(0, 1)) - 1.0) > 1e-12) return std::nullopt;
  if (params.a[0] != params.a[1] || params.c[0] != params.c[1]) return std::nullopt;
  TwoNodeParams p{params.a[0], params.b[0], params.b[1], params.c[0], std::nullopt};
  const double cap = net.capacities()[0];
  if (std::isfinite(cap)) p.f = cap;
  try {
    p.validate();
  } catch (const ModelError&) {
    return std::nullopt;
  }
  return p;
}

}  // namespace cournot::twonode
