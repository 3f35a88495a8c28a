#include "cournot/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace cournot::experiments {

namespace {

const char* const kColumns[] = {"f12", "objective", "status", "q1", "q2", "r", "w_soc",
                                "w_con", "profit1", "profit2", "merch_surplus", "boundary"};
constexpr std::size_t kColumnCount = std::size(kColumns);

SweepValues values_from(const MarketOutcome& o) {
  return SweepValues{o.q[0],       o.q[1],       o.r[0],       o.w_soc,
                     o.w_con,      o.profits[0], o.profits[1], o.merch_surplus};
}

SweepStatus from_search(GneStatus status) {
  switch (status) {
    case GneStatus::Converged: return SweepStatus::Exists;
    case GneStatus::CycleDetected: return SweepStatus::NoGne;
    default: return SweepStatus::Limit;
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

bool on_threshold(const twonode::TwoNodeParams& p, double f) {
  for (double t : twonode::thresholds(p).values()) {
    if (std::abs(f - t) <= 1e-9) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(SweepStatus status) {
  switch (status) {
    case SweepStatus::Exists: return "exists";
    case SweepStatus::NoGne: return "no-gne";
    case SweepStatus::Limit: return "limit";
  }
  return "limit";
}

SweepStatus parse_sweep_status(std::string_view text) {
  for (SweepStatus s : {SweepStatus::Exists, SweepStatus::NoGne, SweepStatus::Limit}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown sweep status '" + std::string(text) + "'");
}

void SweepSpec::validate() const {
  if (parameter != "f12") throw std::invalid_argument("only the f12 parameter can be swept");
  if (!(from < to)) throw std::invalid_argument("sweep range needs from < to");
  if (from < 0.0) throw std::invalid_argument("line capacities must be nonnegative");
  if (steps < 2) throw std::invalid_argument("sweep needs at least two steps");
  if (objectives.empty()) throw std::invalid_argument("sweep needs at least one objective");
}

std::vector<double> SweepSpec::grid() const {
  validate();
  std::vector<double> out(steps);
  const double h = (to - from) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) out[i] = from + h * static_cast<double>(i);
  out.back() = to;
  return out;
}

bool operator==(const SweepValues& x, const SweepValues& y) {
  return x.q1 == y.q1 && x.q2 == y.q2 && x.r == y.r && x.w_soc == y.w_soc && x.w_con == y.w_con &&
         x.profit1 == y.profit1 && x.profit2 == y.profit2 && x.merch_surplus == y.merch_surplus;
}

bool operator==(const SweepRecord& x, const SweepRecord& y) {
  return x.f12 == y.f12 && x.objective == y.objective && x.status == y.status &&
         x.values == y.values && x.boundary == y.boundary;
}

std::pair<double, double> default_range(const twonode::TwoNodeParams& p) {
  p.validate();
  return {0.0, 1.5 * p.a / (p.b2 + 2.0 * p.c)};
}

SweepRecord solve_point(const NetworkModel& net, const MarketParams& params, Objective objective,
                        double f12, const SearchConfig& config) {
  const NetworkModel local = net.with_capacities(Vector::Constant(1, f12));
  SweepRecord rec;
  rec.f12 = f12;
  rec.objective = objective;

  const auto regime = twonode::from_model(local, params);
  if (objective == Objective::ConsumerSurplus && regime) {
    const twonode::ExistenceVerdict verdict = twonode::classify_existence(*regime);
    if (!verdict.exists) {
      rec.status = SweepStatus::NoGne;
      return rec;
    }
    const twonode::TwoNodePoint& pt = *verdict.equilibrium;
    const GneVerification check = verify_gne(local, params, objective, pt.q(), pt.rebalance(),
                                             config.verify_tol, config.response);
    if (check.is_gne) {
      rec.status = SweepStatus::Exists;
      rec.values = values_from(make_outcome(local, params, pt.q(), pt.rebalance()));
      return rec;
    }
    const GneResult res = gne_search(local, params, objective, Profile{pt.q(), pt.rebalance()}, config);
    rec.status = res.status == GneStatus::Converged ? SweepStatus::Exists : SweepStatus::Limit;
    if (res.status == GneStatus::Converged) rec.values = values_from(*res.point);
    return rec;
  }

  const Profile zero{Vector::Zero(2), Vector::Zero(2)};
  const GneResult res = gne_search(local, params, objective, zero, config);
  rec.status = from_search(res.status);
  if (rec.status == SweepStatus::Exists) rec.values = values_from(*res.point);
  return rec;
}

std::vector<SweepRecord> run_sweep(const NetworkModel& net, const MarketParams& params,
                                   const SweepSpec& spec) {
  check_sizes(net, params);
  if (net.nodes() != 2 || net.lines() != 1) {
    throw ModelError("capacity sweeps need a 2-node instance with a single line");
  }
  const std::vector<double> grid = spec.grid();
  const std::size_t m = spec.objectives.size();
  const std::size_t tasks = grid.size() * m;
  std::vector<SweepRecord> out(tasks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      out[t] = solve_point(net, params, spec.objectives[t % m], grid[t / m], spec.config);
    }
  };
  std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, tasks);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Threshold points carry the statuses of the grid neighbours on either side.
  const auto regime = twonode::from_model(net, params);
  if (regime) {
    for (std::size_t t = 0; t < tasks; ++t) {
      const std::size_t i = t / m;
      if (!on_threshold(*regime, grid[i])) continue;
      const std::string left = i > 0 ? std::string(to_string(out[t - m].status)) : "";
      const std::string right = i + 1 < grid.size() ? std::string(to_string(out[t + m].status)) : "";
      out[t].boundary = left + "|" + right;
    }
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return x;
}

void write_csv(std::ostream& out, const std::vector<SweepRecord>& records,
               const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "# status is exists, no-gne or limit; value fields are empty unless status is exists\n";
  out << "# boundary lists the neighbouring statuses (left|right) at an existence threshold\n";
  for (std::size_t i = 0; i < kColumnCount; ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& rec : records) {
    out << format_double(rec.f12) << ',' << short_name(rec.objective) << ',' << to_string(rec.status);
    if (rec.values) {
      const SweepValues& v = *rec.values;
      for (double x : {v.q1, v.q2, v.r, v.w_soc, v.w_con, v.profit1, v.profit2, v.merch_surplus}) {
        out << ',' << format_double(x);
      }
    } else {
      out << ",,,,,,,,";
    }
    out << ',' << rec.boundary << '\n';
  }
}

std::vector<SweepRecord> read_csv(std::istream& in) {
  std::vector<SweepRecord> out;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != kColumnCount) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(kColumnCount) + " fields");
    }
    SweepRecord rec;
    rec.f12 = parse_double(fields[0]);
    rec.objective = parse_objective(fields[1]);
    rec.status = parse_sweep_status(fields[2]);
    if (!fields[3].empty()) {
      double v[8];
      for (std::size_t i = 0; i < 8; ++i) v[i] = parse_double(fields[3 + i]);
      rec.values = SweepValues{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }
    rec.boundary = fields[11];
    out.push_back(std::move(rec));
  }
  return out;
}

void write_gnuplot(std::ostream& out, const std::vector<SweepRecord>& records) {
  std::map<Objective, std::vector<const SweepRecord*>> blocks;
  for (const auto& rec : records) blocks[rec.objective].push_back(&rec);
  out << "# set datafile missing \"?\"\n";
  bool first = true;
  for (const auto& [objective, rows] : blocks) {
    if (!first) out << "\n\n";
    first = false;
    out << "# objective " << short_name(objective) << '\n';
    out << "# f12 q1 q2 r w_soc w_con profit1 profit2 merch_surplus\n";
    for (const SweepRecord* rec : rows) {
      out << format_double(rec->f12);
      if (rec->values) {
        const SweepValues& v = *rec->values;
        for (double x : {v.q1, v.q2, v.r, v.w_soc, v.w_con, v.profit1, v.profit2, v.merch_surplus}) {
          out << ' ' << format_double(x);
        }
      } else {
        for (int i = 0; i < 8; ++i) out << " ?";
      }
      out << '\n';
    }
  }
}

std::string region_report_text(const twonode::TwoNodeParams& p, const twonode::RegionReport& report,
                               double from, double to) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "two-node instance a=" << p.a << " b1=" << p.b1 << " b2=" << p.b2 << " c=" << p.c << '\n';
  const twonode::Thresholds& t = report.thresholds;
  out << "thresholds:\n";
  out << "  a/(b2+2c)  = " << t.uncongested << '\n';
  out << "  a/b1       = " << t.node1_idle << '\n';
  out << "  a/(3b1+2c) = " << t.node1_bound << '\n';
  out << "  f0         = " << t.f0 << '\n';
  out << "  f1         = " << t.f1 << '\n';
  out << "partition of [" << from << ", " << to << "]:\n";
  for (const auto& iv : report.intervals) {
    out << "  " << (iv.lower_closed ? '[' : '(') << iv.lower << ", " << iv.upper
        << (iv.upper_closed ? ']' : ')') << "  " << iv.label() << '\n';
  }
  if (!report.has_no_gne()) out << "no capacity in the range lacks an equilibrium\n";
  return out.str();
}

nlohmann::json solve_document(const Instance& instance, Objective objective, const Profile& init,
                              const SearchConfig& config, GneResult* result_out) {
  GneResult result = gne_search(instance.network, instance.params, objective, init, config);
  nlohmann::json doc = to_json(result);
  if (auto p = twonode::from_model(instance.network, instance.params)) {
    nlohmann::json analytic;
    if (objective == Objective::ConsumerSurplus) {
      const auto verdict = twonode::classify_existence(*p);
      analytic["exists"] = verdict.exists;
      analytic["condition"] = verdict.condition ? nlohmann::json(*verdict.condition) : nlohmann::json();
      analytic["boundary"] = verdict.boundary;
      if (verdict.equilibrium) {
        analytic["equilibrium"] = {{"q1", verdict.equilibrium->q1},
                                   {"q2", verdict.equilibrium->q2},
                                   {"r", verdict.equilibrium->r}};
      }
    } else if (!p->f) {
      const auto pt = twonode::theorem2_equilibrium(*p, objective);
      analytic["equilibrium"] = {{"q1", pt.q1}, {"q2", pt.q2}, {"r", pt.r}};
    }
    if (!analytic.is_null()) doc["analytic"] = std::move(analytic);
  }
  if (result_out) *result_out = std::move(result);
  return doc;
}

int exit_code(GneStatus status) {
  switch (status) {
    case GneStatus::Converged: return 0;
    case GneStatus::CycleDetected:
    case GneStatus::IterationLimit: return 2;
    case GneStatus::Infeasible: return 1;
  }
  return 1;
}

}  // namespace cournot::experiments
