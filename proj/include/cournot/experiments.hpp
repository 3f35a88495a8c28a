#pragma once

#include <cstddef>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cournot/equilibrium.hpp"
#include "cournot/instance.hpp"
#include "cournot/model.hpp"
#include "cournot/twonode.hpp"

namespace cournot::experiments {

enum class SweepStatus { Exists, NoGne, Limit };

std::string_view to_string(SweepStatus status);
SweepStatus parse_sweep_status(std::string_view text);

/// Capacity sweep over the single line of a 2-node instance. The grid has
/// `steps` points including both ends.
struct SweepSpec {
  std::string parameter = "f12";
  double from = 0.0;
  double to = 1.0;
  std::size_t steps = 150;
  std::vector<Objective> objectives{std::begin(kAllObjectives), std::end(kAllObjectives)};
  SearchConfig config;
  std::size_t threads = 0;  // 0 picks the hardware concurrency

  void validate() const;
  std::vector<double> grid() const;
};

struct SweepValues {
  double q1 = 0.0;
  double q2 = 0.0;
  double r = 0.0;
  double w_soc = 0.0;
  double w_con = 0.0;
  double profit1 = 0.0;
  double profit2 = 0.0;
  double merch_surplus = 0.0;
};

struct SweepRecord {
  double f12 = 0.0;
  Objective objective = Objective::SocialWelfare;
  SweepStatus status = SweepStatus::Limit;
  std::optional<SweepValues> values;  // present only for exists rows
  std::string boundary;  // "left|right" neighbour statuses at a threshold, else empty
};

bool operator==(const SweepValues& x, const SweepValues& y);
bool operator==(const SweepRecord& x, const SweepRecord& y);

/// Default sweep range [0, 1.5 a/(b2 + 2c)].
std::pair<double, double> default_range(const twonode::TwoNodeParams& p);

/// Solves one capacity value. Consumer surplus in the analytic regime uses
/// the existence partition and its closed forms (each verified); everything
/// else runs the best-response search from zero.
SweepRecord solve_point(const NetworkModel& net, const MarketParams& params, Objective objective,
                        double f12, const SearchConfig& config = {});

/// Rows come out ordered by grid point, then by the spec's objective order.
/// Throws ModelError unless the instance has two nodes and one line.
std::vector<SweepRecord> run_sweep(const NetworkModel& net, const MarketParams& params,
                                   const SweepSpec& spec);

void write_csv(std::ostream& out, const std::vector<SweepRecord>& records,
               const std::vector<std::string>& comments = {});
std::vector<SweepRecord> read_csv(std::istream& in);

/// Whitespace-separated blocks, one per objective, separated by two blank
/// lines so that gnuplot's `index` selects them. Missing values are "?".
void write_gnuplot(std::ostream& out, const std::vector<SweepRecord>& records);

/// 17 significant digits, which parse back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

std::string region_report_text(const twonode::TwoNodeParams& p, const twonode::RegionReport& report,
                               double from, double to);

/// Runs the search and, when the instance fits the 2-node regime, attaches
/// the analytic verdict for comparison.
nlohmann::json solve_document(const Instance& instance, Objective objective, const Profile& init,
                              const SearchConfig& config, GneResult* result_out = nullptr);

/// 0 when converged, 2 for a cycle or the iteration limit, 1 otherwise.
int exit_code(GneStatus status);

}  // namespace cournot::experiments
