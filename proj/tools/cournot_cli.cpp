// Command-line front end: solve, sweep, region, verify and scan.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "cournot/equilibrium.hpp"
#include "cournot/experiments.hpp"
#include "cournot/instance.hpp"
#include "cournot/twonode.hpp"

using namespace cournot;

namespace {

struct Common {
  std::string instance;
  std::string objective = "soc";
  std::string out;
  double tol = 1e-7;
  std::size_t max_iter = 10000;
};

void add_instance(CLI::App* cmd, Common& c, bool required = true) {
  auto* pos = cmd->add_option("instance_file", c.instance, "Instance JSON file");
  auto* opt = cmd->add_option("--instance", c.instance, "Instance JSON file");
  pos->excludes(opt);
  if (required) cmd->callback([&c] {
    if (c.instance.empty()) throw CLI::RequiredError("an instance file");
  });
}

SearchConfig make_config(const Common& c) {
  SearchConfig cfg;
  cfg.verify_tol = c.tol;
  cfg.max_iter = c.max_iter;
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  std::cout << text;
  if (!path.empty()) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
  }
}

Profile initial_profile(const Instance& inst, std::optional<unsigned long long> seed) {
  const auto n = static_cast<Eigen::Index>(inst.network.nodes());
  Profile p{Vector::Zero(n), Vector::Zero(n)};
  if (seed) {
    std::mt19937_64 rng(*seed);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double hi = inst.params.a[k] / (inst.params.b[k] + 2.0 * inst.params.c[k]);
      p.q[k] = std::uniform_real_distribution<double>(0.0, hi)(rng);
    }
  }
  return p;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(experiments::parse_double(item));
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

twonode::TwoNodeParams region_params(const Common& c, const twonode::TwoNodeParams& flags) {
  if (c.instance.empty()) return flags;
  const Instance inst = load_instance(c.instance);
  auto p = twonode::from_model(inst.network, inst.params);
  if (!p) throw ModelError("instance is not a 2-node market with a1 = a2, c1 = c2 and 1 < b1/b2 <= 3");
  return *p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked Cournot equilibrium engine with a strategic market maker"};
  app.require_subcommand(1);

  Common solve_opts;
  std::optional<unsigned long long> seed;
  auto* solve = app.add_subcommand("solve", "Best-response search for one instance");
  add_instance(solve, solve_opts);
  solve->add_option("--objective", solve_opts.objective, "soc, res or con");
  solve->add_option("--out", solve_opts.out, "Write the result JSON here as well");
  solve->add_option("--tol", solve_opts.tol, "Verification tolerance");
  solve->add_option("--max-iter", solve_opts.max_iter, "Best-response round limit");
  solve->add_option("--seed", seed, "Random initial production instead of zero");

  Common sweep_opts;
  std::vector<std::string> sweep_objectives;
  std::optional<double> sweep_from, sweep_to;
  std::size_t sweep_steps = 150;
  std::size_t threads = 0;
  bool gnuplot = false;
  auto* sweep = app.add_subcommand("sweep", "Line-capacity sweep of a 2-node instance (CSV)");
  add_instance(sweep, sweep_opts);
  sweep->add_option("--objective", sweep_objectives, "Objectives to sweep (default all)");
  sweep->add_option("--out", sweep_opts.out, "Output file (default stdout)");
  sweep->add_option("--from", sweep_from, "Smallest capacity");
  sweep->add_option("--to", sweep_to, "Largest capacity");
  sweep->add_option("--steps", sweep_steps, "Grid points including both ends");
  sweep->add_option("--tol", sweep_opts.tol, "Verification tolerance");
  sweep->add_option("--max-iter", sweep_opts.max_iter, "Best-response round limit");
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep->add_flag("--gnuplot", gnuplot, "Emit gnuplot blocks instead of CSV");

  Common region_opts;
  twonode::TwoNodeParams region_flags{1.0, 1.0, 0.65, 1.0, std::nullopt};
  std::optional<double> region_from, region_to;
  auto* region = app.add_subcommand("region", "Existence partition in the line capacity");
  add_instance(region, region_opts, false);
  region->add_option("--a", region_flags.a, "Shared intercept");
  region->add_option("--b1", region_flags.b1, "Demand slope at node 1");
  region->add_option("--b2", region_flags.b2, "Demand slope at node 2");
  region->add_option("--c", region_flags.c, "Shared cost coefficient");
  region->add_option("--from", region_from, "Smallest capacity");
  region->add_option("--to", region_to, "Largest capacity");
  region->add_option("--out", region_opts.out, "Write the report here as well");

  Common verify_opts;
  std::string q_text, r_text, point_file;
  auto* verify = app.add_subcommand("verify", "Check the equilibrium inequalities at a profile");
  add_instance(verify, verify_opts);
  verify->add_option("--objective", verify_opts.objective, "soc, res or con");
  verify->add_option("--q", q_text, "Production, comma separated");
  verify->add_option("--r", r_text, "Re-balancing, comma separated");
  verify->add_option("--point", point_file, "JSON with q and r (a solve result works too)");
  verify->add_option("--tol", verify_opts.tol, "Tolerance");
  verify->add_option("--out", verify_opts.out, "Write the certificate JSON here as well");

  Common scan_opts;
  std::size_t scan_steps = 200;
  auto* scan = app.add_subcommand("scan", "Brute-force grid oracle (n <= 3)");
  add_instance(scan, scan_opts);
  scan->add_option("--objective", scan_opts.objective, "soc, res or con");
  scan->add_option("--steps", scan_steps, "Grid intervals per axis");
  scan->add_option("--threads", threads, "Worker threads (0 = all cores)");
  scan->add_option("--out", scan_opts.out, "Write the scan JSON here as well");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      const Instance inst = load_instance(solve_opts.instance);
      GneResult result;
      const auto doc =
          experiments::solve_document(inst, parse_objective(solve_opts.objective),
                                      initial_profile(inst, seed), make_config(solve_opts), &result);
      emit(doc.dump(2) + "\n", solve_opts.out);
      return experiments::exit_code(result.status);
    }

    if (*sweep) {
      const Instance inst = load_instance(sweep_opts.instance);
      experiments::SweepSpec spec;
      spec.config = make_config(sweep_opts);
      spec.threads = threads;
      spec.steps = sweep_steps;
      if (!sweep_objectives.empty()) {
        spec.objectives.clear();
        for (const auto& o : sweep_objectives) spec.objectives.push_back(parse_objective(o));
      }
      std::vector<std::string> comments;
      const auto p = twonode::from_model(inst.network, inst.params);
      if (p) {
        std::tie(spec.from, spec.to) = experiments::default_range(*p);
        comments.push_back("default f12 range is [0, 1.5*a/(b2+2c)]");
      } else {
        spec.from = 0.0;
        spec.to = 1.0;
        comments.push_back("default f12 range is [0, 1] outside the analytic regime");
      }
      if (sweep_from) spec.from = *sweep_from;
      if (sweep_to) spec.to = *sweep_to;
      comments.push_back("f12 from " + experiments::format_double(spec.from) + " to " +
                         experiments::format_double(spec.to) + " in " + std::to_string(spec.steps) +
                         " points");
      const auto records = experiments::run_sweep(inst.network, inst.params, spec);
      std::ostringstream text;
      if (gnuplot) {
        experiments::write_gnuplot(text, records);
      } else {
        experiments::write_csv(text, records, comments);
      }
      if (sweep_opts.out.empty()) {
        std::cout << text.str();
      } else {
        std::ofstream f(sweep_opts.out);
        if (!f) throw std::runtime_error("cannot write " + sweep_opts.out);
        f << text.str();
      }
      return 0;
    }

    if (*region) {
      const twonode::TwoNodeParams p = region_params(region_opts, region_flags);
      const auto [lo, hi] = experiments::default_range(p);
      const double from = region_from.value_or(lo);
      const double to = region_to.value_or(hi);
      const auto report = twonode::existence_partition(p, from, to);
      emit(experiments::region_report_text(p, report, from, to), region_opts.out);
      return 0;
    }

    if (*verify) {
      const Instance inst = load_instance(verify_opts.instance);
      Vector q, r;
      if (!point_file.empty()) {
        std::ifstream f(point_file);
        if (!f) throw InstanceError("cannot open " + point_file);
        nlohmann::json doc = nlohmann::json::parse(f);
        if (doc.contains("point") && doc["point"].is_object()) doc = doc["point"];
        q = to_vector(doc.at("q").get<std::vector<double>>());
        r = to_vector(doc.at("r").get<std::vector<double>>());
      } else {
        if (q_text.empty()) throw InstanceError("verify needs --q (and --r) or --point");
        q = to_vector(parse_list(q_text));
        r = r_text.empty() ? Vector(Vector::Zero(q.size())) : to_vector(parse_list(r_text));
      }
      const auto v = verify_gne(inst.network, inst.params, parse_objective(verify_opts.objective), q,
                                r, verify_opts.tol);
      emit(to_json(v).dump(2) + "\n", verify_opts.out);
      return v.is_gne ? 0 : 2;
    }

    if (*scan) {
      const Instance inst = load_instance(scan_opts.instance);
      SearchConfig cfg;
      cfg.grid_steps = scan_steps;
      cfg.threads = threads;
      const auto res =
          brute_force_gne_scan(inst.network, inst.params, parse_objective(scan_opts.objective), cfg);
      emit(to_json(res).dump(2) + "\n", scan_opts.out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
