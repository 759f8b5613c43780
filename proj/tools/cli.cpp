#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "pipesizer/cmaes.hpp"
#include "pipesizer/errors.hpp"
#include "pipesizer/greedy.hpp"
#include "pipesizer/hybrid.hpp"
#include "pipesizer/inp.hpp"
#include "pipesizer/local_search.hpp"

namespace pipesizer::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct SolveArgs {
  std::string network;
  std::string sidecar;
  std::string algo = "hybrid";
  std::size_t lambda = 0;
  std::string sigma;
  std::uint64_t budget = 0;
  std::string seeds = "1";
  std::string penalty_mode = "linear";
  std::optional<double> phi;
  std::string out = ".";
  std::string init;
  std::string scenario;
  std::string phases = "full";
  std::string diameter_penalty;
  std::string bounds = "clamp";
  double xi = 1e-5;
  unsigned threads = 0;
  bool no_timing = false;
  bool no_stagnation = false;
};

struct EvaluateArgs {
  std::string network;
  std::string sidecar;
  std::string design;
  std::string penalty_mode = "linear";
};

class UsageError : public Error {
 public:
  using Error::Error;
};

PipeNetwork load_network(const std::string& name, const std::string& sidecar) {
  if (!sidecar.empty()) return load_network_file(name, sidecar);
  return resolve_network(name);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  auto number = [&](const std::string& s) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad seed list '" + text + "'");
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (text.find(',') != std::string::npos) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) seeds.push_back(number(item));
    }
  } else if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = number(text.substr(0, dots));
    const auto hi = number(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  } else {
    const auto count = number(text);
    for (std::uint64_t s = 1; s <= count; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

PenaltyMode parse_penalty_mode(const std::string& text) {
  if (text == "linear") return PenaltyMode::kLinear;
  if (text == "severe") return PenaltyMode::kSevere;
  throw UsageError("--penalty-mode must be linear or severe");
}

BoundHandling parse_bounds(const std::string& text) {
  if (text == "clamp") return BoundHandling::kClamp;
  if (text == "penalty") return BoundHandling::kPenalty;
  throw UsageError("--bounds must be clamp or penalty");
}

Scenario parse_scenario(const std::string& text) {
  if (text == "continuous") return Scenario::kContinuous;
  if (text == "discrete") return Scenario::kDiscrete;
  if (text == "rounded") return Scenario::kRounded;
  throw UsageError("--scenario must be continuous, discrete or rounded");
}

HybridPhases parse_phases(const std::string& text) {
  if (text == "cma") return HybridPhases::kCmaOnly;
  if (text == "cma+gsu") return HybridPhases::kCmaUpward;
  if (text == "full") return HybridPhases::kFull;
  throw UsageError("--phases must be cma, cma+gsu or full");
}

// "zero", "min", "max", "uniform:<diameter>" or a design file.
DesignVector parse_init(const std::string& text, const PipeNetwork& network, bool upward) {
  if (text.empty()) return upward ? min_design(network) : max_design(network);
  if (text == "min" || text == "zero") {
    if (text == "zero" && network.diameter_table().min() != 0.0) {
      throw UsageError("this network has no zero diameter; use min");
    }
    return min_design(network);
  }
  if (text == "max") return max_design(network);
  if (text.starts_with("uniform:")) {
    double d = 0.0;
    try {
      d = parse_diameter(text.substr(8), network.units());
    } catch (const ParseError&) {
      throw UsageError("bad --init diameter '" + text.substr(8) + "'");
    }
    const auto k = network.diameter_table().index_of(d);
    if (!k) throw UsageError("--init diameter is not a commercial size");
    return uniform_design(network, network.diameter_table().sizes()[*k]);
  }
  return load_design_file(text, network);
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
    f << content;
    if (!f) throw Error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

json cost_json(const CostBreakdown& c) {
  return {{"pipe_cost", c.pipe_cost},       {"sum_pv", c.sum_pv},     {"sum_dv", c.sum_dv},
          {"total", c.total},               {"head_surplus", c.head_surplus},
          {"feasible", c.feasible},         {"structural_failure", c.structural_failure}};
}

json record_json(const RunRecord& r, const PipeNetwork& network, const json& config, bool timing) {
  json j;
  j["network"] = network.name();
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["config"] = config;
  j["evaluations"] = r.evaluations;
  j["evaluations_to_best"] = r.evaluations_to_best;
  j["termination"] = r.termination;
  j["runtime_s"] = timing ? r.runtime_s : 0.0;
  j["diameter_unit"] = network.units().diameter_symbol();
  j["best"] = {{"x", r.best_x}, {"cost", cost_json(r.best)}};
  if (r.best_feasible) {
    j["best_feasible"] = {{"design", *r.best_feasible_x}, {"cost", cost_json(*r.best_feasible)}};
  } else {
    j["best_feasible"] = nullptr;
  }
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back({p.evaluation, p.cost});
  j["curve"] = std::move(curve);
  return j;
}

std::string money(double v) { return fmt::format("{:.2f}", v); }

void print_breakdown(std::ostream& out, const CostBreakdown& c, const PipeNetwork& network) {
  const auto unit = network.units().length_symbol();
  out << fmt::format("Pipe cost    {}\n", money(c.pipe_cost));
  out << fmt::format("Sum PV       {:.6g} {}\n", c.sum_pv, unit);
  out << fmt::format("Sum DV       {:.6g}\n", c.sum_dv);
  out << fmt::format("Total        {}\n", money(c.total));
  out << fmt::format("Feasible     {}\n", c.feasible ? "yes" : "no");
  if (c.structural_failure) out << "Structural   a junction is cut off from every reservoir\n";
}

void print_design(std::ostream& out, const std::vector<double>& x, const PipeNetwork& network) {
  out << "Design (" << network.units().diameter_symbol() << "):";
  for (double v : x) out << ' ' << fmt::format("{:g}", v);
  out << '\n';
}

RunRecord greedy_record(const NetworkProblem& problem, const GreedyResult& g, std::uint64_t seed,
                        const char* algorithm, double runtime) {
  RunRecord r;
  r.algorithm = algorithm;
  r.seed = seed;
  r.best_x = problem.encode(g.design);
  r.best = g.cost;
  if (g.cost.feasible) {
    r.best_feasible = g.cost;
    r.best_feasible_x = r.best_x;
  }
  r.evaluations = g.evaluations;
  r.evaluations_to_best = g.evaluations;
  r.curve.push_back({g.evaluations, g.cost.total});
  r.termination = g.budget_exhausted ? "budget" : "converged";
  r.runtime_s = runtime;
  return r;
}

int solve(const SolveArgs& a, std::ostream& out) {
  static const std::vector<std::string> algos{"cmaes", "rls", "opo_ea", "hybrid", "gsu", "gsd"};
  if (std::find(algos.begin(), algos.end(), a.algo) == algos.end()) {
    throw UsageError("unknown --algo '" + a.algo + "'");
  }
  const auto seeds = parse_seeds(a.seeds);
  PenaltyConfig penalty;
  const PenaltyMode mode = parse_penalty_mode(a.penalty_mode);
  const BoundHandling bounds = parse_bounds(a.bounds);
  if (bounds != BoundHandling::kClamp && a.algo != "hybrid" && a.algo != "cmaes")
    throw UsageError("--bounds applies to hybrid and cmaes");
  const bool stochastic = a.algo == "cmaes" || a.algo == "rls" || a.algo == "opo_ea";
  const Scenario scenario = parse_scenario(a.scenario.empty() ? "continuous" : a.scenario);
  if (!a.scenario.empty() && !stochastic) throw UsageError("--scenario applies to cmaes, rls and opo_ea");
  if (a.lambda != 0 && a.lambda < 2) throw UsageError("--lambda must be at least 2");
  if (a.lambda != 0 && a.algo != "cmaes" && a.algo != "hybrid") throw UsageError("--lambda applies to cmaes and hybrid");
  if (a.phi && a.algo != "hybrid") throw UsageError("--phi applies to hybrid");
  if (a.phi && !(*a.phi > 0.0)) throw UsageError("--phi must be positive");
  if (!a.init.empty() && a.algo != "gsu" && a.algo != "gsd") throw UsageError("--init applies to gsu and gsd");
  const HybridPhases phases = parse_phases(a.phases);
  std::optional<double> sigma_value;
  LocalSearchOptions local;
  if (!a.sigma.empty()) {
    if (a.algo == "rls" || a.algo == "opo_ea") {
      try {
        local = sigma_preset(a.sigma);
      } catch (const PreconditionError& e) {
        throw UsageError(e.what());
      }
    } else if (a.algo == "cmaes" || a.algo == "hybrid") {
      try {
        sigma_value = std::stod(a.sigma);
      } catch (const std::exception&) {
        throw UsageError("--sigma must be a number for cmaes and hybrid");
      }
      if (!(*sigma_value > 0.0)) throw UsageError("--sigma must be positive");
    } else {
      throw UsageError("--sigma does not apply to greedy searches");
    }
  }
  std::optional<bool> penalize_diameters;
  if (!a.diameter_penalty.empty()) {
    if (a.diameter_penalty != "on" && a.diameter_penalty != "off") throw UsageError("--diameter-penalty must be on or off");
    penalize_diameters = a.diameter_penalty == "on";
  }

  const PipeNetwork network = load_network(a.network, a.sidecar);
  penalty = PenaltyConfig::for_network(network);
  penalty.mode = mode;
  const std::uint64_t budget =
      a.budget != 0 ? a.budget : (a.algo == "hybrid" || a.algo == "cmaes" ? 200000 : 100000);
  const unsigned threads = a.threads == 0 ? default_thread_count() : a.threads;

  json config{{"algo", a.algo},           {"budget", budget},   {"penalty_mode", a.penalty_mode}, {"bounds", a.bounds},
              {"pressure_factor", penalty.pressure_factor}, {"diameter_factor", penalty.diameter_factor}};

  std::function<RunRecord(std::uint64_t)> runner;
  if (a.algo == "hybrid") {
    HybridConfig h = recommended_hybrid_config(network);
    if (a.lambda != 0) h.lambda = a.lambda;
    h.budget = budget;
    h.phi = a.phi;
    h.sigma0 = sigma_value;
    h.phases = phases;
    h.tol_fun = a.xi;
    h.stagnation_stop = !a.no_stagnation;
    h.bound_handling = bounds;
    PenaltyConfig p = h.penalty.value_or(penalty);
    p.mode = mode;
    if (penalize_diameters) p.penalize_diameters = *penalize_diameters;
    h.penalty = p;
    h.threads = threads;
    config["lambda"] = h.lambda;
    config["phi"] = resolve_phi(network, h);
    config["phases"] = a.phases;
    config["penalize_diameters"] = p.penalize_diameters;
    runner = [&network, h](std::uint64_t seed) { return run_hybrid(network, h, seed); };
  } else if (stochastic) {
    PenaltyConfig p = penalty;
    p.penalize_diameters = penalize_diameters.value_or(scenario != Scenario::kContinuous);
    const NetworkProblem problem(network, p, scenario);
    config["scenario"] = a.scenario.empty() ? "continuous" : a.scenario;
    config["penalize_diameters"] = p.penalize_diameters;
    if (a.algo == "cmaes") {
      CmaOptions c;
      c.lambda = a.lambda;
      c.sigma0 = sigma_value;
      c.budget = budget;
      c.tol_fun = a.xi;
      c.stagnation_stop = !a.no_stagnation;
      c.bound_handling = bounds;
      config["lambda"] = a.lambda;
      runner = [problem, c, threads](std::uint64_t seed) {
        Objective objective = problem.objective();
        objective.set_threads(threads);
        return run_cmaes(objective, c, seed).record;
      };
    } else {
      local.budget = budget;
      config["sigma"] = a.sigma.empty() ? "linear" : a.sigma;
      const bool rls = a.algo == "rls";
      runner = [problem, local, rls](std::uint64_t seed) {
        Objective objective = problem.objective();
        return rls ? run_rls(objective, local, seed) : run_one_plus_one_ea(objective, local, seed);
      };
    }
  } else {
    const bool up = a.algo == "gsu";
    const DesignVector start = parse_init(a.init, network, up);
    config["init"] = a.init.empty() ? (up ? "min" : "max") : a.init;
    const NetworkProblem problem(network, penalty, Scenario::kRounded);
    runner = [problem, start, up, budget](std::uint64_t seed) {
      const auto t0 = std::chrono::steady_clock::now();
      Objective objective = problem.objective();
      GreedyOptions g;
      g.budget = budget;
      const GreedyResult result =
          up ? upward_greedy(problem, objective, start, g) : downward_greedy(problem, objective, start, g);
      const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return greedy_record(problem, result, seed, up ? "gsu" : "gsd", runtime);
    };
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  const bool timing = !a.no_timing;
  SuiteOptions suite;
  suite.target = network.settings().target_cost;
  const SuiteResult result = run_suite({{a.algo, runner}}, seeds, suite);

  for (const SuiteRow& row : result.rows) {
    const RunRecord& r = row.record;
    write_atomically(dir / fmt::format("run_{}.json", r.seed), record_json(r, network, config, timing).dump(2) + "\n");
    std::ostringstream curve;
    write_curve_csv(curve, r);
    write_atomically(dir / fmt::format("curve_{}.csv", r.seed), curve.str());
    const double cost = r.best_feasible ? r.best_feasible->total : r.best.total;
    out << fmt::format("seed {:>4}  {}  cost {}  evaluations {}  to-best {}\n", r.seed,
                       r.feasible() ? "feasible  " : "infeasible", money(cost), r.evaluations,
                       r.evaluations_to_best);
  }
  std::ostringstream summary, stats;
  write_summary_csv(summary, result.rows, timing);
  write_stats_csv(stats, result.stats);
  write_atomically(dir / "summary.csv", summary.str());
  write_atomically(dir / "stats.csv", stats.str());

  const SuiteStats& s = result.stats.front();
  if (s.best_cost) out << fmt::format("best feasible cost {}\n", money(*s.best_cost));
  if (suite.target) out << fmt::format("success rate {:.1f}%\n", 100.0 * s.success_rate);

  // Show the winning design so single runs double as a design report.
  const SuiteRow* best_row = nullptr;
  for (const SuiteRow& row : result.rows) {
    if (!row.record.best_feasible) continue;
    if (!best_row || row.record.best_feasible->total < best_row->record.best_feasible->total) best_row = &row;
  }
  if (best_row) {
    out << fmt::format("\nBest design (seed {})\n", best_row->record.seed);
    print_breakdown(out, *best_row->record.best_feasible, network);
    print_design(out, *best_row->record.best_feasible_x, network);
  }
  return s.feasible_runs == s.runs ? kOk : kInfeasible;
}

int evaluate(const EvaluateArgs& a, std::ostream& out) {
  const PipeNetwork network = load_network(a.network, a.sidecar);
  const DesignVector design = load_design_file(a.design, network);
  PenaltyConfig penalty = PenaltyConfig::for_network(network);
  penalty.mode = parse_penalty_mode(a.penalty_mode);
  penalty.penalize_diameters = design.flavor != DesignFlavor::kContinuous || penalty.nytp_special;
  const HydraulicSolver solver(network);
  const CostBreakdown cost = total_cost(solver, design, penalty);

  out << fmt::format("Network      {} ({} decision pipes, {} nodes)\n", network.name(), network.decision_count(),
                     network.node_count());
  print_breakdown(out, cost, network);
  if (cost.structural_failure) return kOk;

  const HydraulicState state = solver.solve(design);
  const double unit = network.units().length_to_m;
  const auto sym = network.units().length_symbol();
  out << '\n';
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    const Node& node = network.node(i);
    if (!node.min_head) continue;
    const double excess = (state.head[i] - *node.min_head) / unit;
    out << fmt::format("Node {:<4} Head {:>10.4f} Min {:>10.4f} Excess {:+.4f}\n", node.id, state.head[i] / unit,
                       *node.min_head / unit, excess);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Least-cost pipe sizing for water distribution networks", "pipesizer"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "Run an optimizer over one or more seeds");
  solve_cmd->add_option("--network", solve_args.network, "Bundled name (nytp, nytp2, nytp50, hanoi) or network file")
      ->required();
  solve_cmd->add_option("--sidecar", solve_args.sidecar, "DESIGN section file for a plain .inp network");
  solve_cmd->add_option("--algo", solve_args.algo, "cmaes | rls | opo_ea | hybrid | gsu | gsd");
  solve_cmd->add_option("--lambda", solve_args.lambda, "CMA-ES population size");
  solve_cmd->add_option("--sigma", solve_args.sigma,
                        "CMA-ES initial step (native diameter units) or rls/opo_ea preset 0.1|0.25|0.5|linear");
  solve_cmd->add_option("--budget", solve_args.budget, "Objective evaluations per run");
  solve_cmd->add_option("--seeds", solve_args.seeds, "Count N (seeds 1..N), a list 3,7,9 or a range 4..8");
  solve_cmd->add_option("--penalty-mode", solve_args.penalty_mode, "linear | severe");
  solve_cmd->add_option("--phi", solve_args.phi, "Repair threshold for the hybrid");
  solve_cmd->add_option("--out", solve_args.out, "Output directory");
  solve_cmd->add_option("--init", solve_args.init, "Greedy start: min | zero | max | uniform:<size> | design file");
  solve_cmd->add_option("--scenario", solve_args.scenario, "continuous | discrete | rounded");
  solve_cmd->add_option("--phases", solve_args.phases, "Hybrid phases: cma | cma+gsu | full");
  solve_cmd->add_option("--diameter-penalty", solve_args.diameter_penalty, "on | off");
  solve_cmd->add_option("--bounds", solve_args.bounds, "CMA-ES box handling: clamp | penalty");
  solve_cmd->add_option("--xi", solve_args.xi, "CMA-ES relative function tolerance");
  solve_cmd->add_option("--threads", solve_args.threads, "Evaluation threads (default PIPESIZER_THREADS or all cores)");
  solve_cmd->add_flag("--no-timing", solve_args.no_timing, "Write runtime_s as 0 for reproducible outputs");
  solve_cmd->add_flag("--no-stagnation", solve_args.no_stagnation, "Run CMA-ES to the full budget");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Cost and head report for one design");
  eval_cmd->add_option("--network", eval_args.network, "Bundled name or network file")->required();
  eval_cmd->add_option("--sidecar", eval_args.sidecar, "DESIGN section file for a plain .inp network");
  eval_cmd->add_option("--design,design", eval_args.design, "Design file, one diameter per line")->required();
  eval_cmd->add_option("--penalty-mode", eval_args.penalty_mode, "linear | severe");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "pipesizer: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (solve_cmd->parsed()) return solve(solve_args, out);
    return evaluate(eval_args, out);
  } catch (const UsageError& e) {
    err << "pipesizer: " << e.what() << "\n\n" << (solve_cmd->parsed() ? solve_cmd->help() : eval_cmd->help());
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "pipesizer: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "pipesizer: parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ConvergenceError& e) {
    err << "pipesizer: solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const InfeasibleNetworkError& e) {
    err << "pipesizer: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    err << "pipesizer: " << e.what() << '\n';
    return kParse;
  } catch (const std::exception& e) {
    err << "pipesizer: " << e.what() << '\n';
    return kParse;
  }
}

}  // namespace pipesizer::cli
