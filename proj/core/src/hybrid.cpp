#include "pipesizer/hybrid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

double resolve_phi(const PipeNetwork& network, const HybridConfig& config) {
  if (config.phi) return *config.phi;
  if (network.settings().phi) return *network.settings().phi;
  if (network.settings().target_cost) return 1.2 * *network.settings().target_cost;
  return std::numeric_limits<double>::infinity();
}

PenaltyConfig default_penalty(const PipeNetwork& network, Scenario scenario) {
  // Continuous diameters are legal in the CMA-ES phase: only the head floors
  // are constraints there, rounding and repair take care of commercial sizes.
  PenaltyConfig penalty = PenaltyConfig::for_network(network);
  penalty.penalize_diameters = scenario != Scenario::kContinuous;
  return penalty;
}

HybridConfig recommended_hybrid_config(const PipeNetwork& network) {
  HybridConfig config;
  config.penalty = default_penalty(network, config.scenario);
  return config;
}

namespace {

struct FeasibleTracker {
  RunRecord& record;
  const NetworkProblem& problem;
  Objective& objective;

  void consider(const DesignVector& design, const CostBreakdown& cost) {
    if (!cost.feasible || cost.sum_pv != 0.0) return;
    if (record.best_feasible && !(cost.total < record.best_feasible->total)) return;
    record.best_feasible = cost;
    record.best_feasible_x = problem.encode(design);
    record.evaluations_to_best = objective.evaluations();
    record.curve.push_back({objective.evaluations(), cost.total});
  }
};

}  // namespace

RunRecord run_hybrid(const PipeNetwork& network, const HybridConfig& config, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  if (config.lambda < 2) throw PreconditionError("lambda must be at least 2");
  const std::size_t n = network.decision_count();
  const std::uint64_t reserve =
      config.phases == HybridPhases::kFull ? config.downward_reserve.value_or(10 * n) : 0;
  if (config.budget < reserve + config.lambda) {
    throw PreconditionError(fmt::format("budget {} leaves no room for one CMA-ES generation", config.budget));
  }
  const double phi = resolve_phi(network, config);
  if (!(phi > 0.0)) throw PreconditionError("phi must be positive");

  NetworkProblem problem(network, config.penalty.value_or(default_penalty(network, config.scenario)),
                         config.scenario);
  Objective objective = problem.objective();
  objective.set_threads(config.threads == 0 ? default_thread_count() : config.threads);
  const DiameterTable& table = network.diameter_table();

  RunRecord record;
  record.algorithm = "hybrid";
  record.seed = seed;
  FeasibleTracker feasible{record, problem, objective};

  const std::uint64_t cma_budget = config.budget - reserve;
  const bool upward = config.phases != HybridPhases::kCmaOnly;
  bool max_checked = false;
  std::optional<DesignVector> last_rounded;

  auto repair = [&](const DesignVector& rounded, std::uint64_t budget) {
    GreedyOptions options;
    options.budget = budget;
    options.assume_max_feasible = max_checked;
    GreedyResult g = upward_greedy(problem, objective, rounded, options);
    max_checked = true;
    feasible.consider(g.design, g.cost);
  };

  auto on_best = [&](std::span<const double> x, const CostBreakdown&) {
    if (objective.evaluations() >= cma_budget) return;
    DesignVector rounded = round_to_commercial(problem.decode(x), table);
    if (last_rounded && *last_rounded == rounded) return;
    last_rounded = rounded;
    const CostBreakdown cost = objective.evaluate(problem.encode(rounded));
    feasible.consider(rounded, cost);
    if (upward && cost.sum_pv > 0.0 && cost.pipe_cost < phi) repair(rounded, cma_budget);
  };

  CmaOptions cma;
  cma.lambda = config.lambda;
  cma.sigma0 = config.sigma0;
  cma.budget = cma_budget;
  cma.tol_fun = config.tol_fun;
  cma.stagnation_stop = config.stagnation_stop;
  cma.stagnation_rule = config.stagnation_rule;
  cma.bound_handling = config.bound_handling;
  CmaResult result = run_cmaes(objective, cma, seed, on_best);

  record.best = result.record.best;
  record.best_x = result.record.best_x;
  record.termination = result.record.termination;

  if (!record.best_feasible && upward) {
    // Last resort: repair the rounded CMA-ES best whatever its cost.
    repair(round_to_commercial(problem.decode(record.best_x), table), config.budget);
  }
  if (record.best_feasible && config.phases == HybridPhases::kFull) {
    const DesignVector start = problem.decode(*record.best_feasible_x);
    GreedyOptions options;
    options.budget = config.budget;
    GreedyResult g = downward_greedy(problem, objective, start, options);
    feasible.consider(g.design, g.cost);
  }
  if (!record.best_feasible) record.termination = "infeasible";

  record.evaluations = objective.evaluations();
  record.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

bool is_success(const RunRecord& record, double target, double tolerance) {
  return record.best_feasible && std::abs(record.best_feasible->total - target) <= tolerance;
}

SuiteStats summarize(const std::string& config_id, const std::vector<const RunRecord*>& records,
                     const SuiteOptions& options) {
  SuiteStats s;
  s.config_id = config_id;
  s.runs = records.size();
  double sum_cost = 0.0, sum_evals = 0.0;
  std::size_t successes = 0;
  for (const RunRecord* r : records) {
    sum_evals += static_cast<double>(r->evaluations_to_best);
    if (!r->best_feasible) continue;
    ++s.feasible_runs;
    const double c = r->best_feasible->total;
    sum_cost += c;
    s.best_cost = s.best_cost ? std::min(*s.best_cost, c) : c;
    if (options.target && is_success(*r, *options.target, options.success_tolerance)) ++successes;
  }
  if (s.feasible_runs > 0) s.mean_cost = sum_cost / static_cast<double>(s.feasible_runs);
  if (s.runs > 0) {
    s.success_rate = static_cast<double>(successes) / static_cast<double>(s.runs);
    s.mean_evaluations_to_best = sum_evals / static_cast<double>(s.runs);
  }
  return s;
}

SuiteResult run_suite(const std::vector<SuiteEntry>& entries, const std::vector<std::uint64_t>& seeds,
                      const SuiteOptions& options) {
  if (entries.empty() || seeds.empty()) throw PreconditionError("suite needs at least one config and one seed");
  SuiteResult result;
  result.rows.resize(entries.size() * seeds.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (std::size_t s = 0; s < seeds.size(); ++s) result.rows[e * seeds.size() + s].config_id = entries[e].id;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.rows.size() && !failed; i = next++) {
      try {
        result.rows[i].record = entries[i / seeds.size()].run(seeds[i % seeds.size()]);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, result.rows.size());
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<const RunRecord*> records;
    for (std::size_t s = 0; s < seeds.size(); ++s) records.push_back(&result.rows[e * seeds.size() + s].record);
    result.stats.push_back(summarize(entries[e].id, records, options));
  }
  return result;
}

void write_summary_csv(std::ostream& out, const std::vector<SuiteRow>& rows, bool timing) {
  out << "config_id,seed,best_cost,feasible,evals_to_best,runtime_s\n";
  for (const SuiteRow& row : rows) {
    const RunRecord& r = row.record;
    const double cost = r.best_feasible ? r.best_feasible->total : r.best.total;
    out << fmt::format("{},{},{:.2f},{},{},{:.3f}\n", row.config_id, r.seed, cost, r.feasible() ? 1 : 0,
                       r.evaluations_to_best, timing ? r.runtime_s : 0.0);
  }
}

void write_stats_csv(std::ostream& out, const std::vector<SuiteStats>& stats) {
  out << "config_id,runs,feasible_runs,best_cost,mean_cost,success_rate,mean_evals_to_best\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{:.2f}", *v) : std::string(); };
  for (const SuiteStats& s : stats) {
    out << fmt::format("{},{},{},{},{},{:.4f},{:.1f}\n", s.config_id, s.runs, s.feasible_runs, opt(s.best_cost),
                       opt(s.mean_cost), s.success_rate, s.mean_evaluations_to_best);
  }
}

void write_curve_csv(std::ostream& out, const RunRecord& record) {
  out << "evaluation,best_cost\n";
  for (const CurvePoint& p : record.curve) out << fmt::format("{},{:.6f}\n", p.evaluation, p.cost);
}

}  // namespace pipesizer
