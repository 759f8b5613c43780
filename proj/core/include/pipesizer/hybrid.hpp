#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pipesizer/cmaes.hpp"
#include "pipesizer/greedy.hpp"
#include "pipesizer/objective.hpp"
#include "pipesizer/run_record.hpp"

namespace pipesizer {

enum class HybridPhases { kCmaOnly, kCmaUpward, kFull };

struct HybridConfig {
  std::size_t lambda = 400;
  std::uint64_t budget = 200000;
  double tol_fun = 1e-5;
  bool stagnation_stop = true;
  StagnationRule stagnation_rule = StagnationRule::kGenerationRange;
  BoundHandling bound_handling = BoundHandling::kClamp;
  Scenario scenario = Scenario::kContinuous;
  std::optional<double> sigma0;  // native diameter units; default half the range
  // Rounded candidates cheaper than this are repaired upward. Defaults to the
  // network's Phi setting, then 1.2 x its target cost.
  std::optional<double> phi;
  std::optional<PenaltyConfig> penalty;  // default: default_penalty(network, scenario)
  HybridPhases phases = HybridPhases::kFull;
  // Evaluations held back from the CMA-ES phase for the final downward trim;
  // default 10 per decision variable.
  std::optional<std::uint64_t> downward_reserve;
  unsigned threads = 0;  // 0: default_thread_count()
};

// Network penalty settings; the diameter penalty only applies off the
// continuous scenario.
PenaltyConfig default_penalty(const PipeNetwork& network, Scenario scenario);

// Defaults used by the CLI and the acceptance runs for a given network.
HybridConfig recommended_hybrid_config(const PipeNetwork& network);

// Resolved repair threshold, +inf when neither phi nor a target is known.
double resolve_phi(const PipeNetwork& network, const HybridConfig& config);

// best / best_x describe the CMA-ES best-ever point (continuous); the
// best_feasible fields hold the final commercial design and the curve tracks
// the best feasible commercial cost.
RunRecord run_hybrid(const PipeNetwork& network, const HybridConfig& config, std::uint64_t seed);

struct SuiteEntry {
  std::string id;
  std::function<RunRecord(std::uint64_t seed)> run;
};

struct SuiteRow {
  std::string config_id;
  RunRecord record;
};

struct SuiteStats {
  std::string config_id;
  std::size_t runs = 0;
  std::size_t feasible_runs = 0;
  std::optional<double> best_cost;  // over feasible runs
  std::optional<double> mean_cost;
  double success_rate = 0.0;        // in [0, 1]
  double mean_evaluations_to_best = 0.0;
};

struct SuiteOptions {
  std::optional<double> target;   // success reference cost
  double success_tolerance = 5000.0;  // currency
  unsigned threads = 1;           // concurrent (config, seed) runs
};

struct SuiteResult {
  std::vector<SuiteRow> rows;  // entry-major, seeds in the given order
  std::vector<SuiteStats> stats;
};

bool is_success(const RunRecord& record, double target, double tolerance);

SuiteResult run_suite(const std::vector<SuiteEntry>& entries, const std::vector<std::uint64_t>& seeds,
                      const SuiteOptions& options = {});
SuiteStats summarize(const std::string& config_id, const std::vector<const RunRecord*>& records,
                     const SuiteOptions& options);

// config_id,seed,best_cost,feasible,evals_to_best,runtime_s. With
// timing off runtime_s is written as 0 so reruns are byte-identical.
void write_summary_csv(std::ostream& out, const std::vector<SuiteRow>& rows, bool timing = true);
void write_stats_csv(std::ostream& out, const std::vector<SuiteStats>& stats);
void write_curve_csv(std::ostream& out, const RunRecord& record);

}  // namespace pipesizer
