#include "pipesizer/greedy.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

double violation(const CostBreakdown& c) { return c.structural_failure ? kInfinity : c.sum_pv; }
bool feasible(const CostBreakdown& c) { return !c.structural_failure && c.sum_pv == 0.0; }

DesignVector commercial_start(const NetworkProblem& problem, const DesignVector& start) {
  validate_design(problem.network(), start);
  const DiameterTable& table = problem.network().diameter_table();
  if (!is_commercial(start.diameters, table)) {
    throw PreconditionError("greedy search needs a commercial design");
  }
  DesignVector d = start;
  d.flavor = DesignFlavor::kCommercial;
  for (double& v : d.diameters) v = table.sizes()[*table.index_of(v)];
  return d;
}

struct Candidate {
  std::size_t pipe;
  DesignVector design;
};

// Better ratio wins; among infinite ratios the larger numerator; then the
// earlier pipe (callers scan in ascending order and only replace on strict gains).
bool better(double ratio, double numerator, double best_ratio, double best_numerator) {
  if (ratio != best_ratio) return ratio > best_ratio;
  return std::isinf(ratio) && numerator > best_numerator;
}

std::vector<CostBreakdown> evaluate_all(const NetworkProblem& problem, Objective& objective,
                                        const std::vector<Candidate>& candidates) {
  std::vector<std::vector<double>> xs;
  xs.reserve(candidates.size());
  for (const auto& c : candidates) xs.push_back(problem.encode(c.design));
  return objective.evaluate_batch(xs);
}

}  // namespace

GreedyResult upward_greedy(const NetworkProblem& problem, Objective& objective, const DesignVector& start,
                           const GreedyOptions& options) {
  const std::uint64_t first = objective.evaluations();
  const DiameterTable& table = problem.network().diameter_table();
  GreedyResult result;
  result.design = commercial_start(problem, start);
  result.cost = objective.evaluate(problem.encode(result.design));

  if (!feasible(result.cost) && !options.assume_max_feasible) {
    const CostBreakdown top = objective.evaluate(problem.encode(max_design(problem.network())));
    if (!feasible(top)) {
      throw InfeasibleNetworkError(
          fmt::format("even the all-maximum design violates the head constraints by {:.6g}", violation(top)));
    }
  }

  while (!feasible(result.cost)) {
    if (options.budget && objective.evaluations() >= *options.budget) {
      result.budget_exhausted = true;
      break;
    }
    std::vector<Candidate> candidates;
    for (std::size_t k = 0; k < result.design.size(); ++k) {
      const std::size_t idx = *table.index_of(result.design[k]);
      if (idx + 1 >= table.size()) continue;
      Candidate c{k, result.design};
      c.design[k] = table.sizes()[idx + 1];
      candidates.push_back(std::move(c));
    }
    if (candidates.empty()) throw InfeasibleNetworkError("every pipe is at its maximum size yet the design is infeasible");

    const auto costs = evaluate_all(problem, objective, candidates);
    std::optional<std::size_t> pick;
    GreedyMove best;
    best.ratio = -kInfinity;
    const double current_pv = violation(result.cost);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double reduction = current_pv - violation(costs[c]);
      if (!(reduction > 0.0)) continue;
      const double added = costs[c].pipe_cost - result.cost.pipe_cost;
      const double ratio = added <= 0.0 ? kInfinity : reduction / added;
      if (!pick || better(ratio, reduction, best.ratio, best.delta_pv)) {
        pick = c;
        const std::size_t k = candidates[c].pipe;
        best = {k, result.design[k], candidates[c].design[k], reduction, added, ratio};
      }
    }
    if (!pick) {
      // Stalled: no single step helps (flows reroute around the enlarged pipe).
      // Take the least harmful step; sizes only grow, so this still ends at
      // the all-maximum design at worst.
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        const double reduction = current_pv - violation(costs[c]);
        const double added = costs[c].pipe_cost - result.cost.pipe_cost;
        if (!pick || reduction > best.delta_pv || (reduction == best.delta_pv && added < best.delta_cost)) {
          pick = c;
          const std::size_t k = candidates[c].pipe;
          best = {k, result.design[k], candidates[c].design[k], reduction, added,
                  added <= 0.0 ? kInfinity : reduction / added};
        }
      }
    }
    result.design = std::move(candidates[*pick].design);
    result.cost = costs[*pick];
    result.moves.push_back(best);
  }
  result.evaluations = objective.evaluations() - first;
  return result;
}

GreedyResult downward_greedy(const NetworkProblem& problem, Objective& objective, const DesignVector& start,
                             const GreedyOptions& options) {
  const std::uint64_t first = objective.evaluations();
  const DiameterTable& table = problem.network().diameter_table();
  GreedyResult result;
  result.design = commercial_start(problem, start);
  result.cost = objective.evaluate(problem.encode(result.design));
  if (!feasible(result.cost)) throw PreconditionError("downward greedy search needs a feasible design");

  while (true) {
    if (options.budget && objective.evaluations() >= *options.budget) {
      result.budget_exhausted = true;
      break;
    }
    std::vector<Candidate> candidates;
    for (std::size_t k = 0; k < result.design.size(); ++k) {
      const std::size_t idx = *table.index_of(result.design[k]);
      if (idx == 0) continue;
      Candidate c{k, result.design};
      c.design[k] = table.sizes()[idx - 1];
      candidates.push_back(std::move(c));
    }
    if (candidates.empty()) break;

    const auto costs = evaluate_all(problem, objective, candidates);
    std::optional<std::size_t> pick;
    GreedyMove best;
    best.ratio = -kInfinity;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!feasible(costs[c])) continue;
      const double saving = result.cost.pipe_cost - costs[c].pipe_cost;
      if (!(saving > 0.0)) continue;
      const double consumed = result.cost.head_surplus - costs[c].head_surplus;
      const double ratio = consumed <= 0.0 ? kInfinity : saving / consumed;
      if (!pick || better(ratio, saving, best.ratio, best.delta_cost)) {
        pick = c;
        const std::size_t k = candidates[c].pipe;
        best = {k, result.design[k], candidates[c].design[k], consumed, saving, ratio};
      }
    }
    if (!pick) break;
    result.design = std::move(candidates[*pick].design);
    result.cost = costs[*pick];
    result.moves.push_back(best);
  }
  result.evaluations = objective.evaluations() - first;
  return result;
}

GreedyResult upward_greedy(const PipeNetwork& network, const DesignVector& start, const GreedyOptions& options) {
  NetworkProblem problem(network, PenaltyConfig::for_network(network), Scenario::kRounded);
  Objective objective = problem.objective();
  return upward_greedy(problem, objective, start, options);
}

GreedyResult downward_greedy(const PipeNetwork& network, const DesignVector& start, const GreedyOptions& options) {
  NetworkProblem problem(network, PenaltyConfig::for_network(network), Scenario::kRounded);
  Objective objective = problem.objective();
  return downward_greedy(problem, objective, start, options);
}

}  // namespace pipesizer
