#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pipesizer/objective.hpp"

namespace pipesizer {

struct GreedyMove {
  std::size_t pipe = 0;  // decision index
  double old_size = 0.0, new_size = 0.0;  // m
  // Upward: violation removed. Downward: head surplus consumed. Native head units.
  double delta_pv = 0.0;
  // Upward: cost added. Downward: cost saved.
  double delta_cost = 0.0;
  double ratio = 0.0;  // +inf when the denominator is not positive
};

struct GreedyOptions {
  // Do not start a new sweep once the objective counter reaches this.
  std::optional<std::uint64_t> budget;
  // Skip the all-maximum feasibility check (already done by the caller).
  bool assume_max_feasible = false;
};

struct GreedyResult {
  DesignVector design;
  CostBreakdown cost;
  std::vector<GreedyMove> moves;
  std::uint64_t evaluations = 0;  // spent by this call
  bool budget_exhausted = false;
};

// Repairs pressure violations one commercial step at a time, choosing the
// step with the largest violation removed per unit of added cost. Throws
// InfeasibleNetworkError when the all-maximum design still violates.
GreedyResult upward_greedy(const NetworkProblem& problem, Objective& objective,
                           const DesignVector& start, const GreedyOptions& options = {});

// Trims a feasible design one commercial step at a time, choosing the
// feasible step with the largest saving per unit of head surplus consumed.
// Throws PreconditionError on an infeasible start.
GreedyResult downward_greedy(const NetworkProblem& problem, Objective& objective,
                             const DesignVector& start, const GreedyOptions& options = {});

// Convenience overloads on a fresh commercial-rounding objective.
GreedyResult upward_greedy(const PipeNetwork& network, const DesignVector& start,
                           const GreedyOptions& options = {});
GreedyResult downward_greedy(const PipeNetwork& network, const DesignVector& start,
                             const GreedyOptions& options = {});

}  // namespace pipesizer
