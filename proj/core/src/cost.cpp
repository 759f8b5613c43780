#include "pipesizer/cost.hpp"

#include <algorithm>
#include <cmath>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace {

constexpr double kNytpLowBracket = 36.0 * kMetresPerInch;

}  // namespace

PenaltyConfig PenaltyConfig::for_network(const PipeNetwork& network) {
  PenaltyConfig c;
  c.pressure_factor = network.settings().pressure_penalty;
  c.diameter_factor = network.settings().diameter_penalty;
  c.nytp_special = network.settings().nytp_special;
  return c;
}

double pipe_cost(const PipeNetwork& network, const DesignVector& design) {
  if (design.size() != network.decision_count()) {
    throw StructuralError("design length does not match the decision count");
  }
  const DiameterTable& table = network.diameter_table();
  const double length_unit = network.units().length_to_m;
  double total = 0.0;
  for (std::size_t k = 0; k < design.size(); ++k) {
    const Pipe& pipe = network.pipe(network.decision_pipe(k));
    total += table.unit_cost(design[k]) * (pipe.length / length_unit);
  }
  return total;
}

double pressure_violation_sum(const HydraulicState& state, const PipeNetwork& network) {
  double sum = 0.0;
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    const Node& node = network.node(i);
    if (!node.min_head) continue;
    const double deficit = *node.min_head - state.head.at(i);
    if (deficit > kHeadNoiseFloor) sum += deficit;
  }
  return sum / network.units().length_to_m;
}

double head_surplus_sum(const HydraulicState& state, const PipeNetwork& network) {
  double sum = 0.0;
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    const Node& node = network.node(i);
    if (node.min_head) sum += std::max(0.0, state.head.at(i) - *node.min_head);
  }
  return sum / network.units().length_to_m;
}

double diameter_violation(double diameter, const DiameterTable& table, bool nytp_special) {
  const auto b = table.bracket(diameter);
  if (b.lower == b.upper) return 0.0;
  const double lo = table.sizes()[b.lower];
  const double hi = table.sizes()[b.upper];
  const double peak = nytp_special && lo == 0.0 && std::abs(hi - kNytpLowBracket) < 1e-12 ? 3.0 : 1.0;
  const double mid = 0.5 * (lo + hi);
  const double v = diameter <= mid ? (diameter - lo) / (mid - lo) : (hi - diameter) / (hi - mid);
  return peak * std::clamp(v, 0.0, 1.0);
}

double diameter_violation_sum(const DesignVector& design, const DiameterTable& table,
                              bool nytp_special) {
  double sum = 0.0;
  for (double d : design.diameters) sum += diameter_violation(d, table, nytp_special);
  return sum;
}

double pressure_penalty(double sum_pv, const PenaltyConfig& config) {
  if (!(sum_pv > 0.0)) return 0.0;
  if (config.mode == PenaltyMode::kSevere) return 1e5 + std::pow(1e4 * sum_pv, 4.0);
  return config.pressure_factor * sum_pv;
}

void finalize(CostBreakdown& cost, const PenaltyConfig& config, bool commercial) {
  if (cost.structural_failure) {
    cost.total = config.structural_failure_cost;
    cost.feasible = false;
    return;
  }
  cost.total = cost.pipe_cost + pressure_penalty(cost.sum_pv, config);
  if (config.penalize_diameters) cost.total += config.diameter_factor * cost.sum_dv;
  cost.feasible = commercial ? cost.sum_pv == 0.0 : cost.sum_pv <= kContinuousFeasibilityTolerance;
}

CostBreakdown total_cost(const HydraulicSolver& solver, const DesignVector& design,
                         const PenaltyConfig& config) {
  const PipeNetwork& network = solver.network();
  validate_design(network, design);
  CostBreakdown cost;
  cost.pipe_cost = pipe_cost(network, design);
  cost.sum_dv = diameter_violation_sum(design, network.diameter_table(), config.nytp_special);
  try {
    const HydraulicState state = solver.solve(design);
    cost.sum_pv = pressure_violation_sum(state, network);
    cost.head_surplus = head_surplus_sum(state, network);
  } catch (const StructuralError&) {
    cost.structural_failure = true;
  }
  finalize(cost, config, is_commercial(design.diameters, network.diameter_table()));
  return cost;
}

CostBreakdown total_cost(const PipeNetwork& network, const DesignVector& design,
                         const PenaltyConfig& config) {
  return total_cost(HydraulicSolver(network), design, config);
}

}  // namespace pipesizer
