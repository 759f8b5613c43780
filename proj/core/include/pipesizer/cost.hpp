#pragma once

#include "pipesizer/hydraulics.hpp"
#include "pipesizer/network.hpp"

namespace pipesizer {

enum class PenaltyMode { kLinear, kSevere };

struct PenaltyConfig {
  double pressure_factor = 1e7;  // P_f, currency per native head unit
  double diameter_factor = 1e7;  // P_D, currency per unit of Sum_DV
  PenaltyMode mode = PenaltyMode::kLinear;
  bool nytp_special = false;
  // Off for the purely continuous scenario, where any diameter is allowed.
  bool penalize_diameters = true;
  // Charged instead of a solve when zero-size pipes disconnect a junction.
  double structural_failure_cost = 1e15;

  // Factors and flags carried by the network's design settings.
  static PenaltyConfig for_network(const PipeNetwork& network);
};

struct CostBreakdown {
  double pipe_cost = 0.0;
  double sum_pv = 0.0;        // native head units
  double sum_dv = 0.0;
  double total = 0.0;
  double head_surplus = 0.0;  // sum of max(0, H - Hmin), native head units
  bool feasible = false;
  bool structural_failure = false;
};

// Continuous designs must keep Sum_PV within this many native head units.
inline constexpr double kContinuousFeasibilityTolerance = 1e-6;
// Per-node deficits below this (m) are solver noise and do not count.
inline constexpr double kHeadNoiseFloor = 1e-9;

// Sum of unit_cost(D_i) * L_i over decision pipes, L_i in native length units.
double pipe_cost(const PipeNetwork& network, const DesignVector& design);

double pressure_violation_sum(const HydraulicState& state, const PipeNetwork& network);
double head_surplus_sum(const HydraulicState& state, const PipeNetwork& network);

// Triangular distance to the nearest commercial size: 0 on a size, 1 at the
// midpoint of two neighbours. With nytp_special the [0, 36 in] bracket peaks
// at 3 instead.
double diameter_violation(double diameter, const DiameterTable& table, bool nytp_special);
double diameter_violation_sum(const DesignVector& design, const DiameterTable& table,
                              bool nytp_special);

// P_f * Sum_PV, or 1e5 + (1e4 * Sum_PV)^4 in severe mode (0 when feasible).
double pressure_penalty(double sum_pv, const PenaltyConfig& config);

// Sets `total` and `feasible` from the other fields.
void finalize(CostBreakdown& cost, const PenaltyConfig& config, bool commercial);

CostBreakdown total_cost(const PipeNetwork& network, const DesignVector& design,
                         const PenaltyConfig& config);
CostBreakdown total_cost(const HydraulicSolver& solver, const DesignVector& design,
                         const PenaltyConfig& config);

}  // namespace pipesizer
