#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "pipesizer/network.hpp"

namespace pipesizer {

inline constexpr double kHazenWilliamsSi = 10.667;
inline constexpr double kHazenWilliamsFlowExponent = 1.852;
inline constexpr double kHazenWilliamsDiameterExponent = 4.871;

struct SolverOptions {
  double flow_tolerance = 1e-4;      // max |dQ| / max(max |Q|, 1e-6)
  double residual_tolerance = 1e-6;  // m^3/s, nodal mass balance
  int max_iterations = 200;
  // Below this flow the head-loss curve is replaced by its secant line.
  double small_flow = 1e-6;
  // Newton steps taken after both tests pass; each roughly squares the
  // remaining error, which brings the energy residual near round-off.
  int polish_iterations = 2;
};

struct HydraulicState {
  std::vector<double> head;  // m, per node
  // m^3/s per pipe, positive from -> to. For duplicated pipes this is the
  // total carried by the existing tunnel and its parallel duplicate.
  std::vector<double> flow;
  std::vector<double> duplicate_flow;  // share carried by the duplicate, 0 if none
  int iterations = 0;
  double residual = 0.0;  // m^3/s, max nodal mass-balance error
};

// Hazen-Williams loss in m for SI inputs; signed like the flow.
double head_loss(double length, double roughness, double diameter, double flow);
double head_loss(const Pipe& pipe, double installed_diameter, double flow);

// Precomputes the topology of one network so that repeated solves only pay
// for the numeric work. Safe to share between threads: solve() keeps all
// scratch memory local to the call.
class HydraulicSolver {
 public:
  explicit HydraulicSolver(const PipeNetwork& network, SolverOptions options = {});
  ~HydraulicSolver();
  HydraulicSolver(HydraulicSolver&&) noexcept;
  HydraulicSolver& operator=(HydraulicSolver&&) noexcept;

  // Throws StructuralError when a junction loses every path to a reservoir
  // once zero-diameter decision pipes are dropped, ConvergenceError when
  // Newton fails within max_iterations.
  HydraulicState solve(const DesignVector& design) const;

  const PipeNetwork& network() const noexcept;
  const SolverOptions& options() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HydraulicState solve_steady_state(const PipeNetwork& network, const DesignVector& design,
                                  const SolverOptions& options = {});

}  // namespace pipesizer
