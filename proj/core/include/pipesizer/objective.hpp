#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pipesizer/cost.hpp"
#include "pipesizer/hydraulics.hpp"
#include "pipesizer/network.hpp"

namespace pipesizer {

// Box-bounded black box. Every evaluated point bumps the counter by one,
// including points evaluated through evaluate_batch.
class Objective {
 public:
  using Function = std::function<CostBreakdown(std::span<const double>)>;

  Objective(Function function, std::vector<double> lower, std::vector<double> upper);

  // Plain scalar function; every point counts as feasible.
  static Objective scalar(std::function<double(std::span<const double>)> f,
                          std::vector<double> lower, std::vector<double> upper);

  std::size_t dimension() const noexcept { return lower_.size(); }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }

  CostBreakdown evaluate(std::span<const double> x);
  // Evaluated concurrently on up to threads() workers; results keep input order.
  std::vector<CostBreakdown> evaluate_batch(std::span<const std::vector<double>> xs);

  std::uint64_t evaluations() const noexcept { return counter_->load(); }
  unsigned threads() const noexcept { return threads_; }
  void set_threads(unsigned threads) noexcept { threads_ = threads == 0 ? 1 : threads; }

 private:
  Function function_;
  std::vector<double> lower_, upper_;
  std::shared_ptr<std::atomic<std::uint64_t>> counter_;
  unsigned threads_;
};

// Worker count from PIPESIZER_THREADS, else the hardware concurrency.
unsigned default_thread_count();

// How optimizer coordinates become diameters.
enum class Scenario {
  kContinuous,  // any diameter in range
  kDiscrete,    // snapped to whole native units (1 in / 1 mm)
  kRounded,     // snapped to the nearest commercial size
};

// Binds a network to a penalty configuration. Optimizer coordinates are
// diameters in the network's native unit (in for NYTP, mm for Hanoi).
class NetworkProblem {
 public:
  NetworkProblem(const PipeNetwork& network, PenaltyConfig penalty,
                 Scenario scenario = Scenario::kContinuous, SolverOptions solver = {});

  const PipeNetwork& network() const noexcept { return solver_->network(); }
  const HydraulicSolver& solver() const noexcept { return *solver_; }
  const PenaltyConfig& penalty() const noexcept { return penalty_; }
  Scenario scenario() const noexcept { return scenario_; }
  std::size_t dimension() const noexcept { return network().decision_count(); }

  DesignVector decode(std::span<const double> x) const;
  std::vector<double> encode(const DesignVector& design) const;

  // Uncounted evaluation of a design.
  CostBreakdown evaluate(const DesignVector& design) const;

  // Counting objective over native-unit coordinates.
  Objective objective() const;

 private:
  std::shared_ptr<const HydraulicSolver> solver_;
  PenaltyConfig penalty_;
  Scenario scenario_;
};

}  // namespace pipesizer
