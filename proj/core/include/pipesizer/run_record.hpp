#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pipesizer/cost.hpp"

namespace pipesizer {

struct CurvePoint {
  std::uint64_t evaluation = 0;  // 1-based index of the evaluation that improved
  double cost = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<double> best_x;  // optimizer coordinates
  CostBreakdown best;
  std::optional<std::vector<double>> best_feasible_x;
  std::optional<CostBreakdown> best_feasible;
  std::uint64_t evaluations = 0;
  std::uint64_t evaluations_to_best = 0;
  std::vector<CurvePoint> curve;  // nonincreasing best-so-far
  std::string termination;
  double runtime_s = 0.0;

  bool feasible() const noexcept { return best_feasible.has_value(); }
};

// Folds evaluated points into a RunRecord: best, best feasible and curve.
class RunTracker {
 public:
  explicit RunTracker(RunRecord& record) : record_(&record) {}

  // Returns true when x improved the best total.
  bool observe(std::span<const double> x, const CostBreakdown& cost, std::uint64_t evaluation);

 private:
  RunRecord* record_;
  bool has_best_ = false;
};

}  // namespace pipesizer
