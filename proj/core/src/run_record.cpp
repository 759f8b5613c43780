#include "pipesizer/run_record.hpp"

namespace pipesizer {

bool RunTracker::observe(std::span<const double> x, const CostBreakdown& cost,
                         std::uint64_t evaluation) {
  RunRecord& r = *record_;
  if (cost.feasible && (!r.best_feasible || cost.total < r.best_feasible->total)) {
    r.best_feasible = cost;
    r.best_feasible_x.emplace(x.begin(), x.end());
  }
  if (has_best_ && !(cost.total < r.best.total)) return false;
  has_best_ = true;
  r.best = cost;
  r.best_x.assign(x.begin(), x.end());
  r.evaluations_to_best = evaluation;
  r.curve.push_back({evaluation, cost.total});
  return true;
}

}  // namespace pipesizer
