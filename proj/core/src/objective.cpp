#include "pipesizer/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

Objective::Objective(Function function, std::vector<double> lower, std::vector<double> upper)
    : function_(std::move(function)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      counter_(std::make_shared<std::atomic<std::uint64_t>>(0)),
      threads_(default_thread_count()) {
  if (lower_.size() != upper_.size()) throw PreconditionError("bound vectors differ in length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] <= upper_[i])) throw PreconditionError(fmt::format("empty range at coordinate {}", i));
  }
}

Objective Objective::scalar(std::function<double(std::span<const double>)> f, std::vector<double> lower,
                            std::vector<double> upper) {
  return Objective(
      [f = std::move(f)](std::span<const double> x) {
        CostBreakdown c;
        c.total = c.pipe_cost = f(x);
        c.feasible = true;
        return c;
      },
      std::move(lower), std::move(upper));
}

CostBreakdown Objective::evaluate(std::span<const double> x) {
  if (x.size() != dimension()) throw StructuralError("point has the wrong dimension");
  counter_->fetch_add(1);
  return function_(x);
}

std::vector<CostBreakdown> Objective::evaluate_batch(std::span<const std::vector<double>> xs) {
  std::vector<CostBreakdown> out(xs.size());
  const std::size_t workers = std::min<std::size_t>(threads_, xs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = evaluate(xs[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < xs.size(); i = next++) out[i] = evaluate(xs[i]);
        } catch (...) {
          errors[w] = std::current_exception();
          next = xs.size();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("PIPESIZER_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // Fall through to the hardware default.
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

NetworkProblem::NetworkProblem(const PipeNetwork& network, PenaltyConfig penalty, Scenario scenario,
                               SolverOptions solver)
    : solver_(std::make_shared<HydraulicSolver>(network, solver)),
      penalty_(penalty),
      scenario_(scenario) {}

DesignVector NetworkProblem::decode(std::span<const double> x) const {
  const PipeNetwork& net = network();
  const DiameterTable& table = net.diameter_table();
  const double unit = net.units().diameter_to_m;
  DesignVector d;
  d.diameters.reserve(x.size());
  for (double v : x) d.diameters.push_back(std::clamp(v * unit, table.min(), table.max()));
  switch (scenario_) {
    case Scenario::kContinuous:
      break;
    case Scenario::kDiscrete:
      for (double& v : d.diameters) {
        v = std::clamp(std::round(v / unit) * unit, table.min(), table.max());
      }
      break;
    case Scenario::kRounded:
      return round_to_commercial(d, table);
  }
  if (is_commercial(d.diameters, table)) {
    d.flavor = DesignFlavor::kCommercial;
    for (double& v : d.diameters) v = table.sizes()[*table.index_of(v)];
  } else {
    d.flavor = scenario_ == Scenario::kDiscrete ? DesignFlavor::kDiscreteStepped : DesignFlavor::kContinuous;
  }
  return d;
}

std::vector<double> NetworkProblem::encode(const DesignVector& design) const {
  const double unit = network().units().diameter_to_m;
  std::vector<double> x;
  x.reserve(design.size());
  for (double d : design.diameters) {
    // Undo the round-off of the unit conversion so 96 in reads back as 96.
    const double v = d / unit;
    const double snapped = std::round(v * 1e6) / 1e6;
    x.push_back(std::abs(snapped - v) <= 1e-9 * std::max(1.0, std::abs(v)) ? snapped : v);
  }
  return x;
}

CostBreakdown NetworkProblem::evaluate(const DesignVector& design) const {
  return total_cost(*solver_, design, penalty_);
}

Objective NetworkProblem::objective() const {
  const PipeNetwork& net = network();
  const double unit = net.units().diameter_to_m;
  std::vector<double> lower(dimension(), net.diameter_table().min() / unit);
  std::vector<double> upper(dimension(), net.diameter_table().max() / unit);
  // Copy of *this keeps the solver alive as long as the objective.
  return Objective([self = *this](std::span<const double> x) { return self.evaluate(self.decode(x)); },
                   std::move(lower), std::move(upper));
}

}  // namespace pipesizer
