#include "pipesizer/local_search.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <string>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace {

enum class Variant { kRls, kEa };

double sigma_scale(const LocalSearchOptions& options, std::uint64_t step, std::uint64_t steps) {
  if (options.sigma_mode == SigmaMode::kFixed) return options.sigma_fraction;
  const double t = steps == 0 ? 1.0 : std::min(1.0, static_cast<double>(step) / static_cast<double>(steps));
  return 0.5 - (0.5 - 0.01) * t;
}

RunRecord run(Objective& objective, const LocalSearchOptions& options, std::uint64_t seed, Variant variant) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = objective.dimension();
  if (n == 0) throw PreconditionError("local search needs at least one coordinate");
  if (options.budget < 1) throw PreconditionError("budget must be at least 1");
  const auto lower = objective.lower();
  const auto upper = objective.upper();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::bernoulli_distribution flip(1.0 / static_cast<double>(n));

  RunRecord record;
  record.algorithm = variant == Variant::kRls ? "rls" : "opo_ea";
  record.seed = seed;
  record.termination = "budget";
  RunTracker tracker(record);

  std::vector<double> incumbent(n);
  if (options.initial) {
    if (options.initial->size() != n) throw PreconditionError("initial point has the wrong dimension");
    for (std::size_t i = 0; i < n; ++i) incumbent[i] = std::clamp((*options.initial)[i], lower[i], upper[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) incumbent[i] = std::uniform_real_distribution<double>(lower[i], upper[i])(rng);
  }
  if (objective.evaluations() >= options.budget) throw PreconditionError("budget already exhausted");
  CostBreakdown incumbent_cost = objective.evaluate(incumbent);
  tracker.observe(incumbent, incumbent_cost, objective.evaluations());

  const std::uint64_t start = objective.evaluations();
  const std::uint64_t steps = options.budget - start;
  std::vector<double> candidate(n);
  std::vector<std::size_t> chosen;
  while (objective.evaluations() < options.budget) {
    const double scale = sigma_scale(options, objective.evaluations() - start, steps);
    candidate = incumbent;
    chosen.clear();
    std::size_t drawn = 1;
    if (variant == Variant::kRls) {
      chosen.push_back(pick(rng));
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (flip(rng)) chosen.push_back(i);
      }
      drawn = chosen.size();
      if (chosen.empty()) chosen.push_back(pick(rng));
    }
    for (std::size_t i : chosen) {
      const double sigma = scale * (upper[i] - lower[i]);
      candidate[i] = std::clamp(candidate[i] + sigma * normal(rng), lower[i], upper[i]);
    }
    const CostBreakdown cost = objective.evaluate(candidate);
    tracker.observe(candidate, cost, objective.evaluations());
    const bool accepted = cost.total <= incumbent_cost.total;
    if (options.observer) options.observer({incumbent, candidate, chosen.size(), drawn, accepted});
    if (accepted) {
      incumbent.swap(candidate);
      incumbent_cost = cost;
    }
  }

  record.evaluations = objective.evaluations();
  record.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

}  // namespace

LocalSearchOptions sigma_preset(std::string_view name) {
  LocalSearchOptions o;
  if (name == "linear") {
    o.sigma_mode = SigmaMode::kLinear;
    return o;
  }
  o.sigma_mode = SigmaMode::kFixed;
  if (name == "0.1") {
    o.sigma_fraction = 0.1;
  } else if (name == "0.25") {
    o.sigma_fraction = 0.25;
  } else if (name == "0.5") {
    o.sigma_fraction = 0.5;
  } else {
    throw PreconditionError("unknown sigma preset '" + std::string(name) + "'");
  }
  return o;
}

RunRecord run_rls(Objective& objective, const LocalSearchOptions& options, std::uint64_t seed) {
  return run(objective, options, seed, Variant::kRls);
}

RunRecord run_one_plus_one_ea(Objective& objective, const LocalSearchOptions& options, std::uint64_t seed) {
  return run(objective, options, seed, Variant::kEa);
}

}  // namespace pipesizer
