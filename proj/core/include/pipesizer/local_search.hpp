#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pipesizer/objective.hpp"
#include "pipesizer/run_record.hpp"

namespace pipesizer {

enum class SigmaMode {
  kFixed,   // sigma = fraction * (UB - LB)
  kLinear,  // decays from 0.5 to 0.01 times (UB - LB) over the budget
};

struct LocalSearchStep {
  std::span<const double> incumbent;
  std::span<const double> candidate;
  std::size_t mutated = 0;  // coordinates actually perturbed, at least 1
  // (1+1)EA only: coordinates picked by the 1/N coin, before the fallback.
  // Equals `mutated` for RLS.
  std::size_t drawn = 0;
  bool accepted = false;
};

struct LocalSearchOptions {
  SigmaMode sigma_mode = SigmaMode::kLinear;
  double sigma_fraction = 0.5;
  // Stop once the objective counter reaches this.
  std::uint64_t budget = 100000;
  std::optional<std::vector<double>> initial;  // default uniform in the box
  std::function<void(const LocalSearchStep&)> observer;
};

// The four mutation-strength presets: "0.1", "0.25", "0.5", "linear".
LocalSearchOptions sigma_preset(std::string_view name);

// Mutates one uniformly chosen coordinate per step; accepts ties.
RunRecord run_rls(Objective& objective, const LocalSearchOptions& options, std::uint64_t seed);

// Mutates each coordinate with probability 1/N, forcing one when none was
// drawn; accepts ties.
RunRecord run_one_plus_one_ea(Objective& objective, const LocalSearchOptions& options,
                              std::uint64_t seed);

}  // namespace pipesizer
