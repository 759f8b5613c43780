#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace pipesizer::testing {

struct PropertyReport {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
  void fail(const std::string& what);
};

// Upward and downward greedy on random 3-pipe stars against enumeration of
// all 27 designs.
PropertyReport check_greedy_oracle(std::uint64_t seed, std::size_t cases);
// upward_greedy ends with zero violation, or throws when the all-max design fails.
PropertyReport check_upward_feasibility(std::uint64_t seed, std::size_t cases);
// Replays every downward move: cost strictly falls, feasibility holds throughout.
PropertyReport check_downward_monotone(std::uint64_t seed, std::size_t cases);
// Mass balance and head-loss consistency on random trees and looped networks.
PropertyReport check_hydraulic_residuals(std::uint64_t seed, std::size_t cases);
// Per-pipe diameter violation stays in range and vanishes exactly on sizes.
PropertyReport check_diameter_violation(std::uint64_t seed, std::size_t cases);
// C symmetric and positive definite after every generation on a random quadratic.
PropertyReport check_cma_covariance(std::uint64_t seed, std::size_t generations);
// RLS and (1+1)EA incumbents never get worse; best-so-far curves never rise.
PropertyReport check_elitist_monotone(std::uint64_t seed, std::size_t cases);

}  // namespace pipesizer::testing
