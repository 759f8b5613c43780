#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pipesizer/objective.hpp"
#include "pipesizer/run_record.hpp"

namespace pipesizer {

enum class StagnationRule {
  kBestEver,         // best-ever improved by less than tol_fun * |best| over the window
  kGenerationRange,  // generation bests spread by less than tol_fun * |best| over the window
};

enum class BoundHandling {
  kClamp,    // clamped samples are ranked as evaluated and drive the update
  // Clamped samples are evaluated; ranking adds an adaptive quadratic penalty
  // on the distance to the box and the unclamped samples drive the update.
  kPenalty,
};

struct CmaOptions {
  std::size_t lambda = 0;             // 0 picks 4 + floor(3 ln N)
  std::optional<double> sigma0;       // default 0.5 * mean(UB - LB)
  std::optional<std::vector<double>> initial_mean;  // default uniform in the box
  // Stop once the objective counter reaches this (shared with other phases).
  std::uint64_t budget = 100000;
  double tol_fun = 1e-5;              // relative improvement over the stagnation window
  bool stagnation_stop = true;
  StagnationRule stagnation_rule = StagnationRule::kGenerationRange;
  BoundHandling bound_handling = BoundHandling::kClamp;
  // Degenerate settings used to test the recombination in isolation.
  bool equal_weights = false;
  bool fixed_sigma = false;
};

struct CmaState {
  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd C;
  Eigen::VectorXd p_sigma, p_c;
  Eigen::MatrixXd B;   // eigenvectors of C
  Eigen::VectorXd D;   // square roots of the eigenvalues of C
  std::uint64_t generation = 0;
  std::size_t lambda = 0, mu = 0;
  Eigen::VectorXd weights;
  double mu_eff = 0.0, c_sigma = 0.0, d_sigma = 0.0, c_c = 0.0, c_1 = 0.0, c_mu = 0.0, chi_n = 0.0;
  std::uint64_t eigen_generation = 0;
  std::uint64_t covariance_resets = 0;
};

// Ask/tell CMA-ES with standard default strategy parameters and clamping to
// the box before evaluation.
class CmaEs {
 public:
  CmaEs(std::span<const double> lower, std::span<const double> upper, const CmaOptions& options,
        std::uint64_t seed);

  // lambda samples from N(m, sigma^2 C), clamped.
  std::vector<std::vector<double>> ask();
  // Ranks the clamped samples by cost and updates the distribution.
  void tell(std::span<const std::vector<double>> samples, std::span<const double> costs);

  const CmaState& state() const noexcept { return state_; }
  std::size_t dimension() const noexcept { return lower_.size(); }

 private:
  void update_eigensystem(bool force);
  // Ranking costs with the box-distance penalty added; adapts its weights.
  std::vector<double> penalized(std::span<const std::vector<double>> samples, std::span<const double> costs);

  std::vector<double> lower_, upper_;
  CmaOptions options_;
  std::mt19937_64 rng_;
  CmaState state_;
  std::vector<std::vector<double>> last_raw_;  // unclamped samples of the last ask()
  struct BoundPenalty {
    Eigen::VectorXd weights;
    std::deque<double> spread;  // recent fitness spread per unit of variance
    bool valid = false, initial = true;
    Eigen::VectorXd previous_mean;
  } bound_;
};

// Invoked once per generation whose best sample beats every earlier point.
using BestHook = std::function<void(std::span<const double> x, const CostBreakdown& cost)>;

struct CmaResult {
  RunRecord record;
  CmaState state;
};

// Runs until the objective's counter reaches the budget or the best cost
// stagnates. A final partial generation is evaluated but not used for an update.
CmaResult run_cmaes(Objective& objective, const CmaOptions& options, std::uint64_t seed,
                    const BestHook& on_best = {});

}  // namespace pipesizer
