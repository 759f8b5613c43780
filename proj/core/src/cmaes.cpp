#include "pipesizer/cmaes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "pipesizer/errors.hpp"

namespace pipesizer {

CmaEs::CmaEs(std::span<const double> lower, std::span<const double> upper, const CmaOptions& options,
             std::uint64_t seed)
    : lower_(lower.begin(), lower.end()), upper_(upper.begin(), upper.end()), options_(options), rng_(seed) {
  const std::size_t n = lower_.size();
  if (n == 0) throw PreconditionError("CMA-ES needs at least one coordinate");
  if (upper_.size() != n) throw PreconditionError("bound vectors differ in length");
  const double nd = static_cast<double>(n);
  CmaState& s = state_;
  s.lambda = options.lambda != 0 ? options.lambda : 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(nd)));
  if (s.lambda < 2) throw PreconditionError("lambda must be at least 2");
  s.mu = s.lambda / 2;

  s.weights.resize(static_cast<Eigen::Index>(s.mu));
  for (std::size_t i = 0; i < s.mu; ++i) {
    s.weights[static_cast<Eigen::Index>(i)] =
        options.equal_weights ? 1.0 : std::log((static_cast<double>(s.lambda) + 1.0) / 2.0) - std::log(i + 1.0);
  }
  s.weights /= s.weights.sum();
  s.mu_eff = 1.0 / s.weights.squaredNorm();

  s.c_sigma = (s.mu_eff + 2.0) / (nd + s.mu_eff + 5.0);
  s.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mu_eff - 1.0) / (nd + 1.0)) - 1.0) + s.c_sigma;
  s.c_c = (4.0 + s.mu_eff / nd) / (nd + 4.0 + 2.0 * s.mu_eff / nd);
  s.c_1 = 2.0 / ((nd + 1.3) * (nd + 1.3) + s.mu_eff);
  s.c_mu = std::min(1.0 - s.c_1,
                    2.0 * (s.mu_eff - 2.0 + 1.0 / s.mu_eff) / ((nd + 2.0) * (nd + 2.0) + s.mu_eff));
  s.chi_n = std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));

  s.mean.resize(static_cast<Eigen::Index>(n));
  double range = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lower_[i] <= upper_[i])) throw PreconditionError("empty coordinate range");
    range += upper_[i] - lower_[i];
    if (options.initial_mean) {
      s.mean[static_cast<Eigen::Index>(i)] = std::clamp(options.initial_mean->at(i), lower_[i], upper_[i]);
    } else {
      s.mean[static_cast<Eigen::Index>(i)] = std::uniform_real_distribution<double>(lower_[i], upper_[i])(rng_);
    }
  }
  s.sigma = options.sigma0 ? *options.sigma0 : 0.5 * range / nd;
  if (!(s.sigma > 0.0)) throw PreconditionError("initial step size must be positive");

  s.C = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  s.B = s.C;
  s.D = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  s.p_sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.p_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
}

std::vector<std::vector<double>> CmaEs::ask() {
  const auto n = static_cast<Eigen::Index>(dimension());
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> samples(state_.lambda, std::vector<double>(dimension()));
  last_raw_.assign(state_.lambda, std::vector<double>(dimension()));
  Eigen::VectorXd z(n);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    auto& x = samples[r];
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng_);
    const Eigen::VectorXd y = state_.B * state_.D.cwiseProduct(z);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      last_raw_[r][k] = state_.mean[i] + state_.sigma * y[i];
      x[k] = std::clamp(last_raw_[r][k], lower_[k], upper_[k]);
    }
  }
  return samples;
}

void CmaEs::tell(std::span<const std::vector<double>> samples, std::span<const double> costs) {
  CmaState& s = state_;
  if (samples.size() != s.lambda || costs.size() != s.lambda) {
    throw PreconditionError("tell needs exactly lambda samples and costs");
  }
  const auto n = static_cast<Eigen::Index>(dimension());
  const double nd = static_cast<double>(n);

  const bool penalty = options_.bound_handling == BoundHandling::kPenalty;
  if (penalty && last_raw_.size() != s.lambda) throw PreconditionError("tell must follow ask");
  const std::vector<double> ranked = penalty ? penalized(samples, costs) : std::vector<double>(costs.begin(), costs.end());

  std::vector<std::size_t> order(s.lambda);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranked[a] < ranked[b]; });

  Eigen::MatrixXd steps(n, static_cast<Eigen::Index>(s.mu));  // (x_i:lambda - m_old) / sigma
  for (std::size_t i = 0; i < s.mu; ++i) {
    const auto& x = penalty ? last_raw_[order[i]] : samples[order[i]];
    for (Eigen::Index k = 0; k < n; ++k) {
      steps(k, static_cast<Eigen::Index>(i)) = (x[static_cast<std::size_t>(k)] - s.mean[k]) / s.sigma;
    }
  }
  const Eigen::VectorXd y_w = steps * s.weights;
  s.mean += s.sigma * y_w;
  ++s.generation;

  const Eigen::VectorXd c_inv_sqrt_y = s.B * (s.B.transpose() * y_w).cwiseQuotient(s.D);
  s.p_sigma = (1.0 - s.c_sigma) * s.p_sigma + std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * c_inv_sqrt_y;
  const double ps_norm = s.p_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - s.c_sigma, 2.0 * static_cast<double>(s.generation));
  const bool hsig = ps_norm / std::sqrt(decay) / s.chi_n < 1.4 + 2.0 / (nd + 1.0);
  s.p_c = (1.0 - s.c_c) * s.p_c + (hsig ? std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) : 0.0) * y_w;

  const Eigen::MatrixXd rank_mu = steps * s.weights.asDiagonal() * steps.transpose();
  const double hsig_correction = hsig ? 0.0 : s.c_c * (2.0 - s.c_c);
  s.C = (1.0 - s.c_1 - s.c_mu) * s.C + s.c_1 * (s.p_c * s.p_c.transpose() + hsig_correction * s.C) +
        s.c_mu * rank_mu;
  s.C = 0.5 * (s.C + s.C.transpose());

  if (!options_.fixed_sigma) {
    s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
  }

  // Lazy decomposition: the usual gap is lambda / (c1 + cmu) / N / 10
  // evaluations, i.e. that divided by lambda in generations.
  const double lazy_gap = 1.0 / (s.c_1 + s.c_mu) / nd / 10.0;
  update_eigensystem(static_cast<double>(s.generation - s.eigen_generation) > lazy_gap);
}

// Box-constraint handling of the reference Matlab CMA-ES: weights start at
// about twice the typical fitness spread per unit variance once the mean
// leaves the box and grow while the mean keeps moving away from it.
std::vector<double> CmaEs::penalized(std::span<const std::vector<double>> samples, std::span<const double> costs) {
  CmaState& s = state_;
  BoundPenalty& b = bound_;
  const auto n = static_cast<Eigen::Index>(dimension());
  const double nd = static_cast<double>(n);
  if (b.weights.size() != n) {
    b.weights = Eigen::VectorXd::Zero(n);
    b.previous_mean = s.mean;
  }
  const Eigen::VectorXd diag_c = s.C.diagonal();
  const double mean_diag = diag_c.mean();

  std::vector<double> sorted(costs.begin(), costs.end());
  std::sort(sorted.begin(), sorted.end());
  auto percentile = [&](double p) {
    const double at = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(at));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (at - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  double spread = (percentile(75) - percentile(25)) / nd / mean_diag / (s.sigma * s.sigma);
  if (!std::isfinite(spread)) {
    spread = 0.0;
  } else if (spread == 0.0) {
    for (double v : b.spread) {
      if (v > 0.0 && (spread == 0.0 || v < spread)) spread = v;
    }
  } else if (!b.valid) {
    b.spread.clear();
    b.valid = true;
  }
  b.spread.push_back(spread);
  while (static_cast<double>(b.spread.size()) > 20.0 + 3.0 * nd / static_cast<double>(s.lambda)) b.spread.pop_front();

  Eigen::VectorXd outside(n);  // mean minus its projection onto the box
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    outside[i] = s.mean[i] - std::clamp(s.mean[i], lower_[k], upper_[k]);
  }
  if ((outside.array() != 0.0).any()) {
    if (b.initial) {
      std::vector<double> h(b.spread.begin(), b.spread.end());
      std::nth_element(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(h.size() / 2), h.end());
      double median = h[h.size() / 2];
      if (h.size() % 2 == 0) median = 0.5 * (median + *std::max_element(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(h.size() / 2)));
      for (Eigen::Index i = 0; i < n; ++i) b.weights[i] = 2.0002 * median / (diag_c[i] / mean_diag);
      if (b.valid && s.generation > 2) b.initial = false;
    }
    const double grow = std::pow(1.2, std::min(1.0, s.mu_eff / 10.0 / nd));
    const double reach = 3.0 * std::max(1.0, std::sqrt(nd) / s.mu_eff) * s.sigma;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool far = outside[i] != 0.0 && std::abs(outside[i]) > reach * std::sqrt(diag_c[i]);
      const bool leaving = (outside[i] > 0.0) == (s.mean[i] - b.previous_mean[i] > 0.0);
      if (far && leaving) b.weights[i] *= grow;
    }
  }
  b.previous_mean = s.mean;

  std::vector<double> ranked(costs.begin(), costs.end());
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = samples[r][static_cast<std::size_t>(i)] - last_raw_[r][static_cast<std::size_t>(i)];
      p += b.weights[i] * d * d;
    }
    ranked[r] += p;
  }
  return ranked;
}

void CmaEs::update_eigensystem(bool force) {
  CmaState& s = state_;
  if (!force) return;
  s.eigen_generation = s.generation;
  const auto n = s.C.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.C);
  bool ok = eig.info() == Eigen::Success && eig.eigenvalues().allFinite() && eig.eigenvectors().allFinite();
  if (ok) {
    Eigen::VectorXd values = eig.eigenvalues();
    const double largest = values.maxCoeff();
    ok = largest > 0.0;
    if (ok) {
      const double floor = std::max(largest * 1e-14, std::numeric_limits<double>::min());
      if (values.minCoeff() <= floor) {
        values = values.cwiseMax(floor);
        s.C = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
        s.C = 0.5 * (s.C + s.C.transpose());
      }
      s.B = eig.eigenvectors();
      s.D = values.cwiseSqrt();
    }
  }
  if (!ok) {
    std::fprintf(stderr, "pipesizer: CMA-ES eigendecomposition failed; covariance reset to identity\n");
    s.C = Eigen::MatrixXd::Identity(n, n);
    s.B = s.C;
    s.D = Eigen::VectorXd::Ones(n);
    s.p_c.setZero();
    ++s.covariance_resets;
  }
}

CmaResult run_cmaes(Objective& objective, const CmaOptions& options, std::uint64_t seed, const BestHook& on_best) {
  const auto started = std::chrono::steady_clock::now();
  CmaEs cma(objective.lower(), objective.upper(), options, seed);
  const std::size_t lambda = cma.state().lambda;
  if (options.budget < lambda) throw PreconditionError("budget must cover at least one generation");

  CmaResult result;
  RunRecord& record = result.record;
  record.algorithm = "cmaes";
  record.seed = seed;
  RunTracker tracker(record);

  const std::size_t n = objective.dimension();
  const std::uint64_t window = 10 * ((n + lambda - 1) / lambda);
  std::deque<double> history;  // best-ever or generation-best total, per generation
  record.termination = "budget";

  while (true) {
    const std::uint64_t used = objective.evaluations();
    if (used >= options.budget) break;
    auto samples = cma.ask();
    const bool partial = options.budget - used < lambda;
    if (partial) samples.resize(static_cast<std::size_t>(options.budget - used));

    const std::uint64_t first_index = objective.evaluations() + 1;
    const auto costs = objective.evaluate_batch(samples);
    std::vector<double> totals(costs.size());
    bool improved = false;
    std::size_t generation_best = 0;
    for (std::size_t i = 0; i < costs.size(); ++i) {
      totals[i] = costs[i].total;
      improved |= tracker.observe(samples[i], costs[i], first_index + i);
      if (costs[i].total < costs[generation_best].total) generation_best = i;
    }
    if (improved && on_best) on_best(samples[generation_best], costs[generation_best]);
    if (partial) break;
    cma.tell(samples, totals);

    if (options.stagnation_stop) {
      const bool range_rule = options.stagnation_rule == StagnationRule::kGenerationRange;
      history.push_back(range_rule ? totals[generation_best] : record.best.total);
      if (history.size() > window) {
        history.pop_front();
        const double spread = range_rule
                                  ? *std::max_element(history.begin(), history.end()) -
                                        *std::min_element(history.begin(), history.end())
                                  : history.front() - record.best.total;
        if (spread < options.tol_fun * std::abs(record.best.total)) {
          record.termination = "stagnation";
          break;
        }
      }
    }
  }

  record.evaluations = objective.evaluations();
  record.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.state = cma.state();
  return result;
}

}  // namespace pipesizer
