#include "pipesizer/hydraulics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "pipesizer/errors.hpp"

namespace pipesizer {

namespace {

// Dense Cholesky wins below this many junctions.
constexpr std::size_t kDenseLimit = 150;
constexpr double kInitialVelocity = 0.3048;  // m/s, the customary 1 ft/s start

double resistance(double length, double roughness, double diameter) {
  return kHazenWilliamsSi * length /
         (std::pow(roughness, kHazenWilliamsFlowExponent) *
          std::pow(diameter, kHazenWilliamsDiameterExponent));
}

}  // namespace

double head_loss(double length, double roughness, double diameter, double flow) {
  if (!(diameter > 0.0)) {
    throw StructuralError(fmt::format("head loss needs a positive diameter, got {}", diameter));
  }
  if (flow == 0.0) return 0.0;
  const double h = resistance(length, roughness, diameter) *
                   std::pow(std::abs(flow), kHazenWilliamsFlowExponent);
  return flow > 0.0 ? h : -h;
}

double head_loss(const Pipe& pipe, double installed_diameter, double flow) {
  return head_loss(pipe.length, pipe.roughness, installed_diameter, flow);
}

struct HydraulicSolver::Impl {
  PipeNetwork network;
  SolverOptions options;
  std::vector<std::ptrdiff_t> junction_of;  // node -> junction row, -1 for reservoirs
  std::vector<std::size_t> junction_nodes;
  std::vector<double> demand;  // per junction
  double small_flow_power = 0.0;

  struct Arc {
    std::size_t pipe;
    bool duplicate;  // carries the decision diameter
  };
  std::vector<Arc> arcs;

  Impl(const PipeNetwork& net, SolverOptions opts) : network(net), options(opts) {
    junction_of.assign(network.node_count(), -1);
    for (std::size_t i = 0; i < network.node_count(); ++i) {
      if (network.node(i).is_reservoir()) continue;
      junction_of[i] = static_cast<std::ptrdiff_t>(junction_nodes.size());
      junction_nodes.push_back(i);
      demand.push_back(network.node(i).demand);
    }
    for (std::size_t p = 0; p < network.pipe_count(); ++p) {
      const Pipe& pipe = network.pipe(p);
      if (pipe.existing_diameter) arcs.push_back({p, false});
      if (pipe.decision_index) arcs.push_back({p, true});
    }
    small_flow_power = std::pow(options.small_flow, kHazenWilliamsFlowExponent - 1.0);
  }

  HydraulicState solve(const DesignVector& design) const;
};

HydraulicState HydraulicSolver::Impl::solve(const DesignVector& design) const {
  if (design.size() != network.decision_count()) {
    throw StructuralError(fmt::format("design has {} values but the network has {} decision pipes",
                                      design.size(), network.decision_count()));
  }
  const std::size_t n = junction_nodes.size();

  // Active arcs and their resistances.
  struct ActiveArc {
    std::size_t arc;
    std::size_t from, to;
    double r;
    double q;
  };
  std::vector<ActiveArc> active;
  active.reserve(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Pipe& pipe = network.pipe(arcs[a].pipe);
    const double d = arcs[a].duplicate ? design[*pipe.decision_index] : *pipe.existing_diameter;
    if (d < 0.0 || std::isnan(d)) throw OutOfRangeError(fmt::format("negative diameter {} m", d));
    if (d == 0.0) continue;
    const double area = std::numbers::pi * 0.25 * d * d;
    active.push_back({a, pipe.from, pipe.to, resistance(pipe.length, pipe.roughness, d),
                      area * kInitialVelocity});
  }

  // Every junction must still reach a fixed-head node.
  {
    std::vector<std::vector<std::size_t>> adjacency(network.node_count());
    for (const auto& arc : active) {
      adjacency[arc.from].push_back(arc.to);
      adjacency[arc.to].push_back(arc.from);
    }
    std::vector<char> reached(network.node_count(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < network.node_count(); ++i) {
      if (junction_of[i] < 0) {
        reached[i] = 1;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j : adjacency[i]) {
        if (!reached[j]) {
          reached[j] = 1;
          stack.push_back(j);
        }
      }
    }
    for (std::size_t i = 0; i < network.node_count(); ++i) {
      if (!reached[i]) {
        throw StructuralError("junction '" + network.node(i).id + "' is cut off from every reservoir");
      }
    }
  }

  std::vector<double> head(network.node_count(), 0.0);
  for (std::size_t i = 0; i < network.node_count(); ++i) {
    if (junction_of[i] < 0) head[i] = network.node(i).head;
  }

  std::vector<double> p(active.size()), y(active.size());
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  Eigen::VectorXd solution;
  const bool dense = n <= kDenseLimit;
  Eigen::MatrixXd dense_matrix;
  Eigen::SparseMatrix<double> sparse_matrix;
  std::vector<Eigen::Triplet<double>> triplets;
  std::optional<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> sparse_solver;
  if (dense) {
    dense_matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  } else {
    sparse_matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    triplets.reserve(n + 2 * active.size());
  }

  auto mass_residual = [&]() {
    std::vector<double> imbalance(n);
    for (std::size_t j = 0; j < n; ++j) imbalance[j] = -demand[j];
    for (const auto& arc : active) {
      if (junction_of[arc.from] >= 0) imbalance[static_cast<std::size_t>(junction_of[arc.from])] -= arc.q;
      if (junction_of[arc.to] >= 0) imbalance[static_cast<std::size_t>(junction_of[arc.to])] += arc.q;
    }
    double worst = 0.0;
    for (double v : imbalance) worst = std::max(worst, std::abs(v));
    return worst;
  };

  HydraulicState state;
  int polish_left = options.polish_iterations;
  bool converged = false;
  double residual = 0.0;
  for (int iter = 1; iter <= options.max_iterations + options.polish_iterations; ++iter) {
    rhs.setZero();
    if (dense) {
      dense_matrix.setZero();
    } else {
      triplets.clear();
    }
    for (std::size_t j = 0; j < n; ++j) rhs[static_cast<Eigen::Index>(j)] = -demand[j];

    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto& arc = active[k];
      const double aq = std::abs(arc.q);
      double gradient, loss;
      if (aq < options.small_flow) {
        gradient = arc.r * small_flow_power;
        loss = gradient * arc.q;
      } else {
        const double g = arc.r * std::pow(aq, kHazenWilliamsFlowExponent - 1.0);
        loss = g * arc.q;
        gradient = kHazenWilliamsFlowExponent * g;
      }
      p[k] = 1.0 / gradient;
      y[k] = p[k] * loss;
      const double carry = arc.q - y[k];
      const std::ptrdiff_t i = junction_of[arc.from];
      const std::ptrdiff_t j = junction_of[arc.to];
      if (i >= 0) {
        rhs[i] -= carry;
        if (j < 0) rhs[i] += p[k] * head[arc.to];
      }
      if (j >= 0) {
        rhs[j] += carry;
        if (i < 0) rhs[j] += p[k] * head[arc.from];
      }
      if (dense) {
        if (i >= 0) dense_matrix(i, i) += p[k];
        if (j >= 0) dense_matrix(j, j) += p[k];
        if (i >= 0 && j >= 0) {
          dense_matrix(i, j) -= p[k];
          dense_matrix(j, i) -= p[k];
        }
      } else {
        if (i >= 0) triplets.emplace_back(i, i, p[k]);
        if (j >= 0) triplets.emplace_back(j, j, p[k]);
        if (i >= 0 && j >= 0) {
          triplets.emplace_back(std::max(i, j), std::min(i, j), -p[k]);
        }
      }
    }

    if (dense) {
      Eigen::LLT<Eigen::MatrixXd> llt(dense_matrix);
      if (llt.info() != Eigen::Success) {
        throw ConvergenceError("head matrix is not positive definite", residual);
      }
      solution = llt.solve(rhs);
    } else {
      sparse_matrix.setFromTriplets(triplets.begin(), triplets.end());
      if (!sparse_solver) {
        sparse_solver.emplace();
        sparse_solver->analyzePattern(sparse_matrix.selfadjointView<Eigen::Lower>());
      }
      sparse_solver->factorize(sparse_matrix.selfadjointView<Eigen::Lower>());
      if (sparse_solver->info() != Eigen::Success) {
        throw ConvergenceError("head matrix is not positive definite", residual);
      }
      solution = sparse_solver->solve(rhs);
    }
    for (std::size_t j = 0; j < n; ++j) head[junction_nodes[j]] = solution[static_cast<Eigen::Index>(j)];

    double max_change = 0.0, max_flow = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      auto& arc = active[k];
      const double q_new = arc.q - y[k] + p[k] * (head[arc.from] - head[arc.to]);
      max_change = std::max(max_change, std::abs(q_new - arc.q));
      max_flow = std::max(max_flow, std::abs(q_new));
      arc.q = q_new;
    }
    residual = mass_residual();
    if (!std::isfinite(residual) || !std::isfinite(max_change)) {
      throw ConvergenceError("hydraulic iteration diverged", residual);
    }
    state.iterations = iter;

    if (converged) {
      if (--polish_left <= 0) break;
      continue;
    }
    if (max_change / std::max(max_flow, 1e-6) < options.flow_tolerance &&
        residual < options.residual_tolerance) {
      converged = true;
      if (polish_left <= 0) break;
      continue;
    }
    if (iter >= options.max_iterations) {
      throw ConvergenceError(
          fmt::format("no convergence after {} iterations (residual {:.3e})", iter, residual),
          residual);
    }
  }

  state.head = std::move(head);
  state.flow.assign(network.pipe_count(), 0.0);
  state.duplicate_flow.assign(network.pipe_count(), 0.0);
  for (const auto& arc : active) {
    const Arc& a = arcs[arc.arc];
    state.flow[a.pipe] += arc.q;
    if (a.duplicate && network.pipe(a.pipe).existing_diameter) state.duplicate_flow[a.pipe] = arc.q;
  }
  state.residual = residual;
  return state;
}

HydraulicSolver::HydraulicSolver(const PipeNetwork& network, SolverOptions options)
    : impl_(std::make_unique<Impl>(network, options)) {}
HydraulicSolver::~HydraulicSolver() = default;
HydraulicSolver::HydraulicSolver(HydraulicSolver&&) noexcept = default;
HydraulicSolver& HydraulicSolver::operator=(HydraulicSolver&&) noexcept = default;

HydraulicState HydraulicSolver::solve(const DesignVector& design) const { return impl_->solve(design); }
const PipeNetwork& HydraulicSolver::network() const noexcept { return impl_->network; }
const SolverOptions& HydraulicSolver::options() const noexcept { return impl_->options; }

HydraulicState solve_steady_state(const PipeNetwork& network, const DesignVector& design,
                                  const SolverOptions& options) {
  return HydraulicSolver(network, options).solve(design);
}

}  // namespace pipesizer
