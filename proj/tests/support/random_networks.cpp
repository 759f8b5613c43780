#include "random_networks.hpp"

#include <string>

#include "pipesizer/hydraulics.hpp"

namespace pipesizer::testing {

namespace {

DiameterTable test_table(bool with_zero) {
  std::vector<double> sizes{0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6};
  std::vector<double> costs{20, 32, 45, 60, 78, 115, 160, 210};
  if (with_zero) {
    sizes.insert(sizes.begin(), 0.0);
    costs.insert(costs.begin(), 0.0);
  }
  return DiameterTable::tabulated(sizes, costs);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

PipeNetwork random_network(std::mt19937_64& rng, const NetworkShape& shape) {
  const std::size_t junctions = 2 + pick(rng, 11);
  const std::size_t reservoirs = shape.two_reservoirs ? 2 : 1;
  std::vector<Node> nodes;
  for (std::size_t r = 0; r < reservoirs; ++r) {
    Node n;
    n.id = "R" + std::to_string(r + 1);
    n.kind = NodeKind::kReservoir;
    n.head = uniform(rng, 90.0, 130.0);
    nodes.push_back(n);
  }
  for (std::size_t j = 0; j < junctions; ++j) {
    Node n;
    n.id = "J" + std::to_string(j + 1);
    n.elevation = uniform(rng, 0.0, 30.0);
    n.demand = uniform(rng, 0.0, 0.05);
    nodes.push_back(n);
  }

  std::vector<Pipe> pipes;
  auto add_pipe = [&](std::size_t a, std::size_t b) {
    Pipe p;
    p.id = "P" + std::to_string(pipes.size() + 1);
    p.from = a;
    p.to = b;
    p.length = uniform(rng, 100.0, 2000.0);
    p.roughness = uniform(rng, 80.0, 140.0);
    if (shape.duplicates) p.existing_diameter = uniform(rng, 0.1, 0.4);
    p.decision_index = pipes.size();
    pipes.push_back(p);
  };
  // Spanning tree rooted at the first reservoir; the second one hangs off a junction.
  for (std::size_t j = 0; j < junctions; ++j) {
    const std::size_t node = reservoirs + j;
    const std::size_t parent = j == 0 ? 0 : (pick(rng, 3) == 0 ? 0 : reservoirs + pick(rng, j));
    add_pipe(parent, node);
  }
  if (shape.two_reservoirs) add_pipe(reservoirs + pick(rng, junctions), 1);
  if (shape.loops) {
    const std::size_t chords = 1 + pick(rng, 4);
    for (std::size_t c = 0; c < chords; ++c) {
      const std::size_t a = reservoirs + pick(rng, junctions);
      std::size_t b = reservoirs + pick(rng, junctions);
      if (a == b) b = 0;
      add_pipe(a, b);
    }
  }
  return PipeNetwork("random", nodes, pipes, test_table(shape.duplicates), UnitSystem::si());
}

DesignVector random_design(std::mt19937_64& rng, const PipeNetwork& network) {
  const auto sizes = network.diameter_table().sizes();
  DesignVector d;
  d.flavor = DesignFlavor::kCommercial;
  for (std::size_t k = 0; k < network.decision_count(); ++k) d.diameters.push_back(sizes[pick(rng, sizes.size())]);
  return d;
}

PipeNetwork with_min_heads(std::mt19937_64& rng, const PipeNetwork& network, bool impossible) {
  const HydraulicState top = solve_steady_state(network, max_design(network));
  std::vector<Node> nodes(network.nodes().begin(), network.nodes().end());
  std::vector<std::size_t> junctions;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].is_reservoir()) continue;
    nodes[i].min_head = top.head[i] - uniform(rng, 0.05, 4.0);
    junctions.push_back(i);
  }
  if (impossible) {
    const std::size_t i = junctions[pick(rng, junctions.size())];
    nodes[i].min_head = top.head[i] + uniform(rng, 0.5, 3.0);
  }
  return PipeNetwork(network.name(), nodes, std::vector<Pipe>(network.pipes().begin(), network.pipes().end()),
                     network.diameter_table(), network.units(), network.settings());
}

PipeNetwork random_star(std::mt19937_64& rng, std::size_t count) {
  const DiameterTable table = DiameterTable::tabulated({0.15, 0.2, 0.3}, {30, 45, 80});
  std::vector<Node> nodes;
  Node r;
  r.id = "R";
  r.kind = NodeKind::kReservoir;
  r.head = 100.0;
  nodes.push_back(r);
  std::vector<Pipe> pipes;
  for (std::size_t k = 0; k < count; ++k) {
    Node j;
    j.id = "J" + std::to_string(k + 1);
    j.demand = uniform(rng, 0.01, 0.06);
    Pipe p;
    p.id = "P" + std::to_string(k + 1);
    p.from = 0;
    p.to = k + 1;
    p.length = uniform(rng, 300.0, 3000.0);
    p.roughness = 120.0;
    p.decision_index = k;
    // Floor somewhere between the heads the smallest and largest sizes deliver,
    // sometimes above what even the largest reaches.
    const double lo = 100.0 - head_loss(p.length, p.roughness, table.min(), j.demand);
    const double hi = 100.0 - head_loss(p.length, p.roughness, table.max(), j.demand);
    j.min_head = uniform(rng, lo - 0.5, hi + 0.3);
    nodes.push_back(j);
    pipes.push_back(p);
  }
  return PipeNetwork("star", nodes, pipes, table, UnitSystem::si());
}

}  // namespace pipesizer::testing
