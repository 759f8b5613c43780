#pragma once

#include <cstdint>
#include <random>

#include "pipesizer/network.hpp"

namespace pipesizer::testing {

struct NetworkShape {
  bool loops = false;       // extra chords on top of a spanning tree
  bool duplicates = false;  // every pipe has an existing tunnel, decision adds a parallel one
  bool two_reservoirs = false;
};

// Connected SI network with every pipe a decision pipe. No minimum heads.
PipeNetwork random_network(std::mt19937_64& rng, const NetworkShape& shape);

// Random commercial design for `network`.
DesignVector random_design(std::mt19937_64& rng, const PipeNetwork& network);

// Same network with minimum heads drawn below the heads of the all-maximum
// design, so that design is feasible while smaller ones often are not.
// With `impossible` one junction gets a floor the all-maximum design misses.
PipeNetwork with_min_heads(std::mt19937_64& rng, const PipeNetwork& network, bool impossible = false);

// Reservoir feeding `pipes` junctions each through its own pipe, three sizes.
// Junction heads depend only on their own pipe, so greedy search reaches
// the cheapest feasible design on the monotone side of the start.
PipeNetwork random_star(std::mt19937_64& rng, std::size_t pipes = 3);

}  // namespace pipesizer::testing
