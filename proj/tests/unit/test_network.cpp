#include <gtest/gtest.h>

#include "pipesizer/errors.hpp"
#include "pipesizer/inp.hpp"
#include "pipesizer/network.hpp"

namespace pipesizer {
namespace {

double in(double inches) { return inches * kMetresPerInch; }

TEST(Network, BundledSizes) {
  const PipeNetwork nytp = bundled_network("nytp");
  EXPECT_EQ(nytp.decision_count(), 21u);
  EXPECT_EQ(nytp.node_count(), 20u);
  EXPECT_EQ(nytp.reservoir_count(), 1u);
  EXPECT_EQ(nytp.diameter_table().size(), 16u);

  const PipeNetwork hanoi = bundled_network("hanoi");
  EXPECT_EQ(hanoi.pipe_count(), 34u);
  EXPECT_EQ(hanoi.decision_count(), 34u);
  EXPECT_EQ(hanoi.node_count(), 32u);
  EXPECT_EQ(hanoi.diameter_table().size(), 6u);
}

TEST(Network, SearchSpaceSizes) {
  const PipeNetwork nytp = bundled_network("nytp");
  EXPECT_EQ(format_scientific(search_space_size(nytp)), "1.934e+25");
  EXPECT_EQ(format_scientific(search_space_size(bundled_network("hanoi"))), "2.865e+26");
  EXPECT_EQ(format_scientific(search_space_size(bundled_network("nytp2"))), "3.741e+50");
  const auto one = search_space_size(nytp);
  EXPECT_EQ(search_space_size(replicate_network(nytp, 3)), one * one * one);
  EXPECT_EQ(format_scientific(search_space_size(replicate_network(nytp, 50))), "2.118e+1264");
}

TEST(Network, RoundToCommercial) {
  const PipeNetwork nytp = bundled_network("nytp");
  const DiameterTable& t = nytp.diameter_table();
  EXPECT_NEAR(round_to_commercial(in(99.97), t), in(96), 1e-12);
  EXPECT_NEAR(round_to_commercial(in(118.99), t), in(120), 1e-12);
  // Exact midpoint of 96 and 108 goes up.
  EXPECT_NEAR(round_to_commercial(in(102), t), in(108), 1e-12);
  EXPECT_NEAR(round_to_commercial(in(10), t), 0.0, 1e-12);
  EXPECT_NEAR(round_to_commercial(in(204), t), in(204), 1e-12);
}

TEST(Network, IndexOfAndBracket) {
  const PipeNetwork nytp = bundled_network("nytp");
  const DiameterTable& t = nytp.diameter_table();
  ASSERT_TRUE(t.index_of(in(36)).has_value());
  EXPECT_EQ(*t.index_of(in(36)), 1u);
  EXPECT_FALSE(t.index_of(in(37)).has_value());
  const auto b = t.bracket(in(40));
  EXPECT_EQ(b.lower, 1u);
  EXPECT_EQ(b.upper, 2u);
  EXPECT_THROW(t.bracket(in(205)), OutOfRangeError);
}

TEST(Network, ValidateDesign) {
  const PipeNetwork nytp = bundled_network("nytp");
  DesignVector d = min_design(nytp);
  EXPECT_NO_THROW(validate_design(nytp, d));
  d.diameters.pop_back();
  EXPECT_THROW(validate_design(nytp, d), StructuralError);
  d = max_design(nytp);
  d[3] = in(210);
  EXPECT_THROW(validate_design(nytp, d), OutOfRangeError);
  d = max_design(nytp);
  d.flavor = DesignFlavor::kCommercial;
  d[0] = in(50);
  EXPECT_THROW(validate_design(nytp, d), OutOfRangeError);
}

TEST(Network, UniformDesigns) {
  const PipeNetwork hanoi = bundled_network("hanoi");
  for (double v : max_design(hanoi).diameters) EXPECT_DOUBLE_EQ(v, 1.016);
  for (double v : min_design(hanoi).diameters) EXPECT_DOUBLE_EQ(v, 0.3048);
  EXPECT_TRUE(is_commercial(uniform_design(hanoi, 0.508).diameters, hanoi.diameter_table()));
}

TEST(Network, RejectsBrokenTopology) {
  std::vector<Node> nodes(2);
  nodes[0].id = "R";
  nodes[0].kind = NodeKind::kReservoir;
  nodes[0].head = 10;
  nodes[1].id = "J";
  Pipe p;
  p.id = "P";
  p.from = 0;
  p.to = 1;
  p.length = 100;
  p.roughness = 100;
  p.existing_diameter = 0.2;
  EXPECT_NO_THROW(PipeNetwork("ok", nodes, {p}, {}, UnitSystem::si()));
  Pipe loop = p;
  loop.id = "L";
  loop.to = 0;
  EXPECT_THROW(PipeNetwork("self", nodes, {p, loop}, {}, UnitSystem::si()), StructuralError);
  nodes[0].kind = NodeKind::kJunction;
  EXPECT_THROW(PipeNetwork("dry", nodes, {p}, {}, UnitSystem::si()), StructuralError);
}

}  // namespace
}  // namespace pipesizer
