#include <gtest/gtest.h>

#include <cmath>

#include "pipesizer/errors.hpp"
#include "pipesizer/hydraulics.hpp"
#include "pipesizer/inp.hpp"
#include "properties.hpp"

namespace pipesizer {
namespace {

TEST(HeadLoss, HazenWilliamsOracle) {
  // 10.667 L Q^1.852 / (C^1.852 D^4.871) written out with exp/log.
  const double expected = std::exp(std::log(10.667) + std::log(1000.0) + 1.852 * std::log(0.1) -
                                   1.852 * std::log(130.0) - 4.871 * std::log(0.5));
  EXPECT_NEAR(head_loss(1000, 130, 0.5, 0.1), expected, 1e-12);
  EXPECT_NEAR(head_loss(1000, 130, 0.5, 0.1), 0.5337480673500282, 1e-12);
  EXPECT_NEAR(head_loss(1000, 130, 0.5, 0.2) / head_loss(1000, 130, 0.5, 0.1), 3.61000290984972, 1e-12);
  EXPECT_DOUBLE_EQ(head_loss(1000, 130, 0.5, -0.1), -head_loss(1000, 130, 0.5, 0.1));
  EXPECT_EQ(head_loss(1000, 130, 0.5, 0.0), 0.0);
  EXPECT_THROW(head_loss(1000, 130, 0.0, 0.1), StructuralError);
}

PipeNetwork series() {
  return parse_network(R"([OPTIONS]
Units CMS
[JUNCTIONS]
 1  0  0.05
 2  0  0.02
[RESERVOIRS]
 R  100
[PIPES]
 A  R  1  1000  300  100
 B  1  2  500   200  100
[DESIGN]
Mode       REPLACE
Decision   ALL
Diameters  200 300
UnitCosts  1 2
)");
}

TEST(Solver, SeriesByHand) {
  const PipeNetwork net = series();
  DesignVector d;
  d.diameters = {0.3, 0.2};
  const HydraulicState s = solve_steady_state(net, d);
  EXPECT_NEAR(s.flow[0], 0.07, 1e-9);
  EXPECT_NEAR(s.flow[1], 0.02, 1e-9);
  // 100 - h(A, 0.07) and then - h(B, 0.02), from the closed form.
  EXPECT_NEAR(s.head[*net.find_node("1")], 94.60357390799139, 1e-6);
  EXPECT_NEAR(s.head[*net.find_node("2")], 92.69282886086238, 1e-6);
  EXPECT_EQ(s.head[*net.find_node("R")], 100.0);
  EXPECT_LT(s.residual, 1e-9);
}

TEST(Solver, NytpReferenceDesign) {
  const PipeNetwork nytp = bundled_network("nytp");
  const DesignVector d = load_design_file(PIPESIZER_DATA_DIR "/designs/nytp_maier.txt", nytp);
  const HydraulicState s = solve_steady_state(nytp, d);
  const double ft = kMetresPerFoot;
  auto excess = [&](const char* id) {
    const std::size_t i = *nytp.find_node(id);
    return (s.head[i] - *nytp.node(i).min_head) / ft;
  };
  EXPECT_NEAR(excess("16"), 0.0771, 0.05);
  EXPECT_NEAR(excess("17"), 0.0684, 0.05);
  EXPECT_NEAR(excess("19"), 0.0540, 0.05);
  EXPECT_LT(s.iterations, 20);
}

TEST(Solver, ReplicatedCopiesAreIndependent) {
  const PipeNetwork nytp = bundled_network("nytp");
  const PipeNetwork twin = replicate_network(nytp, 2);
  const DesignVector d = load_design_file(PIPESIZER_DATA_DIR "/designs/nytp_maier.txt", nytp);
  DesignVector dd;
  dd.diameters = d.diameters;
  // Second copy gets a different design; the first must not notice.
  for (std::size_t k = 0; k < 21; ++k) dd.diameters.push_back(k % 3 ? 0.0 : 120 * kMetresPerInch);
  const HydraulicState single = solve_steady_state(nytp, d);
  const HydraulicState both = solve_steady_state(twin, dd);
  for (std::size_t i = 0; i < nytp.node_count(); ++i) {
    const std::string id = nytp.node(i).id;
    const auto j = twin.find_node(nytp.node(i).is_reservoir() ? id : id + "_1");
    ASSERT_TRUE(j) << id;
    EXPECT_NEAR(both.head[*j], single.head[i], 1e-6) << id;
  }
}

TEST(Solver, DisconnectedJunction) {
  const PipeNetwork net = parse_network(R"([OPTIONS]
Units CMS
[JUNCTIONS]
 1  0  0.05
[RESERVOIRS]
 R  100
[PIPES]
 A  R  1  1000  300  100
[DESIGN]
Mode       REPLACE
Decision   ALL
Diameters  0 300
UnitCosts  0 2
)");
  DesignVector d;
  d.diameters = {0.0};
  EXPECT_THROW(solve_steady_state(net, d), StructuralError);
  d.diameters = {0.3};
  EXPECT_NO_THROW(solve_steady_state(net, d));
}

TEST(Solver, DimensionMismatch) {
  DesignVector d;
  d.diameters = {0.3};
  EXPECT_THROW(solve_steady_state(series(), d), StructuralError);
}

TEST(Solver, ResidualProperty) {
  const auto r = testing::check_hydraulic_residuals(11, 150);
  EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
  EXPECT_GE(r.cases, 100u);
}

}  // namespace
}  // namespace pipesizer
