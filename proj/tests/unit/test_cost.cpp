#include <gtest/gtest.h>

#include <cmath>

#include "pipesizer/cost.hpp"
#include "pipesizer/hydraulics.hpp"
#include "pipesizer/inp.hpp"
#include "properties.hpp"

namespace pipesizer {
namespace {

double in(double inches) { return inches * kMetresPerInch; }

TEST(Cost, HanoiPowerLaw) {
  const PipeNetwork hanoi = bundled_network("hanoi");
  const DiameterTable& t = hanoi.diameter_table();
  // 1.1 * 30^1.5 per metre, 1000 m.
  EXPECT_NEAR(t.unit_cost(0.762) * 1000.0, 180748.44397670485, 1e-6);
  EXPECT_NEAR(t.unit_cost(0.3048), 1.1 * std::pow(12.0, 1.5), 1e-9);
}

TEST(Cost, ReferenceDesigns) {
  const PipeNetwork nytp = bundled_network("nytp");
  const CostBreakdown a =
      total_cost(nytp, load_design_file(PIPESIZER_DATA_DIR "/designs/nytp_maier.txt", nytp), PenaltyConfig::for_network(nytp));
  EXPECT_NEAR(a.pipe_cost, 38637600.0, 1.0);
  EXPECT_EQ(a.sum_pv, 0.0);
  EXPECT_TRUE(a.feasible);
  EXPECT_EQ(a.total, a.pipe_cost);

  const PipeNetwork hanoi = bundled_network("hanoi");
  const CostBreakdown b = total_cost(hanoi, load_design_file(PIPESIZER_DATA_DIR "/designs/hanoi_sedki.txt", hanoi),
                                     PenaltyConfig::for_network(hanoi));
  EXPECT_NEAR(b.pipe_cost, 6081128.0, 2000.0);
  EXPECT_TRUE(b.feasible);
}

TEST(Cost, DiameterViolationShape) {
  const PipeNetwork hanoi_net = bundled_network("hanoi");
  const DiameterTable& hanoi = hanoi_net.diameter_table();
  EXPECT_NEAR(diameter_violation(in(13), hanoi, false), 0.5, 1e-12);
  EXPECT_NEAR(diameter_violation(in(14), hanoi, false), 1.0, 1e-12);
  EXPECT_NEAR(diameter_violation(in(15), hanoi, false), 0.5, 1e-12);
  EXPECT_EQ(diameter_violation(in(16), hanoi, false), 0.0);

  const PipeNetwork nytp_net = bundled_network("nytp");
  const DiameterTable& nytp = nytp_net.diameter_table();
  EXPECT_NEAR(diameter_violation(in(18), nytp, true), 3.0, 1e-12);
  EXPECT_NEAR(diameter_violation(in(9), nytp, true), 1.5, 1e-12);
  // Multiples of 12 below 36 in are not sizes, so they stay penalised.
  EXPECT_NEAR(diameter_violation(in(24), nytp, true), 2.0, 1e-12);
  EXPECT_EQ(diameter_violation(in(36), nytp, true), 0.0);
  EXPECT_NEAR(diameter_violation(in(42), nytp, true), 1.0, 1e-12);
  EXPECT_NEAR(diameter_violation(in(18), nytp, false), 1.0, 1e-12);

  DesignVector d;
  d.diameters = {in(13), in(14), in(16)};
  EXPECT_NEAR(diameter_violation_sum(d, hanoi, false), 1.5, 1e-12);
}

TEST(Cost, DiameterViolationProperty) {
  const auto r = testing::check_diameter_violation(5, 600);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Cost, PressurePenaltyModes) {
  PenaltyConfig c;
  EXPECT_EQ(pressure_penalty(0.0, c), 0.0);
  EXPECT_DOUBLE_EQ(pressure_penalty(2.0, c), 2e7);
  c.mode = PenaltyMode::kSevere;
  EXPECT_DOUBLE_EQ(pressure_penalty(0.01, c), 1e5 + 1e8);
  EXPECT_EQ(pressure_penalty(0.0, c), 0.0);
}

TEST(Cost, Finalize) {
  PenaltyConfig c;
  CostBreakdown b;
  b.pipe_cost = 1000.0;
  b.sum_pv = 2.0;
  finalize(b, c, true);
  EXPECT_DOUBLE_EQ(b.total, 1000.0 + 2e7);
  EXPECT_FALSE(b.feasible);

  b = {};
  b.pipe_cost = 1000.0;
  b.sum_dv = 0.5;
  finalize(b, c, false);
  EXPECT_DOUBLE_EQ(b.total, 1000.0 + 0.5e7);
  c.penalize_diameters = false;
  finalize(b, c, false);
  EXPECT_DOUBLE_EQ(b.total, 1000.0);
  EXPECT_TRUE(b.feasible);

  // Continuous designs may miss by round-off, commercial ones may not.
  b = {};
  b.sum_pv = 5e-7;
  finalize(b, c, false);
  EXPECT_TRUE(b.feasible);
  finalize(b, c, true);
  EXPECT_FALSE(b.feasible);
}

TEST(Cost, StructuralFailureIsCharged) {
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
MinHead    *  90
)");
  DesignVector d;
  d.diameters = {0.0};
  const CostBreakdown b = total_cost(net, d, PenaltyConfig::for_network(net));
  EXPECT_TRUE(b.structural_failure);
  EXPECT_FALSE(b.feasible);
  EXPECT_EQ(b.total, 1e15);
}

TEST(Cost, PressureViolationInNativeUnits) {
  const PipeNetwork nytp = bundled_network("nytp");
  const DesignVector zero = min_design(nytp);
  const HydraulicState s = solve_steady_state(nytp, zero);
  double deficit_m = 0.0;
  for (std::size_t i = 0; i < nytp.node_count(); ++i) {
    if (nytp.node(i).min_head) deficit_m += std::max(0.0, *nytp.node(i).min_head - s.head[i]);
  }
  EXPECT_NEAR(pressure_violation_sum(s, nytp), deficit_m / kMetresPerFoot, 1e-9);
  EXPECT_GT(deficit_m, 0.0);
}

}  // namespace
}  // namespace pipesizer
