#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pipesizer/errors.hpp"
#include "pipesizer/hybrid.hpp"
#include "pipesizer/inp.hpp"

namespace pipesizer {
namespace {

HybridConfig small_config(const PipeNetwork& net) {
  HybridConfig c = recommended_hybrid_config(net);
  c.lambda = 40;
  c.budget = 20000;
  c.threads = 1;
  return c;
}

TEST(Hybrid, ShortNytpRunIsFeasibleAndCommercial) {
  const PipeNetwork nytp = bundled_network("nytp");
  const RunRecord r = run_hybrid(nytp, small_config(nytp), 1);
  ASSERT_TRUE(r.best_feasible);
  ASSERT_TRUE(r.best_feasible_x);
  EXPECT_EQ(r.best_feasible->sum_pv, 0.0);
  EXPECT_LT(r.best_feasible->total, 45e6);
  EXPECT_LE(r.evaluations, 20000u);
  DesignVector d;
  for (double v : *r.best_feasible_x) d.diameters.push_back(v * kMetresPerInch);
  EXPECT_TRUE(is_commercial(d.diameters, nytp.diameter_table()));
  for (std::size_t i = 1; i < r.curve.size(); ++i) EXPECT_LE(r.curve[i].cost, r.curve[i - 1].cost);
}

TEST(Hybrid, Deterministic) {
  const PipeNetwork nytp = bundled_network("nytp");
  HybridConfig c = small_config(nytp);
  c.budget = 8000;
  const RunRecord a = run_hybrid(nytp, c, 7);
  c.threads = 3;
  const RunRecord b = run_hybrid(nytp, c, 7);
  EXPECT_EQ(a.best_x, b.best_x);
  EXPECT_EQ(a.best_feasible_x, b.best_feasible_x);
  EXPECT_EQ(a.evaluations, b.evaluations);
}

TEST(Hybrid, PhasesOnlyAddWork) {
  const PipeNetwork nytp = bundled_network("nytp");
  HybridConfig c = small_config(nytp);
  c.phases = HybridPhases::kCmaUpward;
  const RunRecord up = run_hybrid(nytp, c, 3);
  c.phases = HybridPhases::kFull;
  const RunRecord full = run_hybrid(nytp, c, 3);
  ASSERT_TRUE(up.best_feasible);
  ASSERT_TRUE(full.best_feasible);
  EXPECT_LE(full.best_feasible->total, up.best_feasible->total);
}

TEST(Hybrid, PhiResolution) {
  const PipeNetwork nytp = bundled_network("nytp");
  HybridConfig c;
  EXPECT_DOUBLE_EQ(resolve_phi(nytp, c), 46365120.0);
  EXPECT_DOUBLE_EQ(resolve_phi(bundled_network("nytp2"), c), 2 * 46365120.0);
  c.phi = 5.0;
  EXPECT_DOUBLE_EQ(resolve_phi(nytp, c), 5.0);
}

TEST(Hybrid, RejectsTinyBudget) {
  const PipeNetwork nytp = bundled_network("nytp");
  HybridConfig c = small_config(nytp);
  c.budget = 100;
  EXPECT_THROW(run_hybrid(nytp, c, 1), PreconditionError);
}

TEST(Suite, StatsAndCsv) {
  auto fake = [](double cost, bool feasible) {
    return [=](std::uint64_t seed) {
      RunRecord r;
      r.seed = seed;
      r.best.total = cost + static_cast<double>(seed);
      if (feasible) {
        r.best_feasible = r.best;
        r.best_feasible_x = std::vector<double>{1.0};
      }
      r.evaluations_to_best = 10 * seed;
      r.runtime_s = 1.5;
      return r;
    };
  };
  SuiteOptions o;
  o.target = 100.0;
  o.threads = 2;
  const SuiteResult s = run_suite({{"good", fake(100.0, true)}, {"bad", fake(50.0, false)}}, {1, 2, 9000}, o);
  ASSERT_EQ(s.rows.size(), 6u);
  EXPECT_EQ(s.rows[0].config_id, "good");
  EXPECT_EQ(s.rows[2].record.seed, 9000u);
  EXPECT_NEAR(s.stats[0].success_rate, 2.0 / 3.0, 1e-12);
  EXPECT_EQ(s.stats[0].feasible_runs, 3u);
  EXPECT_DOUBLE_EQ(*s.stats[0].best_cost, 101.0);
  EXPECT_EQ(s.stats[1].feasible_runs, 0u);
  EXPECT_FALSE(s.stats[1].best_cost);

  std::ostringstream csv;
  write_summary_csv(csv, s.rows, false);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "config_id,seed,best_cost,feasible,evals_to_best,runtime_s");
  EXPECT_NE(csv.str().find("good,1,101.00,1,10,0.000\n"), std::string::npos);
  EXPECT_NE(csv.str().find("bad,2,52.00,0,20,0.000\n"), std::string::npos);
  std::ostringstream timed;
  write_summary_csv(timed, s.rows, true);
  EXPECT_NE(timed.str().find(",1.500\n"), std::string::npos);
}

TEST(Suite, PropagatesErrors) {
  const SuiteEntry boom{"boom", [](std::uint64_t) -> RunRecord { throw ConvergenceError("x", 1.0); }};
  EXPECT_THROW(run_suite({boom}, {1, 2}), ConvergenceError);
  EXPECT_THROW(run_suite({}, {1}), PreconditionError);
}

}  // namespace
}  // namespace pipesizer
