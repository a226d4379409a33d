#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "debtav/errors.hpp"
#include "debtav/simulation.hpp"
#include "fixtures.hpp"

namespace debtav {
namespace {

using test::sure;

TEST(SampleAgents, DegeneratePopulationReturnsTheMean) {
  PopulationDistribution pop;
  pop.alpha.sd = pop.delta.sd = pop.gamma.sd = pop.lambda.sd = 1e-12;
  for (const PreferenceParams& p : sample_agents(pop, 0.1, 50, 3)) {
    EXPECT_NEAR(p.alpha, 0.3, 1e-9);
    EXPECT_NEAR(p.delta, 0.02, 1e-9);
    EXPECT_NEAR(p.gamma, 1.05, 1e-9);
    EXPECT_NEAR(p.lambda, 1.5, 1e-9);
    EXPECT_EQ(p.mu, 0.1);
  }
}

TEST(SampleAgents, SampleMeanMatchesPopulation) {
  const PopulationDistribution pop;
  const auto agents = sample_agents(pop, 0.1, 1000, 17);
  double sum = 0.0;
  for (const auto& a : agents) sum += a.gamma;
  EXPECT_NEAR(sum / 1000.0, 1.05, 3 * 0.03 / std::sqrt(1000.0));
}

TEST(SampleAgents, PrefixStableAndDeterministic) {
  const PopulationDistribution pop;
  const auto small = sample_agents(pop, 0.1, 5, 2);
  const auto big = sample_agents(pop, 0.1, 20, 2);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(small[i].as_array(), big[i].as_array());
  const auto other = sample_agents(pop, 0.1, 5, 3);
  EXPECT_NE(small[0].gamma, other[0].gamma);
}

TEST(SampleAgents, RedrawsOutsideTheDomain) {
  PopulationDistribution pop;
  pop.lambda = {0.05, 1.0};  // about half the raw draws are negative
  pop.alpha = {0.9, 0.5};
  for (const PreferenceParams& p : sample_agents(pop, 0.1, 500, 4)) {
    EXPECT_GT(p.lambda, 0.0);
    EXPECT_LT(p.alpha, 0.999);
    EXPECT_GT(p.alpha, -5.0);
  }
  EXPECT_THROW(sample_agents(pop, 0.0, 5, 1), ValidationError);
  EXPECT_THROW(sample_agents(pop, 0.1, 0, 1), ValidationError);
}

TEST(SimulateChoices, IndifferenceRowsAreFairCoins) {
  MPLSpec spec{"m", "", {}};
  for (int i = 0; i < 10000; ++i) spec.rows.push_back({sure(1.0), sure(1.0), ""});
  const MplCatalog cat({spec});
  const auto ch = simulate_choices("s", {0.3, 0.02, 1.05, 1.5, 0.1}, cat, {}, 5);
  int b = 0;
  for (const auto& c : ch) b += c.chosen;
  EXPECT_GT(b, 4800);
  EXPECT_LT(b, 5200);
}

TEST(SimulateChoices, DrawFrequencyMatchesProbability) {
  const PreferenceParams p{0.0, 0.0, 1.0, 1.0, 1.0};
  const Prospect a = sure(0.0), b = sure(std::log(0.3 / 0.7));  // P(B) = 0.3
  MPLSpec spec{"m", "", {}};
  for (int i = 0; i < 10000; ++i) spec.rows.push_back({a, b, ""});
  const auto ch = simulate_choices("s", p, MplCatalog({spec}), {}, 6);
  int n = 0;
  for (const auto& c : ch) n += c.chosen;
  EXPECT_NEAR(n / 10000.0, 0.3, 3 * std::sqrt(0.21 / 10000));
}

TEST(SimulateChoices, VanishingNoiseIsDeterministic) {
  const MplCatalog cat = reference_design(1);
  const PreferenceParams p{0.3, 0.02, 1.05, 1.5, 1e-9};
  const auto ch = simulate_choices("s", p, cat, {}, 1);
  std::size_t i = 0;
  for (const MPLSpec& m : cat.mpls()) {
    for (const MplRow& row : m.rows) {
      const double du = prospect_utility(row.option_b, p, {}) - prospect_utility(row.option_a, p, {});
      if (std::abs(du) > 1e-6) EXPECT_EQ(ch[i].chosen, du > 0 ? 1 : 0);
      ++i;
    }
  }
}

TEST(SimulatePopulation, SeedReproducible) {
  const MplCatalog cat = reference_design(1);
  const PopulationDistribution pop;
  const auto a = simulate_population(pop, 0.1, 3, cat, {}, 11);
  const auto b = simulate_population(pop, 0.1, 3, cat, {}, 11);
  std::ostringstream ta, tb;
  write_truth(ta, a);
  write_truth(tb, b);
  EXPECT_EQ(ta.str(), tb.str());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a[i].choices, b[i].choices);
  EXPECT_EQ(a[2].subject_id, "sim0003");
  EXPECT_EQ(synthetic_subject_id(41, 12000), "sim00042");
}

TEST(ReferenceDesign, ShapeAndMonotoneRows) {
  const MplCatalog one = reference_design(1);
  EXPECT_EQ(one.mpls().size(), 7u);
  EXPECT_EQ(one.total_rows(), 90u);
  const MplCatalog three = reference_design(3);
  EXPECT_EQ(three.total_rows(), 270u);
  // Utility differences move in one direction along every list, replicates included.
  const PreferenceParams p{0.3, 0.02, 1.05, 1.5, 0.1};
  for (const MPLSpec& m : three.mpls()) {
    int up = 0, down = 0;
    double prev = 0.0;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      const MplRow& row = m.rows[r];
      const double du = prospect_utility(row.option_b, p, {}) - prospect_utility(row.option_a, p, {});
      if (r > 0) {
        up += du > prev;
        down += du < prev;
      }
      prev = du;
    }
    EXPECT_TRUE(up == 0 || down == 0) << m.id;
    EXPECT_GT(up + down, 0) << m.id;
  }
  EXPECT_THROW(reference_design(0), ValidationError);
}

TEST(Grid, Parsing) {
  const auto g = parse_grid("0.001:1:log25");
  ASSERT_EQ(g.size(), 25u);
  EXPECT_EQ(g.front(), 0.001);
  EXPECT_EQ(g.back(), 1.0);
  for (std::size_t i = 2; i < g.size(); ++i) {
    EXPECT_NEAR(std::log(g[i] / g[i - 1]), std::log(g[1] / g[0]), 1e-12);
  }
  EXPECT_EQ(parse_grid("0,0.0139,1"), (std::vector<double>{0, 0.0139, 1}));
  EXPECT_EQ(parse_grid("0:1:lin3"), (std::vector<double>{0, 0.5, 1}));
  EXPECT_EQ(default_shrinkage_grid().size(), 25u);
  EXPECT_THROW(parse_grid("0:1:log5"), ValidationError);
  EXPECT_THROW(parse_grid("1:0:lin5"), ValidationError);
  EXPECT_THROW(parse_grid("a,b"), ValidationError);
  EXPECT_THROW(parse_grid("-1"), ValidationError);
  EXPECT_THROW(parse_grid("0:1:cube3"), ValidationError);
}

CalibrationConfig small_calibration(std::size_t agents) {
  CalibrationConfig cfg;
  cfg.agents = agents;
  cfg.seed = 3;
  cfg.mu = 0.1;
  return cfg;
}

TEST(Calibration, SingletonGridReturnsItsValue) {
  const MplCatalog cat = reference_design(1);
  const CalibrationResult r = calibrate_shrinkage(cat, {0.0139}, small_calibration(8));
  ASSERT_EQ(r.table.size(), 1u);
  ASSERT_TRUE(r.best_s.has_value());
  EXPECT_EQ(*r.best_s, 0.0139);
  EXPECT_TRUE(std::isfinite(r.table[0].mse_gamma));
}

TEST(Calibration, ArgminAndTieBreak) {
  const MplCatalog cat = reference_design(1);
  const CalibrationConfig cfg = small_calibration(10);
  const CalibrationResult r = calibrate_shrinkage(cat, {0.0, 0.01, 0.1, 100.0}, cfg);
  ASSERT_TRUE(r.best_s.has_value());
  const CalibrationRow* best = nullptr;
  for (const auto& row : r.table) {
    if (row.s == *r.best_s) best = &row;
  }
  ASSERT_NE(best, nullptr);
  for (const auto& row : r.table) {
    if (!row.disqualified && row.estimated > 0) EXPECT_GE(row.mse_gamma, best->mse_gamma);
  }
  // The very large exponent is either disqualified or no better than the argmin.
  const CalibrationRow& large = r.table.back();
  EXPECT_TRUE(large.disqualified || large.mse_gamma >= best->mse_gamma);
}

TEST(Calibration, AllDisqualifiedGivesNoAnswer) {
  const MplCatalog cat = reference_design(1);
  CalibrationConfig cfg = small_calibration(4);
  cfg.max_failure_share = -1.0;  // any count exceeds a negative share
  const CalibrationResult r = calibrate_shrinkage(cat, {0.0}, cfg);
  EXPECT_FALSE(r.best_s.has_value());
  EXPECT_THROW(calibrate_shrinkage(cat, {}, cfg), ValidationError);
}

TEST(Calibration, TightPriorCollapsesEstimatesOntoTheMean) {
  // Agents drawn from the usual population, estimated under a prior so tight
  // that the weighted likelihood pins gamma-hat to its mean: over the agents
  // that estimate cleanly, the MSE equals the spread of their true gammas.
  const MplCatalog cat = reference_design(1);
  CalibrationConfig cfg = small_calibration(12);
  const auto agents = simulate_population(cfg.population, cfg.mu, cfg.agents, cat, {}, cfg.seed);
  HierarchicalConfig hc = cfg.estimation;
  hc.population = cfg.population;
  hc.population.alpha.sd = hc.population.delta.sd = 1e-4;
  hc.population.gamma.sd = hc.population.lambda.sd = 1e-4;
  hc.shrinkage = 1.0;
  const double mean = hc.population.gamma.mean;
  double mse = 0.0, var = 0.0;
  std::size_t used = 0;
  for (const auto& a : agents) {
    const SubjectEstimate e = estimate_subject(a.subject_id, a.choices, cat, hc);
    if (e.status != EstimateStatus::consistent) continue;
    EXPECT_NEAR(e.params.gamma, mean, 1e-3) << a.subject_id;
    mse += std::pow(e.params.gamma - a.true_params.gamma, 2);
    var += std::pow(a.true_params.gamma - mean, 2);
    ++used;
  }
  ASSERT_GE(used, 3u);
  EXPECT_NEAR(mse, var, 0.1 * var);

  // The same grid point is evaluable through the calibration driver.
  CalibrationConfig tight = cfg;
  tight.population = hc.population;
  const CalibrationResult r = calibrate_shrinkage(agents, cat, {1.0}, tight);
  EXPECT_EQ(r.table[0].estimated, used);
}

}  // namespace
}  // namespace debtav
