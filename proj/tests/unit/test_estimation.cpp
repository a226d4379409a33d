#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <sstream>

#include "debtav/errors.hpp"
#include "debtav/estimation.hpp"
#include "debtav/simulation.hpp"
#include "fixtures.hpp"

namespace debtav {
namespace {

// ln(1 + e^x) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

using test::rel_err;
using test::sure;

// Direct evaluation of the weighted likelihood from its definition.
double oracle_loglik(const PreferenceParams& p, const std::vector<ChoiceRecord>& choices,
                     const MplCatalog& catalog, const HierarchicalConfig& hc) {
  const double w = std::pow(std::exp(hc.population.log_density(p)), hc.shrinkage);
  double total = 0.0;
  for (const ChoiceRecord& c : choices) {
    const MplRow& row = catalog.at(c.mpl_id).rows[c.row_index];
    const double F = choice_probability(row.option_a, row.option_b, p, hc.utility);
    total += c.chosen ? std::log(F * w) : std::log(1.0 - F * w);
  }
  return total;
}

MplCatalog single_row(const Prospect& a, const Prospect& b, std::size_t copies = 1) {
  MPLSpec spec{"m", "", {}};
  for (std::size_t i = 0; i < copies; ++i) spec.rows.push_back({a, b, ""});
  return MplCatalog({spec});
}

std::vector<ChoiceRecord> records(const std::vector<int>& chosen) {
  std::vector<ChoiceRecord> out;
  for (std::size_t i = 0; i < chosen.size(); ++i) out.push_back({"s", "m", i, chosen[i]});
  return out;
}

TEST(WeightedPrior, LimitsAndProduct) {
  const PopulationDistribution pop;
  const PreferenceParams at_mean = pop.mean_params(0.1);
  EXPECT_EQ(weighted_prior(at_mean, pop, 0.0), 1.0);
  const double inv = 1.0 / std::sqrt(2 * std::numbers::pi);
  const double expected = (inv / 0.15) * (inv / 0.01) * (inv / 0.03) * (inv / 0.3);
  EXPECT_LT(rel_err(weighted_prior(at_mean, pop, 1.0), expected), 1e-12);
  EXPECT_LT(rel_err(weighted_prior(at_mean, pop, 0.5), std::sqrt(expected)), 1e-12);
  PreferenceParams off = at_mean;
  off.gamma += 0.03;  // one sd away
  EXPECT_LT(rel_err(weighted_prior(off, pop, 1.0), expected * std::exp(-0.5)), 1e-12);
}

TEST(HierarchicalLoglik, IndifferentSingleChoice) {
  HierarchicalConfig hc;
  const MplCatalog cat = single_row(sure(1.0), sure(1.0));
  EXPECT_NEAR(hierarchical_loglik(hc.population.mean_params(1.0), records({1}), cat, hc),
              std::log(0.5), 1e-14);
}

TEST(HierarchicalLoglik, TwoChoiceExample) {
  HierarchicalConfig hc;
  PreferenceParams p{0.0, 0.02, 1.0, 1.0, 1.0};
  const MplCatalog cat = single_row(sure(0.0), sure(std::log(3.0)), 2);
  EXPECT_NEAR(hierarchical_loglik(p, records({1, 0}), cat, hc), std::log(0.75) + std::log(0.25),
              1e-12);
}

TEST(HierarchicalLoglik, InfeasibleWeightGivesMinusInfinity) {
  HierarchicalConfig hc;
  hc.shrinkage = 1.0;  // w at the mean is about 2e3
  const PreferenceParams p = hc.population.mean_params(1.0);
  const MplCatalog cat = single_row(sure(1.0), sure(1.0));
  EXPECT_EQ(hierarchical_loglik(p, records({0}), cat, hc), -std::numeric_limits<double>::infinity());
  EXPECT_TRUE(std::isfinite(hierarchical_loglik(p, records({1}), cat, hc)));
}

TEST(HierarchicalLoglik, MatchesDefinitionAndReducesAtZeroShrinkage) {
  Rng rng(21);
  const MplCatalog cat = reference_design(1);
  for (int f = 0; f < 1000; ++f) {
    HierarchicalConfig hc;
    const PreferenceParams p = test::random_params(rng);
    std::vector<ChoiceRecord> ch;
    for (const MPLSpec& m : cat.mpls()) {
      for (std::size_t r = 0; r < m.rows.size(); ++r) {
        if (rng.uniform() < 0.3) ch.push_back({"s", m.id, r, rng.bernoulli(0.5) ? 1 : 0});
      }
    }
    double plain = 0.0;
    for (const ChoiceRecord& c : ch) {
      const MplRow& row = cat.at(c.mpl_id).rows[c.row_index];
      const double xi = (prospect_utility(row.option_b, p, hc.utility) -
                         prospect_utility(row.option_a, p, hc.utility)) / p.mu;
      plain += c.chosen ? -softplus(-xi) : -softplus(xi);
    }
    const double got = hierarchical_loglik(p, ch, cat, hc);
    EXPECT_LT(rel_err(got, plain, 1e-12), 1e-12) << f;
    hc.shrinkage = 0.01 * rng.uniform();
    const double oracle = oracle_loglik(p, ch, cat, hc);
    const double h = hierarchical_loglik(p, ch, cat, hc);
    if (std::isfinite(oracle)) {
      EXPECT_LT(rel_err(h, oracle, 1e-9), 1e-9) << f;
    }
  }
}

TEST(HierarchicalLoglik, GradientMatchesFiniteDifferences) {
  Rng rng(22);
  const MplCatalog cat = reference_design(1);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 100; ++trial) {
    HierarchicalConfig hc;
    const double shrink[] = {0.0, 0.001, 0.01, 0.05};
    hc.shrinkage = shrink[trial % 4];
    const PreferenceParams p = test::random_params(rng);
    std::vector<ChoiceRecord> ch =
        simulate_choices("s", p, cat, hc.utility, static_cast<std::uint64_t>(trial));
    SubjectLikelihood like(ch, cat);
    std::array<double, 5> g{};
    const double v = like.log_likelihood(p, hc, g);
    if (!std::isfinite(v)) continue;
    ++checked;
    const auto theta = p.as_array();
    for (std::size_t k = 0; k < 5; ++k) {
      const double h = 1e-3 * std::max(1.0, std::abs(theta[k]));
      const double fd = test::derivative(
          [&](double t) {
            auto x = theta;
            x[k] += t;
            const double v = like.log_likelihood(PreferenceParams::from_array(x), hc);
            return v;
          },
          h);
      EXPECT_LT(rel_err(g[k], fd, 1e-4), 1e-5) << "param " << k << " trial " << trial;
    }
  }
  EXPECT_EQ(checked, 100);
}

TEST(HierarchicalLoglik, OrderInvariant) {
  const MplCatalog cat = reference_design(1);
  HierarchicalConfig hc;
  hc.shrinkage = 0.01;
  const PreferenceParams p{0.25, 0.015, 1.04, 1.4, 0.3};
  auto ch = simulate_choices("s", p, cat, hc.utility, 3);
  const double a = hierarchical_loglik(p, ch, cat, hc);
  Rng rng(4);
  rng.shuffle(ch);
  EXPECT_EQ(hierarchical_loglik(p, ch, cat, hc), a);
}

TEST(HierarchicalConfig, Validation) {
  HierarchicalConfig hc;
  hc.shrinkage = -0.1;
  EXPECT_THROW(hc.validate(), ValidationError);
  hc = {};
  hc.bounds.alpha_min = 1.0;
  hc.bounds.alpha_max = 0.5;
  EXPECT_THROW(hc.validate(), ValidationError);
  hc = {};
  hc.population.gamma.sd = 0.0;
  EXPECT_THROW(hc.validate(), ValidationError);
}

TEST(ParameterTransform, RoundTripAndJacobian) {
  ParameterTransform tr;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const PreferenceParams p = test::random_params(rng);
    const auto z = tr.to_unconstrained(p);
    const PreferenceParams back = tr.to_params(z);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_LT(rel_err(back.as_array()[k], p.as_array()[k], 1e-12), 1e-10);
    }
    const auto J = tr.jacobian(z);
    for (std::size_t k = 0; k < 5; ++k) {
      auto zu = z, zd = z;
      zu[k] += 1e-6;
      zd[k] -= 1e-6;
      const double fd = (tr.to_params(zu).as_array()[k] - tr.to_params(zd).as_array()[k]) / 2e-6;
      EXPECT_LT(rel_err(J[k], fd, 1e-8), 1e-6);
    }
  }
  // Alpha always lands strictly inside its bounds.
  const double extreme[] = {-50.0, 50.0};
  for (double z0 : extreme) {
    const double a = tr.to_params(std::vector<double>{z0, 0, 1, 0, 0}).alpha;
    EXPECT_GE(a, tr.bounds.alpha_min);
    EXPECT_LE(a, tr.bounds.alpha_max);
  }
}

TEST(EstimatesAgree, RelativeThreshold) {
  const PreferenceParams a{0.3, 0.02, 1.05, 1.5, 0.1};
  PreferenceParams b = a;
  EXPECT_TRUE(estimates_agree(b, a, 0.10));
  b.gamma = 1.05 * 1.09;
  EXPECT_TRUE(estimates_agree(b, a, 0.10));
  b.gamma = 1.05 * 1.2;
  EXPECT_FALSE(estimates_agree(b, a, 0.10));
}

// ---------------------------------------------------------------------------
// Estimation

TEST(EstimateSubject, RecoversParametersFromTenThousandChoices) {
  const MplCatalog cat = reference_design(112);
  ASSERT_GE(cat.total_rows(), 10000u);
  HierarchicalConfig hc;
  const PreferenceParams truth{0.3, 0.02, 1.05, 1.5, 0.1};
  const auto ch = simulate_choices("s", truth, cat, hc.utility, 77);
  const SubjectEstimate e = estimate_subject("s", ch, cat, hc);
  EXPECT_EQ(e.status, EstimateStatus::consistent) << e.diagnostic;
  const auto t = truth.as_array();
  const auto got = e.params.as_array();
  const char* names[] = {"alpha", "delta", "gamma", "lambda", "mu"};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_LT(std::abs(got[k] - t[k]) / std::abs(t[k]), 0.05) << names[k] << " = " << got[k];
  }
  // Both optimizers reach the same optimum.
  EXPECT_NEAR(e.runs[0].log_likelihood, e.runs[1].log_likelihood, 1e-6);
}

TEST(EstimateSubject, InputOrderDoesNotMatter) {
  const MplCatalog cat = reference_design(1);
  HierarchicalConfig hc;
  auto ch = simulate_choices("s", {0.3, 0.02, 1.05, 1.5, 0.3}, cat, hc.utility, 8);
  const SubjectEstimate a = estimate_subject("s", ch, cat, hc);
  std::reverse(ch.begin(), ch.end());
  const SubjectEstimate b = estimate_subject("s", ch, cat, hc);
  EXPECT_EQ(a.params.as_array(), b.params.as_array());
  EXPECT_EQ(a.status, b.status);
}

TEST(EstimateSubject, ConstantChoicesDoNotCrash) {
  const MplCatalog cat = reference_design(1);
  HierarchicalConfig hc;
  for (int side : {0, 1}) {
    std::vector<ChoiceRecord> ch;
    for (const MPLSpec& m : cat.mpls()) {
      for (std::size_t r = 0; r < m.rows.size(); ++r) ch.push_back({"s", m.id, r, side});
    }
    const SubjectEstimate e = estimate_subject("s", ch, cat, hc);
    if (e.status != EstimateStatus::failed) EXPECT_TRUE(std::isfinite(e.log_likelihood));
  }
}

TEST(EstimateSubject, InvalidConfigurationFailsWithDiagnostic) {
  const MplCatalog cat = reference_design(1);
  HierarchicalConfig hc;
  hc.bounds.alpha_min = 0.9;
  hc.bounds.alpha_max = 0.1;
  const auto ch = simulate_choices("s", {0.3, 0.02, 1.05, 1.5, 0.3}, cat, hc.utility, 8);
  const SubjectEstimate e = estimate_subject("s", ch, cat, hc);
  EXPECT_EQ(e.status, EstimateStatus::failed);
  EXPECT_FALSE(e.diagnostic.empty());
}

TEST(EstimateSubject, DisagreeingOptimizersAreDiscarded) {
  // A simplex that may not move cannot match the quasi-Newton optimum.
  const MplCatalog cat = reference_design(3);
  HierarchicalConfig hc;
  hc.simplex.max_iterations = 1;
  hc.starts = 1;
  const auto ch = simulate_choices("s", {0.1, 0.03, 1.12, 2.0, 0.1}, cat, hc.utility, 9);
  const SubjectEstimate e = estimate_subject("s", ch, cat, hc);
  EXPECT_FALSE(e.runs[0].converged);
  EXPECT_NE(e.status, EstimateStatus::consistent);
}

TEST(EstimateSubject, ShrinkageMovesGammaTowardTheMean) {
  // Stated property: across the default calibration grid, larger s never moves
  // gamma-hat away from the prior mean. Known to fail on this fixture: the
  // weight multiplies a probability, and rows where A was chosen push the
  // optimum away from the high-density region as s grows.
  const MplCatalog cat = reference_design(2);
  HierarchicalConfig hc;
  const auto ch = simulate_choices("s", {0.35, 0.025, 1.09, 1.6, 0.1}, cat, hc.utility, 10);
  double prev = std::numeric_limits<double>::infinity();
  for (double s : parse_grid("0.0001:1:log25")) {
    hc.shrinkage = s;
    const SubjectEstimate e = estimate_subject("s", ch, cat, hc);
    if (e.status == EstimateStatus::failed) continue;
    const double dist = std::abs(e.params.gamma - hc.population.gamma.mean);
    EXPECT_LE(dist, prev + 1e-6) << "s = " << s;
    prev = dist;
  }
}

TEST(EstimateAll, DeterministicAcrossThreads) {
  const MplCatalog cat = reference_design(1);
  HierarchicalConfig hc;
  const auto agents = simulate_population(hc.population, 0.2, 4, cat, hc.utility, 5);
  std::vector<ChoiceRecord> all;
  for (auto it = agents.rbegin(); it != agents.rend(); ++it) {
    all.insert(all.end(), it->choices.begin(), it->choices.end());
  }
  const EstimationResult a = estimate_all(all, cat, hc, 1);
  const EstimationResult b = estimate_all(all, cat, hc, 3);
  ASSERT_EQ(a.estimates.size(), 4u);
  EXPECT_EQ(a.estimates[0].subject_id, "sim0001");
  std::ostringstream sa, sb;
  write_estimates(sa, a.estimates);
  write_estimates(sb, b.estimates);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(a.summary.consistent + a.summary.discarded + a.summary.failed, 4u);
}

TEST(Estimates, WriteReadRoundTrip) {
  SubjectEstimate a;
  a.subject_id = "x1";
  a.params = {0.3, 0.02, 1.0512345678901234, 1.5, 0.1};
  a.log_likelihood = -12.5;
  a.status = EstimateStatus::consistent;
  SubjectEstimate b;
  b.subject_id = "x2";
  b.status = EstimateStatus::failed;
  const auto path = std::filesystem::temp_directory_path() / "debtav_est_roundtrip.csv";
  {
    std::ofstream out(path);
    write_estimates(out, {a, b});
  }
  const auto rows = read_estimates(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].params.gamma, a.params.gamma);
  EXPECT_EQ(rows[0].log_likelihood, -12.5);
  EXPECT_EQ(rows[1].status, EstimateStatus::failed);
  EXPECT_EQ(parse_estimate_status(to_string(EstimateStatus::discarded_inconsistent)),
            EstimateStatus::discarded_inconsistent);
}

TEST(Summary, CountsAndGammaStatistics) {
  std::vector<SubjectEstimate> est(3);
  est[0].status = EstimateStatus::consistent;
  est[0].params.gamma = 0.98;
  est[1].status = EstimateStatus::consistent;
  est[1].params.gamma = 1.10;
  est[2].status = EstimateStatus::failed;
  const EstimationSummary s = summarize(est);
  EXPECT_EQ(s.consistent, 2u);
  EXPECT_EQ(s.failed, 1u);
  EXPECT_EQ(*s.gamma_min, 0.98);
  EXPECT_EQ(*s.gamma_max, 1.10);
  EXPECT_NEAR(*s.gamma_median, 1.04, 1e-12);
  EXPECT_EQ(*s.share_debt_averse, 0.5);
}

}  // namespace
}  // namespace debtav
