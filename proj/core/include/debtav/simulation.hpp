#pragma once

// Synthetic decision makers with known parameters, simulated choices and the
// simulation-based grid search for the shrinkage exponent.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "debtav/choice_data.hpp"
#include "debtav/estimation.hpp"
#include "debtav/population.hpp"

namespace debtav {

struct SyntheticAgent {
  std::string subject_id;
  PreferenceParams true_params;
  std::vector<ChoiceRecord> choices;  ///< one per catalog row, catalog order
};

/// Draws n agents from independent normals. A draw outside the model domain
/// (alpha outside the estimation bounds, delta <= -1, lambda <= 0) is redrawn
/// for that parameter only. Agent i uses its own stream, so a prefix of a
/// larger sample is identical to a smaller sample.
std::vector<PreferenceParams> sample_agents(const PopulationDistribution& pop, double mu,
                                            std::size_t n, std::uint64_t seed,
                                            const ParameterBounds& bounds = {});

/// One Bernoulli draw per catalog row with the model's choice probability.
std::vector<ChoiceRecord> simulate_choices(const std::string& subject_id,
                                           const PreferenceParams& params,
                                           const MplCatalog& catalog, const UtilityConfig& config,
                                           std::uint64_t seed);

/// Samples and simulates a full synthetic dataset. Subject ids are
/// zero-padded ("sim0001") so lexicographic and index order agree.
std::vector<SyntheticAgent> simulate_population(const PopulationDistribution& pop, double mu,
                                                std::size_t n, const MplCatalog& catalog,
                                                const UtilityConfig& config, std::uint64_t seed);

std::string synthetic_subject_id(std::size_t index, std::size_t n);

/// Synthetic seven-list design used for calibration and recovery checks:
/// two risk lists, a mixed-gamble list, a sooner/later list, a saving list
/// and two debt lists, 90 rows in total. `replicates` > 1 interleaves shifted
/// copies of every row, so each list stays monotone.
MplCatalog reference_design(int replicates = 1);

inline constexpr const char* kTruthHeader = "subject_id,alpha,delta,gamma,lambda,mu";
void write_truth(std::ostream& out, const std::vector<SyntheticAgent>& agents);

/// 25 log-spaced values from 1e-4 to 1.
std::vector<double> default_shrinkage_grid();

/// Accepts "a:b:logN", "a:b:linN" or a comma-separated list of values.
std::vector<double> parse_grid(const std::string& text);

struct CalibrationConfig {
  PopulationDistribution population;
  double mu = 0.1;
  std::size_t agents = 100;
  std::uint64_t seed = 1;
  HierarchicalConfig estimation;  ///< shrinkage is overwritten per grid point
  double max_failure_share = 0.2;
  unsigned threads = 1;
};

struct CalibrationRow {
  double s = 0.0;
  double mse_gamma = 0.0;  ///< over agents whose estimate is consistent
  std::size_t estimated = 0;
  std::size_t failures = 0;  ///< discarded or failed
  bool disqualified = false;
};

struct CalibrationResult {
  std::optional<double> best_s;
  std::vector<CalibrationRow> table;
};

/// Estimates the same simulated agents at every grid value and picks the s
/// with the smallest MSE of gamma, ties toward smaller s.
CalibrationResult calibrate_shrinkage(const MplCatalog& catalog, const std::vector<double>& grid,
                                      const CalibrationConfig& config);

/// Same search over agents that were simulated elsewhere.
CalibrationResult calibrate_shrinkage(const std::vector<SyntheticAgent>& agents,
                                      const MplCatalog& catalog, const std::vector<double>& grid,
                                      const CalibrationConfig& config);

}  // namespace debtav
