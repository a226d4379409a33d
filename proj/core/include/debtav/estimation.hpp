#pragma once

// Per-subject hierarchical maximum likelihood. The logit likelihood of each
// observed choice is weighted by the population density raised to a
// shrinkage exponent s:
//
//   ln L = sum_j c_j ln(F_j w) + (1 - c_j) ln(1 - F_j w),   w = d(omega)^s
//
// Points where F_j w >= 1 for a rejected option are infeasible and evaluate
// to -infinity.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "debtav/choice_data.hpp"
#include "debtav/model.hpp"
#include "debtav/optimize.hpp"
#include "debtav/population.hpp"

namespace debtav {

struct ParameterBounds {
  double alpha_min = -5.0;
  double alpha_max = 0.999;
};

struct HierarchicalConfig {
  double shrinkage = 0.0;  ///< s >= 0
  PopulationDistribution population;
  UtilityConfig utility;
  ParameterBounds bounds;
  optimize::NelderMeadOptions simplex{0.25, 1e-8, 2000, 1};
  optimize::BfgsOptions quasi_newton{1e-6, 2000};
  double consistency_threshold = 0.10;  ///< max relative disagreement per parameter
  int starts = 5;                       ///< prior mean plus starts-1 jittered points
  std::uint64_t seed = 20220101;        ///< jitter stream

  /// Throws ValidationError on s < 0, threshold <= 0, inverted bounds or a bad population.
  void validate() const;
};

/// ln w = s * ln d(omega). Finite for finite parameters.
double log_weighted_prior(const PreferenceParams& params, const PopulationDistribution& pop,
                          double shrinkage);
/// w = d(omega)^s, evaluated via the log.
double weighted_prior(const PreferenceParams& params, const PopulationDistribution& pop,
                      double shrinkage);

/// The choices of one subject resolved against a catalog. Records are held in
/// canonical (mpl_id, row_index) order, so results do not depend on input order.
class SubjectLikelihood {
 public:
  SubjectLikelihood(std::span<const ChoiceRecord> choices, const MplCatalog& catalog);

  std::size_t size() const noexcept { return rows_.size(); }

  /// Hierarchical log-likelihood; -infinity when infeasible or out of domain.
  double log_likelihood(const PreferenceParams& params, const HierarchicalConfig& config) const;
  /// Same value, plus d lnL / d(alpha, delta, gamma, lambda, mu).
  double log_likelihood(const PreferenceParams& params, const HierarchicalConfig& config,
                        std::span<double, PreferenceParams::kCount> gradient) const;

 private:
  struct Row {
    const Prospect* a;
    const Prospect* b;
    int chosen;
  };
  std::vector<Row> rows_;
};

double hierarchical_loglik(const PreferenceParams& params, std::span<const ChoiceRecord> choices,
                           const MplCatalog& catalog, const HierarchicalConfig& config);

enum class EstimateStatus { consistent, discarded_inconsistent, failed };
std::string to_string(EstimateStatus status);
EstimateStatus parse_estimate_status(const std::string& text);

struct OptimizerRun {
  std::string method;
  PreferenceParams params;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  int feasible_starts = 0;
  std::string message;  ///< stopping reason of the best run
};

struct SubjectEstimate {
  std::string subject_id;
  PreferenceParams params;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  EstimateStatus status = EstimateStatus::failed;
  std::size_t choices = 0;
  std::array<OptimizerRun, 2> runs;  ///< [0] simplex, [1] quasi-Newton
  std::string diagnostic;
};

/// Maps unconstrained optimizer coordinates to the parameter domain:
/// squashed alpha in (alpha_min, alpha_max), identity delta and gamma,
/// log lambda and log mu.
struct ParameterTransform {
  ParameterBounds bounds;

  PreferenceParams to_params(std::span<const double> z) const;
  std::vector<double> to_unconstrained(const PreferenceParams& p) const;
  /// d theta_k / d z_k (the map is diagonal).
  std::array<double, PreferenceParams::kCount> jacobian(std::span<const double> z) const;
};

/// Relative agreement test used by the consistency filter.
bool estimates_agree(const PreferenceParams& candidate, const PreferenceParams& reference,
                     double threshold);

SubjectEstimate estimate_subject(const std::string& subject_id,
                                 std::span<const ChoiceRecord> choices, const MplCatalog& catalog,
                                 const HierarchicalConfig& config);

struct EstimationSummary {
  std::size_t consistent = 0;
  std::size_t discarded = 0;
  std::size_t failed = 0;
  std::optional<double> gamma_min;
  std::optional<double> gamma_median;
  std::optional<double> gamma_max;
  std::optional<double> share_debt_averse;  ///< among consistent subjects, gamma > 1
};

struct EstimationResult {
  std::vector<SubjectEstimate> estimates;  ///< sorted by subject_id
  EstimationSummary summary;
};

/// Estimates every subject independently across `threads` workers.
EstimationResult estimate_all(const std::vector<ChoiceRecord>& records, const MplCatalog& catalog,
                              const HierarchicalConfig& config, unsigned threads = 1);

EstimationSummary summarize(const std::vector<SubjectEstimate>& estimates);

inline constexpr const char* kEstimatesHeader = "subject_id,alpha,delta,gamma,lambda,mu,loglik,status";

void write_estimates(std::ostream& out, const std::vector<SubjectEstimate>& estimates);

struct EstimateRow {
  std::string subject_id;
  PreferenceParams params;
  double log_likelihood = 0.0;
  EstimateStatus status = EstimateStatus::consistent;
};
std::vector<EstimateRow> read_estimates(const std::filesystem::path& path);

}  // namespace debtav
