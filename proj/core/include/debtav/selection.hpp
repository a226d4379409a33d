#pragma once

// Item filtering, exhaustive best-subset OLS, cross-validation and the choice
// of a short survey module.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "debtav/choice_data.hpp"
#include "debtav/estimation.hpp"
#include "debtav/regression.hpp"

namespace debtav {

// ---------------------------------------------------------------------------
// Item pool

struct Exclusion {
  std::string item_id;
  ExclusionReason reason;
};

struct FilteredPool {
  std::vector<ItemDefinition> kept;      ///< catalog order
  std::vector<ItemDefinition> excluded;  ///< with `exclusion` set
};

/// Throws ValidationError when an exclusion names an unknown or repeated item.
FilteredPool filter_pool(const std::vector<ItemDefinition>& pool,
                         const std::vector<Exclusion>& exclusions);

/// {"schema_version":1,"exclusions":[{"item_id":..,"reason":..}]}
std::vector<Exclusion> load_exclusions(const std::filesystem::path& path);
std::vector<Exclusion> exclusions_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// Data

/// Rows are kept sorted by subject_id; every later step (folds included)
/// works on that canonical order.
struct RegressionDataset {
  std::vector<std::string> subject_ids;
  std::vector<double> y;
  std::vector<std::string> item_ids;
  std::vector<std::vector<double>> columns;  ///< one per item, aligned with subject_ids
  std::size_t dropped = 0;                   ///< subjects removed by listwise deletion

  std::size_t size() const noexcept { return y.size(); }
  std::size_t column_index(const std::string& item_id) const;

  /// Validates shapes and unique ids, then sorts rows by subject_id.
  static RegressionDataset create(std::vector<std::string> subject_ids, std::vector<double> y,
                                  std::vector<std::string> item_ids,
                                  std::vector<std::vector<double>> columns);
};

/// Joins gamma estimates with item responses. Only consistent estimates are
/// used unless `consistent_only` is false; subjects missing any item are dropped.
RegressionDataset build_dataset(const std::vector<EstimateRow>& estimates,
                                const std::vector<SurveyResponse>& responses,
                                const std::vector<std::string>& item_ids,
                                bool consistent_only = true);

// ---------------------------------------------------------------------------
// Subsets

/// C(n, k), exact in 64 bits for the sizes used here. Throws on overflow.
std::uint64_t binomial(std::size_t n, std::size_t k);

/// Advances `combo` (strictly increasing indices below n) to its
/// lexicographic successor. Returns false after the last combination.
bool next_combination(std::vector<std::size_t>& combo, std::size_t n);

/// The combination with the given lexicographic rank.
std::vector<std::size_t> unrank_combination(std::size_t n, std::size_t k, std::uint64_t rank);

/// Calls visit on every k-subset of {0..n-1} in lexicographic order and
/// returns the count.
std::uint64_t enumerate_subsets(std::size_t n, std::size_t k,
                                const std::function<void(std::span<const std::size_t>)>& visit);

// ---------------------------------------------------------------------------
// Models

struct CvScore {
  int k = 0;
  double mse = 0.0;
  double mae = 0.0;
  double mse_se = 0.0;  ///< sd of per-observation squared errors / sqrt(n)
  std::size_t replicates = 0;
  std::size_t skipped = 0;
};

struct ModelCandidate {
  std::vector<std::string> predictors;  ///< ordered as in the dataset
  std::vector<std::size_t> columns;
  std::vector<double> coefficients;     ///< intercept first
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double rss = 0.0;
  bool degenerate = false;
  bool exact_fit = false;
  std::vector<CvScore> cv;

  std::size_t size() const noexcept { return predictors.size(); }
};

/// Full QR fit and scores of one predictor subset.
ModelCandidate fit_candidate(const RegressionDataset& data, std::span<const std::size_t> columns);

struct Leaderboard {
  std::size_t size = 0;
  std::uint64_t fitted = 0;
  std::vector<ModelCandidate> models;  ///< best first
};

struct SearchConfig {
  std::size_t min_size = 1;
  std::size_t max_size = 6;
  std::size_t top = 10;
  unsigned threads = 1;
};

struct SearchResult {
  std::vector<Leaderboard> leaderboards;
  std::vector<std::string> shortlist;  ///< items in any kept model, dataset order
  std::uint64_t fitted = 0;
};

/// Scores every subset of each size by adjusted R2 and keeps the best `top`
/// per size, ties broken by the lexicographic order of predictor ids.
/// Candidates are ranked with a centred Gram/Cholesky residual sum of squares
/// and the survivors are refitted by QR.
SearchResult best_subset_search(const RegressionDataset& data,
                                std::span<const std::size_t> pool_columns,
                                const SearchConfig& config);

/// Every non-empty subset of the shortlist (2^m - 1 fits), best `top` kept per size.
SearchResult exhaustive_shortlist_search(const RegressionDataset& data,
                                         const std::vector<std::string>& shortlist,
                                         std::size_t top = 1, unsigned threads = 1);

// ---------------------------------------------------------------------------
// Cross-validation and the final choice

struct CvConfig {
  std::vector<int> ks{5, 10};
  std::size_t replicates = 100;
  std::uint64_t seed = 1;
};

/// Replicate r shuffles the canonical row order with stream (seed, r) and cuts
/// k contiguous folds, the remainder going to the first folds. Fold errors
/// are averaged over folds, then over replicates. A replicate whose training
/// set has fewer than p+1 rows, or whose fit is rank-deficient, is skipped.
std::vector<CvScore> cross_validate(const RegressionDataset& data,
                                    std::span<const std::size_t> columns, const CvConfig& config);

enum class TieRule {
  one_se,  ///< smallest model within one standard error of the minimum
  exact,   ///< strict minimum, equal scores go to fewer predictors
};
std::string to_string(TieRule rule);
TieRule parse_tie_rule(const std::string& text);

struct Selection {
  std::size_t index = 0;  ///< into the candidate list
  double mean_mse = 0.0;  ///< averaged over k
  double threshold = 0.0;
  TieRule rule = TieRule::one_se;
};

double mean_cv_mse(const ModelCandidate& candidate);

/// Candidates must carry CV scores. Throws ValidationError when empty.
Selection select_module(const std::vector<ModelCandidate>& candidates, TieRule rule = TieRule::one_se);

struct SelectionConfig {
  SearchConfig search;
  std::size_t shortlist_top = 1;
  CvConfig cv;
  TieRule rule = TieRule::one_se;
};

struct SelectionRun {
  std::size_t pool_size = 0;
  SearchResult search;
  SearchResult shortlist_search;
  std::vector<ModelCandidate> winners;  ///< best model per size with CV scores
  Selection selection;
};

/// best_subset_search -> shortlist search -> CV of per-size winners up to
/// search.max_size -> select_module.
SelectionRun run_selection(const RegressionDataset& data, std::span<const std::size_t> pool_columns,
                           const SelectionConfig& config);

nlohmann::json to_json(const ModelCandidate& candidate);
nlohmann::json selection_report(const SelectionRun& run, const SelectionConfig& config);

}  // namespace debtav
