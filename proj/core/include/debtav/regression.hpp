#pragma once

// Ordinary least squares with an intercept, solved by column-pivoted QR.

#include <cstddef>
#include <span>
#include <vector>

namespace debtav {

struct OlsFit {
  std::vector<double> coefficients;  ///< intercept first, then one per predictor
  std::vector<double> residuals;
  double rss = 0.0;
  double tss = 0.0;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;        ///< predictors, excluding the intercept
  bool rank_deficient = false;
  bool degenerate = false;  ///< rank-deficient design or n <= p + 1
};

/// `predictors` holds one column per predictor, each of length y.size().
/// A degenerate fit keeps whatever the QR solution gives but is meant to be
/// ranked last (adj_r2 = -infinity).
OlsFit ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& predictors);

/// Same fit restricted to the listed rows.
OlsFit ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& predictors,
               std::span<const std::size_t> rows);

double predict(const OlsFit& fit, std::span<const double> x);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  bool exact_fit = false;  ///< RSS == 0; both criteria are -infinity
};

/// Gaussian likelihood with the error variance counted as a parameter:
///   AIC = n ln(RSS/n) + 2 (p + 2),  BIC = n ln(RSS/n) + (p + 2) ln n.
InformationCriteria information_criteria(double rss, std::size_t n, std::size_t p);

double adjusted_r2(double r2, std::size_t n, std::size_t p);

}  // namespace debtav
