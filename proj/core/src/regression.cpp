#include "debtav/regression.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "debtav/errors.hpp"

namespace debtav {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

OlsFit fit_rows(std::span<const double> y, const std::vector<std::vector<double>>& predictors,
                std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  const std::size_t p = predictors.size();
  for (const auto& col : predictors) {
    if (col.size() != y.size()) throw ValidationError("predictor column length differs from y");
  }
  OlsFit fit;
  fit.n = n;
  fit.p = p;
  if (n == 0) throw ValidationError("cannot fit a regression on zero rows");

  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd Y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = rows[i];
    if (r >= y.size()) throw ValidationError("row index out of range");
    X(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) X(i, j + 1) = predictors[j][r];
    Y(i) = y[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;

  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  fit.rss = resid.squaredNorm();
  const double mean = Y.mean();
  fit.tss = (Y.array() - mean).square().sum();
  fit.rank_deficient = static_cast<std::size_t>(qr.rank()) < p + 1;
  fit.degenerate = fit.rank_deficient || n <= p + 1;
  fit.r2 = fit.tss > 0.0 ? 1.0 - fit.rss / fit.tss : (fit.rss == 0.0 ? 1.0 : 0.0);
  fit.adj_r2 = fit.degenerate ? kNegInf : adjusted_r2(fit.r2, n, p);
  return fit;
}

}  // namespace

double adjusted_r2(double r2, std::size_t n, std::size_t p) {
  if (n <= p + 1) return kNegInf;
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - p - 1);
}

OlsFit ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& predictors) {
  std::vector<std::size_t> rows(y.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_rows(y, predictors, rows);
}

OlsFit ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& predictors,
               std::span<const std::size_t> rows) {
  return fit_rows(y, predictors, rows);
}

double predict(const OlsFit& fit, std::span<const double> x) {
  if (x.size() + 1 != fit.coefficients.size()) {
    throw ValidationError("predictor count does not match the fitted model");
  }
  double v = fit.coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j) v += fit.coefficients[j + 1] * x[j];
  return v;
}

InformationCriteria information_criteria(double rss, std::size_t n, std::size_t p) {
  if (n == 0) throw ValidationError("information criteria need n > 0");
  if (!(rss >= 0.0)) throw ValidationError("RSS must be >= 0");
  if (rss == 0.0) return {kNegInf, kNegInf, true};
  const double dn = static_cast<double>(n);
  const double k = static_cast<double>(p + 2);
  const double fit = dn * std::log(rss / dn);
  return {fit + 2.0 * k, fit + k * std::log(dn), false};
}

}  // namespace debtav
