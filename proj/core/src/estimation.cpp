#include "debtav/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "debtav/csv.hpp"
#include "debtav/errors.hpp"
#include "debtav/parallel.hpp"
#include "debtav/rng.hpp"

namespace debtav {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kParams = PreferenceParams::kCount;

// ln(1 - e^a) for a < 0.
double log1mexp(double a) {
  return a > -0.6931471805599453 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a));
}

bool in_domain(const PreferenceParams& p, const HierarchicalConfig& config) {
  for (double v : p.as_array()) {
    if (!std::isfinite(v)) return false;
  }
  return p.alpha != 1.0 && p.delta > -1.0 && p.lambda > 0.0 && p.mu > 0.0 &&
         config.utility.epsilon > 0.0;
}

}  // namespace

void HierarchicalConfig::validate() const {
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) {
    throw ValidationError("shrinkage s must be a finite value >= 0");
  }
  if (!(consistency_threshold > 0.0)) throw ValidationError("consistency threshold must be > 0");
  if (!(bounds.alpha_min < bounds.alpha_max)) {
    throw ValidationError("empty admissible region: alpha_min >= alpha_max");
  }
  if (!(bounds.alpha_max < 1.0)) throw ValidationError("alpha_max must stay below 1");
  if (starts < 1) throw ValidationError("at least one optimizer start is required");
  if (!(utility.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  population.validate();
}

double log_weighted_prior(const PreferenceParams& params, const PopulationDistribution& pop,
                          double shrinkage) {
  if (shrinkage == 0.0) return 0.0;
  return shrinkage * pop.log_density(params);
}

double weighted_prior(const PreferenceParams& params, const PopulationDistribution& pop,
                      double shrinkage) {
  return std::exp(log_weighted_prior(params, pop, shrinkage));
}

SubjectLikelihood::SubjectLikelihood(std::span<const ChoiceRecord> choices,
                                     const MplCatalog& catalog) {
  std::vector<const ChoiceRecord*> sorted;
  sorted.reserve(choices.size());
  for (const ChoiceRecord& c : choices) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(), [](const ChoiceRecord* x, const ChoiceRecord* y) {
    if (x->mpl_id != y->mpl_id) return x->mpl_id < y->mpl_id;
    return x->row_index < y->row_index;
  });
  rows_.reserve(sorted.size());
  for (const ChoiceRecord* c : sorted) {
    const MPLSpec& mpl = catalog.at(c->mpl_id);
    if (c->row_index >= mpl.rows.size()) {
      throw ValidationError("row " + std::to_string(c->row_index) + " out of range for MPL '" +
                            c->mpl_id + "'");
    }
    if (c->chosen != 0 && c->chosen != 1) throw ValidationError("chosen must be 0 or 1");
    const MplRow& row = mpl.rows[c->row_index];
    rows_.push_back({&row.option_a, &row.option_b, c->chosen});
  }
}

double SubjectLikelihood::log_likelihood(const PreferenceParams& params,
                                         const HierarchicalConfig& config) const {
  if (!in_domain(params, config)) return kNegInf;
  const double log_w = log_weighted_prior(params, config.population, config.shrinkage);
  double total = 0.0;
  for (const Row& r : rows_) {
    const double ua = detail::utility_with_gradient_unchecked(*r.a, params, config.utility).utility;
    const double ub = detail::utility_with_gradient_unchecked(*r.b, params, config.utility).utility;
    const double xi = (ub - ua) / params.mu;
    if (log_w == 0.0) {
      total += r.chosen ? log_logistic(xi) : log_one_minus_logistic(xi);
      continue;
    }
    const double a = log_logistic(xi) + log_w;
    if (r.chosen) {
      total += a;
    } else {
      if (!(a < 0.0)) return kNegInf;
      total += log1mexp(a);
    }
  }
  return std::isnan(total) ? kNegInf : total;
}

double SubjectLikelihood::log_likelihood(const PreferenceParams& params,
                                         const HierarchicalConfig& config,
                                         std::span<double, kParams> gradient) const {
  std::fill(gradient.begin(), gradient.end(), 0.0);
  if (!in_domain(params, config)) return kNegInf;
  const PopulationDistribution& pop = config.population;
  const double s = config.shrinkage;
  const double log_w = log_weighted_prior(params, pop, s);

  std::array<double, kParams> dlog_w{};
  if (s != 0.0) {
    const std::array<const NormalDensity*, 4> dens = {&pop.alpha, &pop.delta, &pop.gamma,
                                                      &pop.lambda};
    const auto theta = params.as_array();
    for (std::size_t k = 0; k < 4; ++k) {
      dlog_w[k] = -s * (theta[k] - dens[k]->mean) / (dens[k]->sd * dens[k]->sd);
    }
  }

  double total = 0.0;
  for (const Row& r : rows_) {
    const UtilityWithGradient ua =
        detail::utility_with_gradient_unchecked(*r.a, params, config.utility);
    const UtilityWithGradient ub =
        detail::utility_with_gradient_unchecked(*r.b, params, config.utility);
    const double xi = (ub.utility - ua.utility) / params.mu;
    std::array<double, kParams> dxi{};
    for (std::size_t k = 0; k < 4; ++k) dxi[k] = (ub.gradient[k] - ua.gradient[k]) / params.mu;
    dxi[4] = -xi / params.mu;

    const double one_minus_f = logistic(-xi);
    const double a = log_logistic(xi) + log_w;
    double weight;  // d term / d a
    if (r.chosen) {
      total += a;
      weight = 1.0;
    } else {
      if (!(a < 0.0)) return kNegInf;
      total += (log_w == 0.0) ? log_one_minus_logistic(xi) : log1mexp(a);
      weight = -1.0 / std::expm1(-a);
    }
    for (std::size_t k = 0; k < kParams; ++k) {
      gradient[k] += weight * (one_minus_f * dxi[k] + dlog_w[k]);
    }
  }
  return std::isnan(total) ? kNegInf : total;
}

double hierarchical_loglik(const PreferenceParams& params, std::span<const ChoiceRecord> choices,
                           const MplCatalog& catalog, const HierarchicalConfig& config) {
  return SubjectLikelihood(choices, catalog).log_likelihood(params, config);
}

std::string to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::consistent: return "consistent";
    case EstimateStatus::discarded_inconsistent: return "discarded_inconsistent";
    case EstimateStatus::failed: return "failed";
  }
  return "failed";
}

EstimateStatus parse_estimate_status(const std::string& text) {
  if (text == "consistent") return EstimateStatus::consistent;
  if (text == "discarded_inconsistent") return EstimateStatus::discarded_inconsistent;
  if (text == "failed") return EstimateStatus::failed;
  throw ValidationError("unknown estimate status '" + text + "'");
}

PreferenceParams ParameterTransform::to_params(std::span<const double> z) const {
  const double span = bounds.alpha_max - bounds.alpha_min;
  return {bounds.alpha_min + span * logistic(z[0]), z[1], z[2], std::exp(z[3]), std::exp(z[4])};
}

std::vector<double> ParameterTransform::to_unconstrained(const PreferenceParams& p) const {
  const double span = bounds.alpha_max - bounds.alpha_min;
  const double frac = std::clamp((p.alpha - bounds.alpha_min) / span, 1e-12, 1.0 - 1e-12);
  return {std::log(frac / (1.0 - frac)), p.delta, p.gamma, std::log(p.lambda), std::log(p.mu)};
}

std::array<double, kParams> ParameterTransform::jacobian(std::span<const double> z) const {
  const double span = bounds.alpha_max - bounds.alpha_min;
  const double sig = logistic(z[0]);
  return {span * sig * (1.0 - sig), 1.0, 1.0, std::exp(z[3]), std::exp(z[4])};
}

bool estimates_agree(const PreferenceParams& candidate, const PreferenceParams& reference,
                     double threshold) {
  const auto c = candidate.as_array();
  const auto r = reference.as_array();
  for (std::size_t k = 0; k < kParams; ++k) {
    if (std::abs(c[k] - r[k]) > threshold * std::abs(r[k])) return false;
  }
  return true;
}

namespace {

// Moves an infeasible start away from the prior mean (which lowers the
// density weight) until the likelihood is finite.
std::optional<PreferenceParams> make_feasible(PreferenceParams start, const SubjectLikelihood& lik,
                                              const HierarchicalConfig& config) {
  if (std::isfinite(lik.log_likelihood(start, config))) return start;
  const PopulationDistribution& pop = config.population;
  const std::array<const NormalDensity*, 4> dens = {&pop.alpha, &pop.delta, &pop.gamma,
                                                    &pop.lambda};
  auto theta = start.as_array();
  std::array<double, 4> dir{};
  double norm = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    dir[k] = (theta[k] - dens[k]->mean) / dens[k]->sd;
    norm += dir[k] * dir[k];
  }
  if (norm < 1e-24) dir = {0.5, 0.5, 0.5, 0.5};
  const double lo = config.bounds.alpha_min + 1e-6;
  const double hi = config.bounds.alpha_max - 1e-6;
  for (int m = 1; m <= 30; ++m) {
    const double scale = std::ldexp(1.0, m - 1);
    auto p = theta;
    for (std::size_t k = 0; k < 4; ++k) p[k] = dens[k]->mean + dens[k]->sd * dir[k] * scale;
    p[0] = std::clamp(p[0], lo, hi);
    p[1] = std::max(p[1], -0.999);
    p[3] = std::max(p[3], 1e-6);
    PreferenceParams cand = PreferenceParams::from_array(p);
    if (std::isfinite(lik.log_likelihood(cand, config))) return cand;
  }
  return std::nullopt;
}

double choose_mu_start(const SubjectLikelihood& lik, const HierarchicalConfig& config) {
  PreferenceParams p = config.population.mean_params(1.0);
  p.alpha = std::clamp(p.alpha, config.bounds.alpha_min + 1e-6, config.bounds.alpha_max - 1e-6);
  HierarchicalConfig plain = config;
  plain.shrinkage = 0.0;
  const double log_mu = optimize::golden_section(
      [&](double lm) {
        PreferenceParams q = p;
        q.mu = std::exp(lm);
        return -lik.log_likelihood(q, plain);
      },
      std::log(1e-3), std::log(1e3), 1e-4);
  return std::exp(log_mu);
}

std::vector<PreferenceParams> starting_points(const HierarchicalConfig& config, double mu0) {
  const PopulationDistribution& pop = config.population;
  const double lo = config.bounds.alpha_min + 1e-6;
  const double hi = config.bounds.alpha_max - 1e-6;
  std::vector<PreferenceParams> out;
  PreferenceParams mean = pop.mean_params(mu0);
  mean.alpha = std::clamp(mean.alpha, lo, hi);
  out.push_back(mean);
  for (int k = 1; k < config.starts; ++k) {
    Rng rng(config.seed, static_cast<std::uint64_t>(k));
    auto jitter = [&](const NormalDensity& d) {
      return d.mean + d.sd * std::clamp(rng.normal(), -2.0, 2.0);
    };
    PreferenceParams p;
    p.alpha = std::clamp(jitter(pop.alpha), lo, hi);
    p.delta = std::max(jitter(pop.delta), -0.999);
    p.gamma = jitter(pop.gamma);
    p.lambda = std::max(jitter(pop.lambda), 1e-3);
    p.mu = mu0 * std::exp(0.5 * std::clamp(rng.normal(), -2.0, 2.0));
    out.push_back(p);
  }
  return out;
}

}  // namespace

SubjectEstimate estimate_subject(const std::string& subject_id,
                                 std::span<const ChoiceRecord> choices, const MplCatalog& catalog,
                                 const HierarchicalConfig& config) {
  SubjectEstimate est;
  est.subject_id = subject_id;
  est.choices = choices.size();
  est.runs[0].method = "nelder-mead";
  est.runs[1].method = "bfgs";
  try {
    config.validate();
    if (choices.empty()) throw ValidationError("no choices for subject");
    const SubjectLikelihood lik(choices, catalog);
    const ParameterTransform transform{config.bounds};

    auto objective = [&](std::span<const double> z) {
      return -lik.log_likelihood(transform.to_params(z), config);
    };
    auto objective_grad = [&](std::span<const double> z, std::span<double> grad) {
      std::array<double, kParams> g{};
      const double ll = lik.log_likelihood(transform.to_params(z), config, g);
      const auto jac = transform.jacobian(z);
      for (std::size_t k = 0; k < kParams; ++k) grad[k] = -g[k] * jac[k];
      return -ll;
    };

    const double mu0 = choose_mu_start(lik, config);
    for (PreferenceParams start : starting_points(config, mu0)) {
      const auto feasible = make_feasible(start, lik, config);
      if (!feasible) continue;
      const std::vector<double> z0 = transform.to_unconstrained(*feasible);

      const optimize::Result nm = optimize::nelder_mead(objective, z0, config.simplex);
      const optimize::Result qn = optimize::bfgs(objective_grad, z0, config.quasi_newton);
      const std::array<const optimize::Result*, 2> results = {&nm, &qn};
      for (std::size_t m = 0; m < 2; ++m) {
        OptimizerRun& run = est.runs[m];
        ++run.feasible_starts;
        run.evaluations += results[m]->evaluations;
        const double ll = -results[m]->value;
        if (std::isfinite(ll) && ll > run.log_likelihood) {
          run.log_likelihood = ll;
          run.params = transform.to_params(results[m]->x);
          run.converged = results[m]->converged;
          run.iterations = results[m]->iterations;
          run.message = results[m]->message;
        }
      }
    }

    const OptimizerRun& simplex = est.runs[0];
    const OptimizerRun& newton = est.runs[1];
    const bool simplex_ok = std::isfinite(simplex.log_likelihood);
    const bool newton_ok = std::isfinite(newton.log_likelihood);
    if (!simplex_ok && !newton_ok) {
      est.diagnostic = "no feasible starting point";
      return est;
    }
    const OptimizerRun& best =
        (!newton_ok || (simplex_ok && simplex.log_likelihood > newton.log_likelihood)) ? simplex
                                                                                        : newton;
    est.params = best.params;
    est.log_likelihood = best.log_likelihood;
    if (!simplex.converged && !newton.converged) {
      est.status = EstimateStatus::failed;
      est.diagnostic = "neither optimizer converged";
      return est;
    }
    if (simplex_ok && newton_ok &&
        estimates_agree(simplex.params, newton.params, config.consistency_threshold)) {
      est.status = EstimateStatus::consistent;
    } else {
      est.status = EstimateStatus::discarded_inconsistent;
      est.diagnostic = "optimizers disagree by more than " +
                       std::to_string(config.consistency_threshold * 100.0) + "%";
    }
  } catch (const std::exception& e) {
    est.status = EstimateStatus::failed;
    est.diagnostic = e.what();
  }
  return est;
}

EstimationSummary summarize(const std::vector<SubjectEstimate>& estimates) {
  EstimationSummary s;
  std::vector<double> gammas;
  for (const SubjectEstimate& e : estimates) {
    switch (e.status) {
      case EstimateStatus::consistent:
        ++s.consistent;
        gammas.push_back(e.params.gamma);
        break;
      case EstimateStatus::discarded_inconsistent: ++s.discarded; break;
      case EstimateStatus::failed: ++s.failed; break;
    }
  }
  if (!gammas.empty()) {
    std::sort(gammas.begin(), gammas.end());
    s.gamma_min = gammas.front();
    s.gamma_max = gammas.back();
    const std::size_t n = gammas.size();
    s.gamma_median = n % 2 ? gammas[n / 2] : 0.5 * (gammas[n / 2 - 1] + gammas[n / 2]);
    const auto averse = std::count_if(gammas.begin(), gammas.end(), [](double g) { return g > 1.0; });
    s.share_debt_averse = static_cast<double>(averse) / static_cast<double>(n);
  }
  return s;
}

EstimationResult estimate_all(const std::vector<ChoiceRecord>& records, const MplCatalog& catalog,
                              const HierarchicalConfig& config, unsigned threads) {
  auto groups = group_by_subject(records);
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  EstimationResult result;
  result.estimates.resize(groups.size());
  parallel_for(groups.size(), threads, [&](std::size_t i) {
    result.estimates[i] = estimate_subject(groups[i].first, groups[i].second, catalog, config);
  });
  result.summary = summarize(result.estimates);
  return result;
}

void write_estimates(std::ostream& out, const std::vector<SubjectEstimate>& estimates) {
  out << kEstimatesHeader << '\n';
  for (const SubjectEstimate& e : estimates) {
    out << csv::escape(e.subject_id);
    for (double v : e.params.as_array()) out << ',' << csv::format_double(v);
    out << ',' << csv::format_double(e.log_likelihood) << ',' << to_string(e.status) << '\n';
  }
}

std::vector<EstimateRow> read_estimates(const std::filesystem::path& path) {
  const csv::Table table = csv::read_file(path);
  csv::require_header(table, {"subject_id", "alpha", "delta", "gamma", "lambda", "mu", "loglik",
                              "status"});
  std::vector<EstimateRow> out;
  for (const csv::Row& row : table.rows) {
    EstimateRow e;
    e.subject_id = row.fields[0];
    std::array<double, kParams> v{};
    for (std::size_t k = 0; k < kParams; ++k) {
      // Failed estimates may carry non-finite values.
      const std::string& f = row.fields[k + 1];
      v[k] = (f == "inf" || f == "-inf" || f == "nan") ? std::nan("") : csv::parse_double(table, row, k + 1);
    }
    e.params = PreferenceParams::from_array(v);
    const std::string& ll = row.fields[6];
    e.log_likelihood = (ll == "-inf" || ll == "inf" || ll == "nan") ? kNegInf
                                                                    : csv::parse_double(table, row, 6);
    try {
      e.status = parse_estimate_status(row.fields[7]);
    } catch (const ValidationError& err) {
      throw ParseError(table.source, row.line, err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace debtav
