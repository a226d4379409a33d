#include "debtav/model.hpp"

#include <cmath>
#include <string>

#include "debtav/errors.hpp"

namespace debtav {

namespace {

bool finite(double v) { return std::isfinite(v); }

// Unchecked kernels shared by the value and gradient paths.
struct GainTerm {
  double u;
  double du_dalpha;
};

GainTerm gain_term(double x, double alpha, double epsilon) {
  const double beta = 1.0 - alpha;
  const double a = x + epsilon;
  const double a_pow = std::pow(a, beta);
  const double e_pow = std::pow(epsilon, beta);
  const double u = (a_pow - e_pow) / beta;
  const double dbeta = (a_pow * std::log(a) - e_pow * std::log(epsilon)) / beta - u / beta;
  return {u, -dbeta};
}

struct ValueTerm {
  double v;
  double dv_dalpha;
  double dv_dlambda;
};

ValueTerm value_term(double x, double alpha, double lambda, double epsilon) {
  if (x >= 0.0) {
    const GainTerm g = gain_term(x, alpha, epsilon);
    return {g.u, g.du_dalpha, 0.0};
  }
  const GainTerm g = gain_term(-x, alpha, epsilon);
  return {-lambda * g.u, -lambda * g.du_dalpha, -g.u};
}

void check_curvature(double alpha) {
  if (!finite(alpha) || alpha == 1.0) {
    throw DomainError("alpha must be finite and different from 1, got " + std::to_string(alpha));
  }
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !finite(epsilon)) {
    throw DomainError("epsilon must be positive, got " + std::to_string(epsilon));
  }
}

}  // namespace

void validate(const PaymentStream& stream) {
  if (!finite(stream.x_t) || !finite(stream.x_T) || !finite(stream.t) || !finite(stream.T)) {
    throw ValidationError("payment stream has non-finite fields");
  }
  if (stream.t < 0.0 || !(stream.T > stream.t)) {
    throw ValidationError("payment stream requires T > t >= 0");
  }
}

Prospect::Prospect(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) {
    throw ValidationError("prospect needs at least one branch");
  }
  double total = 0.0;
  for (const Branch& b : branches_) {
    validate(b.stream);
    if (!(b.probability >= 0.0 && b.probability <= 1.0)) {
      throw ValidationError("branch probability outside [0,1]: " + std::to_string(b.probability));
    }
    total += b.probability;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError("branch probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

Prospect Prospect::certain(const PaymentStream& stream) {
  return Prospect({Branch{stream, 1.0}});
}

void validate(const PreferenceParams& p) {
  for (double v : p.as_array()) {
    if (!finite(v)) throw DomainError("preference parameters must be finite");
  }
  check_curvature(p.alpha);
  if (!(p.delta > -1.0)) throw DomainError("delta must exceed -1");
  if (!(p.lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(p.mu > 0.0)) throw DomainError("mu must be positive");
}

double gain_utility(double x, double alpha, double epsilon) {
  if (!(x >= 0.0)) throw DomainError("gain_utility requires x >= 0");
  check_epsilon(epsilon);
  check_curvature(alpha);
  return gain_term(x, alpha, epsilon).u;
}

double value(double x, double alpha, double lambda, double epsilon) {
  if (!finite(x)) throw DomainError("value requires a finite amount");
  if (x >= 0.0) return gain_utility(x, alpha, epsilon);
  return -lambda * gain_utility(-x, alpha, epsilon);
}

double discount(double tau, double delta) {
  if (!(delta > -1.0)) throw DomainError("discount requires delta > -1");
  if (!(tau >= 0.0)) throw DomainError("discount requires tau >= 0");
  return std::pow(1.0 + delta, -tau);
}

bool is_debt_contract(const PaymentStream& stream) noexcept {
  return stream.x_t > 0.0 && stream.x_T < 0.0;
}

double debt_cost(const PaymentStream& stream, const PreferenceParams& params,
                 const UtilityConfig& config) {
  if (!is_debt_contract(stream)) return 0.0;
  return (1.0 - params.gamma) * discount(stream.T, params.delta) *
         value(stream.x_T, params.alpha, params.lambda, config.epsilon);
}

double stream_utility(const PaymentStream& stream, const PreferenceParams& params,
                      const UtilityConfig& config) {
  const double now = discount(stream.t, params.delta) *
                     value(stream.x_t, params.alpha, params.lambda, config.epsilon);
  const double later = discount(stream.T, params.delta) *
                       value(stream.x_T, params.alpha, params.lambda, config.epsilon);
  return now + later - debt_cost(stream, params, config);
}

double prospect_utility(const Prospect& prospect, const PreferenceParams& params,
                        const UtilityConfig& config) {
  double total = 0.0;
  for (const Branch& b : prospect.branches()) {
    total += b.probability * stream_utility(b.stream, params, config);
  }
  return total;
}

double logistic(double xi) noexcept {
  if (xi >= 0.0) return 1.0 / (1.0 + std::exp(-xi));
  const double e = std::exp(xi);
  return e / (1.0 + e);
}

double log_logistic(double xi) noexcept {
  if (xi >= 0.0) return -std::log1p(std::exp(-xi));
  return xi - std::log1p(std::exp(xi));
}

double log_one_minus_logistic(double xi) noexcept { return log_logistic(-xi); }

double choice_probability(const Prospect& option_a, const Prospect& option_b,
                          const PreferenceParams& params, const UtilityConfig& config) {
  if (!(params.mu > 0.0)) throw DomainError("choice_probability requires mu > 0");
  const double diff =
      prospect_utility(option_b, params, config) - prospect_utility(option_a, params, config);
  return logistic(diff / params.mu);
}

UtilityWithGradient prospect_utility_with_gradient(const Prospect& prospect,
                                                   const PreferenceParams& params,
                                                   const UtilityConfig& config) {
  validate(params);
  check_epsilon(config.epsilon);
  return detail::utility_with_gradient_unchecked(prospect, params, config);
}

UtilityWithGradient detail::utility_with_gradient_unchecked(const Prospect& prospect,
                                                            const PreferenceParams& params,
                                                            const UtilityConfig& config) {
  UtilityWithGradient out;
  const double log_base = std::log1p(params.delta);
  for (const Branch& b : prospect.branches()) {
    const PaymentStream& s = b.stream;
    const double phi_t = std::exp(-s.t * log_base);
    const double phi_T = std::exp(-s.T * log_base);
    const double dphi_t = -s.t * phi_t / (1.0 + params.delta);
    const double dphi_T = -s.T * phi_T / (1.0 + params.delta);
    const ValueTerm now = value_term(s.x_t, params.alpha, params.lambda, config.epsilon);
    const ValueTerm later = value_term(s.x_T, params.alpha, params.lambda, config.epsilon);
    // For debt contracts the later term is scaled by gamma once the cost is netted out.
    const bool debt = is_debt_contract(s);
    const double scale = debt ? params.gamma : 1.0;

    const double u = phi_t * now.v + scale * phi_T * later.v;
    const double du_dalpha = phi_t * now.dv_dalpha + scale * phi_T * later.dv_dalpha;
    const double du_ddelta = dphi_t * now.v + scale * dphi_T * later.v;
    const double du_dgamma = debt ? phi_T * later.v : 0.0;
    const double du_dlambda = phi_t * now.dv_dlambda + scale * phi_T * later.dv_dlambda;

    out.utility += b.probability * u;
    out.gradient[0] += b.probability * du_dalpha;
    out.gradient[1] += b.probability * du_ddelta;
    out.gradient[2] += b.probability * du_dgamma;
    out.gradient[3] += b.probability * du_dlambda;
  }
  return out;
}

ProbabilityWithGradient choice_probability_with_gradient(const Prospect& option_a,
                                                         const Prospect& option_b,
                                                         const PreferenceParams& params,
                                                         const UtilityConfig& config) {
  const UtilityWithGradient a = prospect_utility_with_gradient(option_a, params, config);
  const UtilityWithGradient b = prospect_utility_with_gradient(option_b, params, config);
  ProbabilityWithGradient out;
  out.scaled_difference = (b.utility - a.utility) / params.mu;
  out.probability = logistic(out.scaled_difference);
  const double slope = out.probability * (1.0 - out.probability);
  for (std::size_t k = 0; k < 4; ++k) {
    out.gradient[k] = slope * (b.gradient[k] - a.gradient[k]) / params.mu;
  }
  out.gradient[4] = -slope * out.scaled_difference / params.mu;
  return out;
}

}  // namespace debtav
