#pragma once

// Structural intertemporal utility over two-dated payment streams and the
// logit choice rule used throughout estimation and simulation.

#include <array>
#include <span>
#include <vector>

namespace debtav {

/// Payment x_t at time t and x_T at time T (periods, T > t >= 0).
struct PaymentStream {
  double x_t = 0.0;
  double x_T = 0.0;
  double t = 0.0;
  double T = 1.0;

  friend bool operator==(const PaymentStream&, const PaymentStream&) = default;
};

/// Throws ValidationError unless T > t >= 0 and all fields are finite.
void validate(const PaymentStream& stream);

struct Branch {
  PaymentStream stream;
  double probability = 1.0;

  friend bool operator==(const Branch&, const Branch&) = default;
};

/// A probabilistic mixture over payment streams. Construction validates that
/// probabilities lie in [0,1] and sum to one within 1e-9; nothing is
/// renormalised.
class Prospect {
 public:
  static constexpr double kProbabilityTolerance = 1e-9;

  explicit Prospect(std::vector<Branch> branches);
  static Prospect certain(const PaymentStream& stream);

  std::span<const Branch> branches() const noexcept { return branches_; }

  friend bool operator==(const Prospect&, const Prospect&) = default;

 private:
  std::vector<Branch> branches_;
};

/// theta = (alpha, delta, gamma, lambda, mu).
struct PreferenceParams {
  double alpha = 0.0;   ///< utility curvature, alpha != 1
  double delta = 0.0;   ///< per-period discount rate, > -1
  double gamma = 1.0;   ///< debt aversion (1 = neutral)
  double lambda = 1.0;  ///< loss aversion, > 0
  double mu = 1.0;      ///< logit noise scale, > 0

  static constexpr std::size_t kCount = 5;
  std::array<double, kCount> as_array() const { return {alpha, delta, gamma, lambda, mu}; }
  static PreferenceParams from_array(const std::array<double, kCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
};

/// Throws DomainError when lambda <= 0, mu <= 0, alpha == 1, delta <= -1 or
/// any entry is non-finite.
void validate(const PreferenceParams& params);

struct UtilityConfig {
  double epsilon = 1.0;  ///< utility offset in currency units, > 0
};

double gain_utility(double x, double alpha, double epsilon);
double value(double x, double alpha, double lambda, double epsilon);
double discount(double tau, double delta);
bool is_debt_contract(const PaymentStream& stream) noexcept;
double debt_cost(const PaymentStream& stream, const PreferenceParams& params,
                 const UtilityConfig& config);
double stream_utility(const PaymentStream& stream, const PreferenceParams& params,
                      const UtilityConfig& config);
double prospect_utility(const Prospect& prospect, const PreferenceParams& params,
                        const UtilityConfig& config);

/// Standard logistic cdf and its logarithms, evaluated without overflow.
double logistic(double xi) noexcept;
double log_logistic(double xi) noexcept;
double log_one_minus_logistic(double xi) noexcept;

/// Probability of choosing option B: F((U(B) - U(A)) / mu).
double choice_probability(const Prospect& option_a, const Prospect& option_b,
                          const PreferenceParams& params, const UtilityConfig& config);

/// Partial derivatives of a utility with respect to (alpha, delta, gamma, lambda).
using UtilityGradient = std::array<double, 4>;

struct UtilityWithGradient {
  double utility = 0.0;
  UtilityGradient gradient{};
};

UtilityWithGradient prospect_utility_with_gradient(const Prospect& prospect,
                                                   const PreferenceParams& params,
                                                   const UtilityConfig& config);

/// Choice probability together with its gradient in (alpha, delta, gamma, lambda, mu).
struct ProbabilityWithGradient {
  double probability = 0.0;
  double scaled_difference = 0.0;  ///< (U(B) - U(A)) / mu
  std::array<double, PreferenceParams::kCount> gradient{};
};

ProbabilityWithGradient choice_probability_with_gradient(const Prospect& option_a,
                                                         const Prospect& option_b,
                                                         const PreferenceParams& params,
                                                         const UtilityConfig& config);

namespace detail {
/// Same as prospect_utility_with_gradient without parameter validation; for
/// hot loops that validate once per evaluation.
UtilityWithGradient utility_with_gradient_unchecked(const Prospect& prospect,
                                                    const PreferenceParams& params,
                                                    const UtilityConfig& config);
}  // namespace detail

}  // namespace debtav
