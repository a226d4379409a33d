#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "debtav/model.hpp"

namespace debtav {

struct NormalDensity {
  double mean = 0.0;
  double sd = 1.0;

  double log_pdf(double x) const;
};

/// Independent normal population densities for (alpha, delta, gamma, lambda).
/// The noise scale mu has no population density.
struct PopulationDistribution {
  NormalDensity alpha{0.3, 0.15};
  NormalDensity delta{0.02, 0.01};
  NormalDensity gamma{1.05, 0.03};
  NormalDensity lambda{1.5, 0.3};

  /// Throws ValidationError unless every sd is positive and finite.
  void validate() const;
  /// log d(alpha) + log d(delta) + log d(gamma) + log d(lambda)
  double log_density(const PreferenceParams& p) const;
  /// Population means with the given noise scale.
  PreferenceParams mean_params(double mu) const;

  nlohmann::json to_json() const;
  static PopulationDistribution from_json(const nlohmann::json& doc);
  static PopulationDistribution load(const std::filesystem::path& path);
};

}  // namespace debtav
