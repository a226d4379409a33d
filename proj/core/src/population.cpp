#include "debtav/population.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "debtav/errors.hpp"

namespace debtav {

double NormalDensity::log_pdf(double x) const {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

void PopulationDistribution::validate() const {
  for (const NormalDensity* d : {&alpha, &delta, &gamma, &lambda}) {
    if (!(d->sd > 0.0) || !std::isfinite(d->sd) || !std::isfinite(d->mean)) {
      throw ValidationError("population densities need finite means and positive sd");
    }
  }
}

double PopulationDistribution::log_density(const PreferenceParams& p) const {
  return alpha.log_pdf(p.alpha) + delta.log_pdf(p.delta) + gamma.log_pdf(p.gamma) +
         lambda.log_pdf(p.lambda);
}

PreferenceParams PopulationDistribution::mean_params(double mu) const {
  return {alpha.mean, delta.mean, gamma.mean, lambda.mean, mu};
}

nlohmann::json PopulationDistribution::to_json() const {
  auto d = [](const NormalDensity& n) { return nlohmann::json{{"mean", n.mean}, {"sd", n.sd}}; };
  return {{"schema_version", 1},
          {"alpha", d(alpha)},
          {"delta", d(delta)},
          {"gamma", d(gamma)},
          {"lambda", d(lambda)}};
}

PopulationDistribution PopulationDistribution::from_json(const nlohmann::json& doc) {
  PopulationDistribution pop;
  try {
    auto d = [&](const char* key) {
      const auto& j = doc.at(key);
      return NormalDensity{j.at("mean").get<double>(), j.at("sd").get<double>()};
    };
    pop.alpha = d("alpha");
    pop.delta = d("delta");
    pop.gamma = d("gamma");
    pop.lambda = d("lambda");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("population: ") + e.what());
  }
  pop.validate();
  return pop;
}

PopulationDistribution PopulationDistribution::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace debtav
