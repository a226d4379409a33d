#pragma once

// The two-item survey module: gamma-hat as an affine function of Likert
// answers, with answers on other scales mapped onto the native one first.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace debtav {

struct ModuleItem {
  std::string id;
  std::string prompt;
  double weight = 0.0;
  double scale_min = 1.0;  ///< native scale
  double scale_max = 6.0;
};

struct SurveyModuleSpec {
  std::string version;
  double intercept = 0.0;
  std::vector<ModuleItem> items;

  /// Throws ValidationError without items, with duplicate ids or with l >= h.
  void validate() const;
  const ModuleItem* find(const std::string& id) const;

  nlohmann::json to_json() const;
  static SurveyModuleSpec from_json(const nlohmann::json& doc);
  static SurveyModuleSpec load(const std::filesystem::path& path);

  /// Intercept 1.0694, Q1 weight +0.0045, Q2 weight -0.0067, both on 1-6.
  static SurveyModuleSpec builtin();
};

/// ((x - l) / (h - l)) * 5 + 1. Throws RangeError outside [l, h] and
/// ValidationError when l >= h.
double rescale_likert(double x, double l, double h);

/// Affine map of x from [l, h] onto [native_min, native_max].
double rescale(double x, double l, double h, double native_min, double native_max);

struct ModuleAnswer {
  std::string item_id;
  double value = 0.0;
  std::optional<double> scale_min;  ///< defaults to the item's native scale
  std::optional<double> scale_max;
};

enum class DebtClass { averse, neutral, affine };
std::string to_string(DebtClass c);
/// Within 1e-12 of 1 is neutral.
DebtClass classify_gamma(double gamma_hat);

struct PredictionTerm {
  std::string item_id;
  double answer = 0.0;    ///< as supplied
  double rescaled = 0.0;  ///< on the native scale
  double weight = 0.0;
  double contribution = 0.0;
};

struct Prediction {
  double gamma_hat = 0.0;
  DebtClass classification = DebtClass::neutral;
  double intercept = 0.0;
  std::vector<PredictionTerm> terms;  ///< spec item order
  std::string module_version;
};

/// Exactly one answer per module item. Missing, unknown or repeated items
/// throw ValidationError; values off their scale throw RangeError.
Prediction predict_gamma(const SurveyModuleSpec& spec, std::span<const ModuleAnswer> answers);

/// "1.0694 + 0.0045*5 - 0.0067*2 = 1.0785"
std::string format_decomposition(const Prediction& p);
/// Plain decimal with 4 places, for display.
std::string format_gamma(double gamma_hat);

nlohmann::json to_json(const Prediction& p);

/// Reads a responses CSV (subject_id,item_id,value; values on native
/// scales), predicts every subject that answered all module items, and writes
/// subject_id,gamma_hat,classification. Rows for other items are ignored.
/// Returns the ids of subjects missing a module item.
std::vector<std::string> predict_batch(const SurveyModuleSpec& spec, std::istream& in,
                                       const std::string& source, std::ostream& out);

inline constexpr const char* kPredictionsHeader = "subject_id,gamma_hat,classification";

}  // namespace debtav
