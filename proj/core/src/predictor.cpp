#include "debtav/predictor.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "debtav/csv.hpp"
#include "debtav/errors.hpp"

namespace debtav {

void SurveyModuleSpec::validate() const {
  if (items.empty()) throw ValidationError("module spec needs at least one item");
  if (!std::isfinite(intercept)) throw ValidationError("module intercept must be finite");
  std::set<std::string> ids;
  for (const ModuleItem& it : items) {
    if (it.id.empty()) throw ValidationError("module item without id");
    if (!ids.insert(it.id).second) throw ValidationError("duplicate module item '" + it.id + "'");
    if (!std::isfinite(it.weight)) throw ValidationError("weight of '" + it.id + "' is not finite");
    if (!(it.scale_min < it.scale_max)) {
      throw ValidationError("item '" + it.id + "' needs scale_min < scale_max");
    }
  }
}

const ModuleItem* SurveyModuleSpec::find(const std::string& id) const {
  for (const ModuleItem& it : items) {
    if (it.id == id) return &it;
  }
  return nullptr;
}

nlohmann::json SurveyModuleSpec::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["version"] = version;
  j["intercept"] = intercept;
  j["items"] = nlohmann::json::array();
  for (const ModuleItem& it : items) {
    j["items"].push_back({{"id", it.id},
                          {"prompt", it.prompt},
                          {"weight", it.weight},
                          {"scale_min", it.scale_min},
                          {"scale_max", it.scale_max}});
  }
  return j;
}

SurveyModuleSpec SurveyModuleSpec::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != 1) throw ParseError("unsupported module schema_version");
    SurveyModuleSpec s;
    s.version = doc.at("version").get<std::string>();
    s.intercept = doc.at("intercept").get<double>();
    for (const auto& j : doc.at("items")) {
      ModuleItem it;
      it.id = j.at("id").get<std::string>();
      it.prompt = j.value("prompt", std::string{});
      it.weight = j.at("weight").get<double>();
      it.scale_min = j.value("scale_min", 1.0);
      it.scale_max = j.value("scale_max", 6.0);
      s.items.push_back(std::move(it));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("module spec: ") + e.what());
  }
}

SurveyModuleSpec SurveyModuleSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open module spec " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

SurveyModuleSpec SurveyModuleSpec::builtin() {
  SurveyModuleSpec s;
  s.version = "debt-module-1";
  s.intercept = 1.0694;
  s.items = {
      {"Q1", "Placeholder prompt for item Q1 (6-point agreement scale).", 0.0045, 1.0, 6.0},
      {"Q2", "Placeholder prompt for item Q2, about what most other people think (6-point scale).",
       -0.0067, 1.0, 6.0},
  };
  return s;
}

double rescale(double x, double l, double h, double native_min, double native_max) {
  if (!(l < h)) throw ValidationError("scale needs min < max");
  if (!std::isfinite(x)) throw ValidationError("answer must be a finite number");
  if (x < l || x > h) {
    throw RangeError("answer " + format_gamma(x) + " outside scale [" + format_gamma(l) + ", " +
                     format_gamma(h) + "]");
  }
  return native_min + (x - l) / (h - l) * (native_max - native_min);
}

double rescale_likert(double x, double l, double h) { return rescale(x, l, h, 1.0, 6.0); }

std::string to_string(DebtClass c) {
  switch (c) {
    case DebtClass::averse: return "debt_averse";
    case DebtClass::neutral: return "debt_neutral";
    case DebtClass::affine: return "debt_affine";
  }
  return "debt_neutral";
}

DebtClass classify_gamma(double g) {
  if (std::abs(g - 1.0) <= 1e-12) return DebtClass::neutral;
  return g > 1.0 ? DebtClass::averse : DebtClass::affine;
}

Prediction predict_gamma(const SurveyModuleSpec& spec, std::span<const ModuleAnswer> answers) {
  std::map<std::string, const ModuleAnswer*> given;
  for (const ModuleAnswer& a : answers) {
    if (!spec.find(a.item_id)) throw ValidationError("unknown item '" + a.item_id + "'");
    if (!given.emplace(a.item_id, &a).second) {
      throw ValidationError("item '" + a.item_id + "' answered twice");
    }
  }
  Prediction p;
  p.intercept = spec.intercept;
  p.module_version = spec.version;
  p.gamma_hat = spec.intercept;
  for (const ModuleItem& item : spec.items) {
    auto it = given.find(item.id);
    if (it == given.end()) throw ValidationError("missing answer for item '" + item.id + "'");
    const ModuleAnswer& a = *it->second;
    const double l = a.scale_min.value_or(item.scale_min);
    const double h = a.scale_max.value_or(item.scale_max);
    PredictionTerm t;
    t.item_id = item.id;
    t.answer = a.value;
    t.rescaled = rescale(a.value, l, h, item.scale_min, item.scale_max);
    t.weight = item.weight;
    t.contribution = item.weight * t.rescaled;
    p.gamma_hat += t.contribution;
    p.terms.push_back(t);
  }
  p.classification = classify_gamma(p.gamma_hat);
  return p;
}

namespace {
std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}
}  // namespace

std::string format_gamma(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
  return std::string(buf, r.ptr);
}

std::string format_decomposition(const Prediction& p) {
  std::string s = shortest(p.intercept);
  for (const PredictionTerm& t : p.terms) {
    s += t.weight < 0 ? " - " : " + ";
    s += shortest(std::abs(t.weight)) + "*" + shortest(t.rescaled);
  }
  return s + " = " + format_gamma(p.gamma_hat);
}

nlohmann::json to_json(const Prediction& p) {
  nlohmann::json j;
  j["gamma_hat"] = p.gamma_hat;
  j["gamma_hat_display"] = format_gamma(p.gamma_hat);
  j["classification"] = to_string(p.classification);
  j["intercept"] = p.intercept;
  j["module_version"] = p.module_version;
  j["terms"] = nlohmann::json::array();
  for (const PredictionTerm& t : p.terms) {
    j["terms"].push_back({{"item_id", t.item_id},
                          {"answer", t.answer},
                          {"rescaled", t.rescaled},
                          {"weight", t.weight},
                          {"contribution", t.contribution}});
  }
  return j;
}

std::vector<std::string> predict_batch(const SurveyModuleSpec& spec, std::istream& in,
                                       const std::string& source, std::ostream& out) {
  spec.validate();
  const csv::Table table = csv::parse(in, source);
  if (table.header.empty()) {
    out << kPredictionsHeader << '\n';
    return {};
  }
  csv::require_header(table, {"subject_id", "item_id", "value"});
  std::vector<std::string> order;
  std::map<std::string, std::vector<ModuleAnswer>> answers;
  for (const csv::Row& row : table.rows) {
    const std::string& subject = row.fields[0];
    if (!answers.count(subject)) order.push_back(subject);
    auto& list = answers[subject];
    if (!spec.find(row.fields[1])) continue;
    for (const ModuleAnswer& a : list) {
      if (a.item_id == row.fields[1]) {
        throw ParseError(table.source, row.line, "duplicate response for item '" + row.fields[1] + "'");
      }
    }
    list.push_back({row.fields[1], csv::parse_double(table, row, 2), std::nullopt, std::nullopt});
  }
  out << kPredictionsHeader << '\n';
  std::vector<std::string> incomplete;
  for (const std::string& subject : order) {
    const auto& list = answers[subject];
    if (list.size() != spec.items.size()) {
      incomplete.push_back(subject);
      continue;
    }
    Prediction p;
    try {
      p = predict_gamma(spec, list);
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": subject '" + subject + "': " + e.what());
    }
    out << csv::escape(subject) << ',' << csv::format_double(p.gamma_hat) << ','
        << to_string(p.classification) << '\n';
  }
  return incomplete;
}

}  // namespace debtav
