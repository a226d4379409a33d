#include "debtav/service.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "debtav/csv.hpp"
#include "debtav/errors.hpp"
#include "debtav/staircase.hpp"

namespace debtav {

using nlohmann::json;

namespace {

struct FieldError {
  std::string field;
  std::string message;
};

HttpResponse reply(int status, json body) {
  body["schema_version"] = kServiceSchemaVersion;
  return {status, body.dump()};
}

HttpResponse error_reply(int status, const std::string& message,
                         const std::vector<FieldError>& fields = {}) {
  json j;
  j["error"] = message;
  j["fields"] = json::array();
  for (const FieldError& f : fields) j["fields"].push_back({{"field", f.field}, {"message", f.message}});
  return reply(status, std::move(j));
}

// Outcome of decoding the shared "answers" payload.
struct Decoded {
  std::vector<ModuleAnswer> answers;
  std::vector<FieldError> malformed;     // -> 400
  std::vector<FieldError> out_of_range;  // -> 422
};

Decoded decode_answers(const json& doc, const SurveyModuleSpec& spec) {
  Decoded d;
  if (!doc.contains("answers")) {
    d.malformed.push_back({"answers", "required"});
    return d;
  }
  const json& list = doc["answers"];
  if (!list.is_array()) {
    d.malformed.push_back({"answers", "must be an array"});
    return d;
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = "answers[" + std::to_string(i) + "]";
    const json& a = list[i];
    if (!a.is_object()) {
      d.malformed.push_back({at, "must be an object"});
      continue;
    }
    ModuleAnswer ans;
    bool ok = true;
    if (!a.contains("item_id") || !a["item_id"].is_string()) {
      d.malformed.push_back({at + ".item_id", "required string"});
      ok = false;
    } else {
      ans.item_id = a["item_id"].get<std::string>();
      if (!spec.find(ans.item_id)) {
        d.malformed.push_back({at + ".item_id", "unknown item '" + ans.item_id + "'"});
        ok = false;
      } else if (!seen.insert(ans.item_id).second) {
        d.malformed.push_back({at + ".item_id", "item answered twice"});
        ok = false;
      }
    }
    if (!a.contains("value") || !a["value"].is_number()) {
      d.malformed.push_back({at + ".value", "required number"});
      ok = false;
    } else {
      ans.value = a["value"].get<double>();
    }
    for (const char* key : {"scale_min", "scale_max"}) {
      if (!a.contains(key) || a[key].is_null()) continue;
      if (!a[key].is_number()) {
        d.malformed.push_back({at + "." + key, "must be a number"});
        ok = false;
        continue;
      }
      (std::string(key) == "scale_min" ? ans.scale_min : ans.scale_max) = a[key].get<double>();
    }
    if (!ok) continue;
    const ModuleItem& item = *spec.find(ans.item_id);
    const double l = ans.scale_min.value_or(item.scale_min);
    const double h = ans.scale_max.value_or(item.scale_max);
    if (!(l < h)) {
      d.malformed.push_back({at + ".scale_min", "scale_min must be below scale_max"});
      continue;
    }
    if (ans.value < l || ans.value > h) {
      d.out_of_range.push_back({at + ".value", "outside scale [" + format_gamma(l) + ", " +
                                                   format_gamma(h) + "]"});
    }
    d.answers.push_back(std::move(ans));
  }
  for (const ModuleItem& item : spec.items) {
    if (!seen.count(item.id)) d.malformed.push_back({"answers", "missing item '" + item.id + "'"});
  }
  return d;
}

std::optional<json> parse_body(std::string_view body) {
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return doc;
}

}  // namespace

// ---------------------------------------------------------------------------

ResponseStore::ResponseStore(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0) return;
  const csv::Table table = csv::read_file(path_);
  csv::require_header(table, {"subject_id", "item_id", "value"});
  for (const csv::Row& r : table.rows) subjects_.insert(r.fields[0]);
}

bool ResponseStore::contains(const std::string& subject_id) const {
  std::lock_guard lock(mutex_);
  return subjects_.count(subject_id) > 0;
}

bool ResponseStore::append(const std::vector<SurveyResponse>& rows) {
  std::lock_guard lock(mutex_);
  std::set<std::string> incoming;
  for (const SurveyResponse& r : rows) incoming.insert(r.subject_id);
  for (const std::string& s : incoming) {
    if (subjects_.count(s)) return false;
  }
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path_.string());
  if (fresh) out << kResponsesHeader << '\n';
  for (const SurveyResponse& r : rows) write_response_row(out, r);
  out.flush();
  if (!out) throw std::runtime_error("write to " + path_.string() + " failed");
  subjects_.insert(incoming.begin(), incoming.end());
  return true;
}

// ---------------------------------------------------------------------------

Service::Service(SurveyModuleSpec spec, ResponseStore* store)
    : spec_(std::move(spec)), store_(store) {
  spec_.validate();
}

HttpResponse Service::get_module() const { return reply(200, spec_.to_json()); }

HttpResponse Service::get_staircase() const { return reply(200, staircase_to_json()); }

HttpResponse Service::post_predict(std::string_view body) const {
  const auto doc = parse_body(body);
  if (!doc) return error_reply(400, "body must be a JSON object", {{"body", "invalid JSON object"}});
  const Decoded d = decode_answers(*doc, spec_);
  if (!d.malformed.empty()) return error_reply(400, "malformed request", d.malformed);
  if (!d.out_of_range.empty()) return error_reply(422, "answer out of range", d.out_of_range);
  return reply(200, to_json(predict_gamma(spec_, d.answers)));
}

HttpResponse Service::post_responses(std::string_view body) {
  if (!store_) return error_reply(503, "response storage is not configured");
  const auto doc = parse_body(body);
  if (!doc) return error_reply(400, "body must be a JSON object", {{"body", "invalid JSON object"}});

  Decoded d = decode_answers(*doc, spec_);
  std::string subject;
  if (!doc->contains("subject_id") || !(*doc)["subject_id"].is_string() ||
      (*doc)["subject_id"].get<std::string>().empty()) {
    d.malformed.push_back({"subject_id", "required non-empty string"});
  } else {
    subject = (*doc)["subject_id"].get<std::string>();
  }

  std::optional<Switchpoint> sp;
  if (doc->contains("staircase") && !(*doc)["staircase"].is_null()) {
    const json& path = (*doc)["staircase"];
    if (!path.is_array() || path.size() != static_cast<std::size_t>(kStaircaseDepth)) {
      d.malformed.push_back({"staircase", "must be an array of four answers"});
    } else {
      std::vector<Answer> answers;
      for (std::size_t i = 0; i < path.size(); ++i) {
        try {
          if (!path[i].is_string()) throw ValidationError("expected \"accept\" or \"reject\"");
          answers.push_back(parse_answer(path[i].get<std::string>()));
        } catch (const ValidationError& e) {
          d.malformed.push_back({"staircase[" + std::to_string(i) + "]", e.what()});
        }
      }
      if (answers.size() == path.size()) sp = staircase_switchpoint(answers);
    }
  }
  if (doc->contains("switchpoint") && !(*doc)["switchpoint"].is_null()) {
    const json& v = (*doc)["switchpoint"];
    if (!v.is_number_integer()) {
      d.malformed.push_back({"switchpoint", "must be an integer"});
    } else if (v.get<long long>() < 1 || v.get<long long>() > kStaircaseSwitchpoints) {
      d.out_of_range.push_back({"switchpoint", "must lie in 1..16"});
    } else if (sp && sp->value != v.get<int>()) {
      d.malformed.push_back({"switchpoint", "disagrees with the staircase answers"});
    } else {
      sp = make_switchpoint(v.get<int>());
    }
  }
  if (!d.malformed.empty()) return error_reply(400, "malformed request", d.malformed);
  if (!d.out_of_range.empty()) return error_reply(422, "answer out of range", d.out_of_range);

  const Prediction p = predict_gamma(spec_, d.answers);
  std::vector<SurveyResponse> rows;
  for (const PredictionTerm& t : p.terms) rows.push_back({subject, t.item_id, t.rescaled});
  if (sp) rows.push_back({subject, kSwitchpointItem, static_cast<double>(sp->value)});
  if (!store_->append(rows)) {
    return error_reply(409, "responses for this subject are already stored",
                       {{"subject_id", "duplicate"}});
  }
  json out = to_json(p);
  out["subject_id"] = subject;
  out["stored_rows"] = rows.size();
  if (sp) out["switchpoint"] = sp->value;
  return reply(201, std::move(out));
}

}  // namespace debtav
