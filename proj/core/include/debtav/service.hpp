#pragma once

// Transport-independent handlers behind the HTTP service. Every JSON body
// carries "schema_version".

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "debtav/choice_data.hpp"
#include "debtav/predictor.hpp"

namespace debtav {

inline constexpr int kServiceSchemaVersion = 1;
inline constexpr const char* kSwitchpointItem = "SP";

struct HttpResponse {
  int status = 200;
  std::string body;  ///< JSON
};

/// Appends submitted questionnaires to a responses CSV. One writer at a time.
class ResponseStore {
 public:
  explicit ResponseStore(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }
  bool contains(const std::string& subject_id) const;
  /// Returns false (and writes nothing) when the subject was already stored.
  bool append(const std::vector<SurveyResponse>& rows);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::set<std::string> subjects_;
};

class Service {
 public:
  /// Without a store, POST /responses answers 503.
  explicit Service(SurveyModuleSpec spec, ResponseStore* store = nullptr);

  HttpResponse get_module() const;
  HttpResponse get_staircase() const;
  /// {"answers":[{"item_id","value","scale_min"?,"scale_max"?}]}
  HttpResponse post_predict(std::string_view body) const;
  /// As /predict plus "subject_id" and optionally "staircase" (four
  /// "accept"/"reject" strings) or "switchpoint" (1..16).
  HttpResponse post_responses(std::string_view body);

  const SurveyModuleSpec& spec() const noexcept { return spec_; }

 private:
  SurveyModuleSpec spec_;
  ResponseStore* store_;
};

}  // namespace debtav
