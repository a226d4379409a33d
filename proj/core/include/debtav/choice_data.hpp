#pragma once

// Multiple price lists, observed binary choices and survey responses, with
// their file formats (JSON catalogs, CSV records). See docs/file_formats.md.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "debtav/model.hpp"

namespace debtav {

struct MplRow {
  Prospect option_a;
  Prospect option_b;
  std::string label;  ///< free text, may be empty
};

/// An ordered list of binary decisions. Row order is part of its identity.
struct MPLSpec {
  std::string id;
  std::string description;
  std::vector<MplRow> rows;
};

class MplCatalog {
 public:
  MplCatalog() = default;
  explicit MplCatalog(std::vector<MPLSpec> mpls);

  const std::vector<MPLSpec>& mpls() const noexcept { return mpls_; }
  const MPLSpec* find(const std::string& id) const;
  const MPLSpec& at(const std::string& id) const;
  std::size_t total_rows() const;

  nlohmann::json to_json() const;
  static MplCatalog from_json(const nlohmann::json& doc);
  static MplCatalog load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<MPLSpec> mpls_;
  std::map<std::string, std::size_t> index_;
};

/// One observed decision. chosen = 0 for option A, 1 for option B.
/// row_index is 0-based within the referenced list.
struct ChoiceRecord {
  std::string subject_id;
  std::string mpl_id;
  std::size_t row_index = 0;
  int chosen = 0;

  friend bool operator==(const ChoiceRecord&, const ChoiceRecord&) = default;
};

struct ChoiceData {
  std::vector<ChoiceRecord> records;
  std::map<std::string, std::size_t> per_subject;  ///< choice count per subject
  std::vector<std::string> warnings;
};

/// Reads `subject_id,mpl_id,row_index,chosen`. Rejects unknown lists or rows,
/// duplicate (subject, list, row) triples and chosen values other than 0/1.
ChoiceData load_choices(const std::filesystem::path& path, const MplCatalog& catalog);
ChoiceData parse_choices(std::istream& in, const std::string& source, const MplCatalog& catalog);
void write_choices(std::ostream& out, const std::vector<ChoiceRecord>& records);

/// Groups records by subject, preserving first-appearance order of subjects.
std::vector<std::pair<std::string, std::vector<ChoiceRecord>>> group_by_subject(
    const std::vector<ChoiceRecord>& records);

// ---------------------------------------------------------------------------
// Survey items and responses

enum class ScaleKind { likert, yes_no, integer, categorical, switchpoint };

std::string to_string(ScaleKind kind);
ScaleKind parse_scale_kind(const std::string& name);

enum class ExclusionReason { education_specific, no_directional_hypothesis, counter_directional };

std::string to_string(ExclusionReason reason);
ExclusionReason parse_exclusion_reason(const std::string& name);

struct ItemDefinition {
  std::string id;
  int number = 0;  ///< position in the printed pool, 0 when not applicable
  std::string text;
  std::string cluster;
  ScaleKind scale = ScaleKind::likert;
  double scale_min = 1.0;
  double scale_max = 6.0;
  std::vector<std::string> categories;  ///< labels for categorical items, coded from scale_min
  bool directional_hypothesis = true;
  std::optional<ExclusionReason> exclusion;
};

class ItemCatalog {
 public:
  ItemCatalog() = default;
  explicit ItemCatalog(std::vector<ItemDefinition> items);

  const std::vector<ItemDefinition>& items() const noexcept { return items_; }
  const ItemDefinition* find(const std::string& id) const;

  nlohmann::json to_json() const;
  static ItemCatalog from_json(const nlohmann::json& doc);
  static ItemCatalog load(const std::filesystem::path& path);

 private:
  std::vector<ItemDefinition> items_;
  std::map<std::string, std::size_t> index_;
};

struct SurveyResponse {
  std::string subject_id;
  std::string item_id;
  double value = 0.0;  ///< coded: Likert 1-6, yes=1/no=0, category code, amount, SP 1-16

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) = default;
};

/// Converts a raw cell to its numeric code for the given item, validating
/// it against the item's declared scale.
double code_response(const ItemDefinition& item, const std::string& raw);

/// Reads `subject_id,item_id,value`; every item must exist in the catalog.
std::vector<SurveyResponse> load_responses(const std::filesystem::path& path,
                                           const ItemCatalog& catalog);
std::vector<SurveyResponse> parse_responses(std::istream& in, const std::string& source,
                                            const ItemCatalog& catalog);
void write_responses(std::ostream& out, const std::vector<SurveyResponse>& responses);
void write_response_row(std::ostream& out, const SurveyResponse& response);

inline constexpr const char* kChoicesHeader = "subject_id,mpl_id,row_index,chosen";
inline constexpr const char* kResponsesHeader = "subject_id,item_id,value";

}  // namespace debtav
