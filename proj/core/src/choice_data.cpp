#include "debtav/choice_data.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "debtav/csv.hpp"
#include "debtav/errors.hpp"

namespace debtav {

using nlohmann::json;

namespace {

json stream_to_json(const Branch& b) {
  return json{{"p", b.probability},
              {"x_t", b.stream.x_t},
              {"x_T", b.stream.x_T},
              {"t", b.stream.t},
              {"T", b.stream.T}};
}

json prospect_to_json(const Prospect& p) {
  json out = json::array();
  for (const Branch& b : p.branches()) out.push_back(stream_to_json(b));
  return out;
}

Prospect prospect_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ValidationError(where + ": prospect must be an array of branches");
  std::vector<Branch> branches;
  for (const json& b : j) {
    Branch br;
    br.probability = b.value("p", 1.0);
    br.stream.x_t = b.at("x_t").get<double>();
    br.stream.x_T = b.at("x_T").get<double>();
    br.stream.t = b.value("t", 0.0);
    br.stream.T = b.at("T").get<double>();
    branches.push_back(br);
  }
  try {
    return Prospect(std::move(branches));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

MplCatalog::MplCatalog(std::vector<MPLSpec> mpls) : mpls_(std::move(mpls)) {
  for (std::size_t i = 0; i < mpls_.size(); ++i) {
    if (mpls_[i].rows.empty()) throw ValidationError("MPL '" + mpls_[i].id + "' has no rows");
    if (!index_.emplace(mpls_[i].id, i).second) {
      throw ValidationError("duplicate MPL id '" + mpls_[i].id + "'");
    }
  }
}

const MPLSpec* MplCatalog::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &mpls_[it->second];
}

const MPLSpec& MplCatalog::at(const std::string& id) const {
  if (const MPLSpec* m = find(id)) return *m;
  throw ValidationError("unknown MPL id '" + id + "'");
}

std::size_t MplCatalog::total_rows() const {
  std::size_t n = 0;
  for (const auto& m : mpls_) n += m.rows.size();
  return n;
}

json MplCatalog::to_json() const {
  json lists = json::array();
  for (const MPLSpec& m : mpls_) {
    json rows = json::array();
    for (const MplRow& r : m.rows) {
      json row{{"a", prospect_to_json(r.option_a)}, {"b", prospect_to_json(r.option_b)}};
      if (!r.label.empty()) row["label"] = r.label;
      rows.push_back(std::move(row));
    }
    lists.push_back(json{{"id", m.id}, {"description", m.description}, {"rows", rows}});
  }
  return json{{"schema_version", 1}, {"mpls", lists}};
}

MplCatalog MplCatalog::from_json(const json& doc) {
  try {
    if (doc.value("schema_version", 0) != 1) {
      throw ValidationError("MPL catalog: unsupported schema_version");
    }
    std::vector<MPLSpec> mpls;
    for (const json& m : doc.at("mpls")) {
      MPLSpec spec;
      spec.id = m.at("id").get<std::string>();
      spec.description = m.value("description", "");
      std::size_t i = 0;
      for (const json& r : m.at("rows")) {
        const std::string where = "MPL '" + spec.id + "' row " + std::to_string(i++);
        spec.rows.push_back({prospect_from_json(r.at("a"), where),
                             prospect_from_json(r.at("b"), where), r.value("label", "")});
      }
      mpls.push_back(std::move(spec));
    }
    return MplCatalog(std::move(mpls));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("MPL catalog: ") + e.what());
  }
}

MplCatalog MplCatalog::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

void MplCatalog::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

ChoiceData parse_choices(std::istream& in, const std::string& source, const MplCatalog& catalog) {
  const csv::Table table = csv::parse(in, source);
  ChoiceData data;
  if (table.header.empty()) {
    data.warnings.push_back(source + ": empty choice file");
    return data;
  }
  csv::require_header(table, {"subject_id", "mpl_id", "row_index", "chosen"});
  std::set<std::tuple<std::string, std::string, std::size_t>> seen;
  for (const csv::Row& row : table.rows) {
    ChoiceRecord rec;
    rec.subject_id = row.fields[0];
    rec.mpl_id = row.fields[1];
    if (rec.subject_id.empty()) throw ParseError(source, row.line, "empty subject_id");
    const MPLSpec* mpl = catalog.find(rec.mpl_id);
    if (!mpl) throw ValidationError(source + ":" + std::to_string(row.line) + ": unknown MPL '" +
                                    rec.mpl_id + "'");
    const long long idx = csv::parse_int(table, row, 2);
    if (idx < 0 || static_cast<std::size_t>(idx) >= mpl->rows.size()) {
      throw ValidationError(source + ":" + std::to_string(row.line) + ": row " +
                            std::to_string(idx) + " out of range for MPL '" + rec.mpl_id + "'");
    }
    rec.row_index = static_cast<std::size_t>(idx);
    const long long chosen = csv::parse_int(table, row, 3);
    if (chosen != 0 && chosen != 1) throw ParseError(source, row.line, "chosen must be 0 or 1");
    rec.chosen = static_cast<int>(chosen);
    if (!seen.emplace(rec.subject_id, rec.mpl_id, rec.row_index).second) {
      throw ValidationError(source + ":" + std::to_string(row.line) + ": duplicate choice for (" +
                            rec.subject_id + ", " + rec.mpl_id + ", " +
                            std::to_string(rec.row_index) + ")");
    }
    ++data.per_subject[rec.subject_id];
    data.records.push_back(std::move(rec));
  }
  if (data.records.empty()) data.warnings.push_back(source + ": no choice records");
  const std::size_t expected = catalog.total_rows();
  for (const auto& [subject, count] : data.per_subject) {
    if (count != expected) {
      data.warnings.push_back("subject " + subject + " has " + std::to_string(count) +
                              " choices; catalog has " + std::to_string(expected) + " rows");
    }
  }
  return data;
}

ChoiceData load_choices(const std::filesystem::path& path, const MplCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_choices(in, path.string(), catalog);
}

void write_choices(std::ostream& out, const std::vector<ChoiceRecord>& records) {
  out << kChoicesHeader << '\n';
  for (const ChoiceRecord& r : records) {
    out << csv::escape(r.subject_id) << ',' << csv::escape(r.mpl_id) << ',' << r.row_index << ','
        << r.chosen << '\n';
  }
}

std::vector<std::pair<std::string, std::vector<ChoiceRecord>>> group_by_subject(
    const std::vector<ChoiceRecord>& records) {
  std::vector<std::pair<std::string, std::vector<ChoiceRecord>>> groups;
  std::map<std::string, std::size_t> where;
  for (const ChoiceRecord& r : records) {
    auto [it, fresh] = where.emplace(r.subject_id, groups.size());
    if (fresh) groups.emplace_back(r.subject_id, std::vector<ChoiceRecord>{});
    groups[it->second].second.push_back(r);
  }
  return groups;
}

// ---------------------------------------------------------------------------

std::string to_string(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::likert: return "likert";
    case ScaleKind::yes_no: return "yes_no";
    case ScaleKind::integer: return "integer";
    case ScaleKind::categorical: return "categorical";
    case ScaleKind::switchpoint: return "switchpoint";
  }
  return "likert";
}

ScaleKind parse_scale_kind(const std::string& name) {
  if (name == "likert") return ScaleKind::likert;
  if (name == "yes_no") return ScaleKind::yes_no;
  if (name == "integer") return ScaleKind::integer;
  if (name == "categorical") return ScaleKind::categorical;
  if (name == "switchpoint") return ScaleKind::switchpoint;
  throw ValidationError("unknown scale kind '" + name + "'");
}

std::string to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::education_specific: return "education-specific";
    case ExclusionReason::no_directional_hypothesis: return "no-directional-hypothesis";
    case ExclusionReason::counter_directional: return "counter-directional";
  }
  return "";
}

ExclusionReason parse_exclusion_reason(const std::string& name) {
  if (name == "education-specific") return ExclusionReason::education_specific;
  if (name == "no-directional-hypothesis") return ExclusionReason::no_directional_hypothesis;
  if (name == "counter-directional") return ExclusionReason::counter_directional;
  throw ValidationError("unknown exclusion reason '" + name + "'");
}

ItemCatalog::ItemCatalog(std::vector<ItemDefinition> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const ItemDefinition& it = items_[i];
    if (it.id.empty()) throw ValidationError("item with empty id");
    if (!(it.scale_min < it.scale_max) && it.scale != ScaleKind::integer) {
      throw ValidationError("item '" + it.id + "' has an empty scale range");
    }
    if (!index_.emplace(it.id, i).second) {
      throw ValidationError("duplicate item id '" + it.id + "'");
    }
  }
}

const ItemDefinition* ItemCatalog::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &items_[it->second];
}

json ItemCatalog::to_json() const {
  json items = json::array();
  for (const ItemDefinition& it : items_) {
    json j{{"id", it.id},
           {"number", it.number},
           {"text", it.text},
           {"cluster", it.cluster},
           {"scale", to_string(it.scale)},
           {"scale_min", it.scale_min},
           {"scale_max", it.scale_max},
           {"directional_hypothesis", it.directional_hypothesis}};
    if (!it.categories.empty()) j["categories"] = it.categories;
    if (it.exclusion) j["exclusion"] = to_string(*it.exclusion);
    items.push_back(std::move(j));
  }
  return json{{"schema_version", 1}, {"items", items}};
}

ItemCatalog ItemCatalog::from_json(const json& doc) {
  try {
    if (doc.value("schema_version", 0) != 1) {
      throw ValidationError("item catalog: unsupported schema_version");
    }
    std::vector<ItemDefinition> items;
    for (const json& j : doc.at("items")) {
      ItemDefinition it;
      it.id = j.at("id").get<std::string>();
      it.number = j.value("number", 0);
      it.text = j.value("text", "");
      it.cluster = j.value("cluster", "");
      it.scale = parse_scale_kind(j.at("scale").get<std::string>());
      switch (it.scale) {
        case ScaleKind::likert: it.scale_min = 1; it.scale_max = 6; break;
        case ScaleKind::yes_no: it.scale_min = 0; it.scale_max = 1; break;
        case ScaleKind::switchpoint: it.scale_min = 1; it.scale_max = 16; break;
        case ScaleKind::integer:
          it.scale_min = -std::numeric_limits<double>::infinity();
          it.scale_max = std::numeric_limits<double>::infinity();
          break;
        case ScaleKind::categorical: it.scale_min = 0; it.scale_max = 0; break;
      }
      if (j.contains("scale_min") && j["scale_min"].is_number()) it.scale_min = j["scale_min"];
      if (j.contains("scale_max") && j["scale_max"].is_number()) it.scale_max = j["scale_max"];
      if (j.contains("categories")) {
        it.categories = j["categories"].get<std::vector<std::string>>();
        if (it.scale == ScaleKind::categorical && !j.contains("scale_max")) {
          it.scale_max = it.scale_min + static_cast<double>(it.categories.size()) - 1.0;
        }
      }
      it.directional_hypothesis = j.value("directional_hypothesis", true);
      if (j.contains("exclusion") && !j["exclusion"].is_null()) {
        it.exclusion = parse_exclusion_reason(j["exclusion"].get<std::string>());
      }
      items.push_back(std::move(it));
    }
    return ItemCatalog(std::move(items));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("item catalog: ") + e.what());
  }
}

ItemCatalog ItemCatalog::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

double code_response(const ItemDefinition& item, const std::string& raw) {
  auto fail = [&](const std::string& why) {
    return ValidationError("item '" + item.id + "': " + why + " ('" + raw + "')");
  };
  if (item.scale == ScaleKind::yes_no) {
    if (raw == "yes" || raw == "1") return 1.0;
    if (raw == "no" || raw == "0") return 0.0;
    throw fail("expected yes/no");
  }
  if (item.scale == ScaleKind::categorical) {
    for (std::size_t i = 0; i < item.categories.size(); ++i) {
      if (item.categories[i] == raw) return item.scale_min + static_cast<double>(i);
    }
  }
  double v = 0.0;
  {
    std::istringstream ss(raw);
    ss >> v;
    if (!ss || !ss.eof() || !std::isfinite(v)) throw fail("not a number");
  }
  const bool needs_integer = item.scale != ScaleKind::likert;
  if (needs_integer && v != std::floor(v)) throw fail("expected an integer");
  if (v < item.scale_min || v > item.scale_max) throw fail("outside the declared scale");
  return v;
}

std::vector<SurveyResponse> parse_responses(std::istream& in, const std::string& source,
                                            const ItemCatalog& catalog) {
  const csv::Table table = csv::parse(in, source);
  std::vector<SurveyResponse> out;
  if (table.header.empty()) return out;
  csv::require_header(table, {"subject_id", "item_id", "value"});
  std::set<std::pair<std::string, std::string>> seen;
  for (const csv::Row& row : table.rows) {
    SurveyResponse r{row.fields[0], row.fields[1], 0.0};
    const ItemDefinition* item = catalog.find(r.item_id);
    if (!item) {
      throw ValidationError(source + ":" + std::to_string(row.line) + ": unknown item '" +
                            r.item_id + "'");
    }
    try {
      r.value = code_response(*item, row.fields[2]);
    } catch (const ValidationError& e) {
      throw ParseError(source, row.line, e.what());
    }
    if (!seen.emplace(r.subject_id, r.item_id).second) {
      throw ValidationError(source + ":" + std::to_string(row.line) + ": duplicate response for (" +
                            r.subject_id + ", " + r.item_id + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SurveyResponse> load_responses(const std::filesystem::path& path,
                                           const ItemCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_responses(in, path.string(), catalog);
}

void write_response_row(std::ostream& out, const SurveyResponse& r) {
  out << csv::escape(r.subject_id) << ',' << csv::escape(r.item_id) << ','
      << csv::format_double(r.value) << '\n';
}

void write_responses(std::ostream& out, const std::vector<SurveyResponse>& responses) {
  out << kResponsesHeader << '\n';
  for (const SurveyResponse& r : responses) write_response_row(out, r);
}

}  // namespace debtav
