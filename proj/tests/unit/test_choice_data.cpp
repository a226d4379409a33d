#include <gtest/gtest.h>

#include <sstream>

#include "debtav/choice_data.hpp"
#include "debtav/errors.hpp"
#include "debtav/simulation.hpp"
#include "fixtures.hpp"

namespace debtav {
namespace {

const std::filesystem::path kData = DEBTAV_TEST_DATA_DIR;

std::string two_subject_fixture(const MplCatalog& catalog) {
  std::ostringstream out;
  out << kChoicesHeader << '\n';
  for (const char* subject : {"s01", "s02"}) {
    for (const MPLSpec& mpl : catalog.mpls()) {
      for (std::size_t r = 0; r < mpl.rows.size(); ++r) {
        out << subject << ',' << mpl.id << ',' << r << ',' << ((r + subject[2]) % 2) << '\n';
      }
    }
  }
  return out.str();
}

TEST(ChoiceData, LoadsTwoSubjectFixture) {
  const MplCatalog catalog = reference_design(1);
  ASSERT_EQ(catalog.total_rows(), 90u);
  std::istringstream in(two_subject_fixture(catalog));
  const ChoiceData data = parse_choices(in, "fixture", catalog);
  EXPECT_EQ(data.records.size(), 180u);
  EXPECT_TRUE(data.warnings.empty());
  EXPECT_EQ(data.per_subject.at("s01"), 90u);
  EXPECT_EQ(data.per_subject.at("s02"), 90u);
  const auto groups = group_by_subject(data.records);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].first, "s01");
}

TEST(ChoiceData, WriteIsLossless) {
  const MplCatalog catalog = reference_design(1);
  const std::string text = two_subject_fixture(catalog);
  std::istringstream in(text);
  const ChoiceData data = parse_choices(in, "fixture", catalog);
  std::ostringstream out;
  write_choices(out, data.records);
  EXPECT_EQ(out.str(), text);
}

TEST(ChoiceData, EmptyFileWarns) {
  std::istringstream in("");
  const ChoiceData data = parse_choices(in, "empty.csv", reference_design(1));
  EXPECT_TRUE(data.records.empty());
  ASSERT_EQ(data.warnings.size(), 1u);
}

TEST(ChoiceData, Rejections) {
  const MplCatalog catalog = reference_design(1);
  auto parse = [&](const std::string& body) {
    std::istringstream in(std::string(kChoicesHeader) + "\n" + body);
    return parse_choices(in, "bad.csv", catalog);
  };
  try {
    parse("s1,m1_risk,0,1\ns1,nope,0,1\n");
    FAIL();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("nope"), std::string::npos);
    EXPECT_NE(what.find(":3"), std::string::npos);
  }
  EXPECT_THROW(parse("s1,m1_risk,0,1\ns1,m1_risk,0,0\n"), ValidationError);
  EXPECT_THROW(parse("s1,m1_risk,0,2\n"), ParseError);
  EXPECT_THROW(parse("s1,m1_risk,99,1\n"), ValidationError);
  EXPECT_THROW(parse(",m1_risk,0,1\n"), ParseError);
  std::istringstream wrong_header("a,b,c,d\n1,2,3,4\n");
  EXPECT_THROW(parse_choices(wrong_header, "h.csv", catalog), ParseError);
}

TEST(ChoiceData, IncompleteSubjectWarns) {
  std::istringstream in(std::string(kChoicesHeader) + "\ns1,m1_risk,0,1\n");
  const ChoiceData data = parse_choices(in, "part.csv", reference_design(1));
  EXPECT_EQ(data.records.size(), 1u);
  EXPECT_FALSE(data.warnings.empty());
}

TEST(MplCatalog, JsonRoundTrip) {
  const MplCatalog catalog = reference_design(2);
  const nlohmann::json doc = catalog.to_json();
  const MplCatalog back = MplCatalog::from_json(doc);
  ASSERT_EQ(back.mpls().size(), catalog.mpls().size());
  for (std::size_t i = 0; i < back.mpls().size(); ++i) {
    const MPLSpec& a = catalog.mpls()[i];
    const MPLSpec& b = back.mpls()[i];
    EXPECT_EQ(a.id, b.id);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
      EXPECT_EQ(a.rows[r].option_a, b.rows[r].option_a);
      EXPECT_EQ(a.rows[r].option_b, b.rows[r].option_b);
      EXPECT_EQ(a.rows[r].label, b.rows[r].label);
    }
  }
  EXPECT_EQ(back.to_json().dump(), doc.dump());
  EXPECT_THROW(catalog.at("missing"), ValidationError);
}

TEST(MplCatalog, RejectsDuplicatesAndBadProspects) {
  MPLSpec a{"x", "", {{test::sure(0), test::sure(1), ""}}};
  EXPECT_THROW(MplCatalog({a, a}), ValidationError);
  nlohmann::json doc = reference_design(1).to_json();
  doc["mpls"][0]["rows"][0]["b"][0]["p"] = 0.7;
  EXPECT_THROW(MplCatalog::from_json(doc), ValidationError);
}

TEST(MplCatalog, ShippedReferenceDesignMatchesGenerator) {
  const auto path = kData / "reference_design.json";
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(MplCatalog::load(path).to_json().dump(), reference_design(1).to_json().dump());
}

TEST(ItemCatalog, ShippedPool) {
  const ItemCatalog items = ItemCatalog::load(kData / "items.json");
  EXPECT_EQ(items.items().size(), 55u);
  ASSERT_NE(items.find("SP"), nullptr);
  EXPECT_EQ(items.find("SP")->scale, ScaleKind::switchpoint);
  EXPECT_EQ(ItemCatalog::from_json(items.to_json()).to_json().dump(), items.to_json().dump());
}

TEST(ItemCatalog, CodesResponses) {
  ItemDefinition likert{"L", 1, "", "c", ScaleKind::likert, 1, 6, {}, true, {}};
  EXPECT_EQ(code_response(likert, "4"), 4.0);
  EXPECT_EQ(code_response(likert, "4.5"), 4.5);
  EXPECT_THROW(code_response(likert, "7"), ValidationError);
  EXPECT_THROW(code_response(likert, "x"), ValidationError);
  ItemDefinition yn{"Y", 2, "", "c", ScaleKind::yes_no, 0, 1, {}, true, {}};
  EXPECT_EQ(code_response(yn, "yes"), 1.0);
  EXPECT_EQ(code_response(yn, "no"), 0.0);
  EXPECT_THROW(code_response(yn, "maybe"), ValidationError);
  ItemDefinition cat{"C", 3, "", "c", ScaleKind::categorical, 0, 6,
                     {"0", "1", "2", "3", "4", "5", ">5"}, true, {}};
  EXPECT_EQ(code_response(cat, ">5"), 6.0);
  ItemDefinition sp{"SP", 0, "", "s", ScaleKind::switchpoint, 1, 16, {}, true, {}};
  EXPECT_EQ(code_response(sp, "16"), 16.0);
  EXPECT_THROW(code_response(sp, "2.5"), ValidationError);
  EXPECT_THROW(code_response(sp, "17"), ValidationError);
}

TEST(Responses, RoundTripAndValidation) {
  const ItemCatalog items = ItemCatalog::load(kData / "items.json");
  std::istringstream in("subject_id,item_id,value\na,I01,1\na,I13,5\nb,SP,9\n");
  const auto rows = parse_responses(in, "r.csv", items);
  ASSERT_EQ(rows.size(), 3u);
  std::ostringstream out;
  write_responses(out, rows);
  std::istringstream again(out.str());
  EXPECT_EQ(parse_responses(again, "r2.csv", items), rows);
  std::istringstream unknown("subject_id,item_id,value\na,Q99,1\n");
  EXPECT_THROW(parse_responses(unknown, "u.csv", items), ValidationError);
  std::istringstream off("subject_id,item_id,value\na,I13,9\n");
  EXPECT_THROW(parse_responses(off, "o.csv", items), ParseError);
}

}  // namespace
}  // namespace debtav
