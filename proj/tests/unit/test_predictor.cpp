#include <gtest/gtest.h>

#include <sstream>

#include "debtav/errors.hpp"
#include "debtav/predictor.hpp"
#include "debtav/rng.hpp"

namespace debtav {
namespace {

const std::filesystem::path kData = DEBTAV_TEST_DATA_DIR;

Prediction predict2(double q1, double q2) {
  const std::vector<ModuleAnswer> a{{"Q1", q1, {}, {}}, {"Q2", q2, {}, {}}};
  return predict_gamma(SurveyModuleSpec::builtin(), a);
}

TEST(Predictor, WorkedExample) {
  const Prediction p = predict2(5, 2);
  EXPECT_NEAR(p.gamma_hat, 1.0785, 1e-6);
  EXPECT_NEAR(p.gamma_hat, 1.0694 + 0.0045 * 5 - 0.0067 * 2, 1e-15);
  EXPECT_EQ(format_gamma(p.gamma_hat), "1.0785");
  EXPECT_EQ(format_decomposition(p), "1.0694 + 0.0045*5 - 0.0067*2 = 1.0785");
  EXPECT_EQ(p.classification, DebtClass::averse);
  ASSERT_EQ(p.terms.size(), 2u);
  EXPECT_NEAR(p.terms[1].contribution, -0.0134, 1e-15);
  const auto j = to_json(p);
  EXPECT_EQ(j["gamma_hat_display"], "1.0785");
  EXPECT_EQ(j["classification"], "debt_averse");
}

TEST(Predictor, ZeroWeightsGiveIntercept) {
  SurveyModuleSpec spec = SurveyModuleSpec::builtin();
  for (auto& it : spec.items) it.weight = 0.0;
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const std::vector<ModuleAnswer> a{{"Q1", 1 + 5 * rng.uniform(), {}, {}},
                                      {"Q2", 1 + 5 * rng.uniform(), {}, {}}};
    EXPECT_EQ(predict_gamma(spec, a).gamma_hat, spec.intercept);
  }
}

TEST(Predictor, AffineInEachAnswer) {
  for (double q2 : {1.0, 3.5, 6.0}) {
    for (double q1 = 1; q1 < 6; q1 += 1) {
      EXPECT_NEAR(predict2(q1 + 1, q2).gamma_hat - predict2(q1, q2).gamma_hat, 0.0045, 1e-12);
    }
  }
  for (double q2 = 1; q2 < 6; q2 += 1) {
    EXPECT_NEAR(predict2(3, q2 + 1).gamma_hat - predict2(3, q2).gamma_hat, -0.0067, 1e-12);
  }
}

TEST(Rescale, Endpoints) {
  EXPECT_EQ(rescale_likert(1, 1, 7), 1.0);
  EXPECT_EQ(rescale_likert(7, 1, 7), 6.0);
  EXPECT_NEAR(rescale_likert(4, 1, 7), 3.5, 1e-15);
  EXPECT_EQ(rescale_likert(3, 1, 6), 3.0);
  EXPECT_EQ(rescale_likert(0, 0, 10), 1.0);
  EXPECT_EQ(rescale_likert(10, 0, 10), 6.0);
  EXPECT_THROW(rescale_likert(8, 1, 7), RangeError);
  EXPECT_THROW(rescale_likert(3, 5, 5), ValidationError);
  EXPECT_NEAR(rescale(5, 0, 10, 1, 6), 3.5, 1e-15);
}

TEST(Rescale, AnyScaleGivesTheSamePrediction) {
  const double native = predict2(5, 2).gamma_hat;
  const std::vector<ModuleAnswer> ten{{"Q1", 8, 0.0, 10.0}, {"Q2", 2, 0.0, 10.0}};
  EXPECT_NEAR(predict_gamma(SurveyModuleSpec::builtin(), ten).gamma_hat, native, 1e-12);
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const double q1 = 1 + 5 * rng.uniform(), q2 = 1 + 5 * rng.uniform();
    const double l = -10 + 20 * rng.uniform(), h = l + 0.5 + 20 * rng.uniform();
    const auto to = [&](double x) { return l + (x - 1) / 5 * (h - l); };
    const std::vector<ModuleAnswer> a{{"Q1", to(q1), l, h}, {"Q2", to(q2), l, h}};
    EXPECT_NEAR(predict_gamma(SurveyModuleSpec::builtin(), a).gamma_hat, predict2(q1, q2).gamma_hat,
                1e-12);
  }
}

TEST(Classification, Boundary) {
  EXPECT_EQ(classify_gamma(1.0), DebtClass::neutral);
  EXPECT_EQ(classify_gamma(1.0 + 5e-13), DebtClass::neutral);
  EXPECT_EQ(classify_gamma(1.0 - 5e-13), DebtClass::neutral);
  EXPECT_EQ(classify_gamma(1.0 + 1e-9), DebtClass::averse);
  EXPECT_EQ(classify_gamma(0.98), DebtClass::affine);
  EXPECT_EQ(to_string(DebtClass::neutral), "debt_neutral");
  EXPECT_EQ(to_string(DebtClass::affine), "debt_affine");
}

TEST(Predictor, InputErrors) {
  const SurveyModuleSpec spec = SurveyModuleSpec::builtin();
  const std::vector<ModuleAnswer> missing{{"Q1", 3, {}, {}}};
  EXPECT_THROW(predict_gamma(spec, missing), ValidationError);
  const std::vector<ModuleAnswer> extra{{"Q1", 3, {}, {}}, {"Q2", 3, {}, {}}, {"Q3", 3, {}, {}}};
  EXPECT_THROW(predict_gamma(spec, extra), ValidationError);
  const std::vector<ModuleAnswer> twice{{"Q1", 3, {}, {}}, {"Q1", 3, {}, {}}};
  EXPECT_THROW(predict_gamma(spec, twice), ValidationError);
  const std::vector<ModuleAnswer> off{{"Q1", 7, {}, {}}, {"Q2", 3, {}, {}}};
  EXPECT_THROW(predict_gamma(spec, off), RangeError);
}

TEST(ModuleSpec, JsonAndShippedFile) {
  const SurveyModuleSpec b = SurveyModuleSpec::builtin();
  EXPECT_EQ(SurveyModuleSpec::from_json(b.to_json()).to_json().dump(), b.to_json().dump());
  const SurveyModuleSpec shipped = SurveyModuleSpec::load(kData / "module_spec.json");
  EXPECT_EQ(shipped.intercept, b.intercept);
  ASSERT_EQ(shipped.items.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(shipped.items[i].id, b.items[i].id);
    EXPECT_EQ(shipped.items[i].weight, b.items[i].weight);
    EXPECT_EQ(shipped.items[i].scale_min, b.items[i].scale_min);
    EXPECT_EQ(shipped.items[i].scale_max, b.items[i].scale_max);
  }
  SurveyModuleSpec bad = b;
  bad.items[1].id = "Q1";
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = b;
  bad.items[0].scale_max = bad.items[0].scale_min;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(PredictBatch, PredictsCompleteSubjects) {
  std::istringstream in(
      "subject_id,item_id,value\n"
      "a,Q1,5\na,Q2,2\na,I13,4\n"
      "b,Q1,1\n"
      "c,Q2,6\nc,Q1,6\n");
  std::ostringstream out;
  const auto incomplete = predict_batch(SurveyModuleSpec::builtin(), in, "r.csv", out);
  EXPECT_EQ(incomplete, std::vector<std::string>{"b"});
  std::istringstream lines(out.str());
  std::string header, a, c;
  std::getline(lines, header);
  std::getline(lines, a);
  std::getline(lines, c);
  EXPECT_EQ(header, kPredictionsHeader);
  EXPECT_EQ(a.substr(0, 2), "a,");
  EXPECT_NEAR(std::stod(a.substr(2)), 1.0785, 1e-12);
  EXPECT_NE(a.find("debt_averse"), std::string::npos);
  EXPECT_EQ(c.substr(0, 2), "c,");
  std::istringstream dup("subject_id,item_id,value\na,Q1,5\na,Q1,4\n");
  std::ostringstream sink;
  EXPECT_THROW(predict_batch(SurveyModuleSpec::builtin(), dup, "d.csv", sink), ParseError);
}

}  // namespace
}  // namespace debtav
