#include <doctest.h>

#include "contraforge/error.hpp"
#include "contraforge/evaluation.hpp"
#include "test_support.hpp"

using namespace contraforge;

namespace {

void check_metric(const std::optional<Ratio>& got, const nlohmann::json& expected) {
  if (expected.is_null()) {
    CHECK_FALSE(got);
  } else {
    REQUIRE(got);
    CHECK(std::abs(got->rounded(3) - expected.get<double>()) <= 1e-12);
  }
}

GoldItem item(const std::string& key, int label, std::optional<ContradictionType> t = {},
              Mode mode = Mode::Self) {
  GoldItem g;
  g.key = key;
  g.mode = mode;
  g.human_label = label;
  g.ctype = t;
  if (t) g.sources.insert(Source::Injected);
  return g;
}

CandidatePair mined(const std::string& key, int hybrid, bool nli, int llm, Mode mode = Mode::Self) {
  CandidatePair p;
  p.key = key;
  p.mode = mode;
  p.hybrid_label = hybrid;
  p.nli_label = nli ? NliLabel::Contradiction : NliLabel::Neutral;
  p.llm_label = llm;
  return p;
}

}  // namespace

TEST_CASE("metrics match the rational oracle") {
  const auto cases = testing::read_json(testing::oracle_file("metrics_cases.json"));
  REQUIRE(cases.size() >= 20);
  for (const auto& c : cases) {
    ConfusionMatrix m{c["matrix"]["tp"], c["matrix"]["fp"], c["matrix"]["fn"], c["matrix"]["tn"]};
    CAPTURE(c["matrix"].dump());
    const auto got = metrics(m);
    check_metric(got.accuracy, c["expected"]["accuracy"]);
    check_metric(got.precision, c["expected"]["precision"]);
    check_metric(got.recall, c["expected"]["recall"]);
    check_metric(got.f1, c["expected"]["f1"]);
  }
}

TEST_CASE("the 34/4/4/58 matrix gives 92.0 / 89.5 / 89.5 / 89.5") {
  const auto m = metrics({34, 4, 4, 58});
  CHECK(m.accuracy->rounded(3) == 0.920);
  CHECK(m.precision->rounded(3) == 0.895);
  CHECK(m.recall->rounded(3) == 0.895);
  CHECK(m.f1->rounded(3) == 0.895);
  CHECK(m.precision->num * 38 == 34 * m.precision->den);
}

TEST_CASE("zero denominators are undefined, never zero") {
  const auto m = metrics({0, 0, 0, 7});
  CHECK(m.accuracy->value() == 1.0);
  CHECK_FALSE(m.precision);
  CHECK_FALSE(m.recall);
  CHECK_FALSE(m.f1);
  CHECK_THROWS_AS(metrics({}), PreconditionError);
}

TEST_CASE("half-up rounding") {
  CHECK(round_half_up(0.8945) == 0.895);
  CHECK(round_half_up(0.8944) == 0.894);
  CHECK(Ratio{1, 8}.rounded(2) == 0.13);
  CHECK(Ratio{2, 3}.rounded(3) == 0.667);
}

TEST_CASE("confusion: missing predictions read as 0, stray keys ignored") {
  const std::map<std::string, int> gold = {{"a", 1}, {"b", 0}, {"c", 1}, {"d", 0}};
  const std::map<std::string, int> pred = {{"a", 1}, {"b", 1}, {"zz", 1}};
  CHECK(confusion(pred, gold) == ConfusionMatrix{1, 1, 1, 1});
}

TEST_CASE("per-detector reports with per-type recall") {
  std::vector<GoldItem> gold = {
      item("t1", 1, ContradictionType::Temporal), item("t2", 1, ContradictionType::Temporal),
      item("t3", 1, ContradictionType::Temporal), item("n1", 1, ContradictionType::Numerical),
      item("x", 0), item("p1", 1, ContradictionType::Authority, Mode::Pairwise)};
  gold[2].aliases = {"t3-alias"};
  const std::vector<CandidatePair> self = {mined("t1", 1, true, 1), mined("t3-alias", 1, false, 1),
                                           mined("t2", 0, false, 0), mined("x", 1, true, 0),
                                           mined("n1", 0, true, 0), mined("other", 1, true, 1)};
  const std::vector<CandidatePair> pairwise = {mined("p1", 1, true, 1, Mode::Pairwise)};
  const auto reports = evaluate_detectors({self, pairwise}, gold);
  REQUIRE(reports.size() == 6);
  const auto find = [&](Detector d, Mode m) {
    for (const auto& r : reports) {
      if (r.detector == d && r.mode == m) return r;
    }
    FAIL("missing report");
    return EvalReport{};
  };
  const auto hybrid = find(Detector::Hybrid, Mode::Self);
  CHECK(hybrid.matrix == ConfusionMatrix{2, 1, 2, 0});
  CHECK(hybrid.per_type.at(ContradictionType::Temporal).recall->value() == doctest::Approx(2.0 / 3.0));
  CHECK(hybrid.per_type.at(ContradictionType::Numerical).recall->value() == 0.0);
  const auto nli = find(Detector::Nli, Mode::Self);
  CHECK(nli.matrix == ConfusionMatrix{2, 1, 2, 0});
  CHECK(nli.per_type.at(ContradictionType::Numerical).recovered == 1);
  CHECK(find(Detector::Llm, Mode::Pairwise).metrics.recall->value() == 1.0);

  const auto j = to_json(hybrid);
  CHECK(j["per_type"]["Temporal"]["injected"] == 3);
  CHECK(j["precision"]["num"] == 2);
  CHECK(j["precision"]["rounded"].get<double>() == 0.667);
  CHECK(j["per_type"]["Numerical"]["recall"]["value"] == 0.0);
  const auto table = render_table(reports);
  CHECK(table.find("hybrid") != std::string::npos);

  gold.push_back(GoldItem{});
  gold.back().key = "unlabeled-key";
  CHECK_THROWS_AS(evaluate_detectors({self}, gold), ValidationError);
}
