#include <gtest/gtest.h>

#include <cstring>

#include "kava/error.hpp"
#include "kava/jsonld.hpp"
#include "kava/turtle.hpp"
#include "kava/utilization.hpp"
#include "test_support.hpp"

using namespace kava;
using namespace kava::testing;
using nlohmann::json;

namespace {

const std::string kR73 = std::string(ns::icd10) + "R73";

Manifestation only(const std::string& fixture) {
  return loadManifestations(parseTurtle(readFixture(fixture))).at(0);
}

Dataset csvFixture(const std::string& name) {
  std::string text = readFixture(name);
  return loadCsv(text, inferSchema(text));
}

ErrorCode codeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::Io;
}

// Runs of consecutive matched rows after sorting by time, computed the slow way.
std::vector<Span> bruteSpans(const std::vector<double>& times, const std::vector<bool>& matched) {
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<Span> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!matched[order[i]]) continue;
    std::size_t j = i;
    while (j + 1 < order.size() && matched[order[j + 1]]) ++j;
    out.push_back({times[order[i]], times[order[j]], j - i + 1});
    i = j;
  }
  return out;
}

}  // namespace

TEST(ThresholdRegion, Listing4LowerBoundIsExact) {
  VisSpecFragment f = thresholdRegionSpec(only("listing4.ttl").kind, "bloodSugar");
  EXPECT_EQ(f.kind, FragmentKind::ThresholdRegion);
  const json& region = f.document["region"];
  EXPECT_TRUE(region["lower"].is_number_integer());
  EXPECT_EQ(region["lower"].get<std::int64_t>(), 200);
  double lower = region["lower"].get<double>();
  double expected = 200.0;
  EXPECT_EQ(std::memcmp(&lower, &expected, sizeof lower), 0);
  EXPECT_TRUE(region["upper"].is_null());
  EXPECT_EQ(region["side"], "above");
  EXPECT_TRUE(region["lowerInclusive"].get<bool>());
  EXPECT_TRUE(validateFragment(f.document).empty());
  // The full IRI also names the axis.
  EXPECT_NO_THROW(thresholdRegionSpec(only("listing4.ttl").kind,
                                      std::string(ns::health) + "bloodSugar"));
}

TEST(ThresholdRegion, Listing5QueryIsAStrictBound) {
  Region r = thresholdRegion(only("listing5.ttl").kind, "glucose");
  ASSERT_TRUE(r.lower);
  EXPECT_EQ(r.lower->asDouble(), 200.0);
  EXPECT_FALSE(r.lowerInclusive);
  EXPECT_FALSE(r.upper);
  Region below = thresholdRegion(IndirectQueryMapping{"[glucose] <= 70"}, "glucose");
  EXPECT_TRUE(below.upper);
  EXPECT_TRUE(below.upperInclusive);
  VisSpecFragment spec = thresholdRegionSpec(IndirectQueryMapping{"[glucose] < 70"}, "glucose");
  EXPECT_EQ(spec.document["region"]["side"], "below");
}

TEST(ThresholdRegion, BandAndDegenerateBand) {
  IndirectVariableMapping band{Term::string("x"), Term::integer(1), Term::decimal(2.5)};
  VisSpecFragment f = thresholdRegionSpec(band, "x");
  EXPECT_EQ(f.document["region"]["side"], "between");
  EXPECT_TRUE(f.warnings.empty());
  VisSpecFragment eq = thresholdRegionSpec(IndirectQueryMapping{"[x] = 3"}, "x");
  EXPECT_EQ(eq.warnings.size(), 1u);
  EXPECT_TRUE(validateFragment(eq.document).empty());
}

TEST(ThresholdRegion, Rejections) {
  EXPECT_EQ(codeOf([] { thresholdRegion(IndirectQueryMapping{"[x] > 1 AND [x] < 3"}, "x"); }),
            ErrorCode::UnsupportedPredicateShape);
  EXPECT_EQ(codeOf([] { thresholdRegion(IndirectQueryMapping{"[x] != 1"}, "x"); }),
            ErrorCode::UnsupportedPredicateShape);
  EXPECT_EQ(codeOf([] { thresholdRegion(IndirectQueryMapping{"[x] = \"a\""}, "x"); }),
            ErrorCode::UnsupportedPredicateShape);
  EXPECT_EQ(codeOf([] { thresholdRegion(IndirectQueryMapping{"[x] > 1"}, "y"); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(codeOf([] { thresholdRegion(IndirectQueryMapping{"q", "sql"}, "x"); }),
            ErrorCode::ForeignDialect);
  EXPECT_EQ(codeOf([] { thresholdRegion(only("listing3.ttl").kind, "patientId"); }),
            ErrorCode::UnsupportedPredicateShape);
}

TEST(ConceptTree, CountsMatchTheScheme) {
  ConceptScheme s =
      loadScheme(parseTurtle(readFixture("gps_scheme.ttl")), gps("gaitPatternSchema").value());
  VisSpecFragment f = conceptTreeSpec(s);
  const json& nodes = f.document["data"]["values"];
  EXPECT_EQ(nodes.size(), s.concepts.size());
  EXPECT_EQ(f.document["edges"].size(), s.broaderEdgeCount());
  std::map<std::string, int> depth;
  for (const json& n : nodes) depth[n["id"]] = n["depth"];
  EXPECT_EQ(depth[gps("mid").value()], 0);
  EXPECT_EQ(depth[gps("midKnee").value()], 1);
  EXPECT_EQ(depth[gps("midKneeSagittal").value()], 2);
  EXPECT_FALSE(f.document["encoding"].contains("size"));
  EXPECT_TRUE(validateFragment(f.document).empty());

  VisSpecFragment weighted = conceptTreeSpec(s, {{gps("mid").value(), 3}});
  EXPECT_TRUE(weighted.document["encoding"].contains("size"));
  EXPECT_TRUE(validateFragment(weighted.document).empty());
}

TEST(ConceptTree, CyclicSchemeIsRejected) {
  ConceptScheme s =
      loadScheme(parseJsonLd(readFixture("listing2.jsonld")), gps("gaitPatternSchema").value());
  EXPECT_EQ(codeOf([&] { conceptTreeSpec(s); }), ErrorCode::CyclicScheme);
}

TEST(EncodedMarks, ConceptFieldPerRecord) {
  Dataset d = csvFixture("glucose_days.csv");
  auto high = createManifestation(kR73, IndirectQueryMapping{"[glucose] > 200"}, "", "");
  auto veryHigh = createManifestation(std::string(ns::icd10) + "E11",
                                      IndirectQueryMapping{"[glucose] > 240"}, "", "");
  VisSpecFragment f = encodedMarksSpec(d, {high, veryHigh}, "color");
  const json& rows = f.document["data"]["values"];
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0]["concept"], "none");
  EXPECT_EQ(rows[2]["concept"], kR73);
  EXPECT_EQ(rows[2]["recordId"], "3");
  EXPECT_EQ(f.warnings.size(), 2u);  // days 3 and 7 match both
  EXPECT_EQ(f.document["encoding"]["color"]["field"], "concept");
  EXPECT_TRUE(validateFragment(f.document).empty());

  VisSpecFragment sized = encodedMarksSpec(d, {high}, "x", {{"3", 0.5}});
  EXPECT_EQ(sized.document["data"]["values"][2]["similarity"], 0.5);
  EXPECT_TRUE(sized.document["data"]["values"][0]["similarity"].is_null());
  EXPECT_TRUE(validateFragment(sized.document).empty());
  EXPECT_EQ(codeOf([&] { encodedMarksSpec(d, {high}, "shape"); }), ErrorCode::InvalidArgument);
}

TEST(AggregateMark, GlucoseDays) {
  Dataset d = csvFixture("glucose_days.csv");
  VisSpecFragment f = aggregateMarkSpec(d, only("listing5.ttl"), "day");
  const json& layers = f.document["layer"];
  ASSERT_EQ(layers.size(), 2u);
  EXPECT_EQ(layers[0]["encoding"]["x"]["datum"], 2.0);
  EXPECT_EQ(layers[0]["encoding"]["x2"]["datum"], 4.0);
  EXPECT_EQ(layers[0]["count"], 3);
  EXPECT_EQ(layers[1]["count"], 1);
  EXPECT_TRUE(validateFragment(f.document).empty());
  EXPECT_EQ(codeOf([&] { aggregateMarkSpec(d, only("listing5.ttl"), "hour"); }),
            ErrorCode::UnknownVariable);
}

TEST(AggregateMark, SpansMatchBruteForce) {
  std::mt19937 rng(99);
  for (int round = 0; round < 100; ++round) {
    std::size_t n = rng() % 60;
    Dataset d(Schema({{"t"}}, {}));
    std::vector<double> times;
    std::vector<bool> matched;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i) {
      double t = static_cast<double>(rng() % 40);  // ties and shuffled order
      times.push_back(t);
      d.append({{t}});
      bool m = rng() % 2;
      matched.push_back(m);
      if (m) rows.push_back(i);
    }
    EXPECT_EQ(matchSpans(d, rows, "t"), bruteSpans(times, matched));
    VisSpecFragment f = aggregateMarkSpec(d, kR73, rows, "t");
    EXPECT_EQ(f.document["layer"].size(), bruteSpans(times, matched).size());
  }
}

TEST(ValidateFragment, RejectsBrokenDocuments) {
  EXPECT_FALSE(validateFragment(json::object()).empty());
  EXPECT_FALSE(validateFragment({{"kind", "pie"}}).empty());
  EXPECT_FALSE(validateFragment({{"kind", "thresholdRegion"}}).empty());
  json tree = conceptTreeSpec(loadScheme(parseTurtle(readFixture("gps_scheme.ttl")),
                                         gps("gaitPatternSchema").value()))
                  .document;
  json extra = tree;
  extra["surprise"] = 1;
  EXPECT_FALSE(validateFragment(extra).empty());
  json noField = tree;
  noField["encoding"]["x"] = {{"type", "nominal"}};
  EXPECT_FALSE(validateFragment(noField).empty());
}
