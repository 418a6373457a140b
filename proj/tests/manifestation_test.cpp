#include <gtest/gtest.h>

#include "kava/error.hpp"
#include "kava/manifestation.hpp"
#include "kava/turtle.hpp"
#include "test_support.hpp"

using namespace kava;
using namespace kava::testing;

namespace {

const std::string kR73 = std::string(ns::icd10) + "R73";

Dataset csvFixture(const std::string& name) {
  std::string text = readFixture(name);
  return loadCsv(text, inferSchema(text));
}

Manifestation only(const std::string& fixture) {
  auto ms = loadManifestations(parseTurtle(readFixture(fixture)));
  EXPECT_EQ(ms.size(), 1u);
  return ms.at(0);
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

}  // namespace

TEST(LoadManifestations, Listing3IsADirectMapping) {
  Manifestation m = only("listing3.ttl");
  EXPECT_EQ(m.conceptId, kR73);
  auto* direct = std::get_if<DirectMapping>(&m.kind);
  ASSERT_NE(direct, nullptr);
  ASSERT_EQ(direct->bindings.size(), 1u);
  EXPECT_EQ(direct->bindings[0].variable, Term::string("patientId"));
  EXPECT_EQ(direct->bindings[0].value, Term::integer(12345));
  EXPECT_EQ(m.provenance.creatorName, "Doctor Dreamy");
  EXPECT_EQ(m.provenance.dateSubmitted, "2019-02-04");
  EXPECT_FALSE(m.anchor.empty());
}

TEST(LoadManifestations, Listing4IsAVariableMapping) {
  Manifestation m = only("listing4.ttl");
  auto* v = std::get_if<IndirectVariableMapping>(&m.kind);
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(variableName(v->variable), "bloodSugar");
  EXPECT_EQ(v->minValue, Term::integer(200));
  EXPECT_FALSE(v->maxValue);
  EXPECT_TRUE(m.provenance.empty());
}

TEST(LoadManifestations, Listing5IsAQueryMapping) {
  Manifestation m = only("listing5.ttl");
  auto* q = std::get_if<IndirectQueryMapping>(&m.kind);
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->queryText, "[glucose] > 200");
  EXPECT_EQ(q->dialect, kPredicateDialect);
  EXPECT_EQ(m.provenance.creatorName, "ACME laboratory equipment");
}

TEST(LoadManifestations, AnchorsAreStableAcrossBlankLabels) {
  Graph g = parseTurtle(readFixture("listing3.ttl"));
  std::mt19937 rng(2);
  EXPECT_EQ(loadManifestations(g)[0].anchor, loadManifestations(relabelBlanks(g, rng))[0].anchor);
}

TEST(LoadManifestations, MalformedNodes) {
  Graph none = parseTurtle("icd10:R73 kava:manifest [ dct:dateSubmitted \"2020-01-01\" ] .");
  EXPECT_EQ(codeOf([&] { loadManifestations(none); }), ErrorCode::MalformedManifestation);
  Graph two = parseTurtle(
      "icd10:R73 kava:manifest [ kava:matchQuery \"[a] > 1\" ; kava:matchQuery \"[b] > 1\" ] .");
  EXPECT_EQ(codeOf([&] { loadManifestations(two); }), ErrorCode::MalformedManifestation);
  auto findings = validateManifestations(two);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].code, FindingCode::MalformedManifestation);
  EXPECT_EQ(findings[0].severity, Severity::Error);
}

TEST(ValidateManifestations, QueryFindings) {
  EXPECT_TRUE(validateManifestations(parseTurtle(readFixture("listing5.ttl"))).empty());
  auto bad = validateManifestations(
      parseTurtle("icd10:R73 kava:manifest [ kava:matchQuery \"[glucose] >\" ] ."));
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].code, FindingCode::InvalidQuery);
  auto foreign = validateManifestations(parseTurtle(
      "icd10:R73 kava:manifest [ kava:matchQuery \"SELECT *\" ; kava:queryDialect \"sql\" ] ."));
  ASSERT_EQ(foreign.size(), 1u);
  EXPECT_EQ(foreign[0].code, FindingCode::ForeignDialect);
}

TEST(Evaluate, HyperglycemiaStrictAndInclusive) {
  Dataset glucose = csvFixture("glucose.csv");
  EXPECT_EQ(matchRows(only("listing5.ttl"), glucose), std::vector<std::size_t>{2});
  Dataset sugar = csvFixture("blood_sugar.csv");
  EXPECT_EQ(matchRows(only("listing4.ttl"), sugar), (std::vector<std::size_t>{1, 2}));
}

TEST(Evaluate, DirectMappingMatchesByIdentifier) {
  Dataset patients = csvFixture("patients.csv");
  EXPECT_EQ(evaluateManifestation(only("listing3.ttl"), patients),
            std::vector<std::string>{"12345"});
  Dataset other = patients;
  Dataset none(Schema({{"patientId"}, {"bloodSugar"}}, {"patientId"}));
  none.append({{1.0, 5.0}});
  EXPECT_TRUE(evaluateManifestation(only("listing3.ttl"), none).empty());
}

TEST(Evaluate, UnknownVariableAndForeignDialect) {
  Dataset glucose = csvFixture("glucose.csv");
  EXPECT_EQ(codeOf([&] { matchRows(only("listing4.ttl"), glucose); }), ErrorCode::UnknownVariable);
  Manifestation m = createManifestation(kR73, IndirectQueryMapping{"SELECT 1", "sql"}, "", "");
  EXPECT_EQ(codeOf([&] { matchRows(m, glucose); }), ErrorCode::ForeignDialect);
}

TEST(ToPredicate, InclusiveBounds) {
  IndirectVariableMapping both{Term::string("x"), Term::integer(1), Term::decimal(2.5)};
  EXPECT_EQ(toPredicate(both), parsePredicate("[x] >= 1 AND [x] <= 2.5"));
  IndirectVariableMapping upper{Term::string("x"), std::nullopt, Term::integer(3)};
  EXPECT_EQ(toPredicate(upper), parsePredicate("[x] <= 3"));
}

TEST(CreateManifestation, ValidatesKind) {
  EXPECT_EQ(codeOf([] { createManifestation(kR73, DirectMapping{}, "", ""); }),
            ErrorCode::InvalidKind);
  EXPECT_EQ(codeOf([] {
              createManifestation(kR73, IndirectVariableMapping{Term::string("x"), {}, {}}, "", "");
            }),
            ErrorCode::InvalidKind);
  EXPECT_EQ(codeOf([] {
              createManifestation(
                  kR73, IndirectVariableMapping{Term::string("x"), Term::integer(5), Term::integer(1)},
                  "", "");
            }),
            ErrorCode::InvalidKind);
  EXPECT_EQ(codeOf([] { createManifestation(kR73, IndirectQueryMapping{"[a] >", {}}, "", ""); }),
            ErrorCode::InvalidKind);
  EXPECT_EQ(codeOf([] { createManifestation("", IndirectQueryMapping{"[a] > 1"}, "", ""); }),
            ErrorCode::InvalidKind);
}

TEST(CreateManifestation, StampsProvenance) {
  Manifestation m = createManifestation(
      kR73, DirectMapping{{{Term::string("patientId"), Term::integer(12345)}}}, "Doctor Dreamy",
      "2019-02-04");
  EXPECT_EQ(m.provenance.creatorName, "Doctor Dreamy");
  EXPECT_EQ(m.provenance.dateSubmitted, "2019-02-04");
  Graph g = manifestationsToGraph({m});
  EXPECT_TRUE(isomorphicTrees(g, parseTurtle(readFixture("listing3.ttl"))));
  Manifestation bare = createManifestation(kR73, IndirectQueryMapping{"[a] > 1"}, "", "");
  EXPECT_TRUE(bare.provenance.empty());
}

TEST(ManifestationsToGraph, InverseOfLoad) {
  for (const char* name : {"listing3.ttl", "listing4.ttl", "listing5.ttl"}) {
    Graph g = parseTurtle(readFixture(name));
    auto ms = loadManifestations(g);
    EXPECT_TRUE(isomorphicTrees(manifestationsToGraph(ms), g)) << name;
    EXPECT_EQ(loadManifestations(manifestationsToGraph(ms)), ms);
  }
  Manifestation foreign = createManifestation(kR73, IndirectQueryMapping{"x", "sql"}, "", "");
  EXPECT_EQ(loadManifestations(manifestationsToGraph({foreign}))[0], foreign);
}

TEST(AppendAndRemove, AnchorsIdentifyNodes) {
  Graph g = parseTurtle(readFixture("listing1.ttl"));
  Manifestation m = only("listing3.ttl");
  std::string anchor = appendManifestation(g, m);
  EXPECT_EQ(g.size(), 12u);
  auto loaded = loadManifestations(g);
  ASSERT_EQ(loaded.size(), 1u);
  EXPECT_EQ(loaded[0].anchor, anchor);
  EXPECT_FALSE(removeManifestation(g, "m-nothing"));
  EXPECT_TRUE(removeManifestation(g, anchor));
  EXPECT_EQ(g, parseTurtle(readFixture("listing1.ttl")));
}

TEST(MatchConceptRows, UnionInDatasetOrder) {
  Dataset d = csvFixture("glucose_days.csv");
  auto a = createManifestation(kR73, IndirectQueryMapping{"[glucose] > 240"}, "", "");
  auto b = createManifestation(kR73, IndirectQueryMapping{"[glucose] < 160"}, "", "");
  auto other = createManifestation(std::string(ns::icd10) + "E11",
                                   IndirectQueryMapping{"[glucose] > 0"}, "", "");
  EXPECT_EQ(matchConceptRows({a, b, other}, kR73, d), (std::vector<std::size_t>{0, 2, 6}));
}

TEST(FindConflicts, PrototypeOutsideIndirectMapping) {
  Dataset patients = csvFixture("patients.csv");
  auto proto = [&](double id) {
    return createManifestation(kR73, DirectMapping{{{Term::string("patientId"),
                                                     Term::integer(static_cast<long>(id))}}},
                               "", "");
  };
  auto rule = createManifestation(
      kR73, IndirectVariableMapping{Term::string("bloodSugar"), Term::integer(200), std::nullopt},
      "", "");
  EXPECT_TRUE(findConflicts({proto(12345), rule}, patients).empty());
  auto conflicts = findConflicts({proto(12345), proto(12346), rule}, patients);
  ASSERT_EQ(conflicts.size(), 1u);
  EXPECT_EQ(conflicts[0].recordId, "12346");
  EXPECT_EQ(conflicts[0].conceptId, kR73);
}
