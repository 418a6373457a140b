#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "kava/error.hpp"
#include "kava/jsonld.hpp"
#include "kava/turtle.hpp"
#include "test_support.hpp"

using namespace kava;
using namespace kava::testing;

namespace {

ErrorCode codeOf(std::string_view text) {
  try {
    parseJsonLd(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted: " << text;
  return ErrorCode::Io;
}

}  // namespace

TEST(ParseJsonLd, Listing2Body) {
  Graph g = parseJsonLd(readFixture("listing2.jsonld"));
  EXPECT_EQ(g.size(), 5u);
  EXPECT_TRUE(g.contains({gps("midKnee"), vocab::skos("broader"), gps("midKnee")}));
  EXPECT_TRUE(g.contains({gps("midKnee"), vocab::rdfType(), vocab::skos("Concept")}));
}

TEST(ParseJsonLd, TruncatedListingIsASyntaxError) {
  try {
    parseJsonLd(readFixture("listing2_verbatim.jsonld"));
    FAIL();
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
    EXPECT_GE(e.line(), 13u);
  }
}

TEST(ParseJsonLd, Listing2DiffersFromListing1OnlyInTheBroaderTarget) {
  Graph l1 = parseTurtle(readFixture("listing1.ttl"));
  Graph l2 = parseJsonLd(readFixture("listing2.jsonld"));
  EXPECT_FALSE(isomorphicTrees(l1, l2));
  l2.erase({gps("midKnee"), vocab::skos("broader"), gps("midKnee")});
  l2.insert(gps("midKnee"), vocab::skos("broader"), gps("mid"));
  EXPECT_TRUE(isomorphicTrees(l1, l2));
}

TEST(ParseJsonLd, ValuesAndBlankNodes) {
  Graph g = parseJsonLd(R"([
    {"@context": {"ex": "http://example.org/x#"},
     "@id": "ex:a", "@type": ["skos:Concept", "ex:Thing"],
     "ex:n": [1, 2.5, "three"],
     "ex:child": {"ex:leaf": -4}},
    {"@context": {"ex": "http://example.org/x#"},
     "@id": "http://full.example/iri", "ex:p": {"@id": "ex:a"}}
  ])");
  Term a = Term::iri("http://example.org/x#a");
  Term n = Term::iri("http://example.org/x#n");
  EXPECT_EQ(g.size(), 8u);
  EXPECT_TRUE(g.contains({a, vocab::rdfType(), Term::iri("http://example.org/x#Thing")}));
  EXPECT_TRUE(g.contains({a, n, Term::integer(1)}));
  EXPECT_TRUE(g.contains({a, n, Term::decimal(2.5)}));
  EXPECT_TRUE(g.contains({a, n, Term::string("three")}));
  auto child = g.match(a, Term::iri("http://example.org/x#child"), std::nullopt);
  ASSERT_EQ(child.size(), 1u);
  EXPECT_TRUE(child[0].object.isBlank());
  EXPECT_TRUE(g.contains({Term::iri("http://full.example/iri"), Term::iri("http://example.org/x#p"), a}));
}

TEST(ParseJsonLd, RejectsUnsupportedConstructs) {
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", "gps:p": true})"), ErrorCode::UnsupportedFeature);
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", "gps:p": null})"), ErrorCode::UnsupportedFeature);
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", "gps:p": [[1]]})"), ErrorCode::UnsupportedFeature);
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", "gps:p": {"@value": "x", "@language": "en"}})"),
            ErrorCode::UnsupportedKeyword);
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", "@graph": []})"), ErrorCode::UnsupportedKeyword);
  EXPECT_EQ(codeOf(R"({"@context": "http://schema.org/", "@id": "gps:a"})"),
            ErrorCode::UnsupportedKeyword);
  EXPECT_EQ(codeOf(R"({"@id": "nope:a", "gps:p": 1})"), ErrorCode::UnknownPrefix);
  EXPECT_EQ(codeOf(R"({"@id": "gps:a", )"), ErrorCode::SyntaxError);
}

TEST(SerializeJsonLd, OneNodePerIriSubjectWithOwnContext) {
  Graph g = parseTurtle(readFixture("listing3.ttl"));
  auto doc = nlohmann::json::parse(serializeJsonLd(g));
  ASSERT_TRUE(doc.is_array());
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["@id"], "icd10:R73");
  EXPECT_TRUE(doc[0]["@context"].contains("kava"));
  EXPECT_FALSE(doc[0]["@context"].contains("skos"));
  EXPECT_TRUE(isomorphicTrees(parseJsonLd(doc.dump()), g));
}

TEST(SerializeJsonLd, Deterministic) {
  std::mt19937 rng(9);
  TreeGraphGenerator gen(77);
  for (int i = 0; i < 30; ++i) {
    Graph g = gen.next(30);
    EXPECT_EQ(serializeJsonLd(g), serializeJsonLd(relabelBlanks(g, rng)));
  }
}

TEST(RoundTrip, ListingsThroughJsonLd) {
  for (const char* name : {"listing1.ttl", "listing3.ttl", "listing4.ttl", "listing5.ttl"}) {
    Graph g = parseTurtle(readFixture(name));
    Graph back = parseTurtle(serializeTurtle(parseJsonLd(serializeJsonLd(g))));
    EXPECT_TRUE(isomorphicTrees(g, back)) << name;
  }
  Graph l2 = parseJsonLd(readFixture("listing2.jsonld"));
  EXPECT_TRUE(isomorphicTrees(l2, parseJsonLd(serializeJsonLd(parseTurtle(serializeTurtle(l2))))));
}
