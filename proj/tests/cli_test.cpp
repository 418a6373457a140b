#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "kava/cli.hpp"
#include "kava/gait.hpp"
#include "kava/jsonld.hpp"
#include "kava/manifestation.hpp"
#include "kava/turtle.hpp"
#include "test_support.hpp"

using namespace kava;
using namespace kava::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;

  std::vector<json> lines() const {
    std::vector<json> out;
    std::istringstream in(this->out);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
  }
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int status = runCli(args, out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kava_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string copy(const std::string& fixture) {
    fs::copy_file(fixturePath(fixture), dir_ / fixture);
    return (dir_ / fixture).string();
  }
  std::string path(const std::string& name) { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
  }
  std::string read(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidateListing1IsCleanOfErrors) {
  Outcome r = run({"validate", fixturePath("listing1.ttl")});
  EXPECT_EQ(r.status, 0) << r.err;
  auto lines = r.lines();
  EXPECT_EQ(lines.size(), 2u);
  for (const json& l : lines) EXPECT_EQ(l["code"], "DanglingEdge");
}

TEST_F(CliTest, ValidateReportsTheListing2Cycle) {
  Outcome r = run({"validate", fixturePath("listing2.jsonld")});
  EXPECT_EQ(r.status, 1);
  bool found = false;
  for (const json& l : r.lines()) {
    if (l["code"] == "BroaderCycle") {
      found = true;
      EXPECT_EQ(l["severity"], "error");
      EXPECT_EQ(l["subject"], gps("midKnee").value());
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(run({"validate", fixturePath("broader_cycle.ttl")}).status, 1);
  EXPECT_EQ(run({"validate", fixturePath("gps_scheme.ttl")}).out, "");
}

TEST_F(CliTest, ValidateInputErrorsExitTwo) {
  EXPECT_EQ(run({"validate", fixturePath("listing2_verbatim.jsonld")}).status, 2);
  EXPECT_EQ(run({"validate", path("missing.ttl")}).status, 2);
  EXPECT_EQ(run({"validate", fixturePath("glucose.csv")}).status, 2);
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"frobnicate"}).status, 2);
}

TEST_F(CliTest, ConvertRoundTrip) {
  Outcome toJson = run({"convert", fixturePath("listing3.ttl"), "--to", "jsonld", "-o", path("l3.jsonld")});
  ASSERT_EQ(toJson.status, 0) << toJson.err;
  Outcome toTtl = run({"convert", path("l3.jsonld"), "--to", "ttl"});
  ASSERT_EQ(toTtl.status, 0) << toTtl.err;
  EXPECT_TRUE(isomorphicTrees(parseTurtle(toTtl.out), listing3ByHand()));
  EXPECT_EQ(run({"convert", fixturePath("listing3.ttl"), "--to", "xml"}).status, 2);
  EXPECT_EQ(run({"convert", fixturePath("listing3.ttl"), "--to", "ttl", "-o", path("x.jsonld")}).status,
            2);
  write("empty.ttl", "\n  \n");
  Outcome empty = run({"convert", path("empty.ttl"), "--to", "jsonld"});
  EXPECT_EQ(empty.status, 0);
  EXPECT_EQ(empty.out, "");
}

TEST_F(CliTest, ManifestStrictAndInclusive) {
  Outcome strict = run({"manifest", fixturePath("listing5.ttl"), fixturePath("glucose.csv"),
                    "--concept", "icd10:R73"});
  ASSERT_EQ(strict.status, 0) << strict.err;
  EXPECT_EQ(strict.out, "[250]\n");
  Outcome inclusive = run({"manifest", fixturePath("listing4.ttl"), fixturePath("blood_sugar.csv"),
                       "--concept", "http://id.who.int/icd/release/10/R73"});
  EXPECT_EQ(inclusive.out, "[200,250]\n");
  Outcome direct = run({"manifest", fixturePath("listing3.ttl"), fixturePath("patients.csv"),
                    "--concept", "icd10:R73"});
  EXPECT_EQ(direct.out, "[12345]\n");
  Outcome unknownVar = run({"manifest", fixturePath("listing4.ttl"), fixturePath("glucose.csv"),
                        "--concept", "icd10:R73"});
  EXPECT_EQ(unknownVar.status, 2);
}

TEST_F(CliTest, ManifestForeignDialectWarns) {
  write("sql.ttl",
        "icd10:R73 kava:manifest [ kava:matchQuery \"SELECT id FROM t\" ; kava:queryDialect \"sql\" ] .");
  Outcome r = run({"manifest", path("sql.ttl"), fixturePath("glucose.csv"), "--concept", "icd10:R73"});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.out, "[]\n");
  EXPECT_NE(r.err.find("sql"), std::string::npos);
}

TEST_F(CliTest, AnnotateReproducesListing3) {
  write("store.ttl", "");
  Outcome r = run({"annotate", path("store.ttl"), "--concept", "icd10:R73", "--prototype",
               "patientId=12345", "--creator", "Doctor Dreamy", "--date", "2019-02-04"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.lines()[0]["status"], "added");
  Graph g = parseTurtle(read("store.ttl"));
  EXPECT_TRUE(isomorphicTrees(g, parseTurtle(readFixture("listing3.ttl"))));

  std::string before = read("store.ttl");
  Outcome again = run({"annotate", path("store.ttl"), "--concept", "icd10:R73", "--prototype",
                   "patientId=12345", "--creator", "Doctor Dreamy", "--date", "2019-02-04"});
  EXPECT_EQ(again.status, 0);
  EXPECT_EQ(again.lines()[0]["status"], "unchanged");
  EXPECT_EQ(read("store.ttl"), before);
}

TEST_F(CliTest, AnnotateWithoutCreatorWarns) {
  std::string store = copy("listing1.ttl");
  Outcome r = run({"annotate", store, "--concept", "gps:midKnee", "--prototype", "patientId=p7", "-o",
               path("out.jsonld")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("creator"), std::string::npos);
  auto ms = loadManifestations(parseJsonLd(read("out.jsonld")));
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_TRUE(ms[0].provenance.empty());
  EXPECT_EQ(std::get<DirectMapping>(ms[0].kind).bindings[0].value, Term::string("p7"));
  EXPECT_EQ(read("listing1.ttl"), readFixture("listing1.ttl"));  // -o leaves the input alone
  EXPECT_EQ(run({"annotate", store, "--concept", "gps:midKnee", "--prototype", "noequals"}).status,
            2);
}

TEST_F(CliTest, AnnotateRefusesToWriteAnInvalidStore) {
  std::string store = copy("listing2.jsonld");
  std::string before = read("listing2.jsonld");
  Outcome r = run({"annotate", store, "--concept", "gps:midKnee", "--prototype", "patientId=1",
               "--creator", "x"});
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(read("listing2.jsonld"), before);
}

TEST_F(CliTest, ExportVisPatterns) {
  Outcome tree = run({"export-vis", fixturePath("gps_scheme.ttl"), "--pattern", "tree"});
  ASSERT_EQ(tree.status, 0) << tree.err;
  json doc = json::parse(tree.out);
  EXPECT_EQ(doc["kind"], "conceptTree");
  EXPECT_EQ(doc["data"]["values"].size(), 3u);
  EXPECT_TRUE(validateFragment(doc).empty());

  Outcome threshold = run({"export-vis", fixturePath("listing4.ttl"), "--pattern", "threshold",
                       "--concept", "icd10:R73", "--axis", "bloodSugar", "-o", path("t.json")});
  ASSERT_EQ(threshold.status, 0) << threshold.err;
  json t = json::parse(read("t.json"));
  EXPECT_EQ(t["region"]["lower"], 200);

  Outcome marks = run({"export-vis", fixturePath("listing5.ttl"), fixturePath("glucose_days.csv"),
                   "--pattern", "marks", "--channel", "x"});
  ASSERT_EQ(marks.status, 0) << marks.err;
  EXPECT_TRUE(validateFragment(json::parse(marks.out)).empty());

  Outcome aggregate = run({"export-vis", fixturePath("listing5.ttl"), fixturePath("glucose_days.csv"),
                       "--pattern", "aggregate", "--concept", "icd10:R73", "--time", "day"});
  ASSERT_EQ(aggregate.status, 0) << aggregate.err;
  EXPECT_EQ(json::parse(aggregate.out)["layer"].size(), 2u);

  EXPECT_EQ(run({"export-vis", fixturePath("listing2.jsonld"), "--pattern", "tree"}).status, 1);
  EXPECT_EQ(run({"export-vis", fixturePath("listing5.ttl"), "--pattern", "aggregate"}).status, 2);
  EXPECT_EQ(run({"export-vis", fixturePath("listing5.ttl"), "--pattern", "pie"}).status, 2);
}

TEST_F(CliTest, GaitWorkflow) {
  std::string store = copy("gait_categories.ttl");
  std::vector<gait::GaitTrial> trials;
  for (int i = 0; i < 4; ++i) {
    gait::SyntheticGait g;
    g.stance = 0.58 + 0.02 * i;
    g.duration = 5;
    trials.push_back(gait::synthesizeTrial("p" + std::to_string(i), g, 70.0, 30.0 + 10 * i));
  }
  gait::writeTrials(dir_ / "trials", trials);
  std::string trialDir = (dir_ / "trials").string();

  for (int i = 0; i < 3; ++i) {
    Outcome add = run({"gait", "add-prototype", store, trialDir, "--concept", "gps:affectedKnee",
                   "--patient", "p" + std::to_string(i), "--creator", "Doctor Dreamy", "--date",
                   "2024-05-01"});
    ASSERT_EQ(add.status, 0) << add.err;
  }
  Outcome dup = run({"gait", "add-prototype", store, trialDir, "--concept", "gps:affectedKnee",
                 "--patient", "p0", "--creator", "x"});
  EXPECT_EQ(dup.status, 1);

  Outcome analyze = run({"gait", "analyze", store, trialDir, "--patient", "p3", "--explorer",
                     path("explorer.json"), "--select", "gps:affectedKnee"});
  ASSERT_EQ(analyze.status, 0) << analyze.err;
  auto rows = analyze.lines();
  EXPECT_EQ(rows.size(), 7u);
  for (const json& row : rows) {
    if (row["concept"] == gps("affectedKnee").value()) {
      EXPECT_EQ(row["defined"], 16);
      EXPECT_LT(row["score"].get<double>(), 1.0);
    } else {
      EXPECT_TRUE(row["score"].is_null());
    }
  }
  EXPECT_TRUE(validateFragment(json::parse(read("explorer.json"))).empty());

  Outcome setRange = run({"gait", "set-range", store, "--concept", "gps:affectedKnee", "--param",
                      "stanceTime", "--min", "0.5", "--max", "0.7", "--creator", "Doctor Dreamy"});
  ASSERT_EQ(setRange.status, 0) << setRange.err;
  Outcome again = run({"gait", "set-range", store, "--concept", "gps:affectedKnee", "--param",
                   "stanceTime", "--min", "0.55", "--max", "0.75"});
  ASSERT_EQ(again.status, 0) << again.err;
  std::size_t ranges = 0;
  for (const Manifestation& m : loadManifestations(parseTurtle(read("gait_categories.ttl")))) {
    if (auto* v = std::get_if<IndirectVariableMapping>(&m.kind)) {
      ++ranges;
      EXPECT_EQ(v->minValue->asDouble(), 0.55);
    }
  }
  EXPECT_EQ(ranges, 2u);

  Outcome table = run({"gait", "table", store, trialDir, "--patient", "p3", "--filter", "[age] < 45"});
  ASSERT_EQ(table.status, 0) << table.err;
  for (const json& row : table.lines()) {
    if (row["concept"] != gps("affectedKnee").value()) continue;
    EXPECT_EQ(row["prototypes"].size(), 2u);
    EXPECT_EQ(row["parameters"]["stanceTimeLeft"]["min"], 0.55);
    EXPECT_EQ(row["parameters"]["stanceTimeLeft"]["placement"], "inside");
  }

  EXPECT_EQ(run({"gait", "set-range", store, "--concept", "gps:affectedKnee", "--param", "cadence",
                 "--min", "130", "--max", "90"})
                .status,
            2);
  EXPECT_EQ(run({"gait", "analyze", store, trialDir, "--patient", "nobody"}).status, 2);
}

TEST(ResolveIri, PassThroughAndExpansion) {
  EXPECT_EQ(resolveIri("urn:x:y", defaultPrefixes()), "urn:x:y");
  EXPECT_EQ(resolveIri("http://a.example/b", defaultPrefixes()), "http://a.example/b");
  EXPECT_EQ(resolveIri("gps:mid", defaultPrefixes()), gps("mid").value());
}
