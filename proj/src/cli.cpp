#include "kava/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kava/dataset.hpp"
#include "kava/error.hpp"
#include "kava/gait.hpp"
#include "kava/jsonld.hpp"
#include "kava/manifestation.hpp"
#include "kava/turtle.hpp"
#include "kava/utilization.hpp"

namespace kava {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string readText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

enum class Format { Turtle, JsonLd };

Format formatOf(const fs::path& path) {
  std::string ext = path.extension().string();
  if (ext == ".ttl") return Format::Turtle;
  if (ext == ".jsonld") return Format::JsonLd;
  throw Error(ErrorCode::Io, "unsupported file extension '" + ext + "' for " +
                                 path.string() + " (expected .ttl or .jsonld)");
}

std::string serialize(const Graph& graph, Format format) {
  return format == Format::Turtle ? serializeTurtle(graph) : serializeJsonLd(graph);
}

bool isBlank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

json findingJson(const Finding& f, const std::string& file) {
  json j = {{"code", findingCodeName(f.code)},
            {"severity", f.severity == Severity::Error ? "error" : "warning"},
            {"subject", f.subject},
            {"message", f.message}};
  if (!f.path.empty()) j["path"] = f.path;
  if (!file.empty()) j["file"] = file;
  return j;
}

}  // namespace

std::vector<Finding> validateStore(const Graph& graph) {
  std::vector<Finding> out;
  auto add = [&](const Finding& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  auto schemes = schemeIds(graph);
  for (const std::string& id : schemes) {
    for (const Finding& f : validateScheme(loadScheme(graph, id))) add(f);
  }
  if (schemes.empty()) {
    for (const Triple& t :
         graph.match(std::nullopt, vocab::rdfType(), vocab::skos("Concept"))) {
      add({FindingCode::NotInScheme, Severity::Warning, t.subject.value(), {},
           "concept has no skos:inScheme and was ignored"});
    }
  }
  for (const Finding& f : validateManifestations(graph)) add(f);
  return out;
}

Graph readKnowledge(const fs::path& path) {
  Format format = formatOf(path);
  std::string text = readText(path);
  PrefixMap prefixes = environmentPrefixes();
  return format == Format::Turtle ? parseTurtle(text, prefixes)
                                  : parseJsonLd(text, prefixes);
}

void writeFileAtomic(const fs::path& path, const std::string& text) {
  fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  std::random_device rd;
  fs::path tmp = dir / ("." + path.filename().string() + ".tmp" +
                        std::to_string(rd() % 1000000));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) {
      fs::remove(tmp);
      throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
  }
}

void writeKnowledge(const fs::path& path, const Graph& graph) {
  writeFileAtomic(path, serialize(graph, formatOf(path)));
}

std::string resolveIri(const std::string& text, const PrefixMap& prefixes) {
  if (text.find("://") != std::string::npos || text.starts_with("urn:")) return text;
  return expand(text, prefixes);
}

// ---------------------------------------------------------------------------

namespace {

class Commands {
 public:
  Commands(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int validate(const std::vector<std::string>& paths) {
    bool errors = false;
    for (const std::string& p : paths) {
      Graph g = readKnowledge(p);
      for (const Finding& f : validateStore(g)) {
        out_ << findingJson(f, p).dump() << "\n";
        errors |= f.severity == Severity::Error;
      }
    }
    return errors ? kExitFindings : kExitOk;
  }

  int convert(const std::string& input, const std::string& to,
              const std::string& output) {
    Format target = to == "ttl" ? Format::Turtle : Format::JsonLd;
    if (!output.empty() && formatOf(output) != target) {
      throw Error(ErrorCode::Io, "output extension does not match --to " + to);
    }
    formatOf(input);
    std::string text = readText(input);
    std::string result;
    if (!isBlank(text)) result = serialize(readKnowledge(input), target);
    emit(output, result);
    return kExitOk;
  }

  int manifest(const std::string& knowledge, const std::string& data,
               const std::string& conceptText, const std::vector<std::string>& ids) {
    Graph g = readKnowledge(knowledge);
    std::string conceptId = resolveIri(conceptText, g.prefixes());
    std::string csv = readText(data);
    Dataset d = loadCsv(csv, inferSchema(csv, ids));
    int status = kExitOk;
    std::set<std::size_t> rows;
    for (const Manifestation& m : loadManifestations(g)) {
      if (m.conceptId != conceptId) continue;
      try {
        auto matched = matchRows(m, d);
        rows.insert(matched.begin(), matched.end());
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ForeignDialect) throw;
        err_ << "warning: manifestation " << m.anchor << " of " << conceptId
             << " uses query dialect '"
             << std::get<IndirectQueryMapping>(m.kind).dialect
             << "' and must be evaluated by an external engine\n";
        status = kExitFindings;
      }
    }
    json result = json::array();
    bool numericIds = d.schema().identifyingVariables().size() == 1 &&
                      d.schema()
                              .variables()[*d.schema().indexOf(
                                  d.schema().identifyingVariables().front())]
                              .kind == VariableKind::Number;
    for (std::size_t row : rows) {
      if (numericIds) {
        double v = std::get<double>(
            d.value(row, d.schema().identifyingVariables().front()));
        if (std::nearbyint(v) == v && std::fabs(v) < 9007199254740992.0) {
          result.push_back(static_cast<std::int64_t>(v));
        } else {
          result.push_back(v);
        }
      } else {
        result.push_back(d.recordId(row));
      }
    }
    out_ << result.dump() << "\n";
    return status;
  }

  int annotate(const std::string& knowledge, const std::string& conceptText,
               const std::vector<std::string>& prototypes,
               const std::string& creator, const std::string& date,
               const std::string& output) {
    Graph g = readKnowledge(knowledge);
    std::string conceptId = resolveIri(conceptText, g.prefixes());
    DirectMapping direct;
    for (const std::string& p : prototypes) {
      auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "--prototype expects variable=value, got '" + p + "'");
      }
      direct.bindings.push_back({Term::string(p.substr(0, eq)),
                                 literalFor(p.substr(eq + 1))});
    }
    if (creator.empty()) {
      err_ << "warning: no --creator given; provenance is omitted\n";
    }
    Manifestation m = createManifestation(conceptId, direct, creator, date);
    for (const Manifestation& existing : loadManifestations(g)) {
      if (existing.conceptId == conceptId && existing.kind == m.kind) {
        out_ << json{{"status", "unchanged"},
                     {"concept", conceptId},
                     {"anchor", existing.anchor}}
                    .dump()
             << "\n";
        return kExitOk;
      }
    }
    std::string anchor = appendManifestation(g, m);
    return commit(g, output.empty() ? knowledge : output,
                  {{"status", "added"}, {"concept", conceptId}, {"anchor", anchor}});
  }

  struct VisOptions {
    std::string knowledge, data, pattern, scheme, conceptText, channel = "color",
        timeVariable, axis, output;
    std::vector<std::string> ids;
  };

  int exportVis(const VisOptions& o) {
    Graph g = readKnowledge(o.knowledge);
    std::optional<Dataset> data;
    if (!o.data.empty()) {
      std::string csv = readText(o.data);
      data = loadCsv(csv, inferSchema(csv, o.ids));
    }
    auto needData = [&]() -> const Dataset& {
      if (!data) throw Error(ErrorCode::InvalidArgument, "--pattern " + o.pattern + " needs a data file");
      return *data;
    };
    auto needConcept = [&] {
      if (o.conceptText.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--pattern " + o.pattern + " needs --concept");
      }
      return resolveIri(o.conceptText, g.prefixes());
    };
    auto manifestations = loadManifestations(g);
    VisSpecFragment f{FragmentKind::ConceptTree, json::object(), {}};

    if (o.pattern == "tree") {
      ConceptScheme scheme = loadScheme(g, pickScheme(g, o.scheme));
      std::map<std::string, double> frequencies;
      if (data) {
        for (const auto& [id, c] : scheme.concepts) {
          std::set<std::size_t> rows;
          for (const Manifestation& m : manifestations) {
            if (m.conceptId != id) continue;
            if (auto matched = tryMatch(m, *data)) rows.insert(matched->begin(), matched->end());
          }
          frequencies[id] = static_cast<double>(rows.size());
        }
      }
      f = conceptTreeSpec(scheme, frequencies);
    } else if (o.pattern == "marks") {
      const Dataset& d = needData();
      std::vector<Manifestation> usable;
      std::string only = o.conceptText.empty() ? "" : needConcept();
      for (const Manifestation& m : manifestations) {
        if (!only.empty() && m.conceptId != only) continue;
        if (tryMatch(m, d)) usable.push_back(m);
      }
      f = encodedMarksSpec(d, usable, o.channel);
    } else if (o.pattern == "aggregate") {
      const Dataset& d = needData();
      std::string conceptId = needConcept();
      if (o.timeVariable.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--pattern aggregate needs --time");
      }
      std::set<std::size_t> rows;
      for (const Manifestation& m : manifestations) {
        if (m.conceptId != conceptId) continue;
        if (auto matched = tryMatch(m, d)) rows.insert(matched->begin(), matched->end());
      }
      f = aggregateMarkSpec(d, conceptId, {rows.begin(), rows.end()}, o.timeVariable);
    } else {
      std::string conceptId = needConcept();
      if (o.axis.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--pattern threshold needs --axis");
      }
      std::optional<VisSpecFragment> found;
      for (const Manifestation& m : manifestations) {
        if (m.conceptId != conceptId || std::holds_alternative<DirectMapping>(m.kind)) continue;
        try {
          found = thresholdRegionSpec(m.kind, o.axis);
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InvalidArgument) throw;
        }
      }
      if (!found) {
        throw Error(ErrorCode::InvalidArgument,
                    "no indirect mapping of " + conceptId + " bounds '" + o.axis + "'");
      }
      f = *found;
    }
    for (const std::string& w : f.warnings) err_ << "warning: " << w << "\n";
    if (o.output.empty()) {
      out_ << f.document.dump() << "\n";
    } else {
      writeFileAtomic(o.output, f.document.dump(2) + "\n");
    }
    return kExitOk;
  }

  struct GaitOptions {
    std::string store, trials, patient, scheme, filter, conceptText, creator,
        date, param, output, explorer;
    double min = 0, max = 0;
    std::vector<std::string> select;
  };

  int gaitAnalyze(const GaitOptions& o, bool fullRows) {
    Graph g = readKnowledge(o.store);
    auto trials = gait::loadTrials(o.trials);
    auto patient = std::find_if(trials.begin(), trials.end(),
                                [&](const gait::GaitTrial& t) { return t.patientId == o.patient; });
    if (patient == trials.end()) {
      throw Error(ErrorCode::Io, "no trial for patient " + o.patient + " in " + o.trials);
    }
    std::optional<Predicate> filter;
    if (!o.filter.empty()) filter = parsePredicate(o.filter);
    std::vector<std::string> warnings;
    auto models = gait::categoryModelsFromStore(g, pickScheme(g, o.scheme), trials,
                                                filter, &warnings);
    for (const std::string& w : warnings) err_ << "warning: " << w << "\n";
    auto params = gait::computeParams(*patient);
    for (const gait::KnowledgeRow& row : gait::knowledgeTable(models, params)) {
      if (fullRows) {
        out_ << gait::knowledgeRowJson(row).dump() << "\n";
      } else {
        out_ << json{{"concept", row.conceptId},
                     {"label", row.label},
                     {"score", row.score ? json(*row.score) : json(nullptr)},
                     {"inside", row.match.inside},
                     {"defined", row.match.defined}}
                    .dump()
             << "\n";
      }
    }
    if (!o.explorer.empty()) {
      std::vector<gait::CategoryModel> shown;
      std::set<std::string> wanted;
      for (const std::string& s : o.select) wanted.insert(resolveIri(s, g.prefixes()));
      for (const auto& m : models) {
        if (wanted.empty() || wanted.contains(m.conceptId)) shown.push_back(m);
      }
      writeFileAtomic(o.explorer,
                      gait::parameterExplorerSpec(params, shown).document.dump(2) + "\n");
    }
    return kExitOk;
  }

  int gaitAddPrototype(const GaitOptions& o) {
    Graph g = readKnowledge(o.store);
    std::string conceptId = resolveIri(o.conceptText, g.prefixes());
    auto trials = gait::loadTrials(o.trials);
    auto patient = std::find_if(trials.begin(), trials.end(),
                                [&](const gait::GaitTrial& t) { return t.patientId == o.patient; });
    if (patient == trials.end()) {
      throw Error(ErrorCode::Io, "no trial for patient " + o.patient + " in " + o.trials);
    }
    if (o.creator.empty()) err_ << "warning: no --creator given; provenance is omitted\n";
    Graph updated = gait::addPrototype(g, conceptId, *patient, o.creator, o.date);
    return commit(updated, o.output.empty() ? o.store : o.output,
                  {{"status", "added"}, {"concept", conceptId}, {"patientId", o.patient}});
  }

  int gaitSetRange(const GaitOptions& o) {
    Graph g = readKnowledge(o.store);
    std::string conceptId = resolveIri(o.conceptText, g.prefixes());
    if (!g.contains({Term::iri(conceptId), vocab::rdfType(), vocab::skos("Concept")})) {
      throw Error(ErrorCode::UnknownConcept, conceptId);
    }
    if (o.creator.empty()) err_ << "warning: no --creator given; provenance is omitted\n";
    gait::CategoryModel model;
    model.conceptId = conceptId;
    json added = json::array();
    for (std::size_t index : gait::resolveParameter(o.param)) {
      std::string name(gait::parameterRoster()[index].name);
      for (const Manifestation& m : loadManifestations(g)) {
        const auto* range = std::get_if<IndirectVariableMapping>(&m.kind);
        if (m.conceptId == conceptId && range && variableName(range->variable) == name) {
          removeManifestation(g, m.anchor);
        }
      }
      auto [updated, manifestation] =
          gait::overrideRange(model, name, o.min, o.max, o.creator, o.date);
      model = updated;
      appendManifestation(g, manifestation);
      added.push_back(name);
    }
    return commit(g, o.output.empty() ? o.store : o.output,
                  {{"status", "added"}, {"concept", conceptId}, {"parameters", added}});
  }

 private:
  static Term literalFor(const std::string& text) {
    if (auto n = parseNumber(text)) {
      bool integral = text.find_first_of(".eE") == std::string::npos;
      try {
        return Term::numeric(text.front() == '+' ? text.substr(1) : text,
                             integral ? Datatype::Integer : Datatype::Decimal);
      } catch (const Error&) {
      }
    }
    return Term::string(text);
  }

  std::optional<std::vector<std::size_t>> tryMatch(const Manifestation& m,
                                                   const Dataset& d) {
    try {
      return matchRows(m, d);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ForeignDialect && e.code() != ErrorCode::UnknownVariable) {
        throw;
      }
      err_ << "warning: skipping manifestation " << m.anchor << " of " << m.conceptId
           << ": " << e.what() << "\n";
      return std::nullopt;
    }
  }

  static std::string pickScheme(const Graph& g, const std::string& requested) {
    if (!requested.empty()) return resolveIri(requested, g.prefixes());
    auto ids = schemeIds(g);
    if (ids.size() == 1) return ids.front();
    throw Error(ErrorCode::InvalidArgument,
                ids.empty() ? "the knowledge file contains no concept scheme"
                            : "several concept schemes; choose one with --scheme");
  }

  // Re-validates and writes; refuses invalid stores.
  int commit(const Graph& g, const std::string& path, const json& report) {
    formatOf(path);
    auto findings = validateStore(g);
    for (const Finding& f : findings) {
      if (f.severity == Severity::Error) err_ << findingJson(f, path).dump() << "\n";
    }
    if (hasErrors(findings)) {
      err_ << "error: refusing to write an invalid knowledge store to " << path << "\n";
      return kExitFindings;
    }
    writeKnowledge(path, g);
    out_ << report.dump() << "\n";
    return kExitOk;
  }

  void emit(const std::string& output, const std::string& text) {
    if (output.empty()) {
      out_ << text;
    } else {
      writeFileAtomic(output, text);
    }
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Explicit knowledge engine: concepts, manifestations, utilization"};
  app.name("kava");
  app.require_subcommand(1);
  Commands commands(out, err);
  std::function<int()> action;

  auto* validate = app.add_subcommand("validate", "Validate knowledge files");
  std::vector<std::string> validatePaths;
  validate->add_option("paths", validatePaths, "Files (.ttl or .jsonld)")->required();
  validate->callback([&] { action = [&] { return commands.validate(validatePaths); }; });

  auto* convert = app.add_subcommand("convert", "Convert between Turtle and JSON-LD");
  std::string convertInput, convertTo, convertOutput;
  convert->add_option("input", convertInput)->required();
  convert->add_option("--to", convertTo)->required()->check(CLI::IsMember({"ttl", "jsonld"}));
  convert->add_option("-o,--output", convertOutput);
  convert->callback([&] {
    action = [&] { return commands.convert(convertInput, convertTo, convertOutput); };
  });

  auto* manifest = app.add_subcommand("manifest", "Evaluate a concept's manifestations");
  std::string manifestKnowledge, manifestData, manifestConcept;
  std::vector<std::string> manifestIds;
  manifest->add_option("knowledge", manifestKnowledge)->required();
  manifest->add_option("data", manifestData, "CSV data file")->required();
  manifest->add_option("--concept", manifestConcept)->required();
  manifest->add_option("--id", manifestIds, "Identifying variables (default: first column)");
  manifest->callback([&] {
    action = [&] {
      return commands.manifest(manifestKnowledge, manifestData, manifestConcept, manifestIds);
    };
  });

  auto* annotate = app.add_subcommand("annotate", "Add a prototype annotation");
  std::string annotateKnowledge, annotateConcept, annotateCreator, annotateDate,
      annotateOutput;
  std::vector<std::string> annotatePrototypes;
  annotate->add_option("knowledge", annotateKnowledge)->required();
  annotate->add_option("--concept", annotateConcept)->required();
  annotate->add_option("--prototype", annotatePrototypes, "variable=value")->required();
  annotate->add_option("--creator", annotateCreator);
  annotate->add_option("--date", annotateDate);
  annotate->add_option("-o,--output", annotateOutput);
  annotate->callback([&] {
    action = [&] {
      return commands.annotate(annotateKnowledge, annotateConcept, annotatePrototypes,
                               annotateCreator, annotateDate, annotateOutput);
    };
  });

  auto* exportVis = app.add_subcommand("export-vis", "Write a visualization fragment");
  Commands::VisOptions vis;
  exportVis->add_option("knowledge", vis.knowledge)->required();
  exportVis->add_option("data", vis.data, "CSV data file");
  exportVis->add_option("--pattern", vis.pattern)
      ->required()
      ->check(CLI::IsMember({"tree", "marks", "aggregate", "threshold"}));
  exportVis->add_option("--scheme", vis.scheme);
  exportVis->add_option("--concept", vis.conceptText);
  exportVis->add_option("--channel", vis.channel);
  exportVis->add_option("--time", vis.timeVariable);
  exportVis->add_option("--axis", vis.axis);
  exportVis->add_option("--id", vis.ids);
  exportVis->add_option("-o,--output", vis.output);
  exportVis->callback([&] { action = [&] { return commands.exportVis(vis); }; });

  auto* gaitCmd = app.add_subcommand("gait", "Gait category matching");
  gaitCmd->require_subcommand(1);
  Commands::GaitOptions g;
  auto* analyze = gaitCmd->add_subcommand("analyze", "Match scores per category");
  auto* table = gaitCmd->add_subcommand("table", "Knowledge table rows");
  for (auto* sub : {analyze, table}) {
    sub->add_option("store", g.store)->required();
    sub->add_option("trials", g.trials, "Trial directory")->required();
    sub->add_option("--patient", g.patient)->required();
    sub->add_option("--scheme", g.scheme);
    sub->add_option("--filter", g.filter, "Population filter predicate");
    sub->add_option("--explorer", g.explorer, "Write the parameter explorer fragment");
    sub->add_option("--select", g.select, "Categories shown in the explorer");
  }
  analyze->callback([&] { action = [&] { return commands.gaitAnalyze(g, false); }; });
  table->callback([&] { action = [&] { return commands.gaitAnalyze(g, true); }; });

  auto* addProto = gaitCmd->add_subcommand("add-prototype", "Add a prototype patient");
  addProto->add_option("store", g.store)->required();
  addProto->add_option("trials", g.trials)->required();
  addProto->add_option("--concept", g.conceptText)->required();
  addProto->add_option("--patient", g.patient)->required();
  addProto->add_option("--creator", g.creator);
  addProto->add_option("--date", g.date);
  addProto->add_option("-o,--output", g.output);
  addProto->callback([&] { action = [&] { return commands.gaitAddPrototype(g); }; });

  auto* setRange = gaitCmd->add_subcommand("set-range", "Override a parameter range");
  setRange->add_option("store", g.store)->required();
  setRange->add_option("--concept", g.conceptText)->required();
  setRange->add_option("--param", g.param)->required();
  setRange->add_option("--min", g.min)->required();
  setRange->add_option("--max", g.max)->required();
  setRange->add_option("--creator", g.creator);
  setRange->add_option("--date", g.date);
  setRange->add_option("-o,--output", g.output);
  setRange->callback([&] { action = [&] { return commands.gaitSetRange(g); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    return action ? action() : kExitInput;
  } catch (const SyntaxError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::DuplicatePrototype:
      case ErrorCode::CyclicScheme:
        return kExitFindings;
      default:
        return kExitInput;
    }
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace kava
