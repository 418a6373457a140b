#include "kava/utilization.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "kava/error.hpp"

namespace kava {

using nlohmann::json;

std::string_view fragmentKindName(FragmentKind kind) {
  switch (kind) {
    case FragmentKind::ConceptTree: return "conceptTree";
    case FragmentKind::EncodedMarks: return "encodedMarks";
    case FragmentKind::AggregateMark: return "aggregateMark";
    case FragmentKind::ThresholdRegion: return "thresholdRegion";
  }
  return "?";
}

namespace {

const std::set<std::string> kChannels = {"x", "y", "color", "size"};

json numberJson(const Term& t) {
  if (t.datatype() == Datatype::Integer) return t.asInteger();
  return t.asDouble();
}

json cellJson(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  return nullptr;
}

void check(std::vector<std::string>& out, bool ok, const std::string& what) {
  if (!ok) out.push_back(what);
}

void checkEncoding(std::vector<std::string>& out, const json& enc,
                   const std::string& where) {
  if (!enc.is_object()) {
    out.push_back(where + " must be an object");
    return;
  }
  static const std::set<std::string> allowed = {"x", "y", "x2", "y2", "color",
                                                "size"};
  for (const auto& [channel, def] : enc.items()) {
    check(out, allowed.contains(channel),
          where + "." + channel + " is not a supported channel");
    check(out, def.is_object() && (def.contains("field") || def.contains("datum")),
          where + "." + channel + " needs a field or a datum");
  }
}

}  // namespace

std::vector<std::string> validateFragment(const json& doc) {
  std::vector<std::string> out;
  if (!doc.is_object()) return {"fragment must be an object"};
  static const std::set<std::string> kinds = {"conceptTree", "encodedMarks",
                                              "aggregateMark", "thresholdRegion"};
  static const std::set<std::string> keys = {"kind",  "data",   "mark",
                                             "encoding", "layer", "edges",
                                             "region", "concept", "description"};
  for (const auto& [key, value] : doc.items()) {
    check(out, keys.contains(key), "unexpected key '" + key + "'");
  }
  if (!doc.contains("kind") || !doc["kind"].is_string() ||
      !kinds.contains(doc["kind"].get<std::string>())) {
    out.push_back("missing or unknown kind");
    return out;
  }
  std::string kind = doc["kind"];
  if (doc.contains("data")) {
    const json& data = doc["data"];
    check(out, data.is_object(), "data must be an object");
    if (data.is_object()) {
      check(out, data.contains("values") && data["values"].is_array(),
            "data.values must be an array");
      if (data.contains("values") && data["values"].is_array()) {
        for (const json& row : data["values"]) {
          check(out, row.is_object(), "data.values entries must be objects");
        }
      }
    }
  }
  if (doc.contains("encoding")) checkEncoding(out, doc["encoding"], "encoding");
  if (doc.contains("layer")) {
    check(out, doc["layer"].is_array(), "layer must be an array");
    if (doc["layer"].is_array()) {
      for (const json& layer : doc["layer"]) {
        check(out, layer.is_object() && layer.contains("mark"),
              "layer entries need a mark");
        if (layer.is_object() && layer.contains("encoding")) {
          checkEncoding(out, layer["encoding"], "layer.encoding");
        }
      }
    }
  }

  if (kind == "conceptTree") {
    check(out, doc.contains("data"), "conceptTree needs data");
    check(out, doc.contains("edges") && doc["edges"].is_array(),
          "conceptTree needs an edges array");
    if (doc.contains("data") && doc["data"].contains("values")) {
      std::set<std::string> ids;
      for (const json& node : doc["data"]["values"]) {
        if (node.contains("id") && node["id"].is_string()) {
          ids.insert(node["id"].get<std::string>());
        } else {
          out.push_back("concept node without id");
        }
        check(out, node.contains("label") && node["label"].is_string(),
              "concept node without label");
        check(out, node.contains("parent") &&
                       (node["parent"].is_null() || node["parent"].is_string()),
              "concept node parent must be an id or null");
      }
      if (doc.contains("edges") && doc["edges"].is_array()) {
        for (const json& edge : doc["edges"]) {
          bool ok = edge.is_object() && edge.contains("child") &&
                    edge.contains("parent") && edge["child"].is_string() &&
                    edge["parent"].is_string();
          check(out, ok, "edge needs child and parent");
          if (ok) {
            check(out, ids.contains(edge["child"].get<std::string>()) &&
                           ids.contains(edge["parent"].get<std::string>()),
                  "edge references an unknown concept");
          }
        }
      }
    }
  } else if (kind == "encodedMarks") {
    check(out, doc.contains("data") && doc.contains("encoding") &&
                   doc.contains("mark"),
          "encodedMarks needs data, mark and encoding");
    if (doc.contains("data") && doc["data"].contains("values")) {
      for (const json& row : doc["data"]["values"]) {
        check(out, row.contains("concept") && row["concept"].is_string(),
              "encodedMarks rows need a concept field");
      }
    }
  } else if (kind == "aggregateMark") {
    check(out, doc.contains("layer") && doc["layer"].is_array(),
          "aggregateMark needs a layer array");
    check(out, doc.contains("concept") && doc["concept"].is_string(),
          "aggregateMark needs a concept");
  } else {
    check(out, doc.contains("region") && doc["region"].is_object(),
          "thresholdRegion needs a region");
    if (doc.contains("region") && doc["region"].is_object()) {
      const json& r = doc["region"];
      for (const char* bound : {"lower", "upper"}) {
        check(out, r.contains(bound) &&
                       (r[bound].is_null() || r[bound].is_number()),
              std::string("region.") + bound + " must be a number or null");
      }
      check(out, r.contains("side") && r["side"].is_string(),
            "region.side must be a string");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

VisSpecFragment conceptTreeSpec(const ConceptScheme& scheme,
                                const std::map<std::string, double>& frequencies) {
  for (const Finding& f : validateScheme(scheme)) {
    if (f.code == FindingCode::BroaderCycle) {
      throw Error(ErrorCode::CyclicScheme, f.message);
    }
  }
  // Depth is the shortest distance to a root, computed top-down.
  std::map<std::string, int> depth;
  std::vector<std::string> frontier;
  auto inScheme = [&](const std::string& id) {
    return scheme.concepts.contains(id);
  };
  for (const auto& [id, c] : scheme.concepts) {
    if (std::none_of(c.broader.begin(), c.broader.end(), inScheme)) {
      depth[id] = 0;
      frontier.push_back(id);
    }
  }
  for (int level = 1; !frontier.empty(); ++level) {
    std::vector<std::string> next;
    for (const std::string& id : frontier) {
      for (const std::string& child : scheme.concepts.at(id).narrower) {
        if (inScheme(child) && !depth.contains(child)) {
          depth[child] = level;
          next.push_back(child);
        }
      }
    }
    frontier = std::move(next);
  }

  json nodes = json::array();
  json edges = json::array();
  for (const auto& [id, c] : scheme.concepts) {
    json node = {{"id", id}, {"label", c.prefLabel}, {"parent", nullptr},
                 {"depth", depth[id]}};
    for (const std::string& b : c.broader) {
      if (!inScheme(b)) continue;
      if (node["parent"].is_null()) node["parent"] = b;
      edges.push_back({{"child", id}, {"parent", b}});
    }
    if (auto it = frequencies.find(id); it != frequencies.end()) {
      node["frequency"] = it->second;
    }
    nodes.push_back(std::move(node));
  }

  json encoding = {
      {"x", {{"field", "label"}, {"type", "nominal"}}},
      {"y", {{"field", "depth"}, {"type", "ordinal"}}},
  };
  if (!frequencies.empty()) {
    encoding["size"] = {{"field", "frequency"}, {"type", "quantitative"}};
  }
  VisSpecFragment f{FragmentKind::ConceptTree, json::object(), {}};
  f.document = {{"kind", "conceptTree"},
                {"description", scheme.id},
                {"data", {{"name", "concepts"}, {"values", std::move(nodes)}}},
                {"edges", std::move(edges)},
                {"mark", "point"},
                {"encoding", std::move(encoding)}};
  return f;
}

VisSpecFragment encodedMarksSpec(const Dataset& dataset,
                                 const std::vector<Manifestation>& manifestations,
                                 const std::string& channel,
                                 const std::map<std::string, double>& similarity) {
  if (!kChannels.contains(channel)) {
    throw Error(ErrorCode::InvalidArgument,
                "unsupported encoding channel '" + channel + "'");
  }
  if (!similarity.empty() && channel == "size") {
    throw Error(ErrorCode::InvalidArgument,
                "the size channel is taken by the similarity field");
  }
  std::vector<std::vector<std::size_t>> matches;
  for (const Manifestation& m : manifestations) {
    matches.push_back(matchRows(m, dataset));
  }
  std::vector<std::vector<std::size_t>> byRow(dataset.size());
  for (std::size_t i = 0; i < matches.size(); ++i) {
    for (std::size_t row : matches[i]) byRow[row].push_back(i);
  }

  VisSpecFragment f{FragmentKind::EncodedMarks, json::object(), {}};
  json values = json::array();
  const auto& vars = dataset.schema().variables();
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    json item = json::object();
    for (std::size_t c = 0; c < vars.size(); ++c) {
      item[vars[c].name] = cellJson(dataset.records()[row].values[c]);
    }
    std::string id = dataset.recordId(row);
    item["recordId"] = id;
    item["concept"] = "none";
    std::set<std::string> concepts;
    for (std::size_t i : byRow[row]) concepts.insert(manifestations[i].conceptId);
    if (!byRow[row].empty()) {
      const std::string& winner = manifestations[byRow[row].front()].conceptId;
      item["concept"] = winner;
      if (concepts.size() > 1) {
        std::string all;
        for (const std::string& c : concepts) all += (all.empty() ? "" : ", ") + c;
        f.warnings.push_back("record " + id + " matches " + all + "; using " +
                             winner);
      }
    }
    if (!similarity.empty()) {
      auto it = similarity.find(id);
      item["similarity"] = it == similarity.end() ? json(nullptr) : json(it->second);
    }
    values.push_back(std::move(item));
  }
  json encoding = {{channel, {{"field", "concept"}, {"type", "nominal"}}}};
  if (!similarity.empty()) {
    encoding["size"] = {{"field", "similarity"}, {"type", "quantitative"}};
  }
  f.document = {{"kind", "encodedMarks"},
                {"data", {{"name", "records"}, {"values", std::move(values)}}},
                {"mark", "point"},
                {"encoding", std::move(encoding)}};
  return f;
}

std::vector<Span> matchSpans(const Dataset& dataset,
                             const std::vector<std::size_t>& matchedRows,
                             const std::string& timeVariable) {
  auto column = dataset.schema().indexOf(timeVariable);
  if (!column) throw Error(ErrorCode::UnknownVariable, timeVariable);
  if (dataset.schema().variables()[*column].kind != VariableKind::Number) {
    throw Error(ErrorCode::InvalidArgument,
                "time variable '" + timeVariable + "' is not numeric");
  }
  std::set<std::size_t> matched(matchedRows.begin(), matchedRows.end());
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    const Value& t = dataset.records()[row].values[*column];
    if (const double* d = std::get_if<double>(&t)) order.emplace_back(*d, row);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Span> spans;
  bool open = false;
  for (const auto& [t, row] : order) {
    if (!matched.contains(row)) {
      open = false;
      continue;
    }
    if (!open) spans.push_back({t, t, 0});
    open = true;
    spans.back().end = t;
    ++spans.back().count;
  }
  return spans;
}

VisSpecFragment aggregateMarkSpec(const Dataset& dataset, const Manifestation& m,
                                  const std::string& timeVariable) {
  return aggregateMarkSpec(dataset, m.conceptId, matchRows(m, dataset),
                           timeVariable);
}

VisSpecFragment aggregateMarkSpec(const Dataset& dataset,
                                  const std::string& conceptId,
                                  const std::vector<std::size_t>& matchedRows,
                                  const std::string& timeVariable) {
  auto spans = matchSpans(dataset, matchedRows, timeVariable);
  json layers = json::array();
  for (const Span& s : spans) {
    layers.push_back(
        {{"mark", {{"type", "rule"}}},
         {"encoding",
          {{"x", {{"datum", s.start}, {"type", "quantitative"}}},
           {"x2", {{"datum", s.end}}},
           {"y", {{"datum", conceptId}, {"type", "nominal"}}}}},
         {"count", s.count}});
  }
  VisSpecFragment f{FragmentKind::AggregateMark, json::object(), {}};
  f.document = {{"kind", "aggregateMark"},
                {"concept", conceptId},
                {"description", timeVariable},
                {"layer", std::move(layers)}};
  return f;
}

Region thresholdRegion(const MappingKind& kind, const std::string& axisVariable) {
  Region r;
  std::string variable;
  if (const auto* range = std::get_if<IndirectVariableMapping>(&kind)) {
    variable = variableName(range->variable);
    if (range->variable.isIri() && range->variable.value() == axisVariable) {
      variable = axisVariable;
    }
    r.lower = range->minValue;
    r.upper = range->maxValue;
  } else if (const auto* query = std::get_if<IndirectQueryMapping>(&kind)) {
    if (query->dialect != kPredicateDialect) {
      throw Error(ErrorCode::ForeignDialect, query->dialect);
    }
    Predicate p = parsePredicate(query->queryText);
    if (p.kind() != Predicate::Kind::Comparison ||
        !std::holds_alternative<double>(p.constant()) ||
        p.op() == CompareOp::NotEqual) {
      throw Error(ErrorCode::UnsupportedPredicateShape,
                  "'" + query->queryText +
                      "' is not a single numeric bound on one variable");
    }
    variable = p.variable();
    Term bound = Term::decimal(std::get<double>(p.constant()));
    switch (p.op()) {
      case CompareOp::Greater: r.lower = bound; r.lowerInclusive = false; break;
      case CompareOp::GreaterEqual: r.lower = bound; break;
      case CompareOp::Less: r.upper = bound; r.upperInclusive = false; break;
      case CompareOp::LessEqual: r.upper = bound; break;
      default: r.lower = r.upper = bound; break;
    }
  } else {
    throw Error(ErrorCode::UnsupportedPredicateShape,
                "direct mappings do not bound a variable");
  }
  if (variable != axisVariable) {
    throw Error(ErrorCode::InvalidArgument, "mapping bounds '" + variable +
                                                "', not the axis variable '" +
                                                axisVariable + "'");
  }
  return r;
}

VisSpecFragment thresholdRegionSpec(const MappingKind& kind,
                                    const std::string& axisVariable) {
  Region r = thresholdRegion(kind, axisVariable);
  VisSpecFragment f{FragmentKind::ThresholdRegion, json::object(), {}};
  std::string side = r.lower && r.upper ? "between" : r.lower ? "above" : "below";
  json region = {{"variable", axisVariable},
                 {"lower", r.lower ? numberJson(*r.lower) : json(nullptr)},
                 {"upper", r.upper ? numberJson(*r.upper) : json(nullptr)},
                 {"lowerInclusive", r.lowerInclusive},
                 {"upperInclusive", r.upperInclusive},
                 {"side", side}};
  json encoding = json::object();
  if (r.lower) encoding["y"] = {{"datum", numberJson(*r.lower)}, {"type", "quantitative"}};
  if (r.upper) {
    encoding[r.lower ? "y2" : "y"] = {{"datum", numberJson(*r.upper)},
                                      {"type", "quantitative"}};
  }
  if (r.lower && r.upper && r.lower->asDouble() == r.upper->asDouble()) {
    f.warnings.push_back("degenerate zero-height band at " + r.lower->value());
  }
  f.document = {{"kind", "thresholdRegion"},
                {"region", std::move(region)},
                {"layer", json::array({{{"mark", {{"type", "rect"}, {"opacity", 0.2}}},
                                        {"encoding", std::move(encoding)}}})}};
  return f;
}

}  // namespace kava
