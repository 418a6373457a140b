#include "kava/manifestation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "kava/error.hpp"

namespace kava {

namespace {

std::string digest(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string("m-") + buf;
}

[[noreturn]] void malformed(const Term& subject, const std::string& reason) {
  throw Error(ErrorCode::MalformedManifestation,
              subject.value() + ": " + reason);
}

std::vector<Term> objects(const Graph& g, const Term& s, const Term& p) {
  std::vector<Term> out;
  for (const Triple& t : g.match(s, p, std::nullopt)) out.push_back(t.object);
  return out;
}

std::optional<Term> single(const Graph& g, const Term& s, const Term& p,
                           const Term& reportAs, const char* what) {
  auto objs = objects(g, s, p);
  if (objs.size() > 1) malformed(reportAs, std::string("several ") + what);
  if (objs.empty()) return std::nullopt;
  return objs.front();
}

Provenance readProvenance(const Graph& g, const Term& node) {
  Provenance p;
  for (const Term& creator : objects(g, node, vocab::dct("creator"))) {
    if (creator.isLiteral()) {
      p.creatorName = creator.value();
    } else {
      for (const Term& name : objects(g, creator, vocab::foaf("name"))) {
        if (name.isLiteral()) p.creatorName = name.value();
        break;
      }
    }
    if (p.creatorName) break;
  }
  for (const Term& date : objects(g, node, vocab::dct("dateSubmitted"))) {
    if (date.isLiteral()) {
      p.dateSubmitted = date.value();
      break;
    }
  }
  return p;
}

MappingKind readKind(const Graph& g, const Term& subject, const Term& node) {
  auto prototypes = objects(g, node, vocab::kava("isPrototype"));
  auto matchVariables = objects(g, node, vocab::kava("matchVariable"));
  auto queries = objects(g, node, vocab::kava("matchQuery"));
  int kinds = !prototypes.empty() + !matchVariables.empty() + !queries.empty();
  if (kinds == 0) malformed(subject, "manifestation has no mapping");
  if (kinds > 1) malformed(subject, "manifestation mixes mapping kinds");

  if (!prototypes.empty()) {
    DirectMapping direct;
    for (const Term& proto : prototypes) {
      auto variable = single(g, proto, vocab::kava("variable"), subject,
                             "kava:variable in prototype");
      auto value = single(g, proto, vocab::kava("value"), subject,
                          "kava:value in prototype");
      if (!variable || !value) {
        malformed(subject, "prototype needs kava:variable and kava:value");
      }
      if (!value->isLiteral() || variable->isBlank()) {
        malformed(subject, "prototype variable/value must be literal or IRI");
      }
      direct.bindings.push_back({*variable, *value});
    }
    std::sort(direct.bindings.begin(), direct.bindings.end(),
              [](const Binding& a, const Binding& b) {
                return std::tie(a.variable, a.value) <
                       std::tie(b.variable, b.value);
              });
    return direct;
  }

  if (!matchVariables.empty()) {
    if (matchVariables.size() > 1) {
      malformed(subject, "several kava:matchVariable nodes");
    }
    const Term& mv = matchVariables.front();
    IndirectVariableMapping mapping{Term::string(""), std::nullopt, std::nullopt};
    auto variable =
        single(g, mv, vocab::kava("variable"), subject, "kava:variable");
    if (!variable || variable->isBlank()) {
      malformed(subject, "kava:matchVariable needs a kava:variable");
    }
    mapping.variable = *variable;
    mapping.minValue =
        single(g, mv, vocab::kava("minValue"), subject, "kava:minValue");
    mapping.maxValue =
        single(g, mv, vocab::kava("maxValue"), subject, "kava:maxValue");
    if (!mapping.minValue && !mapping.maxValue) {
      malformed(subject, "kava:matchVariable needs a bound");
    }
    if ((mapping.minValue && !mapping.minValue->isNumeric()) ||
        (mapping.maxValue && !mapping.maxValue->isNumeric())) {
      malformed(subject, "bounds must be numeric");
    }
    if (mapping.minValue && mapping.maxValue &&
        mapping.minValue->asDouble() > mapping.maxValue->asDouble()) {
      malformed(subject, "kava:minValue exceeds kava:maxValue");
    }
    return mapping;
  }

  if (queries.size() > 1) malformed(subject, "several kava:matchQuery values");
  if (!queries.front().isLiteral()) {
    malformed(subject, "kava:matchQuery must be a string");
  }
  IndirectQueryMapping query{queries.front().value()};
  if (auto dialect = single(g, node, vocab::kava("queryDialect"), subject,
                            "kava:queryDialect")) {
    query.dialect = dialect->value();
  }
  return query;
}

}  // namespace

std::string variableName(const Term& variable) {
  if (!variable.isIri()) return variable.value();
  const std::string& iri = variable.value();
  auto cut = iri.find_last_of("#/:");
  return cut == std::string::npos ? iri : iri.substr(cut + 1);
}

std::vector<Manifestation> loadManifestations(const Graph& graph) {
  std::vector<std::pair<std::string, Manifestation>> keyed;
  for (const Triple& t :
       graph.match(std::nullopt, vocab::kava("manifest"), std::nullopt)) {
    if (t.object.isLiteral()) malformed(t.subject, "kava:manifest to literal");
    Manifestation m;
    m.conceptId = t.subject.value();
    m.kind = readKind(graph, t.subject, t.object);
    m.provenance = readProvenance(graph, t.object);
    std::string shape = canonicalTree(graph, t.object);
    m.anchor = t.object.isIri() ? t.object.value()
                                : digest(m.conceptId + " " + shape);
    keyed.emplace_back(m.conceptId + "\n" + shape, std::move(m));
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Manifestation> out;
  for (auto& [key, m] : keyed) out.push_back(std::move(m));
  return out;
}

std::vector<Finding> validateManifestations(const Graph& graph) {
  std::vector<Finding> findings;
  for (const Triple& t :
       graph.match(std::nullopt, vocab::kava("manifest"), std::nullopt)) {
    Graph one(graph.prefixes());
    one.insert(t);
    // Copy the node's subtree so each manifestation is checked in isolation.
    std::vector<Term> pending{t.object};
    while (!pending.empty()) {
      Term node = pending.back();
      pending.pop_back();
      if (!node.isBlank()) continue;
      for (const Triple& child : graph.match(node, std::nullopt, std::nullopt)) {
        one.insert(child);
        pending.push_back(child.object);
      }
    }
    if (t.object.isIri()) {
      for (const Triple& child :
           graph.match(t.object, std::nullopt, std::nullopt)) {
        one.insert(child);
        pending.push_back(child.object);
      }
      while (!pending.empty()) {
        Term node = pending.back();
        pending.pop_back();
        if (!node.isBlank()) continue;
        for (const Triple& child :
             graph.match(node, std::nullopt, std::nullopt)) {
          one.insert(child);
          pending.push_back(child.object);
        }
      }
    }
    try {
      for (const Manifestation& m : loadManifestations(one)) {
        const auto* query = std::get_if<IndirectQueryMapping>(&m.kind);
        if (!query) continue;
        if (query->dialect != kPredicateDialect) {
          findings.push_back({FindingCode::ForeignDialect, Severity::Warning,
                              m.conceptId, {m.anchor},
                              "query in dialect '" + query->dialect +
                                  "' must be evaluated by an external engine"});
          continue;
        }
        try {
          parsePredicate(query->queryText);
        } catch (const Error& e) {
          findings.push_back({FindingCode::InvalidQuery, Severity::Error,
                              m.conceptId, {m.anchor}, e.what()});
        }
      }
    } catch (const Error& e) {
      findings.push_back({FindingCode::MalformedManifestation, Severity::Error,
                          t.subject.value(), {}, e.what()});
    }
  }
  return findings;
}

Manifestation createManifestation(const std::string& conceptId,
                                  MappingKind kind,
                                  const std::string& creatorName,
                                  const std::string& date) {
  auto invalid = [](const std::string& why) {
    throw Error(ErrorCode::InvalidKind, why);
  };
  if (conceptId.empty()) invalid("concept IRI is empty");
  if (auto* direct = std::get_if<DirectMapping>(&kind)) {
    if (direct->bindings.empty()) invalid("direct mapping without bindings");
    for (const Binding& b : direct->bindings) {
      if (b.variable.isBlank() || b.variable.value().empty()) {
        invalid("binding variable must be a name or IRI");
      }
      if (!b.value.isLiteral()) invalid("binding value must be a literal");
    }
    std::sort(direct->bindings.begin(), direct->bindings.end(),
              [](const Binding& a, const Binding& b) {
                return std::tie(a.variable, a.value) <
                       std::tie(b.variable, b.value);
              });
  } else if (auto* range = std::get_if<IndirectVariableMapping>(&kind)) {
    if (range->variable.isBlank() || range->variable.value().empty()) {
      invalid("variable must be a name or IRI");
    }
    if (!range->minValue && !range->maxValue) invalid("no bound given");
    if ((range->minValue && !range->minValue->isNumeric()) ||
        (range->maxValue && !range->maxValue->isNumeric())) {
      invalid("bounds must be numeric");
    }
    if (range->minValue && range->maxValue &&
        range->minValue->asDouble() > range->maxValue->asDouble()) {
      invalid("minValue exceeds maxValue");
    }
  } else {
    auto& query = std::get<IndirectQueryMapping>(kind);
    if (query.queryText.empty()) invalid("empty query");
    if (query.dialect.empty()) invalid("empty query dialect");
    if (query.dialect == kPredicateDialect) {
      try {
        parsePredicate(query.queryText);
      } catch (const Error& e) {
        invalid(e.what());
      }
    }
  }
  Manifestation m;
  m.conceptId = conceptId;
  m.kind = std::move(kind);
  if (!creatorName.empty()) m.provenance.creatorName = creatorName;
  if (!date.empty()) m.provenance.dateSubmitted = date;
  Graph g = manifestationsToGraph({m});
  m.anchor = loadManifestations(g).front().anchor;
  return m;
}

std::string appendManifestation(Graph& graph, const Manifestation& m) {
  Term subject = Term::iri(m.conceptId);
  Term node = graph.freshBlank();
  graph.insert(subject, vocab::kava("manifest"), node);
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, DirectMapping>) {
          for (const Binding& b : kind.bindings) {
            Term proto = graph.freshBlank();
            graph.insert(node, vocab::kava("isPrototype"), proto);
            graph.insert(proto, vocab::kava("variable"), b.variable);
            graph.insert(proto, vocab::kava("value"), b.value);
          }
        } else if constexpr (std::is_same_v<K, IndirectVariableMapping>) {
          Term mv = graph.freshBlank();
          graph.insert(node, vocab::kava("matchVariable"), mv);
          graph.insert(mv, vocab::kava("variable"), kind.variable);
          if (kind.minValue) graph.insert(mv, vocab::kava("minValue"), *kind.minValue);
          if (kind.maxValue) graph.insert(mv, vocab::kava("maxValue"), *kind.maxValue);
        } else {
          graph.insert(node, vocab::kava("matchQuery"),
                       Term::string(kind.queryText));
          if (kind.dialect != kPredicateDialect) {
            graph.insert(node, vocab::kava("queryDialect"),
                         Term::string(kind.dialect));
          }
        }
      },
      m.kind);
  if (m.provenance.creatorName) {
    Term creator = graph.freshBlank();
    graph.insert(node, vocab::dct("creator"), creator);
    graph.insert(creator, vocab::foaf("name"),
                 Term::string(*m.provenance.creatorName));
  }
  if (m.provenance.dateSubmitted) {
    graph.insert(node, vocab::dct("dateSubmitted"),
                 Term::string(*m.provenance.dateSubmitted));
  }
  return digest(m.conceptId + " " + canonicalTree(graph, node));
}

Graph manifestationsToGraph(const std::vector<Manifestation>& manifestations) {
  Graph g;
  for (const Manifestation& m : manifestations) appendManifestation(g, m);
  return g;
}

bool removeManifestation(Graph& graph, std::string_view anchor) {
  for (const Triple& t :
       graph.match(std::nullopt, vocab::kava("manifest"), std::nullopt)) {
    bool hit = t.object.isIri()
                   ? t.object.value() == anchor
                   : digest(t.subject.value() + " " +
                            canonicalTree(graph, t.object)) == anchor;
    if (!hit) continue;
    graph.erase(t);
    eraseBlankTree(graph, t.object);
    return true;
  }
  return false;
}

Predicate toPredicate(const IndirectVariableMapping& mapping) {
  std::string name = variableName(mapping.variable);
  std::optional<Predicate> lower, upper;
  if (mapping.minValue) {
    lower = Predicate::comparison(name, CompareOp::GreaterEqual,
                                  mapping.minValue->asDouble());
  }
  if (mapping.maxValue) {
    upper = Predicate::comparison(name, CompareOp::LessEqual,
                                  mapping.maxValue->asDouble());
  }
  if (lower && upper) return Predicate::conjunction(*lower, *upper);
  if (lower) return *lower;
  if (upper) return *upper;
  throw Error(ErrorCode::InvalidKind, "mapping without bounds");
}

namespace {

std::string resolveColumn(const Term& variable, const Schema& schema) {
  if (variable.isIri() && schema.indexOf(variable.value())) {
    return variable.value();
  }
  std::string name = variableName(variable);
  if (!schema.indexOf(name)) {
    throw Error(ErrorCode::UnknownVariable,
                "'" + name + "' is not a variable of the dataset");
  }
  return name;
}

bool bindingMatches(const Value& cell, const Term& value) {
  if (isMissing(cell)) return false;
  if (value.isNumeric()) {
    if (const double* d = std::get_if<double>(&cell)) {
      return *d == value.asDouble();
    }
  }
  return formatValue(cell) == value.value();
}

}  // namespace

std::vector<std::size_t> matchRows(const Manifestation& m,
                                   const Dataset& dataset) {
  std::vector<std::size_t> rows;
  const Schema& schema = dataset.schema();
  if (const auto* direct = std::get_if<DirectMapping>(&m.kind)) {
    std::vector<std::pair<std::size_t, Term>> columns;
    for (const Binding& b : direct->bindings) {
      std::string column = resolveColumn(b.variable, schema);
      if (!schema.isIdentifying(column)) {
        throw Error(ErrorCode::UnknownVariable,
                    "'" + column + "' is not an identifying variable");
      }
      columns.emplace_back(*schema.indexOf(column), b.value);
    }
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      const Record& rec = dataset.records()[r];
      if (std::all_of(columns.begin(), columns.end(), [&](const auto& c) {
            return bindingMatches(rec.values[c.first], c.second);
          })) {
        rows.push_back(r);
      }
    }
    return rows;
  }

  std::optional<Predicate> predicate;
  if (const auto* range = std::get_if<IndirectVariableMapping>(&m.kind)) {
    IndirectVariableMapping resolved = *range;
    resolved.variable = Term::string(resolveColumn(range->variable, schema));
    predicate = toPredicate(resolved);
  } else {
    const auto& query = std::get<IndirectQueryMapping>(m.kind);
    if (query.dialect != kPredicateDialect) {
      throw Error(ErrorCode::ForeignDialect, query.dialect);
    }
    predicate = parsePredicate(query.queryText);
  }
  BoundPredicate bound(*predicate, schema);
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    if (bound(dataset.records()[r])) rows.push_back(r);
  }
  return rows;
}

std::vector<std::string> evaluateManifestation(const Manifestation& m,
                                               const Dataset& dataset) {
  std::vector<std::string> ids;
  for (std::size_t r : matchRows(m, dataset)) ids.push_back(dataset.recordId(r));
  return ids;
}

std::vector<std::size_t> matchConceptRows(
    const std::vector<Manifestation>& manifestations,
    const std::string& conceptId, const Dataset& dataset) {
  std::set<std::size_t> rows;
  for (const Manifestation& m : manifestations) {
    if (m.conceptId != conceptId) continue;
    auto matched = matchRows(m, dataset);
    rows.insert(matched.begin(), matched.end());
  }
  return {rows.begin(), rows.end()};
}

std::vector<Conflict> findConflicts(
    const std::vector<Manifestation>& manifestations, const Dataset& dataset) {
  std::map<std::string, std::set<std::size_t>> direct, indirect;
  std::set<std::string> hasIndirect;
  for (const Manifestation& m : manifestations) {
    bool isDirect = std::holds_alternative<DirectMapping>(m.kind);
    std::vector<std::size_t> rows;
    try {
      rows = matchRows(m, dataset);
    } catch (const Error&) {
      continue;
    }
    if (isDirect) {
      direct[m.conceptId].insert(rows.begin(), rows.end());
    } else {
      hasIndirect.insert(m.conceptId);
      indirect[m.conceptId].insert(rows.begin(), rows.end());
    }
  }
  std::vector<Conflict> out;
  for (const auto& [conceptId, rows] : direct) {
    if (!hasIndirect.contains(conceptId)) continue;
    for (std::size_t r : rows) {
      if (!indirect[conceptId].contains(r)) {
        out.push_back({conceptId, dataset.recordId(r),
                       "prototype lies outside the concept's indirect mappings"});
      }
    }
  }
  return out;
}

}  // namespace kava
