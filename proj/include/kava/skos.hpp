#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "kava/rdf.hpp"

namespace kava {

enum class Severity { Warning, Error };

enum class FindingCode {
  BroaderCycle,
  DanglingEdge,
  MissingLabel,
  NotInScheme,
  AsymmetricRelated,
  MalformedManifestation,
  InvalidQuery,
  ForeignDialect,
};

std::string_view findingCodeName(FindingCode code);

// A validation result. Errors make a store invalid; warnings are reported
// but do not block writes.
struct Finding {
  FindingCode code;
  Severity severity;
  std::string subject;
  std::vector<std::string> path;
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct Concept {
  std::string id;
  std::string prefLabel;
  std::set<std::string> broader;
  std::set<std::string> narrower;
  std::set<std::string> related;
  std::string inScheme;
};

struct ConceptScheme {
  std::string id;
  std::map<std::string, Concept> concepts;
  // Warnings raised while loading (e.g. concepts without skos:inScheme).
  std::vector<Finding> loadFindings;

  const Concept* find(const std::string& id) const;
  std::size_t broaderEdgeCount() const;
};

// Collects every skos:Concept whose skos:inScheme is `schemeId` and
// symmetrizes broader/narrower between loaded concepts.
ConceptScheme loadScheme(const Graph& graph, const std::string& schemeId);

// Distinct skos:inScheme targets of skos:Concept subjects, sorted.
std::vector<std::string> schemeIds(const Graph& graph);

// BroaderCycle (error, one per strongly connected component), DanglingEdge
// (warning), MissingLabel (error), AsymmetricRelated (warning), plus the
// scheme's load findings.
std::vector<Finding> validateScheme(const ConceptScheme& scheme);

bool hasErrors(const std::vector<Finding>& findings);

// Transitive ancestors, nearest first; ties within one level sorted by IRI.
std::vector<std::string> broaderClosure(const ConceptScheme& scheme,
                                        const std::string& id);
std::vector<std::string> narrowerClosure(const ConceptScheme& scheme,
                                         const std::string& id);

}  // namespace kava
