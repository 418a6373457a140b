#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kava/dataset.hpp"
#include "kava/predicate.hpp"
#include "kava/rdf.hpp"
#include "kava/skos.hpp"

namespace kava {

inline constexpr std::string_view kPredicateDialect = "kava-predicate";

struct Provenance {
  std::optional<std::string> creatorName;
  std::optional<std::string> dateSubmitted;

  bool empty() const { return !creatorName && !dateSubmitted; }
  bool operator==(const Provenance&) const = default;
};

// One identifying-variable reference of a prototype. `variable` is a string
// literal ("patientId") or an IRI; `value` is a literal.
struct Binding {
  Term variable;
  Term value;

  bool operator==(const Binding&) const = default;
};

struct DirectMapping {
  std::vector<Binding> bindings;

  bool operator==(const DirectMapping&) const = default;
};

// Inclusive bounds; an absent bound is unbounded.
struct IndirectVariableMapping {
  Term variable;
  std::optional<Term> minValue;
  std::optional<Term> maxValue;

  bool operator==(const IndirectVariableMapping&) const = default;
};

struct IndirectQueryMapping {
  std::string queryText;
  std::string dialect = std::string(kPredicateDialect);

  bool operator==(const IndirectQueryMapping&) const = default;
};

using MappingKind =
    std::variant<DirectMapping, IndirectVariableMapping, IndirectQueryMapping>;

struct Manifestation {
  std::string conceptId;
  MappingKind kind;
  Provenance provenance;
  // Stable identifier of the kava:manifest node: the node's IRI, or a digest
  // of the concept and the node's canonical tree for blank nodes.
  std::string anchor;

  // Equality ignores the anchor.
  bool operator==(const Manifestation& other) const {
    return conceptId == other.conceptId && kind == other.kind &&
           provenance == other.provenance;
  }
};

// The column name a mapping variable refers to: a string literal's text, or
// an IRI's local name.
std::string variableName(const Term& variable);

// One Manifestation per (subject, kava:manifest, node) triple, ordered by
// concept and then by the node's canonical structure. Throws
// MalformedManifestation for nodes with zero or several mapping kinds.
std::vector<Manifestation> loadManifestations(const Graph& graph);

// Non-throwing variant for validation: malformed nodes and unparseable or
// foreign-dialect queries become findings.
std::vector<Finding> validateManifestations(const Graph& graph);

// Validates the kind (InvalidKind) and stamps provenance. Empty creator or
// date leave that provenance field unset.
Manifestation createManifestation(const std::string& conceptId,
                                  MappingKind kind,
                                  const std::string& creatorName,
                                  const std::string& date);

// Inverse of loadManifestations up to blank-node labels.
Graph manifestationsToGraph(const std::vector<Manifestation>& manifestations);

// Adds the manifestation's triples to `graph` and returns its anchor id.
std::string appendManifestation(Graph& graph, const Manifestation& m);

// Removes the kava:manifest link and the node tree with the given anchor.
// Returns false when no such manifestation exists.
bool removeManifestation(Graph& graph, std::string_view anchor);

// The predicate "[v] >= min AND [v] <= max" (only the present bounds).
Predicate toPredicate(const IndirectVariableMapping& mapping);

// Rows matched by the manifestation, in dataset order. Throws
// UnknownVariable or ForeignDialect.
std::vector<std::size_t> matchRows(const Manifestation& m,
                                   const Dataset& dataset);

std::vector<std::string> evaluateManifestation(const Manifestation& m,
                                               const Dataset& dataset);

// Union over every manifestation of `conceptId`, in dataset order.
std::vector<std::size_t> matchConceptRows(
    const std::vector<Manifestation>& manifestations,
    const std::string& conceptId, const Dataset& dataset);

// Prototype records (direct mappings) of a concept that none of the
// concept's evaluable indirect mappings match.
struct Conflict {
  std::string conceptId;
  std::string recordId;
  std::string message;
};
std::vector<Conflict> findConflicts(
    const std::vector<Manifestation>& manifestations, const Dataset& dataset);

}  // namespace kava
