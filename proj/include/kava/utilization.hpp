#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "kava/dataset.hpp"
#include "kava/manifestation.hpp"
#include "kava/skos.hpp"

namespace kava {

enum class FragmentKind { ConceptTree, EncodedMarks, AggregateMark, ThresholdRegion };

std::string_view fragmentKindName(FragmentKind kind);

// A Vega-Lite flavoured JSON document. The documented subset is: "kind",
// "data" ({name, values}), "mark", "encoding" (x, y, color, size, plus x2/y2
// datums), "layer", and the kind-specific "edges" / "region" / "concept".
// docs/vis-fragment.schema.json describes the same contract.
struct VisSpecFragment {
  FragmentKind kind;
  nlohmann::json document;
  std::vector<std::string> warnings;
};

// Structural check against the published fragment schema. Returns the
// violations; empty means valid.
std::vector<std::string> validateFragment(const nlohmann::json& document);

// One node per concept ({id, label, parent, depth, frequency?}) plus one
// edge per in-scheme broader link. `parent` is the smallest broader IRI.
// Throws CyclicScheme.
VisSpecFragment conceptTreeSpec(const ConceptScheme& scheme,
                                const std::map<std::string, double>& frequencies = {});

// Every record gets a "concept" field (first matching manifestation in list
// order, else "none") bound to `channel`. When `similarity` is non-empty its
// values (keyed by record id) are added as a "similarity" field on the size
// channel.
VisSpecFragment encodedMarksSpec(const Dataset& dataset,
                                 const std::vector<Manifestation>& manifestations,
                                 const std::string& channel,
                                 const std::map<std::string, double>& similarity = {});

struct Span {
  double start = 0;
  double end = 0;
  std::size_t count = 0;

  bool operator==(const Span&) const = default;
};

// Maximal runs of matching records in time order. Records with a missing
// time value are skipped.
std::vector<Span> matchSpans(const Dataset& dataset,
                             const std::vector<std::size_t>& matchedRows,
                             const std::string& timeVariable);

// One rule layer per span of matchSpans.
VisSpecFragment aggregateMarkSpec(const Dataset& dataset, const Manifestation& m,
                                  const std::string& timeVariable);
// Same for an already evaluated row set (e.g. the union of a concept's
// manifestations).
VisSpecFragment aggregateMarkSpec(const Dataset& dataset,
                                  const std::string& conceptId,
                                  const std::vector<std::size_t>& matchedRows,
                                  const std::string& timeVariable);

struct Region {
  std::optional<Term> lower;
  std::optional<Term> upper;
  bool lowerInclusive = true;
  bool upperInclusive = true;
};

// Background band for a bound on one variable. Query mappings must be a
// single comparison (UnsupportedPredicateShape otherwise).
Region thresholdRegion(const MappingKind& kind, const std::string& axisVariable);

VisSpecFragment thresholdRegionSpec(const MappingKind& kind,
                                    const std::string& axisVariable);

}  // namespace kava
