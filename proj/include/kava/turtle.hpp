#pragma once

#include <string>
#include <string_view>

#include "kava/rdf.hpp"

namespace kava {

// Parses the Turtle subset used for knowledge files: @prefix directives,
// predicate-object lists (`;`), object lists (`,`), `a`, nested anonymous
// blank nodes `[ ... ]`, double-quoted strings, bare integers and decimals,
// `#` comments. Declared prefixes are merged over `base`.
//
// Collections, language tags, datatype annotations, long strings and
// labelled blank nodes raise UnsupportedFeature with the offending position.
Graph parseTurtle(std::string_view text,
                  const PrefixMap& base = defaultPrefixes());

// Canonical Turtle: prefixed names wherever a registered namespace applies,
// blank nodes nested as `[ ... ]`, deterministic statement order. Only
// prefixes that are actually used get a header line.
std::string serializeTurtle(const Graph& graph);

}  // namespace kava
