#pragma once

#include <string>
#include <string_view>

#include "kava/rdf.hpp"

namespace kava {

// Reads a node object or an array of node objects. "@id" values that expand
// under the prefix map become IRIs; nodes without "@id" become blank nodes.
// "@context" may only restate prefix -> namespace strings.
Graph parseJsonLd(std::string_view text,
                  const PrefixMap& base = defaultPrefixes());

// Array of node objects, one per IRI subject (plus one per root blank
// node), keys in canonical order, two-space indentation. Each node carries
// its own "@context" listing the prefixes it uses.
std::string serializeJsonLd(const Graph& graph);

}  // namespace kava
