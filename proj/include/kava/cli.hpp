#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "kava/rdf.hpp"
#include "kava/skos.hpp"

namespace kava {

enum ExitStatus : int { kExitOk = 0, kExitFindings = 1, kExitInput = 2, kExitInternal = 3 };

// Scheme findings for every scheme in the graph, NotInScheme warnings for
// concepts outside any scheme, and manifestation findings; duplicates
// removed.
std::vector<Finding> validateStore(const Graph& graph);

// Reads .ttl or .jsonld (by extension) with the default prefixes plus
// KAVA_PREFIXES.
Graph readKnowledge(const std::filesystem::path& path);

// Serializes by extension and replaces `path` via a temporary file and
// rename.
void writeKnowledge(const std::filesystem::path& path, const Graph& graph);
void writeFileAtomic(const std::filesystem::path& path, const std::string& text);

// Absolute IRIs pass through; anything else is expanded as a prefixed name.
std::string resolveIri(const std::string& text, const PrefixMap& prefixes);

// `args` excludes the program name. JSON lines go to `out`, diagnostics to
// `err`.
int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace kava
