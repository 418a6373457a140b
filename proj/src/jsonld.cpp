#include "kava/jsonld.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "kava/error.hpp"

namespace kava {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> lineColumn(std::string_view text,
                                               std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

class JsonLdReader {
 public:
  explicit JsonLdReader(const PrefixMap& base) : graph_(base) {}

  Graph run(const json& doc) {
    if (doc.is_array()) {
      for (const json& node : doc) {
        if (!node.is_object()) {
          throw Error(ErrorCode::SyntaxError,
                      "top-level array elements must be node objects");
        }
        readNode(node, graph_.prefixes());
      }
    } else if (doc.is_object()) {
      readNode(doc, graph_.prefixes());
    } else {
      throw Error(ErrorCode::SyntaxError,
                  "top level must be a node object or an array of them");
    }
    return std::move(graph_);
  }

 private:
  static PrefixMap withContext(const json& node, const PrefixMap& outer) {
    auto it = node.find("@context");
    if (it == node.end()) return outer;
    if (!it->is_object()) {
      throw Error(ErrorCode::UnsupportedKeyword,
                  "@context must be an object of prefix mappings");
    }
    PrefixMap local = outer;
    for (const auto& [label, value] : it->items()) {
      if (!value.is_string() || label.empty() || label.front() == '@') {
        throw Error(ErrorCode::UnsupportedKeyword,
                    "@context entry '" + label +
                        "' is not a prefix -> namespace string");
      }
      local.add(label, value.get<std::string>());
    }
    return local;
  }

  static std::string resolve(const std::string& name,
                             const PrefixMap& prefixes) {
    if (name.rfind("_:", 0) == 0) {
      throw Error(ErrorCode::UnsupportedFeature,
                  "blank node identifier '" + name + "'");
    }
    auto colon = name.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::UnsupportedFeature,
                  "relative IRI or bare term '" + name + "'");
    }
    if (const std::string* ns = prefixes.find(name.substr(0, colon))) {
      return *ns + name.substr(colon + 1);
    }
    if (name.find("://") != std::string::npos || name.rfind("urn:", 0) == 0) {
      return name;
    }
    throw Error(ErrorCode::UnknownPrefix, name.substr(0, colon));
  }

  Term readNode(const json& node, const PrefixMap& outer) {
    PrefixMap prefixes = withContext(node, outer);
    Term subject = [&] {
      auto id = node.find("@id");
      if (id == node.end()) return graph_.freshBlank();
      if (!id->is_string()) {
        throw Error(ErrorCode::SyntaxError, "@id must be a string");
      }
      return Term::iri(resolve(id->get<std::string>(), prefixes));
    }();

    for (const auto& [key, value] : node.items()) {
      if (key == "@context" || key == "@id") continue;
      if (key == "@type") {
        auto addType = [&](const json& t) {
          if (!t.is_string()) {
            throw Error(ErrorCode::SyntaxError, "@type values must be strings");
          }
          graph_.insert(subject, vocab::rdfType(),
                        Term::iri(resolve(t.get<std::string>(), prefixes)));
        };
        if (value.is_array()) {
          for (const json& t : value) addType(t);
        } else {
          addType(value);
        }
        continue;
      }
      if (!key.empty() && key.front() == '@') {
        throw Error(ErrorCode::UnsupportedKeyword, key);
      }
      Term predicate = Term::iri(resolve(key, prefixes));
      if (value.is_array()) {
        for (const json& v : value) {
          if (v.is_array()) {
            throw Error(ErrorCode::UnsupportedFeature, "nested arrays (lists)");
          }
          graph_.insert(subject, predicate, readValue(v, prefixes));
        }
      } else {
        graph_.insert(subject, predicate, readValue(value, prefixes));
      }
    }
    return subject;
  }

  Term readValue(const json& v, const PrefixMap& prefixes) {
    switch (v.type()) {
      case json::value_t::string:
        return Term::string(v.get<std::string>());
      case json::value_t::number_integer:
        return Term::integer(v.get<std::int64_t>());
      case json::value_t::number_unsigned: {
        auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) {
          throw Error(ErrorCode::InvalidTerm, "integer out of range");
        }
        return Term::integer(static_cast<std::int64_t>(u));
      }
      case json::value_t::number_float:
        return Term::decimal(v.get<double>());
      case json::value_t::object: {
        if (v.contains("@value") || v.contains("@list") || v.contains("@set")) {
          throw Error(ErrorCode::UnsupportedKeyword,
                      "value objects and lists are not supported");
        }
        if (v.size() == 1 && v.contains("@id")) {
          if (!v["@id"].is_string()) {
            throw Error(ErrorCode::SyntaxError, "@id must be a string");
          }
          return Term::iri(resolve(v["@id"].get<std::string>(), prefixes));
        }
        return readNode(v, prefixes);
      }
      case json::value_t::boolean:
        throw Error(ErrorCode::UnsupportedFeature, "boolean literal");
      case json::value_t::null:
        throw Error(ErrorCode::UnsupportedFeature, "null value");
      default:
        throw Error(ErrorCode::SyntaxError, "unsupported JSON value");
    }
  }

  Graph graph_;
};

// ---------------------------------------------------------------------------

class JsonLdWriter {
 public:
  explicit JsonLdWriter(const Graph& graph) : graph_(graph) {}

  std::string run() {
    requireTreeBlankNodes(graph_);
    std::set<std::string> blankObjects;
    for (const Triple& t : graph_.triples()) {
      if (t.object.isBlank()) blankObjects.insert(t.object.value());
    }
    std::vector<Term> iriSubjects;
    std::vector<std::pair<std::string, Term>> rootBlanks;
    std::set<Term> seen;
    for (const Triple& t : graph_.triples()) {
      if (!seen.insert(t.subject).second) continue;
      if (t.subject.isIri()) {
        iriSubjects.push_back(t.subject);
      } else if (!blankObjects.contains(t.subject.value())) {
        rootBlanks.emplace_back(canonicalTree(graph_, t.subject), t.subject);
      }
    }
    std::sort(rootBlanks.begin(), rootBlanks.end());

    json out = json::array();
    auto emit = [&](const Term& subject) {
      used_.clear();
      json node = nodeObject(subject);
      if (!used_.empty()) {
        json context = json::object();
        for (const std::string& label : used_) {
          context[label] = *graph_.prefixes().find(label);
        }
        node["@context"] = std::move(context);
      }
      out.push_back(std::move(node));
    };
    for (const Term& s : iriSubjects) emit(s);
    for (const auto& [key, s] : rootBlanks) emit(s);
    try {
      return out.dump(2);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidTerm, e.what());
    }
  }

 private:
  std::string name(const std::string& iri) {
    if (auto n = shrink(iri, graph_.prefixes())) {
      used_.insert(n->substr(0, n->find(':')));
      return *n;
    }
    return iri;
  }

  const std::string& key(const Term& t) {
    auto it = keys_.find(t);
    if (it == keys_.end()) {
      it = keys_.emplace(t, t.isBlank() ? canonicalTree(graph_, t)
                                        : t.toString()).first;
    }
    return it->second;
  }

  json value(const Term& t) {
    switch (t.kind()) {
      case TermKind::Iri:
        return json{{"@id", name(t.value())}};
      case TermKind::BlankNode:
        return nodeObject(t);
      case TermKind::Literal:
        switch (t.datatype()) {
          case Datatype::String: return t.value();
          case Datatype::Integer: return t.asInteger();
          case Datatype::Decimal: return t.asDouble();
        }
    }
    return nullptr;
  }

  json nodeObject(const Term& subject) {
    json node = json::object();
    if (subject.isIri()) node["@id"] = name(subject.value());

    std::map<std::string, std::vector<Term>> byKey;
    std::vector<std::string> types;
    const Term type = vocab::rdfType();
    for (const Triple& t : graph_.match(subject, std::nullopt, std::nullopt)) {
      if (t.predicate == type && t.object.isIri()) {
        types.push_back(name(t.object.value()));
      } else {
        byKey[name(t.predicate.value())].push_back(t.object);
      }
    }
    if (types.size() == 1) {
      node["@type"] = types.front();
    } else if (!types.empty()) {
      std::sort(types.begin(), types.end());
      node["@type"] = types;
    }
    for (auto& [k, objects] : byKey) {
      std::sort(objects.begin(), objects.end(),
                [&](const Term& a, const Term& b) { return key(a) < key(b); });
      if (objects.size() == 1) {
        node[k] = value(objects.front());
      } else {
        json arr = json::array();
        for (const Term& o : objects) arr.push_back(value(o));
        node[k] = std::move(arr);
      }
    }
    return node;
  }

  const Graph& graph_;
  std::set<std::string> used_;
  std::map<Term, std::string> keys_;
};

}  // namespace

Graph parseJsonLd(std::string_view text, const PrefixMap& base) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) {
        return std::isspace(c) != 0;
      })) {
    return Graph(base);
  }
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = lineColumn(text, e.byte > 0 ? e.byte - 1 : 0);
    throw SyntaxError(line, column, e.what());
  }
  return JsonLdReader(base).run(doc);
}

std::string serializeJsonLd(const Graph& graph) {
  return JsonLdWriter(graph).run();
}

}  // namespace kava
