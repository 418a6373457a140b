#include "kava/rdf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "kava/error.hpp"

namespace kava {

std::string_view errorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownPrefix: return "UnknownPrefix";
    case ErrorCode::InvalidTerm: return "InvalidTerm";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::UnsupportedKeyword: return "UnsupportedKeyword";
    case ErrorCode::NonTreeBlankNodes: return "NonTreeBlankNodes";
    case ErrorCode::EmptyScheme: return "EmptyScheme";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::CyclicScheme: return "CyclicScheme";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::DuplicateIdentifier: return "DuplicateIdentifier";
    case ErrorCode::NonIncreasingTime: return "NonIncreasingTime";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::PredicateSyntaxError: return "PredicateSyntaxError";
    case ErrorCode::MalformedManifestation: return "MalformedManifestation";
    case ErrorCode::ForeignDialect: return "ForeignDialect";
    case ErrorCode::InvalidKind: return "InvalidKind";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedPredicateShape: return "UnsupportedPredicateShape";
    case ErrorCode::InsufficientSteps: return "InsufficientSteps";
    case ErrorCode::NonPositivePhase: return "NonPositivePhase";
    case ErrorCode::EmptyPopulation: return "EmptyPopulation";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::InvertedRange: return "InvertedRange";
    case ErrorCode::NoDefinedRanges: return "NoDefinedRanges";
    case ErrorCode::DuplicatePrototype: return "DuplicatePrototype";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

bool hasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

bool isDecimalLexical(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digitsBefore = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digitsBefore;
  }
  if (i == s.size()) return digitsBefore > 0;
  if (s[i] != '.') return false;
  ++i;
  std::size_t digitsAfter = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digitsAfter;
  }
  return i == s.size() && digitsAfter > 0;
}

}  // namespace

std::string formatDecimal(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidTerm, "decimal must be finite");
  }
  if (value == 0.0) value = 0.0;  // folds -0
  char buf[512];
  auto [end, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec != std::errc{}) {
    throw Error(ErrorCode::InvalidTerm, "decimal out of range");
  }
  std::string out(buf, end);
  if (out.find('.') == std::string::npos) out += ".0";
  return out;
}

Term Term::iri(std::string value) {
  if (value.empty() || hasWhitespace(value)) {
    throw Error(ErrorCode::InvalidTerm, "IRI must be non-empty without whitespace: '" + value + "'");
  }
  return Term(TermKind::Iri, std::move(value), Datatype::String);
}

Term Term::blank(std::string label) {
  if (label.empty() || hasWhitespace(label)) {
    throw Error(ErrorCode::InvalidTerm, "invalid blank node label '" + label + "'");
  }
  return Term(TermKind::BlankNode, std::move(label), Datatype::String);
}

Term Term::string(std::string lexical) {
  return Term(TermKind::Literal, std::move(lexical), Datatype::String);
}

Term Term::integer(std::int64_t value) {
  return Term(TermKind::Literal, std::to_string(value), Datatype::Integer);
}

Term Term::decimal(double value) {
  return Term(TermKind::Literal, formatDecimal(value), Datatype::Decimal);
}

Term Term::numeric(std::string_view lexical, Datatype type) {
  switch (type) {
    case Datatype::String:
      return string(std::string(lexical));
    case Datatype::Integer: {
      std::string_view digits = lexical;
      if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
      std::int64_t v = 0;
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (digits.empty() || ec != std::errc{} ||
          ptr != digits.data() + digits.size()) {
        throw Error(ErrorCode::InvalidTerm,
                    "not an integer: '" + std::string(lexical) + "'");
      }
      return integer(v);
    }
    case Datatype::Decimal: {
      if (!isDecimalLexical(lexical)) {
        throw Error(ErrorCode::InvalidTerm,
                    "not a decimal: '" + std::string(lexical) + "'");
      }
      std::string_view digits = lexical;
      if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
      double v = 0;
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), v,
                          std::chars_format::fixed);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        throw Error(ErrorCode::InvalidTerm,
                    "not a decimal: '" + std::string(lexical) + "'");
      }
      return decimal(v);
    }
  }
  throw Error(ErrorCode::InvalidTerm, "unknown datatype");
}

double Term::asDouble() const {
  if (!isNumeric()) {
    throw Error(ErrorCode::TypeError, "not a numeric literal: " + toString());
  }
  double v = 0;
  std::from_chars(value_.data(), value_.data() + value_.size(), v);
  return v;
}

std::int64_t Term::asInteger() const {
  if (!isLiteral() || datatype_ != Datatype::Integer) {
    throw Error(ErrorCode::TypeError, "not an integer literal: " + toString());
  }
  std::int64_t v = 0;
  std::from_chars(value_.data(), value_.data() + value_.size(), v);
  return v;
}

std::string Term::toString() const {
  switch (kind_) {
    case TermKind::Iri:
      return "<" + value_ + ">";
    case TermKind::BlankNode:
      return "_:" + value_;
    case TermKind::Literal: {
      std::string out = "\"";
      for (char c : value_) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out += c;
      }
      out += '"';
      if (datatype_ == Datatype::Integer) out += "^^integer";
      if (datatype_ == Datatype::Decimal) out += "^^decimal";
      return out;
    }
  }
  return {};
}

Triple makeTriple(Term subject, Term predicate, Term object) {
  if (subject.isLiteral()) {
    throw Error(ErrorCode::InvalidTerm, "literal in subject position");
  }
  if (!predicate.isIri()) {
    throw Error(ErrorCode::InvalidTerm, "predicate must be an IRI");
  }
  return Triple{std::move(subject), std::move(predicate), std::move(object)};
}

// ---------------------------------------------------------------------------
// Prefixes

void PrefixMap::add(const std::string& label, const std::string& ns) {
  if (ns.empty()) {
    throw Error(ErrorCode::InvalidArgument,
                "namespace for prefix '" + label + "' is empty");
  }
  entries_[label] = ns;
}

const std::string* PrefixMap::find(const std::string& label) const {
  auto it = entries_.find(label);
  return it == entries_.end() ? nullptr : &it->second;
}

void PrefixMap::merge(const PrefixMap& other) {
  for (const auto& [label, ns] : other.entries_) entries_[label] = ns;
}

const PrefixMap& defaultPrefixes() {
  static const PrefixMap map = [] {
    PrefixMap m;
    m.add("rdf", std::string(ns::rdf));
    m.add("skos", std::string(ns::skos));
    m.add("dct", std::string(ns::dct));
    m.add("foaf", std::string(ns::foaf));
    m.add("kava", std::string(ns::kava));
    m.add("gps", std::string(ns::gps));
    m.add("icd10", std::string(ns::icd10));
    m.add("health", std::string(ns::health));
    return m;
  }();
  return map;
}

PrefixMap parsePrefixLines(std::string_view text) {
  PrefixMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  auto trim = [](std::string s) {
    auto notSpace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notSpace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notSpace).base(), s.end());
    return s;
  };
  while (std::getline(in, line)) {
    ++lineNo;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SyntaxError(lineNo, 1, "expected label=namespace");
    }
    map.add(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return map;
}

PrefixMap environmentPrefixes() {
  PrefixMap map = defaultPrefixes();
  if (const char* path = std::getenv("KAVA_PREFIXES"); path && *path) {
    std::ifstream in(path);
    if (!in) {
      throw Error(ErrorCode::Io, std::string("cannot read KAVA_PREFIXES file ") + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    map.merge(parsePrefixLines(buf.str()));
  }
  return map;
}

std::string expand(std::string_view name, const PrefixMap& prefixes) {
  auto colon = name.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidTerm,
                "not a prefixed name: '" + std::string(name) + "'");
  }
  std::string label(name.substr(0, colon));
  const std::string* ns = prefixes.find(label);
  if (!ns) throw Error(ErrorCode::UnknownPrefix, label);
  return *ns + std::string(name.substr(colon + 1));
}

bool isValidLocalName(std::string_view local) {
  if (local.empty()) return true;
  if (local.front() == '.' || local.front() == '-' || local.back() == '.') {
    return false;
  }
  return std::all_of(local.begin(), local.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == ':' ||
           c >= 0x80;
  });
}

std::optional<std::string> shrink(std::string_view iri,
                                  const PrefixMap& prefixes) {
  const std::pair<const std::string, std::string>* best = nullptr;
  for (const auto& entry : prefixes.entries()) {
    const std::string& ns = entry.second;
    if (iri.size() >= ns.size() && iri.substr(0, ns.size()) == ns &&
        isValidLocalName(iri.substr(ns.size()))) {
      if (!best || ns.size() > best->second.size()) best = &entry;
    }
  }
  if (!best) return std::nullopt;
  return best->first + ":" + std::string(iri.substr(best->second.size()));
}

// ---------------------------------------------------------------------------
// Graph

namespace {

void noteBlank(std::set<std::string>& labels, const Term& t) {
  if (t.isBlank()) labels.insert(t.value());
}

}  // namespace

bool Graph::insert(const Triple& triple) {
  Triple checked = makeTriple(triple.subject, triple.predicate, triple.object);
  noteBlank(blankLabels_, checked.subject);
  noteBlank(blankLabels_, checked.object);
  return triples_.insert(std::move(checked)).second;
}

bool Graph::erase(const Triple& triple) { return triples_.erase(triple) > 0; }

Term Graph::freshBlank() {
  std::string label;
  do {
    label = "b" + std::to_string(nextBlank_++);
  } while (blankLabels_.contains(label));
  blankLabels_.insert(label);
  return Term::blank(label);
}

std::vector<Triple> Graph::match(const std::optional<Term>& s,
                                 const std::optional<Term>& p,
                                 const std::optional<Term>& o) const {
  std::vector<Triple> out;
  auto accept = [&](const Triple& t) {
    return (!p || t.predicate == *p) && (!o || t.object == *o);
  };
  if (s) {
    // Triples are ordered by subject first, so the bound subject is a
    // contiguous range starting at the first triple with that subject.
    auto it = triples_.lower_bound(
        Triple{*s, Term::minimum(), Term::minimum()});
    for (; it != triples_.end() && it->subject == *s; ++it) {
      if (accept(*it)) out.push_back(*it);
    }
    return out;
  }
  for (const Triple& t : triples_) {
    if (accept(t)) out.push_back(t);
  }
  return out;
}

void Graph::merge(const Graph& other) {
  std::map<std::string, Term> relabel;
  auto map = [&](const Term& t) -> Term {
    if (!t.isBlank()) return t;
    auto it = relabel.find(t.value());
    if (it == relabel.end()) {
      it = relabel.emplace(t.value(), freshBlank()).first;
    }
    return it->second;
  };
  for (const Triple& t : other.triples_) {
    insert(map(t.subject), t.predicate, map(t.object));
  }
}

std::vector<Triple> matchPattern(const Graph& graph,
                                 const std::optional<Term>& s,
                                 const std::optional<Term>& p,
                                 const std::optional<Term>& o) {
  return graph.match(s, p, o);
}

void requireTreeBlankNodes(const Graph& graph) {
  std::map<std::string, const Triple*> parent;
  for (const Triple& t : graph.triples()) {
    if (!t.object.isBlank()) continue;
    auto [it, fresh] = parent.emplace(t.object.value(), &t);
    if (!fresh) {
      throw Error(ErrorCode::NonTreeBlankNodes,
                  "blank node _:" + t.object.value() +
                      " is the object of more than one triple");
    }
  }
  for (const auto& [label, triple] : parent) {
    std::set<std::string> seen{label};
    const Triple* up = triple;
    while (up && up->subject.isBlank()) {
      if (!seen.insert(up->subject.value()).second) {
        throw Error(ErrorCode::NonTreeBlankNodes,
                    "blank nodes form a cycle through _:" + label);
      }
      auto it = parent.find(up->subject.value());
      up = it == parent.end() ? nullptr : it->second;
    }
  }
}

namespace {

class TreeCanonicalizer {
 public:
  explicit TreeCanonicalizer(const Graph& graph) : graph_(graph) {}

  const std::string& operator()(const Term& node) {
    if (!node.isBlank()) {
      scratch_ = node.toString();
      return scratch_;
    }
    if (auto it = memo_.find(node.value()); it != memo_.end()) {
      return it->second;
    }
    std::vector<std::string> parts;
    for (const Triple& t : graph_.match(node, std::nullopt, std::nullopt)) {
      std::string objectForm = t.object.isBlank()
                                   ? std::string((*this)(t.object))
                                   : t.object.toString();
      parts.push_back(t.predicate.toString() + " " + objectForm);
    }
    std::sort(parts.begin(), parts.end());
    std::string out = "[";
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ";";
      out += parts[i];
    }
    out += "]";
    return memo_.emplace(node.value(), std::move(out)).first->second;
  }

 private:
  const Graph& graph_;
  std::unordered_map<std::string, std::string> memo_;
  std::string scratch_;
};

std::vector<std::string> canonicalStatements(const Graph& graph) {
  requireTreeBlankNodes(graph);
  TreeCanonicalizer canon(graph);
  std::set<std::string> blankObjects;
  for (const Triple& t : graph.triples()) {
    if (t.object.isBlank()) blankObjects.insert(t.object.value());
  }
  std::vector<std::string> out;
  std::set<std::string> rootsDone;
  for (const Triple& t : graph.triples()) {
    if (!t.subject.isBlank()) {
      out.push_back(t.subject.toString() + " " + t.predicate.toString() +
                    " " + canon(t.object));
    } else if (!blankObjects.contains(t.subject.value()) &&
               rootsDone.insert(t.subject.value()).second) {
      out.push_back("ROOT " + canon(t.subject));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string canonicalTree(const Graph& graph, const Term& node) {
  TreeCanonicalizer canon(graph);
  return canon(node);
}

bool isomorphicTrees(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) {
    // Still enforce the precondition on both inputs.
    requireTreeBlankNodes(a);
    requireTreeBlankNodes(b);
    return false;
  }
  return canonicalStatements(a) == canonicalStatements(b);
}

void eraseBlankTree(Graph& graph, const Term& node) {
  if (!node.isBlank()) return;
  for (const Triple& t : graph.match(node, std::nullopt, std::nullopt)) {
    graph.erase(t);
    eraseBlankTree(graph, t.object);
  }
}

namespace vocab {
Term rdfType() { return Term::iri(std::string(ns::rdf) + "type"); }
Term skos(std::string_view local) {
  return Term::iri(std::string(ns::skos) + std::string(local));
}
Term dct(std::string_view local) {
  return Term::iri(std::string(ns::dct) + std::string(local));
}
Term foaf(std::string_view local) {
  return Term::iri(std::string(ns::foaf) + std::string(local));
}
Term kava(std::string_view local) {
  return Term::iri(std::string(ns::kava) + std::string(local));
}
}  // namespace vocab

}  // namespace kava
