#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kava {

enum class TermKind : std::uint8_t { Iri, BlankNode, Literal };

enum class Datatype : std::uint8_t { String, Integer, Decimal };

// An RDF node or literal. Literals carry one of three datatype tags; integer
// and decimal lexical forms are canonicalized on construction so that the
// same number always has the same spelling.
class Term {
 public:
  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term string(std::string lexical);
  static Term integer(std::int64_t value);
  static Term decimal(double value);
  // Parses and canonicalizes a numeric lexical form.
  static Term numeric(std::string_view lexical, Datatype type);

  TermKind kind() const noexcept { return kind_; }
  Datatype datatype() const noexcept { return datatype_; }
  const std::string& value() const noexcept { return value_; }

  bool isIri() const noexcept { return kind_ == TermKind::Iri; }
  bool isBlank() const noexcept { return kind_ == TermKind::BlankNode; }
  bool isLiteral() const noexcept { return kind_ == TermKind::Literal; }
  bool isNumeric() const noexcept {
    return isLiteral() && datatype_ != Datatype::String;
  }
  double asDouble() const;
  std::int64_t asInteger() const;

  // N-Triples-like rendering, e.g. <iri>, _:b1, "text", "12"^^integer.
  std::string toString() const;

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;

 private:
  friend class Graph;

  Term(TermKind kind, std::string value, Datatype datatype)
      : kind_(kind), datatype_(datatype), value_(std::move(value)) {}

  // Sorts before every valid term.
  static Term minimum() { return Term(TermKind::Iri, {}, Datatype::String); }

  TermKind kind_;
  Datatype datatype_;
  std::string value_;
};

std::string formatDecimal(double value);

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

Triple makeTriple(Term subject, Term predicate, Term object);

class PrefixMap {
 public:
  PrefixMap() = default;

  void add(const std::string& label, const std::string& ns);
  bool contains(const std::string& label) const {
    return entries_.contains(label);
  }
  const std::string* find(const std::string& label) const;
  const std::map<std::string, std::string>& entries() const noexcept {
    return entries_;
  }
  void merge(const PrefixMap& other);

  bool operator==(const PrefixMap&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

namespace ns {
inline constexpr std::string_view rdf =
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view skos = "http://www.w3.org/2004/02/skos/core#";
inline constexpr std::string_view dct = "http://purl.org/dc/terms/";
inline constexpr std::string_view foaf = "http://xmlns.com/foaf/0.1/";
// The following namespaces are minted for this project.
inline constexpr std::string_view kava = "http://example.org/kava/vocab#";
inline constexpr std::string_view gps = "http://example.org/kava/gait-patterns#";
inline constexpr std::string_view icd10 = "http://id.who.int/icd/release/10/";
inline constexpr std::string_view health = "http://example.org/kava/health#";
}  // namespace ns

// rdf, skos, dct, foaf, kava, gps, icd10 and health.
const PrefixMap& defaultPrefixes();

// Default prefixes plus the label=namespace lines of the file named by the
// KAVA_PREFIXES environment variable, when set.
PrefixMap environmentPrefixes();

PrefixMap parsePrefixLines(std::string_view text);

std::string expand(std::string_view name, const PrefixMap& prefixes);

// Longest-namespace inverse of expand. Empty when no registered namespace
// applies or the remainder is not a valid local name.
std::optional<std::string> shrink(std::string_view iri,
                                  const PrefixMap& prefixes);

bool isValidLocalName(std::string_view local);

class Graph {
 public:
  Graph() = default;
  explicit Graph(PrefixMap prefixes) : prefixes_(std::move(prefixes)) {}

  // Returns true if the triple was not present before.
  bool insert(const Triple& triple);
  bool insert(Term s, Term p, Term o) {
    return insert(Triple{std::move(s), std::move(p), std::move(o)});
  }
  bool erase(const Triple& triple);
  bool contains(const Triple& triple) const {
    return triples_.contains(triple);
  }

  // A blank node label not used anywhere in this graph.
  Term freshBlank();

  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  const std::set<Triple>& triples() const noexcept { return triples_; }

  PrefixMap& prefixes() noexcept { return prefixes_; }
  const PrefixMap& prefixes() const noexcept { return prefixes_; }

  // Every triple matching the bound positions, in canonical order.
  std::vector<Triple> match(const std::optional<Term>& s,
                            const std::optional<Term>& p,
                            const std::optional<Term>& o) const;

  // Copies all triples of `other`, relabeling its blank nodes apart.
  void merge(const Graph& other);

  bool operator==(const Graph& other) const {
    return triples_ == other.triples_;
  }

 private:
  std::set<Triple> triples_;
  std::set<std::string> blankLabels_;
  std::size_t nextBlank_ = 1;
  PrefixMap prefixes_ = defaultPrefixes();
};

std::vector<Triple> matchPattern(const Graph& graph,
                                 const std::optional<Term>& s,
                                 const std::optional<Term>& p,
                                 const std::optional<Term>& o);

// Throws NonTreeBlankNodes unless every blank node is the object of at most
// one triple and no blank nodes form a cycle.
void requireTreeBlankNodes(const Graph& graph);

// Label-independent rendering of the blank-node tree rooted at `node`.
// Non-blank terms render as toString().
std::string canonicalTree(const Graph& graph, const Term& node);

// True iff a blank-node relabeling makes the triple sets equal. Both graphs
// must satisfy requireTreeBlankNodes.
bool isomorphicTrees(const Graph& a, const Graph& b);

// Removes the subtree of blank nodes reachable from `node` (and `node`'s own
// triples when it is blank).
void eraseBlankTree(Graph& graph, const Term& node);

namespace vocab {
Term rdfType();
Term skos(std::string_view local);
Term dct(std::string_view local);
Term foaf(std::string_view local);
Term kava(std::string_view local);
}  // namespace vocab

}  // namespace kava
