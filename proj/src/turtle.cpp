#include "kava/turtle.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "kava/error.hpp"

namespace kava {

namespace {

bool isNameChar(char ch) {
  auto c = static_cast<unsigned char>(ch);
  return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == ':' ||
         c >= 0x80;
}

bool isPrefixLabel(std::string_view label) {
  if (label.empty()) return true;
  if (!std::isalpha(static_cast<unsigned char>(label.front())) ||
      label.back() == '.') {
    return false;
  }
  return std::all_of(label.begin(), label.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c >= 0x80;
  });
}

class TurtleParser {
 public:
  TurtleParser(std::string_view text, const PrefixMap& base)
      : text_(text), graph_(base) {}

  Graph run() {
    skipTrivia();
    while (!atEnd()) {
      if (peek() == '@') {
        directive();
      } else {
        statement();
      }
      skipTrivia();
    }
    return std::move(graph_);
  }

 private:
  struct Mark {
    std::size_t line;
    std::size_t column;
  };

  bool atEnd() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  Mark mark() const { return {line_, column_}; }

  void advance() {
    if (atEnd()) return;
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const Mark& at, const std::string& message,
                         ErrorCode code = ErrorCode::SyntaxError) const {
    throw SyntaxError(at.line, at.column, message, code);
  }
  [[noreturn]] void unsupported(const Mark& at, const std::string& feature) {
    fail(at, "unsupported Turtle feature: " + feature,
         ErrorCode::UnsupportedFeature);
  }

  void skipTrivia() {
    while (!atEnd()) {
      char c = peek();
      if (c == '#') {
        while (!atEnd() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void expect(char c, const char* what) {
    skipTrivia();
    if (peek() != c) {
      fail(mark(), std::string("expected ") + what +
                       (atEnd() ? " but reached end of input"
                                : std::string(" but found '") + peek() + "'"));
    }
    advance();
  }

  std::string readName() {
    std::string out;
    while (!atEnd() && isNameChar(peek())) {
      out += peek();
      advance();
    }
    return out;
  }

  void directive() {
    Mark at = mark();
    advance();  // '@'
    std::string keyword = readName();
    if (keyword == "base") unsupported(at, "@base");
    if (keyword != "prefix") fail(at, "unknown directive '@" + keyword + "'");
    skipTrivia();
    Mark labelAt = mark();
    std::string label = readName();
    if (label.empty() || label.back() != ':' ||
        !isPrefixLabel(std::string_view(label).substr(0, label.size() - 1))) {
      fail(labelAt, "expected prefix label ending in ':'");
    }
    label.pop_back();
    skipTrivia();
    std::string ns = iriRef();
    if (ns.empty()) fail(labelAt, "empty namespace IRI");
    graph_.prefixes().add(label, ns);
    expect('.', "'.' after @prefix directive");
  }

  void statement() {
    skipTrivia();
    Mark at = mark();
    if (peek() == '[') {
      Term subject = blankNodePropertyList();
      skipTrivia();
      if (peek() != '.') predicateObjectList(subject);
    } else {
      Term subject = subjectTerm();
      skipTrivia();
      if (peek() == '.') fail(mark(), "expected predicate after subject");
      predicateObjectList(subject);
    }
    (void)at;
    expect('.', "'.' at end of statement");
  }

  Term subjectTerm() {
    Mark at = mark();
    char c = peek();
    if (c == '<') return Term::iri(iriRef());
    if (c == '_' && peek(1) == ':') unsupported(at, "labelled blank node");
    if (c == '(') unsupported(at, "collection");
    if (c == '"' || c == '\'') fail(at, "literal in subject position");
    return prefixedName(at, readName());
  }

  Term prefixedName(const Mark& at, std::string name) {
    if (name.empty()) {
      fail(at, atEnd() ? "unexpected end of input"
                       : std::string("unexpected character '") + peek() + "'");
    }
    // A trailing '.' belongs to the statement terminator, not the name.
    std::size_t keep = name.size();
    while (keep > 0 && name[keep - 1] == '.') --keep;
    if (keep < name.size()) {
      std::size_t back = name.size() - keep;
      pos_ -= back;
      column_ -= back;
      name.resize(keep);
    }
    auto colon = name.find(':');
    if (colon == std::string::npos) {
      fail(at, "expected IRI or prefixed name, found '" + name + "'");
    }
    std::string label = name.substr(0, colon);
    std::string local = name.substr(colon + 1);
    if (!isPrefixLabel(label) || !isValidLocalName(local)) {
      fail(at, "malformed prefixed name '" + name + "'");
    }
    const std::string* ns = graph_.prefixes().find(label);
    if (!ns) fail(at, "unknown prefix '" + label + "'", ErrorCode::UnknownPrefix);
    return Term::iri(*ns + local);
  }

  std::string iriRef() {
    Mark at = mark();
    if (peek() != '<') fail(at, "expected '<'");
    advance();
    std::string out;
    while (true) {
      if (atEnd()) fail(at, "unterminated IRI");
      char c = peek();
      if (c == '>') break;
      if (std::isspace(static_cast<unsigned char>(c)) || c == '<' ||
          c == '"' || c == '{' || c == '}' || c == '|' || c == '^' ||
          c == '`' || c == '\\') {
        fail(mark(), std::string("invalid character '") + c + "' in IRI");
      }
      out += c;
      advance();
    }
    advance();
    return out;
  }

  void predicateObjectList(const Term& subject) {
    while (true) {
      skipTrivia();
      Term predicate = verb();
      objectList(subject, predicate);
      skipTrivia();
      if (peek() != ';') return;
      while (peek() == ';') {
        advance();
        skipTrivia();
      }
      // A trailing ';' may close the list.
      if (peek() == '.' || peek() == ']' || atEnd()) return;
    }
  }

  Term verb() {
    Mark at = mark();
    if (peek() == '<') return Term::iri(iriRef());
    if (peek() == '[') fail(at, "blank node in predicate position");
    if (peek() == '_' && peek(1) == ':') fail(at, "blank node in predicate position");
    std::string name = readName();
    if (name == "a") return vocab::rdfType();
    if (name.empty()) {
      fail(at, atEnd() ? "expected predicate but reached end of input"
                       : std::string("expected predicate, found '") + peek() + "'");
    }
    return prefixedName(at, std::move(name));
  }

  void objectList(const Term& subject, const Term& predicate) {
    while (true) {
      skipTrivia();
      Term object = objectTerm();
      graph_.insert(subject, predicate, object);
      skipTrivia();
      if (peek() != ',') return;
      advance();
    }
  }

  Term objectTerm() {
    Mark at = mark();
    char c = peek();
    if (atEnd()) fail(at, "expected object but reached end of input");
    if (c == '<') return Term::iri(iriRef());
    if (c == '[') return blankNodePropertyList();
    if (c == '"') return stringLiteral();
    if (c == '\'') unsupported(at, "single-quoted string");
    if (c == '(') unsupported(at, "collection");
    if (c == '_' && peek(1) == ':') unsupported(at, "labelled blank node");
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return numericLiteral();
    }
    std::string name = readName();
    if (name == "true" || name == "false") unsupported(at, "boolean literal");
    return prefixedName(at, std::move(name));
  }

  Term blankNodePropertyList() {
    advance();  // '['
    Term node = graph_.freshBlank();
    skipTrivia();
    if (peek() != ']') predicateObjectList(node);
    expect(']', "']' closing blank node");
    return node;
  }

  Term stringLiteral() {
    Mark at = mark();
    if (peek(1) == '"' && peek(2) == '"') unsupported(at, "long string");
    advance();
    std::string out;
    while (true) {
      if (atEnd() || peek() == '\n') fail(at, "unterminated string");
      char c = peek();
      if (c == '"') break;
      if (c == '\\') {
        Mark escAt = mark();
        advance();
        switch (peek()) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case '\'': out += '\''; break;
          default: fail(escAt, "unsupported escape sequence");
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
    advance();
    if (peek() == '@') unsupported(mark(), "language-tagged literal");
    if (peek() == '^' && peek(1) == '^') unsupported(mark(), "datatyped literal");
    return Term::string(std::move(out));
  }

  Term numericLiteral() {
    Mark at = mark();
    std::string lexical;
    if (peek() == '+' || peek() == '-') {
      lexical += peek();
      advance();
    }
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      lexical += peek();
      advance();
    }
    bool decimal = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      decimal = true;
      lexical += '.';
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        lexical += peek();
        advance();
      }
    }
    if (peek() == 'e' || peek() == 'E') unsupported(at, "double literal");
    if (lexical.empty() || lexical == "+" || lexical == "-") {
      fail(at, "malformed number");
    }
    if (isNameChar(peek()) && peek() != '.') {
      fail(at, "malformed number");
    }
    try {
      return Term::numeric(lexical,
                           decimal ? Datatype::Decimal : Datatype::Integer);
    } catch (const Error& e) {
      fail(at, e.what());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
  Graph graph_;
};

// ---------------------------------------------------------------------------

class TurtleWriter {
 public:
  explicit TurtleWriter(const Graph& graph) : graph_(graph) {}

  std::string run() {
    requireTreeBlankNodes(graph_);
    std::set<std::string> blankObjects;
    for (const Triple& t : graph_.triples()) {
      if (t.object.isBlank()) blankObjects.insert(t.object.value());
    }

    std::vector<Term> iriSubjects;
    std::vector<std::pair<std::string, Term>> rootBlanks;
    for (const Triple& t : graph_.triples()) {
      if (!iriSubjects.empty() && iriSubjects.back() == t.subject) continue;
      if (!rootBlanks.empty() && rootBlanks.back().second == t.subject) continue;
      if (t.subject.isIri()) {
        iriSubjects.push_back(t.subject);
      } else if (!blankObjects.contains(t.subject.value())) {
        rootBlanks.emplace_back(canonicalTree(graph_, t.subject), t.subject);
      }
    }
    std::sort(rootBlanks.begin(), rootBlanks.end());

    std::string body;
    for (const Term& subject : iriSubjects) {
      body += term(subject);
      body += " ";
      body += propertyList(subject, 0);
      body += " .\n\n";
    }
    for (const auto& [key, subject] : rootBlanks) {
      body += blankBlock(subject, 0);
      body += " .\n\n";
    }
    if (!body.empty()) body.pop_back();

    std::string header;
    for (const std::string& label : usedPrefixes_) {
      header += "@prefix " + label + ": <" +
                *graph_.prefixes().find(label) + "> .\n";
    }
    if (!header.empty() && !body.empty()) header += "\n";
    return header + body;
  }

 private:
  static std::string indent(int level) {
    return std::string(static_cast<std::size_t>(level) * 4, ' ');
  }

  std::string iri(const std::string& value) {
    if (auto name = shrink(value, graph_.prefixes())) {
      usedPrefixes_.insert(name->substr(0, name->find(':')));
      return *name;
    }
    for (char c : value) {
      if (c == '<' || c == '>' || c == '"' || c == '{' || c == '}' ||
          c == '|' || c == '^' || c == '`' || c == '\\') {
        throw Error(ErrorCode::InvalidTerm,
                    "IRI cannot be written in Turtle: " + value);
      }
    }
    return "<" + value + ">";
  }

  std::string term(const Term& t) {
    switch (t.kind()) {
      case TermKind::Iri:
        return iri(t.value());
      case TermKind::BlankNode:
        return "[]";
      case TermKind::Literal:
        if (t.datatype() != Datatype::String) return t.value();
        return quote(t.value());
    }
    return {};
  }

  static std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out + "\"";
  }

  const std::string& key(const Term& t) {
    auto it = keys_.find(t);
    if (it == keys_.end()) {
      it = keys_.emplace(t, t.isBlank() ? canonicalTree(graph_, t)
                                        : t.toString()).first;
    }
    return it->second;
  }

  std::vector<Triple> orderedProperties(const Term& subject) {
    std::vector<Triple> props = graph_.match(subject, std::nullopt, std::nullopt);
    const Term type = vocab::rdfType();
    std::stable_sort(props.begin(), props.end(),
                     [&](const Triple& a, const Triple& b) {
                       bool at = a.predicate == type;
                       bool bt = b.predicate == type;
                       if (at != bt) return at;
                       if (a.predicate != b.predicate) {
                         return a.predicate < b.predicate;
                       }
                       return key(a.object) < key(b.object);
                     });
    return props;
  }

  // Renders "p1 o1 ;\n<indent>p2 o2" for a subject at nesting `level`.
  std::string propertyList(const Term& subject, int level) {
    std::string out;
    bool first = true;
    const Term type = vocab::rdfType();
    for (const Triple& t : orderedProperties(subject)) {
      if (!first) out += " ;\n" + indent(level + 1);
      first = false;
      out += t.predicate == type ? std::string("a") : term(t.predicate);
      out += " ";
      out += objectText(t.object, level + 1);
    }
    return out;
  }

  std::string objectText(const Term& object, int level) {
    if (!object.isBlank()) return term(object);
    return blankBlock(object, level);
  }

  std::string blankBlock(const Term& node, int level) {
    if (graph_.match(node, std::nullopt, std::nullopt).empty()) return "[]";
    return "[\n" + indent(level + 1) + propertyList(node, level) + "\n" +
           indent(level) + "]";
  }

  const Graph& graph_;
  std::set<std::string> usedPrefixes_;
  std::map<Term, std::string> keys_;
};

}  // namespace

Graph parseTurtle(std::string_view text, const PrefixMap& base) {
  return TurtleParser(text, base).run();
}

std::string serializeTurtle(const Graph& graph) {
  return TurtleWriter(graph).run();
}

}  // namespace kava
