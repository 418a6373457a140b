#include "kava/predicate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "kava/error.hpp"

namespace kava {

std::string_view compareOpSymbol(CompareOp op) {
  switch (op) {
    case CompareOp::Greater: return ">";
    case CompareOp::GreaterEqual: return ">=";
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Equal: return "=";
    case CompareOp::NotEqual: return "!=";
  }
  return "?";
}

namespace {

template <typename T>
bool applyOp(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::Greater: return a > b;
    case CompareOp::GreaterEqual: return a >= b;
    case CompareOp::Less: return a < b;
    case CompareOp::LessEqual: return a <= b;
    case CompareOp::Equal: return a == b;
    case CompareOp::NotEqual: return a != b;
  }
  return false;
}

}  // namespace

bool compareValues(const Value& cell, CompareOp op, const Value& constant) {
  if (const double* a = std::get_if<double>(&cell)) {
    const double* b = std::get_if<double>(&constant);
    return b && applyOp(*a, op, *b);
  }
  if (const std::string* a = std::get_if<std::string>(&cell)) {
    const std::string* b = std::get_if<std::string>(&constant);
    return b && applyOp(*a, op, *b);
  }
  return false;
}

Predicate Predicate::comparison(std::string variable, CompareOp op,
                                Value constant) {
  if (variable.empty()) {
    throw Error(ErrorCode::InvalidArgument, "comparison without variable");
  }
  if (isMissing(constant)) {
    throw Error(ErrorCode::InvalidArgument, "comparison without constant");
  }
  auto node = std::make_shared<Node>();
  node->kind = Kind::Comparison;
  node->variable = std::move(variable);
  node->op = op;
  node->constant = std::move(constant);
  return Predicate(std::move(node));
}

Predicate Predicate::conjunction(Predicate lhs, Predicate rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::And;
  node->children = {std::move(lhs.node_), std::move(rhs.node_)};
  return Predicate(std::move(node));
}

Predicate Predicate::disjunction(Predicate lhs, Predicate rhs) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Or;
  node->children = {std::move(lhs.node_), std::move(rhs.node_)};
  return Predicate(std::move(node));
}

Predicate Predicate::negation(Predicate operand) {
  auto node = std::make_shared<Node>();
  node->kind = Kind::Not;
  node->children = {std::move(operand.node_)};
  return Predicate(std::move(node));
}

std::vector<Predicate> Predicate::children() const {
  std::vector<Predicate> out;
  for (const auto& c : node_->children) out.push_back(Predicate(c));
  return out;
}

std::set<std::string> Predicate::variables() const {
  if (kind() == Kind::Comparison) return {variable()};
  std::set<std::string> out;
  for (const Predicate& c : children()) {
    auto vs = c.variables();
    out.insert(vs.begin(), vs.end());
  }
  return out;
}

namespace {

std::string constantText(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), *d);
    return std::string(buf, end);
  }
  std::string out = "\"";
  for (char c : std::get<std::string>(v)) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Predicate::toString() const {
  switch (kind()) {
    case Kind::Comparison:
      return "[" + variable() + "] " + std::string(compareOpSymbol(op())) +
             " " + constantText(constant());
    case Kind::And:
      return "(" + children()[0].toString() + " AND " +
             children()[1].toString() + ")";
    case Kind::Or:
      return "(" + children()[0].toString() + " OR " +
             children()[1].toString() + ")";
    case Kind::Not:
      return "NOT (" + children()[0].toString() + ")";
  }
  return {};
}

bool Predicate::evaluate(const Dataset& dataset, std::size_t row) const {
  switch (kind()) {
    case Kind::Comparison:
      return compareValues(dataset.value(row, variable()), op(), constant());
    case Kind::And:
      return children()[0].evaluate(dataset, row) &&
             children()[1].evaluate(dataset, row);
    case Kind::Or:
      return children()[0].evaluate(dataset, row) ||
             children()[1].evaluate(dataset, row);
    case Kind::Not:
      return !children()[0].evaluate(dataset, row);
  }
  return false;
}

bool Predicate::operator==(const Predicate& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  if (kind() == Kind::Comparison) {
    return variable() == other.variable() && op() == other.op() &&
           constant() == other.constant();
  }
  return children() == other.children();
}

// ---------------------------------------------------------------------------

BoundPredicate::BoundPredicate(const Predicate& predicate,
                               const Schema& schema) {
  root_ = compile(predicate, schema);
}

std::size_t BoundPredicate::compile(const Predicate& p, const Schema& schema) {
  Op op;
  op.kind = p.kind();
  if (p.kind() == Predicate::Kind::Comparison) {
    auto column = schema.indexOf(p.variable());
    if (!column) throw Error(ErrorCode::UnknownVariable, p.variable());
    op.column = *column;
    op.compare = p.op();
    op.constant = p.constant();
  } else {
    auto children = p.children();
    op.lhs = compile(children[0], schema);
    if (children.size() > 1) op.rhs = compile(children[1], schema);
  }
  ops_.push_back(std::move(op));
  return ops_.size() - 1;
}

bool BoundPredicate::operator()(const Record& record) const {
  return eval(root_, record);
}

bool BoundPredicate::eval(std::size_t index, const Record& record) const {
  const Op& op = ops_[index];
  switch (op.kind) {
    case Predicate::Kind::Comparison:
      return compareValues(record.values[op.column], op.compare, op.constant);
    case Predicate::Kind::And:
      return eval(op.lhs, record) && eval(op.rhs, record);
    case Predicate::Kind::Or:
      return eval(op.lhs, record) || eval(op.rhs, record);
    case Predicate::Kind::Not:
      return !eval(op.lhs, record);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class PredicateParser {
 public:
  explicit PredicateParser(std::string_view text) : text_(text) {}

  Predicate run() {
    skipSpace();
    if (atEnd()) fail("empty predicate");
    Predicate p = orExpr();
    skipSpace();
    if (!atEnd()) fail("unexpected trailing input");
    return p;
  }

 private:
  bool atEnd() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw SyntaxError(1, pos_ + 1, message, ErrorCode::PredicateSyntaxError);
  }

  void skipSpace() {
    while (!atEnd() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  bool keyword(std::string_view word) {
    skipSpace();
    if (pos_ + word.size() > text_.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != word[i]) {
        return false;
      }
    }
    char next = peek(word.size());
    if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') {
      return false;
    }
    pos_ += word.size();
    return true;
  }

  Predicate orExpr() {
    Predicate lhs = andExpr();
    while (keyword("OR")) lhs = Predicate::disjunction(lhs, andExpr());
    return lhs;
  }

  Predicate andExpr() {
    Predicate lhs = notExpr();
    while (keyword("AND")) lhs = Predicate::conjunction(lhs, notExpr());
    return lhs;
  }

  Predicate notExpr() {
    if (keyword("NOT")) return Predicate::negation(notExpr());
    return primary();
  }

  Predicate primary() {
    skipSpace();
    if (peek() == '(') {
      ++pos_;
      Predicate inner = orExpr();
      skipSpace();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if (peek() == '[') return comparison();
    if (atEnd()) fail("unexpected end of predicate");
    fail(std::string("expected '[variable]', '(' or NOT, found '") + peek() +
         "'");
  }

  Predicate comparison() {
    ++pos_;  // '['
    std::size_t start = pos_;
    while (!atEnd() && peek() != ']') ++pos_;
    if (atEnd()) {
      pos_ = start - 1;
      fail("unterminated variable reference");
    }
    std::string name(text_.substr(start, pos_ - start));
    auto notSpace = [](unsigned char c) { return !std::isspace(c); };
    name.erase(name.begin(), std::find_if(name.begin(), name.end(), notSpace));
    name.erase(std::find_if(name.rbegin(), name.rend(), notSpace).base(),
               name.end());
    if (name.empty()) {
      pos_ = start - 1;
      fail("empty variable name");
    }
    ++pos_;  // ']'
    CompareOp op = compareOp();
    Value constant = constantValue();
    return Predicate::comparison(std::move(name), op, std::move(constant));
  }

  CompareOp compareOp() {
    skipSpace();
    char c = peek();
    char d = peek(1);
    if (c == '>' && d == '=') { pos_ += 2; return CompareOp::GreaterEqual; }
    if (c == '<' && d == '=') { pos_ += 2; return CompareOp::LessEqual; }
    if (c == '!' && d == '=') { pos_ += 2; return CompareOp::NotEqual; }
    if (c == '>') { ++pos_; return CompareOp::Greater; }
    if (c == '<') { ++pos_; return CompareOp::Less; }
    if (c == '=') { ++pos_; return CompareOp::Equal; }
    fail("expected comparison operator");
  }

  Value constantValue() {
    skipSpace();
    if (peek() == '"') {
      std::size_t start = pos_;
      ++pos_;
      std::string out;
      while (true) {
        if (atEnd()) {
          pos_ = start;
          fail("unterminated string constant");
        }
        char c = peek();
        if (c == '"') break;
        if (c == '\\') {
          ++pos_;
          if (peek() != '"' && peek() != '\\') fail("unsupported escape");
          c = peek();
        }
        out += c;
        ++pos_;
      }
      ++pos_;
      return out;
    }
    std::size_t start = pos_;
    while (!atEnd() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
            peek() == '+' || peek() == '-')) {
      ++pos_;
    }
    auto number = parseNumber(text_.substr(start, pos_ - start));
    if (!number) {
      pos_ = start;
      fail("expected numeric or quoted constant");
    }
    return *number;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Predicate parsePredicate(std::string_view text) {
  return PredicateParser(text).run();
}

}  // namespace kava
