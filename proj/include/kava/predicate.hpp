#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "kava/dataset.hpp"

namespace kava {

enum class CompareOp { Greater, GreaterEqual, Less, LessEqual, Equal, NotEqual };

std::string_view compareOpSymbol(CompareOp op);

// Compares a cell with a constant. Missing cells and number/string
// mismatches never match, whatever the operator.
bool compareValues(const Value& cell, CompareOp op, const Value& constant);

// Immutable boolean expression over record variables:
//   Comparison([var] op constant) | And | Or | Not
class Predicate {
 public:
  enum class Kind { Comparison, And, Or, Not };

  static Predicate comparison(std::string variable, CompareOp op,
                              Value constant);
  static Predicate conjunction(Predicate lhs, Predicate rhs);
  static Predicate disjunction(Predicate lhs, Predicate rhs);
  static Predicate negation(Predicate operand);

  Kind kind() const { return node_->kind; }
  const std::string& variable() const { return node_->variable; }
  CompareOp op() const { return node_->op; }
  const Value& constant() const { return node_->constant; }
  std::vector<Predicate> children() const;

  std::set<std::string> variables() const;

  // Fully parenthesized canonical text that parsePredicate reads back.
  std::string toString() const;

  bool evaluate(const Dataset& dataset, std::size_t row) const;

  bool operator==(const Predicate& other) const;

 private:
  struct Node {
    Kind kind = Kind::Comparison;
    std::string variable;
    CompareOp op = CompareOp::Equal;
    Value constant;
    std::vector<std::shared_ptr<const Node>> children;
  };

  explicit Predicate(std::shared_ptr<const Node> node)
      : node_(std::move(node)) {}

  friend class BoundPredicate;

  std::shared_ptr<const Node> node_;
};

// A predicate resolved against one schema for repeated evaluation.
class BoundPredicate {
 public:
  // Throws UnknownVariable for variables missing from the schema.
  BoundPredicate(const Predicate& predicate, const Schema& schema);

  bool operator()(const Record& record) const;

 private:
  struct Op {
    Predicate::Kind kind = Predicate::Kind::Comparison;
    std::size_t column = 0;
    CompareOp compare = CompareOp::Equal;
    Value constant;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
  };

  std::size_t compile(const Predicate& p, const Schema& schema);
  bool eval(std::size_t index, const Record& record) const;

  std::vector<Op> ops_;
  std::size_t root_ = 0;
};

// Grammar: `[name]` variables, numeric or double-quoted constants,
// > >= < <= = !=, AND / OR / NOT (case-insensitive), parentheses.
// Precedence NOT > AND > OR. Errors carry the 1-based column.
Predicate parsePredicate(std::string_view text);

}  // namespace kava
