#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace kava {

class Predicate;

// A cell: missing, number or string.
using Value = std::variant<std::monostate, double, std::string>;

inline bool isMissing(const Value& v) {
  return std::holds_alternative<std::monostate>(v);
}

// Shortest round-trip spelling; integral values print without a fraction.
std::string formatNumber(double value);
std::string formatValue(const Value& value);
// Strict full-string number parse.
std::optional<double> parseNumber(std::string_view text);

enum class VariableKind { Number, String };

struct Variable {
  std::string name;
  VariableKind kind = VariableKind::Number;

  bool operator==(const Variable&) const = default;
};

class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Variable> variables,
         std::vector<std::string> identifyingVariables);

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<std::string>& identifyingVariables() const noexcept {
    return identifying_;
  }
  std::optional<std::size_t> indexOf(std::string_view name) const;
  bool isIdentifying(std::string_view name) const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<Variable> variables_;
  std::vector<std::string> identifying_;
};

// Values aligned with the schema's variable order.
struct Record {
  std::vector<Value> values;

  bool operator==(const Record&) const = default;
};

struct Sample {
  double t = 0;
  double v = 0;

  bool operator==(const Sample&) const = default;
};

struct TimeSeries {
  std::string label;
  std::vector<Sample> samples;

  bool operator==(const TimeSeries&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(Schema schema) : schema_(std::move(schema)) {}

  const Schema& schema() const noexcept { return schema_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  // Checks arity and identifier uniqueness.
  void append(Record record);

  const Value& value(std::size_t row, std::string_view variable) const;

  // Identifying values joined by '|', or "#<row>" without identifying
  // variables.
  std::string recordId(std::size_t row) const;

  std::map<std::string, TimeSeries>& series() noexcept { return series_; }
  const std::map<std::string, TimeSeries>& series() const noexcept {
    return series_;
  }

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<Record> records_;
  std::map<std::string, std::size_t> idIndex_;
  std::map<std::string, TimeSeries> series_;
};

// RFC 4180 style rows; quoted cells may contain commas and doubled quotes.
std::vector<std::vector<std::string>> readCsvRows(std::string_view text);

// Header must name exactly the schema's variables (any order).
Dataset loadCsv(std::string_view text, const Schema& schema);

// Columns whose non-empty cells all parse as numbers become Number.
// Identifying variables default to the first column.
Schema inferSchema(std::string_view text,
                   std::vector<std::string> identifying = {});

std::string writeCsv(const Dataset& dataset);

// Header "t,<label>"; t strictly increasing.
TimeSeries loadTimeSeries(std::string_view text);
std::string writeTimeSeries(const TimeSeries& series);

Dataset filterRecords(const Dataset& dataset, const Predicate& predicate);

}  // namespace kava
