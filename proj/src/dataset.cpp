#include "kava/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "kava/error.hpp"
#include "kava/predicate.hpp"

namespace kava {

std::string formatNumber(double value) {
  if (value == 0.0) return "0";
  if (std::isfinite(value) && std::nearbyint(value) == value &&
      std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string formatValue(const Value& value) {
  if (const double* d = std::get_if<double>(&value)) return formatNumber(*d);
  if (const std::string* s = std::get_if<std::string>(&value)) return *s;
  return {};
}

std::optional<double> parseNumber(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  if (text.empty() || std::isspace(static_cast<unsigned char>(text.front()))) {
    return std::nullopt;
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

// ---------------------------------------------------------------------------

Schema::Schema(std::vector<Variable> variables,
               std::vector<std::string> identifyingVariables)
    : variables_(std::move(variables)),
      identifying_(std::move(identifyingVariables)) {
  std::set<std::string> names;
  for (const Variable& v : variables_) {
    if (v.name.empty()) {
      throw Error(ErrorCode::InvalidArgument, "empty variable name");
    }
    if (!names.insert(v.name).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate variable '" + v.name + "'");
    }
  }
  for (const std::string& id : identifying_) {
    if (!names.contains(id)) {
      throw Error(ErrorCode::UnknownVariable,
                  "identifying variable '" + id + "' is not in the schema");
    }
  }
}

std::optional<std::size_t> Schema::indexOf(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

bool Schema::isIdentifying(std::string_view name) const {
  return std::find(identifying_.begin(), identifying_.end(), name) !=
         identifying_.end();
}

void Dataset::append(Record record) {
  if (record.values.size() != schema_.variables().size()) {
    throw Error(ErrorCode::TypeError, "record arity does not match schema");
  }
  for (std::size_t i = 0; i < record.values.size(); ++i) {
    const Value& v = record.values[i];
    const Variable& var = schema_.variables()[i];
    bool ok = isMissing(v) ||
              (var.kind == VariableKind::Number
                   ? std::holds_alternative<double>(v)
                   : std::holds_alternative<std::string>(v));
    if (!ok) {
      throw Error(ErrorCode::TypeError,
                  "value of wrong kind for variable '" + var.name + "'");
    }
    if (isMissing(v) && schema_.isIdentifying(var.name)) {
      throw Error(ErrorCode::TypeError,
                  "missing identifying value for '" + var.name + "'");
    }
  }
  records_.push_back(std::move(record));
  std::string id = recordId(records_.size() - 1);
  if (!idIndex_.emplace(id, records_.size() - 1).second) {
    records_.pop_back();
    throw Error(ErrorCode::DuplicateIdentifier, id);
  }
}

const Value& Dataset::value(std::size_t row, std::string_view variable) const {
  auto index = schema_.indexOf(variable);
  if (!index) throw Error(ErrorCode::UnknownVariable, std::string(variable));
  return records_.at(row).values[*index];
}

std::string Dataset::recordId(std::size_t row) const {
  const auto& ids = schema_.identifyingVariables();
  if (ids.empty()) return "#" + std::to_string(row);
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += '|';
    out += formatValue(value(row, ids[i]));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> readCsvRows(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool rowHasContent = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        cell += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cell.empty()) {
          throw SyntaxError(line, 1, "quote inside unquoted cell");
        }
        quoted = true;
        rowHasContent = true;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        rowHasContent = true;
        break;
      case '\r':
        break;
      case '\n':
        if (rowHasContent || !cell.empty()) {
          row.push_back(std::move(cell));
          rows.push_back(std::move(row));
        }
        row.clear();
        cell.clear();
        rowHasContent = false;
        ++line;
        break;
      default:
        cell += c;
        rowHasContent = true;
    }
  }
  if (quoted) throw SyntaxError(line, 1, "unterminated quoted cell");
  if (rowHasContent || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Dataset loadCsv(std::string_view text, const Schema& schema) {
  auto rows = readCsvRows(text);
  if (rows.empty()) {
    throw Error(ErrorCode::HeaderMismatch, "missing header row");
  }
  const auto& header = rows.front();
  std::vector<std::size_t> columnToVar;
  std::set<std::string> seen;
  for (const std::string& name : header) {
    auto index = schema.indexOf(name);
    if (!index || !seen.insert(name).second) {
      throw Error(ErrorCode::HeaderMismatch,
                  "unexpected or repeated column '" + name + "'");
    }
    columnToVar.push_back(*index);
  }
  if (seen.size() != schema.variables().size()) {
    throw Error(ErrorCode::HeaderMismatch,
                "header does not name every schema variable");
  }

  Dataset dataset(schema);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    if (cells.size() != header.size()) {
      throw SyntaxError(r + 1, cells.size() + 1,
                        "expected " + std::to_string(header.size()) + " cells",
                        ErrorCode::TypeError);
    }
    Record record;
    record.values.resize(header.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const Variable& var = schema.variables()[columnToVar[c]];
      Value& slot = record.values[columnToVar[c]];
      if (cells[c].empty()) {
        if (schema.isIdentifying(var.name)) {
          throw SyntaxError(r + 1, c + 1,
                            "missing identifying value for '" + var.name + "'",
                            ErrorCode::TypeError);
        }
        continue;
      }
      if (var.kind == VariableKind::Number) {
        auto number = parseNumber(cells[c]);
        if (!number) {
          throw SyntaxError(r + 1, c + 1,
                            "'" + cells[c] + "' is not a number for '" +
                                var.name + "'",
                            ErrorCode::TypeError);
        }
        slot = *number;
      } else {
        slot = cells[c];
      }
    }
    dataset.append(std::move(record));
  }
  return dataset;
}

Schema inferSchema(std::string_view text, std::vector<std::string> identifying) {
  auto rows = readCsvRows(text);
  if (rows.empty()) {
    throw Error(ErrorCode::HeaderMismatch, "missing header row");
  }
  std::vector<Variable> vars;
  for (std::size_t c = 0; c < rows.front().size(); ++c) {
    bool numeric = true;
    for (std::size_t r = 1; r < rows.size() && numeric; ++r) {
      if (c < rows[r].size() && !rows[r][c].empty() &&
          !parseNumber(rows[r][c])) {
        numeric = false;
      }
    }
    vars.push_back({rows.front()[c],
                    numeric ? VariableKind::Number : VariableKind::String});
  }
  if (identifying.empty() && !vars.empty()) {
    identifying.push_back(vars.front().name);
  }
  return Schema(std::move(vars), std::move(identifying));
}

namespace {

std::string csvCell(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return formatNumber(*d);
  if (const std::string* s = std::get_if<std::string>(&v)) {
    bool needsQuotes =
        s->find_first_of(",\"\r\n") != std::string::npos ||
        (!s->empty() && (std::isspace(static_cast<unsigned char>(s->front())) ||
                         std::isspace(static_cast<unsigned char>(s->back()))));
    if (!needsQuotes) return *s;
    std::string out = "\"";
    for (char c : *s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }
  return {};
}

}  // namespace

std::string writeCsv(const Dataset& dataset) {
  std::string out;
  const auto& vars = dataset.schema().variables();
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) out += ',';
    out += vars[i].name;
  }
  out += '\n';
  for (const Record& record : dataset.records()) {
    for (std::size_t i = 0; i < record.values.size(); ++i) {
      if (i) out += ',';
      out += csvCell(record.values[i]);
    }
    out += '\n';
  }
  return out;
}

TimeSeries loadTimeSeries(std::string_view text) {
  auto rows = readCsvRows(text);
  if (rows.empty() || rows.front().size() != 2 || rows.front()[0] != "t") {
    throw Error(ErrorCode::HeaderMismatch,
                "time series header must be 't,<channel>'");
  }
  TimeSeries series;
  series.label = rows.front()[1];
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) {
      throw SyntaxError(r + 1, 1, "expected 2 cells", ErrorCode::TypeError);
    }
    auto t = parseNumber(rows[r][0]);
    auto v = parseNumber(rows[r][1]);
    if (!t) throw SyntaxError(r + 1, 1, "t is not a number", ErrorCode::TypeError);
    if (!v) throw SyntaxError(r + 1, 2, "value is not a number", ErrorCode::TypeError);
    if (!series.samples.empty() && *t <= series.samples.back().t) {
      throw SyntaxError(r + 1, 1, "t must be strictly increasing",
                        ErrorCode::NonIncreasingTime);
    }
    series.samples.push_back({*t, *v});
  }
  return series;
}

std::string writeTimeSeries(const TimeSeries& series) {
  std::string out = "t," + series.label + "\n";
  for (const Sample& s : series.samples) {
    out += formatNumber(s.t) + "," + formatNumber(s.v) + "\n";
  }
  return out;
}

Dataset filterRecords(const Dataset& dataset, const Predicate& predicate) {
  BoundPredicate bound(predicate, dataset.schema());
  Dataset out(dataset.schema());
  for (std::size_t row = 0; row < dataset.size(); ++row) {
    if (!bound(dataset.records()[row])) continue;
    out.append(dataset.records()[row]);
    auto it = dataset.series().find(dataset.recordId(row));
    if (it != dataset.series().end()) out.series().insert(*it);
  }
  return out;
}

}  // namespace kava
