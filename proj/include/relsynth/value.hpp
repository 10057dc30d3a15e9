#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace relsynth {

enum class FieldType { Int, Text };

std::string to_string(FieldType t);

// A column of a record shape. Kernel-level schemas leave `qualifier` empty;
// relational expressions qualify columns with the relation they came from so
// that join outputs stay unambiguous (R.k vs S.k).
struct Column {
  std::string qualifier;
  std::string name;
  FieldType type = FieldType::Int;

  std::string qualified_name() const {
    return qualifier.empty() ? name : qualifier + "." + name;
  }
  friend bool operator==(const Column&, const Column&) = default;
};

using Schema = std::vector<Column>;
using SchemaRef = std::shared_ptr<const Schema>;

SchemaRef make_schema(Schema s);
// Same columns, every qualifier replaced.
SchemaRef qualify(const Schema& s, const std::string& qualifier);
bool same_types(const Schema& a, const Schema& b);
std::string to_string(const Schema& s);

using Scalar = std::variant<std::int64_t, std::string>;
using Row = std::vector<Scalar>;
using OptInt = std::optional<std::int64_t>;

FieldType type_of(const Scalar& s);
std::string to_string(const Scalar& s);

// An ordered, duplicate-allowing sequence of rows. The ordinal of a row is
// its position. Equality is order-sensitive and ignores column labels.
struct Relation {
  SchemaRef schema;
  std::vector<Row> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  friend bool operator==(const Relation& a, const Relation& b) { return a.rows == b.rows; }
};

struct Record {
  SchemaRef schema;
  Row fields;
  friend bool operator==(const Record& a, const Record& b) { return a.fields == b.fields; }
};

// Int, Text, Record, Rel, OptInt. Booleans are carried as Int 0/1 by the
// interpreter; they never escape into bindings or results.
using Value = std::variant<std::int64_t, std::string, Record, Relation, OptInt>;

std::string to_string(const Value& v);
std::ostream& operator<<(std::ostream& os, const Value& v);

bool conforms(const Row& row, const Schema& schema);

}  // namespace relsynth
