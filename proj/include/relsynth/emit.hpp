#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "relsynth/tor.hpp"
#include "relsynth/value.hpp"

// Single-SELECT SQL: the image of translatable relational expressions, a
// renderer, a reader for the rendered text and a small in-memory engine.
namespace relsynth::emit {

struct ColumnRef {
  std::string table;
  std::string column;
  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

enum class AggFn { Sum, Count, Min, Max };

struct SelectItem {
  enum class Kind { Star, Column, Aggregate };
  Kind kind = Kind::Star;
  ColumnRef ref;  // Star: ref.table only; Count: unused
  AggFn fn = AggFn::Count;
  bool coalesce_zero = false;  // COALESCE(SUM(x), 0)
  friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct Operand {
  enum class Kind { Column, Int, Text, Param };
  Kind kind = Kind::Int;
  ColumnRef ref;
  std::int64_t int_value = 0;
  std::string text;  // Text contents or Param name
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct Condition {
  enum class Kind { True, And, Or, Not, Cmp };
  Kind kind = Kind::True;
  tor::CmpOp op = tor::CmpOp::Eq;
  Operand lhs, rhs;
  std::vector<Condition> kids;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct Limit {
  std::optional<std::int64_t> value;
  std::string param;  // used when value is empty
  friend bool operator==(const Limit&, const Limit&) = default;
};

struct SqlQuery {
  std::vector<SelectItem> select;
  std::vector<std::string> from;
  std::optional<Condition> where;
  std::vector<ColumnRef> order_by;
  std::optional<Limit> limit;

  bool is_aggregate() const {
    return select.size() == 1 && select[0].kind == SelectItem::Kind::Aggregate;
  }
  friend bool operator==(const SqlQuery&, const SqlQuery&) = default;
};

struct NotTranslatable {
  std::string reason;
};

std::variant<SqlQuery, NotTranslatable> to_sql(const tor::Expr& e);

// Deterministic text: single spaces, upper-case keywords.
std::string render(const SqlQuery& q);

class SqlError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnknownTable : public SqlError {
 public:
  using SqlError::SqlError;
};
class UnknownColumn : public SqlError {
 public:
  using SqlError::SqlError;
};

// Reads text in the rendered fragment back into a query.
SqlQuery parse_sql(std::string_view text);

// Tables keyed by name. Every table has a hidden `rid` column equal to the
// row position.
class MiniDb {
 public:
  void add_table(const std::string& name, Relation rel);
  const Relation* table(const std::string& name) const;
  const std::map<std::string, Relation>& tables() const { return tables_; }

  // Relation-valued entries of the shared binding format.
  static MiniDb from_json(const nlohmann::json& doc);
  // Relation-valued entries of an input map.
  static MiniDb from_values(const std::map<std::string, Value>& inputs);

 private:
  std::map<std::string, Relation> tables_;
};

using Params = std::map<std::string, Scalar>;

// Scalar-valued entries of the shared binding format or an input map.
Params params_from_json(const nlohmann::json& doc);
Params params_from_values(const std::map<std::string, Value>& inputs);

// Relation for SELECT lists, int for COUNT and COALESCE(SUM), OptInt for
// MIN/MAX (absent = NULL).
Value eval_sql(const SqlQuery& q, const MiniDb& db, const Params& params = {});

}  // namespace relsynth::emit
