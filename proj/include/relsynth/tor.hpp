#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "relsynth/value.hpp"

// Theory of ordered relations: an algebra over ordered, duplicate-allowing
// sequences of records. Expressions are immutable, hash-consing-free trees
// shared through `Expr` handles; every node caches its schema or sort, its
// cost (node count) and its canonical s-expression.
namespace relsynth::tor {

enum class Op {
  // relation-valued
  Query, Empty, Sel, Proj, Join, Top, Append, Concat,
  // scalar / record-valued
  Agg, Get, Size, IntLit, TextLit, Param, Index, Add,
  // predicates
  Field, True, And, Or, Not, Cmp
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class AggKind { Sum, Count, Min, Max };
enum class Sort { Relation, Record, Int, OptInt, Text, Bool };

const char* spelling(CmpOp op);
const char* spelling(AggKind k);
std::optional<CmpOp> parse_cmp(std::string_view s);
std::optional<AggKind> parse_agg(std::string_view s);

class TorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnboundName : public TorError {
 public:
  using TorError::TorError;
};
class SchemaError : public TorError {
 public:
  using TorError::TorError;
};
class IndexError : public TorError {
 public:
  using TorError::TorError;
};

class Node;
using Expr = std::shared_ptr<const Node>;

struct CompiledPred;

class Node {
 public:
  Op op() const { return op_; }
  Sort sort() const { return sort_; }
  const std::vector<Expr>& kids() const { return kids_; }
  const Expr& kid(std::size_t i) const { return kids_[i]; }
  // Relation-valued and record-valued nodes only.
  const SchemaRef& schema() const { return schema_; }
  // Query relation, Param or Index name.
  const std::string& name() const { return name_; }
  std::int64_t int_value() const { return int_value_; }
  const std::string& text_value() const { return name_; }
  CmpOp cmp() const { return cmp_; }
  AggKind agg() const { return agg_; }
  // Field reference (Field, Agg over a column).
  const Column& column() const { return column_; }
  bool has_column() const { return has_column_; }
  // Proj column list.
  const std::vector<Column>& columns() const { return columns_; }

  std::size_t cost() const { return cost_; }
  int depth() const { return depth_; }
  const std::string& text() const { return text_; }

  const CompiledPred* compiled() const { return compiled_.get(); }

 private:
  friend struct Builder;
  Op op_ = Op::True;
  Sort sort_ = Sort::Bool;
  std::vector<Expr> kids_;
  SchemaRef schema_;
  std::string name_;
  std::int64_t int_value_ = 0;
  CmpOp cmp_ = CmpOp::Eq;
  AggKind agg_ = AggKind::Sum;
  Column column_;
  bool has_column_ = false;
  std::vector<Column> columns_;
  std::size_t cost_ = 1;
  int depth_ = 1;
  std::string text_;
  std::shared_ptr<const CompiledPred> compiled_;
};

bool equal(const Expr& a, const Expr& b);
bool is_relation(const Expr& e);
bool is_pred(const Expr& e);

// Builders. Each validates composition rules and throws SchemaError.
Expr query(const std::string& relation, const Schema& schema);
Expr empty(SchemaRef schema);
Expr sel(Expr pred, Expr e);
Expr proj(std::vector<Column> columns, Expr e);
Expr join(Expr left, Expr right, Expr pred);
Expr top(Expr e, Expr k);
Expr append(Expr e, Expr record);
Expr concat(Expr left, Expr right);
Expr agg(AggKind kind, std::optional<Column> column, Expr e);
Expr get(Expr e, Expr idx);
Expr size(Expr e);
Expr int_lit(std::int64_t v);
Expr text_lit(std::string v);
Expr param(std::string name, FieldType type);
Expr index(std::string name);
Expr add(Expr a, Expr b);
Expr field(Column c);
Expr truth();
Expr conj(std::vector<Expr> parts);  // flattens; single part returned as is
Expr disj(std::vector<Expr> parts);
Expr negate(Expr p);
Expr cmp(CmpOp op, Expr lhs, Expr rhs);

// Free names of an expression.
struct FreeNames {
  std::set<std::string> relations;
  std::set<std::string> params;
  std::set<std::string> indices;
};
FreeNames free_names(const Expr& e);

// Evaluation environment. Relations are bound by pointer and must outlive
// every evaluation that uses the environment.
class Env {
 public:
  Env& bind_relation(const std::string& name, const Relation* rel);
  Env& bind_scalar(const std::string& name, Scalar v);
  Env& bind_index(const std::string& name, std::int64_t v);

  const Relation& relation(const std::string& name) const;
  const Scalar& scalar(const std::string& name) const;
  std::int64_t index(const std::string& name) const;

 private:
  std::vector<std::pair<std::string, const Relation*>> relations_;
  std::vector<std::pair<std::string, Scalar>> scalars_;
  std::vector<std::pair<std::string, std::int64_t>> indices_;
};

Relation eval_rel(const Expr& e, const Env& env);
// Int (sum, count, Size, arithmetic), OptInt (min, max), Text, or Record (Get).
Value eval_scalar(const Expr& e, const Env& env);
// Relation-valued expressions yield Relation, everything else as eval_scalar.
Value eval(const Expr& e, const Env& env);

// Normalizes an expression with the oriented rewrite rules; evaluates
// identically to the input in every environment.
Expr simplify(const Expr& e);

// Names visible to the s-expression reader.
struct Vocabulary {
  std::map<std::string, Schema> relations;  // unqualified schemas
  std::map<std::string, FieldType> params;
  std::set<std::string> indices;
};

class ReadError : public TorError {
 public:
  using TorError::TorError;
};

// Reads the canonical textual form back into an expression.
Expr read(std::string_view text, const Vocabulary& vocab);

}  // namespace relsynth::tor
