#include <algorithm>

#include "internal.hpp"

namespace relsynth::tor {

Env& Env::bind_relation(const std::string& name, const Relation* rel) {
  relations_.emplace_back(name, rel);
  return *this;
}

Env& Env::bind_scalar(const std::string& name, Scalar v) {
  scalars_.emplace_back(name, std::move(v));
  return *this;
}

Env& Env::bind_index(const std::string& name, std::int64_t v) {
  indices_.emplace_back(name, v);
  return *this;
}

const Relation& Env::relation(const std::string& name) const {
  for (const auto& [n, r] : relations_)
    if (n == name) return *r;
  throw UnboundName("unbound relation '" + name + "'");
}

const Scalar& Env::scalar(const std::string& name) const {
  for (const auto& [n, v] : scalars_)
    if (n == name) return v;
  throw UnboundName("unbound parameter '" + name + "'");
}

std::int64_t Env::index(const std::string& name) const {
  for (const auto& [n, v] : indices_)
    if (n == name) return v;
  throw UnboundName("unbound index '" + name + "'");
}

namespace {

int column_of(const Schema& schema, const Column& c) {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].qualifier == c.qualifier && schema[i].name == c.name) return static_cast<int>(i);
  throw SchemaError("column " + c.qualified_name() + " not in " + to_string(schema));
}

std::int64_t eval_int(const Expr& e, const Env& env) {
  Value v = eval_scalar(e, env);
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw SchemaError("expected an int value from " + e->text());
}

Scalar to_scalar(const Value& v, const Expr& e) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (auto* s = std::get_if<std::string>(&v)) return *s;
  throw SchemaError("expected a scalar value from " + e->text());
}

bool compare(CmpOp op, const Scalar& a, const Scalar& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

class PredEval {
 public:
  PredEval(const CompiledPred& cp, const Env& env) : root_(cp.root) {
    externals_.reserve(cp.externals.size());
    for (const auto& e : cp.externals) externals_.push_back(to_scalar(eval_scalar(e, env), e));
  }

  bool operator()(const Row& row) const { return test(root_, row); }

 private:
  const Scalar& operand(const PredOperand& o, const Row& row) const {
    switch (o.kind) {
      case PredOperand::Kind::Column: return row[static_cast<std::size_t>(o.column)];
      case PredOperand::Kind::Constant: return o.constant;
      case PredOperand::Kind::External: return externals_[static_cast<std::size_t>(o.external)];
    }
    return o.constant;
  }

  bool test(const PredNode& n, const Row& row) const {
    switch (n.op) {
      case Op::True: return true;
      case Op::And:
        for (const auto& k : n.kids)
          if (!test(k, row)) return false;
        return true;
      case Op::Or:
        for (const auto& k : n.kids)
          if (test(k, row)) return true;
        return false;
      case Op::Not: return !test(n.kids[0], row);
      case Op::Cmp: return compare(n.cmp, operand(n.lhs, row), operand(n.rhs, row));
      default: return false;
    }
  }

  const PredNode& root_;
  std::vector<Scalar> externals_;
};

}  // namespace

Relation eval_rel(const Expr& e, const Env& env) {
  switch (e->op()) {
    case Op::Query: {
      const Relation& r = env.relation(e->name());
      const std::size_t arity = e->schema()->size();
      for (const auto& row : r.rows)
        if (row.size() != arity)
          throw SchemaError("relation '" + e->name() + "' does not match " + to_string(*e->schema()));
      return Relation{e->schema(), r.rows};
    }
    case Op::Empty:
      return Relation{e->schema(), {}};
    case Op::Sel: {
      Relation in = eval_rel(e->kid(1), env);
      PredEval keep(*e->compiled(), env);
      Relation out{e->schema(), {}};
      for (auto& row : in.rows)
        if (keep(row)) out.rows.push_back(std::move(row));
      return out;
    }
    case Op::Proj: {
      Relation in = eval_rel(e->kid(0), env);
      std::vector<std::size_t> pos;
      for (const auto& c : e->columns())
        pos.push_back(static_cast<std::size_t>(column_of(*e->kid(0)->schema(), c)));
      Relation out{e->schema(), {}};
      out.rows.reserve(in.rows.size());
      for (const auto& row : in.rows) {
        Row r;
        r.reserve(pos.size());
        for (auto p : pos) r.push_back(row[p]);
        out.rows.push_back(std::move(r));
      }
      return out;
    }
    case Op::Join: {
      Relation l = eval_rel(e->kid(0), env);
      Relation r = eval_rel(e->kid(1), env);
      PredEval keep(*e->compiled(), env);
      Relation out{e->schema(), {}};
      // Left-major: the left ordinal varies slowest.
      for (const auto& lr : l.rows) {
        for (const auto& rr : r.rows) {
          Row row = lr;
          row.insert(row.end(), rr.begin(), rr.end());
          if (keep(row)) out.rows.push_back(std::move(row));
        }
      }
      return out;
    }
    case Op::Top: {
      Relation in = eval_rel(e->kid(0), env);
      std::int64_t k = eval_int(e->kid(1), env);
      std::size_t n = k <= 0 ? 0 : std::min<std::size_t>(static_cast<std::size_t>(k), in.rows.size());
      in.rows.resize(n);
      in.schema = e->schema();
      return in;
    }
    case Op::Append: {
      Relation in = eval_rel(e->kid(0), env);
      Value rec = eval_scalar(e->kid(1), env);
      in.rows.push_back(std::get<Record>(std::move(rec)).fields);
      in.schema = e->schema();
      return in;
    }
    case Op::Concat: {
      Relation l = eval_rel(e->kid(0), env);
      Relation r = eval_rel(e->kid(1), env);
      l.rows.insert(l.rows.end(), std::make_move_iterator(r.rows.begin()),
                    std::make_move_iterator(r.rows.end()));
      l.schema = e->schema();
      return l;
    }
    default:
      throw SchemaError("not a relation-valued expression: " + e->text());
  }
}

Value eval_scalar(const Expr& e, const Env& env) {
  switch (e->op()) {
    case Op::Agg: {
      Relation in = eval_rel(e->kid(0), env);
      if (e->agg() == AggKind::Count) return static_cast<std::int64_t>(in.rows.size());
      std::size_t c = static_cast<std::size_t>(column_of(*e->kid(0)->schema(), e->column()));
      if (e->agg() == AggKind::Sum) {
        std::int64_t sum = 0;
        for (const auto& row : in.rows) sum += std::get<std::int64_t>(row[c]);
        return sum;
      }
      OptInt best;
      for (const auto& row : in.rows) {
        std::int64_t x = std::get<std::int64_t>(row[c]);
        if (!best || (e->agg() == AggKind::Min ? x < *best : x > *best)) best = x;
      }
      return best;
    }
    case Op::Size:
      return static_cast<std::int64_t>(eval_rel(e->kid(0), env).rows.size());
    case Op::Get: {
      Relation in = eval_rel(e->kid(0), env);
      std::int64_t i = eval_int(e->kid(1), env);
      if (i < 0 || static_cast<std::size_t>(i) >= in.rows.size())
        throw IndexError("get index " + std::to_string(i) + " out of bounds for size " +
                         std::to_string(in.rows.size()));
      return Record{e->schema(), std::move(in.rows[static_cast<std::size_t>(i)])};
    }
    case Op::IntLit:
      return e->int_value();
    case Op::TextLit:
      return e->text_value();
    case Op::Param: {
      const Scalar& s = env.scalar(e->name());
      if (auto* i = std::get_if<std::int64_t>(&s)) return *i;
      return std::get<std::string>(s);
    }
    case Op::Index:
      return env.index(e->name());
    case Op::Add:
      return eval_int(e->kid(0), env) + eval_int(e->kid(1), env);
    default:
      throw SchemaError("not a scalar expression: " + e->text());
  }
}

Value eval(const Expr& e, const Env& env) {
  if (is_relation(e)) return eval_rel(e, env);
  return eval_scalar(e, env);
}

}  // namespace relsynth::tor
