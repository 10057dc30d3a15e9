#include <algorithm>
#include <numeric>

#include "relsynth/emit.hpp"

namespace relsynth::emit {

using nlohmann::json;

void MiniDb::add_table(const std::string& name, Relation rel) { tables_[name] = std::move(rel); }

const Relation* MiniDb::table(const std::string& name) const {
  auto it = tables_.find(name);
  return it == tables_.end() ? nullptr : &it->second;
}

namespace {

FieldType field_type(const json& t) {
  if (t == "int") return FieldType::Int;
  if (t == "text") return FieldType::Text;
  throw SqlError("unknown column type " + t.dump());
}

}  // namespace

MiniDb MiniDb::from_json(const json& doc) {
  if (!doc.is_object()) throw SqlError("database must be a JSON object");
  MiniDb db;
  for (const auto& [name, v] : doc.items()) {
    if (!v.is_object()) continue;
    Schema schema;
    for (const auto& f : v.at("schema")) schema.push_back({"", f.at(0).get<std::string>(), field_type(f.at(1))});
    Relation r{make_schema(schema), {}};
    for (const auto& row : v.at("rows")) {
      if (!row.is_array() || row.size() != schema.size()) throw SqlError("row arity mismatch in " + name);
      Row out;
      for (std::size_t c = 0; c < schema.size(); ++c) {
        if (schema[c].type == FieldType::Int) out.emplace_back(row[c].get<std::int64_t>());
        else out.emplace_back(row[c].get<std::string>());
      }
      r.rows.push_back(std::move(out));
    }
    db.add_table(name, std::move(r));
  }
  return db;
}

MiniDb MiniDb::from_values(const std::map<std::string, Value>& inputs) {
  MiniDb db;
  for (const auto& [name, v] : inputs)
    if (const auto* r = std::get_if<Relation>(&v)) db.add_table(name, *r);
  return db;
}

Params params_from_json(const json& doc) {
  Params out;
  for (const auto& [name, v] : doc.items()) {
    if (v.is_number_integer()) out[name] = v.get<std::int64_t>();
    else if (v.is_string()) out[name] = v.get<std::string>();
  }
  return out;
}

Params params_from_values(const std::map<std::string, Value>& inputs) {
  Params out;
  for (const auto& [name, v] : inputs) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) out[name] = *i;
    else if (const auto* s = std::get_if<std::string>(&v)) out[name] = *s;
  }
  return out;
}

namespace {

// Position of a column in the concatenated source row; rid columns are
// addressed separately through `rid_of`.
struct Scope {
  std::vector<std::string> tables;
  std::vector<const Relation*> rels;
  std::vector<std::size_t> offsets;

  std::size_t column(const ColumnRef& c) const {
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (tables[t] != c.table) continue;
      const Schema& s = *rels[t]->schema;
      for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k].name == c.column) return offsets[t] + k;
      throw UnknownColumn("unknown column " + c.table + "." + c.column);
    }
    throw UnknownColumn("unknown table reference " + c.table + " in " + c.table + "." + c.column);
  }

  std::size_t rid_of(const ColumnRef& c) const {
    for (std::size_t t = 0; t < tables.size(); ++t)
      if (tables[t] == c.table) {
        if (c.column != "rid") throw UnknownColumn("ORDER BY supports only rid columns, got " + c.column);
        return t;
      }
    throw UnknownColumn("unknown table reference " + c.table);
  }
};

struct Tuple {
  Row values;
  std::vector<std::int64_t> rids;
};

class Filter {
 public:
  Filter(const Condition& c, const Scope& scope, const Params& params) : scope_(scope), params_(params) {
    root_ = c;
    resolve(root_);
  }
  bool operator()(const Row& row) const { return test(root_, row); }

 private:
  void resolve(Condition& c) {
    for (auto& k : c.kids) resolve(k);
    if (c.kind != Condition::Kind::Cmp) return;
    slots_.push_back(slot(c.lhs));
    slots_.push_back(slot(c.rhs));
  }

  // Column position, or -1 with the value cached in consts_.
  long slot(const Operand& o) {
    switch (o.kind) {
      case Operand::Kind::Column: return static_cast<long>(scope_.column(o.ref));
      case Operand::Kind::Int: consts_.emplace_back(o.int_value); break;
      case Operand::Kind::Text: consts_.emplace_back(o.text); break;
      case Operand::Kind::Param: {
        auto it = params_.find(o.text);
        if (it == params_.end()) throw SqlError("unbound parameter :" + o.text);
        consts_.push_back(it->second);
        break;
      }
    }
    return -static_cast<long>(consts_.size());
  }

  const Scalar& value(long s, const Row& row) const {
    return s >= 0 ? row[static_cast<std::size_t>(s)] : consts_[static_cast<std::size_t>(-s - 1)];
  }

  bool test(const Condition& c, const Row& row) const {
    std::size_t cursor = 0;
    return eval(c, row, cursor);
  }

  bool eval(const Condition& c, const Row& row, std::size_t& cursor) const {
    switch (c.kind) {
      case Condition::Kind::True: return true;
      case Condition::Kind::Not: return !eval(c.kids[0], row, cursor);
      case Condition::Kind::And:
      case Condition::Kind::Or: {
        // Evaluate every kid so the slot cursor stays in step.
        bool acc = c.kind == Condition::Kind::And;
        for (const auto& k : c.kids) {
          bool v = eval(k, row, cursor);
          acc = c.kind == Condition::Kind::And ? acc && v : acc || v;
        }
        return acc;
      }
      case Condition::Kind::Cmp: {
        const Scalar& a = value(slots_[cursor], row);
        const Scalar& b = value(slots_[cursor + 1], row);
        cursor += 2;
        if (a.index() != b.index()) throw SqlError("comparison between int and text");
        switch (c.op) {
          case tor::CmpOp::Eq: return a == b;
          case tor::CmpOp::Ne: return a != b;
          case tor::CmpOp::Lt: return a < b;
          case tor::CmpOp::Le: return a <= b;
          case tor::CmpOp::Gt: return a > b;
          case tor::CmpOp::Ge: return a >= b;
        }
      }
    }
    return false;
  }

  const Scope& scope_;
  const Params& params_;
  Condition root_;
  std::vector<long> slots_;
  std::vector<Scalar> consts_;
};

void product(const Scope& scope, std::size_t t, Tuple& cur, std::vector<Tuple>& out) {
  if (t == scope.rels.size()) {
    out.push_back(cur);
    return;
  }
  const Relation& r = *scope.rels[t];
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    std::size_t mark = cur.values.size();
    cur.values.insert(cur.values.end(), r.rows[i].begin(), r.rows[i].end());
    cur.rids.push_back(static_cast<std::int64_t>(i));
    product(scope, t + 1, cur, out);
    cur.values.resize(mark);
    cur.rids.pop_back();
  }
}

}  // namespace

Value eval_sql(const SqlQuery& q, const MiniDb& db, const Params& params) {
  if (q.from.empty() || q.select.empty()) throw SqlError("query needs a select list and a source");
  Scope scope;
  std::size_t width = 0;
  for (const auto& name : q.from) {
    const Relation* r = db.table(name);
    if (!r) throw UnknownTable("unknown table " + name);
    scope.tables.push_back(name);
    scope.rels.push_back(r);
    scope.offsets.push_back(width);
    width += r->schema->size();
  }

  std::vector<Tuple> rows;
  Tuple cur;
  product(scope, 0, cur, rows);

  if (q.where) {
    Filter keep(*q.where, scope, params);
    std::vector<Tuple> kept;
    for (auto& t : rows)
      if (keep(t.values)) kept.push_back(std::move(t));
    rows = std::move(kept);
  }

  if (q.is_aggregate()) {
    const SelectItem& s = q.select[0];
    if (s.fn == AggFn::Count) return static_cast<std::int64_t>(rows.size());
    std::size_t c = scope.column(s.ref);
    OptInt acc;
    for (const auto& t : rows) {
      const auto* v = std::get_if<std::int64_t>(&t.values[c]);
      if (!v) throw SqlError("aggregate over a text column");
      if (!acc) acc = *v;
      else if (s.fn == AggFn::Sum) *acc += *v;
      else if (s.fn == AggFn::Min) acc = std::min(*acc, *v);
      else acc = std::max(*acc, *v);
    }
    if (s.fn == AggFn::Sum && s.coalesce_zero) return acc.value_or(0);
    return acc;
  }

  if (!q.order_by.empty()) {
    std::vector<std::size_t> keys;
    for (const auto& o : q.order_by) keys.push_back(scope.rid_of(o));
    std::stable_sort(rows.begin(), rows.end(), [&](const Tuple& a, const Tuple& b) {
      for (auto k : keys)
        if (a.rids[k] != b.rids[k]) return a.rids[k] < b.rids[k];
      return false;
    });
  }

  if (q.limit) {
    std::int64_t n = 0;
    if (q.limit->value) {
      n = *q.limit->value;
    } else {
      auto it = params.find(q.limit->param);
      if (it == params.end()) throw SqlError("unbound parameter :" + q.limit->param);
      const auto* v = std::get_if<std::int64_t>(&it->second);
      if (!v) throw SqlError("LIMIT parameter must be an integer");
      n = *v;
    }
    // A negative limit selects nothing.
    rows.resize(static_cast<std::size_t>(std::clamp<std::int64_t>(n, 0, static_cast<std::int64_t>(rows.size()))));
  }

  std::vector<std::size_t> picks;
  Schema out_schema;
  for (const auto& s : q.select) {
    if (s.kind == SelectItem::Kind::Aggregate) throw SqlError("aggregate mixed with columns");
    if (s.kind == SelectItem::Kind::Star) {
      bool found = false;
      for (std::size_t t = 0; t < scope.tables.size(); ++t) {
        if (scope.tables[t] != s.ref.table) continue;
        found = true;
        const Schema& sch = *scope.rels[t]->schema;
        for (std::size_t k = 0; k < sch.size(); ++k) {
          picks.push_back(scope.offsets[t] + k);
          out_schema.push_back({scope.tables[t], sch[k].name, sch[k].type});
        }
      }
      if (!found) throw UnknownTable("unknown table reference " + s.ref.table + ".*");
      continue;
    }
    std::size_t c = scope.column(s.ref);
    picks.push_back(c);
    Column col{s.ref.table, s.ref.column, FieldType::Int};
    for (std::size_t t = 0; t < scope.tables.size(); ++t)
      if (scope.tables[t] == s.ref.table)
        col.type = (*scope.rels[t]->schema)[c - scope.offsets[t]].type;
    out_schema.push_back(col);
  }

  Relation out{make_schema(std::move(out_schema)), {}};
  out.rows.reserve(rows.size());
  for (const auto& t : rows) {
    Row r;
    r.reserve(picks.size());
    for (auto p : picks) r.push_back(t.values[p]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace relsynth::emit
