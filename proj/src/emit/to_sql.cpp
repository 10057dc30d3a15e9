#include "relsynth/emit.hpp"

namespace relsynth::emit {

namespace {

struct Untranslatable {
  std::string reason;
};

// A query under construction. `columns` is empty while the select list is
// still "every column of every source".
struct Block {
  std::vector<std::string> sources;
  std::vector<Condition> where;
  std::optional<std::vector<Column>> columns;
  std::optional<Limit> limit;
};

[[noreturn]] void reject(const std::string& why) { throw Untranslatable{why}; }

Operand operand(const tor::Expr& e) {
  Operand o;
  switch (e->op()) {
    case tor::Op::Field:
      o.kind = Operand::Kind::Column;
      o.ref = {e->column().qualifier, e->column().name};
      return o;
    case tor::Op::IntLit:
      o.kind = Operand::Kind::Int;
      o.int_value = e->int_value();
      return o;
    case tor::Op::TextLit:
      o.kind = Operand::Kind::Text;
      o.text = e->text_value();
      return o;
    case tor::Op::Param:
      o.kind = Operand::Kind::Param;
      o.text = e->name();
      return o;
    default:
      reject("predicate operand " + e->text() + " has no SQL image");
  }
}

void flatten_into(Condition::Kind kind, Condition c, std::vector<Condition>& out) {
  if (c.kind == kind) {
    for (auto& k : c.kids) out.push_back(std::move(k));
  } else {
    out.push_back(std::move(c));
  }
}

Condition condition(const tor::Expr& p) {
  Condition c;
  switch (p->op()) {
    case tor::Op::True:
      return c;
    case tor::Op::And:
    case tor::Op::Or:
      c.kind = p->op() == tor::Op::And ? Condition::Kind::And : Condition::Kind::Or;
      for (const auto& k : p->kids()) flatten_into(c.kind, condition(k), c.kids);
      return c;
    case tor::Op::Not:
      c.kind = Condition::Kind::Not;
      c.kids.push_back(condition(p->kid(0)));
      return c;
    case tor::Op::Cmp:
      c.kind = Condition::Kind::Cmp;
      c.op = p->cmp();
      c.lhs = operand(p->kid(0));
      c.rhs = operand(p->kid(1));
      return c;
    default:
      reject("not a predicate: " + p->text());
  }
}

Limit limit_of(const tor::Expr& k) {
  if (k->op() == tor::Op::IntLit) return Limit{k->int_value(), {}};
  if (k->op() == tor::Op::Param) return Limit{std::nullopt, k->name()};
  reject("limit " + k->text() + " is not a constant or parameter");
}

std::vector<Column> all_columns(const tor::Expr& e) {
  return std::vector<Column>(e->schema()->begin(), e->schema()->end());
}

Block block(const tor::Expr& e) {
  switch (e->op()) {
    case tor::Op::Query: {
      Block b;
      b.sources.push_back(e->name());
      return b;
    }
    case tor::Op::Sel: {
      Block b = block(e->kid(1));
      if (b.limit) reject("selection over a limited subquery");
      if (e->kid(0)->op() != tor::Op::True) b.where.push_back(condition(e->kid(0)));
      return b;
    }
    case tor::Op::Proj: {
      Block b = block(e->kid(0));
      b.columns = e->columns();
      return b;
    }
    case tor::Op::Top: {
      Block b = block(e->kid(0));
      Limit outer = limit_of(e->kid(1));
      if (b.limit) {
        if (!b.limit->value || !outer.value) reject("nested limits must both be constants");
        outer.value = std::min(*outer.value, *b.limit->value);
      }
      b.limit = outer;
      return b;
    }
    case tor::Op::Join: {
      Block l = block(e->kid(0));
      Block r = block(e->kid(1));
      if (l.sources.size() != 1 || r.sources.size() != 1) reject("join of joins");
      if (l.limit || r.limit) reject("join over a limited subquery");
      if (l.sources[0] == r.sources[0]) reject("self-join");
      Block b;
      b.sources = {l.sources[0], r.sources[0]};
      b.where = std::move(l.where);
      for (auto& c : r.where) b.where.push_back(std::move(c));
      if (e->kid(2)->op() != tor::Op::True) b.where.push_back(condition(e->kid(2)));
      if (l.columns || r.columns) {
        std::vector<Column> cols = l.columns ? *l.columns : all_columns(e->kid(0));
        auto rc = r.columns ? *r.columns : all_columns(e->kid(1));
        cols.insert(cols.end(), rc.begin(), rc.end());
        b.columns = std::move(cols);
      }
      return b;
    }
    case tor::Op::Empty: reject("empty relation literal");
    case tor::Op::Append: reject("append");
    case tor::Op::Concat: reject("concat");
    default: reject(e->text() + " is not relation-valued");
  }
}

Condition where_of(std::vector<Condition> parts) {
  if (parts.size() == 1) return std::move(parts[0]);
  Condition c;
  c.kind = Condition::Kind::And;
  for (auto& p : parts) flatten_into(Condition::Kind::And, std::move(p), c.kids);
  return c;
}

SqlQuery finish(Block b) {
  SqlQuery q;
  q.from = b.sources;
  if (!b.where.empty()) q.where = where_of(std::move(b.where));
  if (b.columns) {
    for (const auto& c : *b.columns) {
      SelectItem s;
      s.kind = SelectItem::Kind::Column;
      s.ref = {c.qualifier, c.name};
      q.select.push_back(s);
    }
  } else {
    for (const auto& t : b.sources) {
      SelectItem s;
      s.kind = SelectItem::Kind::Star;
      s.ref.table = t;
      q.select.push_back(s);
    }
  }
  for (const auto& t : b.sources) q.order_by.push_back({t, "rid"});
  q.limit = b.limit;
  return q;
}

SqlQuery aggregate(const tor::Expr& e) {
  Block b = block(e->kid(0));
  if (b.limit) reject("aggregate over a limited subquery");
  SqlQuery q;
  q.from = b.sources;
  if (!b.where.empty()) q.where = where_of(std::move(b.where));
  SelectItem s;
  s.kind = SelectItem::Kind::Aggregate;
  switch (e->agg()) {
    case tor::AggKind::Sum: s.fn = AggFn::Sum; s.coalesce_zero = true; break;
    case tor::AggKind::Count: s.fn = AggFn::Count; break;
    case tor::AggKind::Min: s.fn = AggFn::Min; break;
    case tor::AggKind::Max: s.fn = AggFn::Max; break;
  }
  if (e->has_column()) s.ref = {e->column().qualifier, e->column().name};
  q.select.push_back(s);
  return q;
}

}  // namespace

std::variant<SqlQuery, NotTranslatable> to_sql(const tor::Expr& e) {
  try {
    if (e->op() == tor::Op::Agg) return aggregate(e);
    if (!tor::is_relation(e)) return NotTranslatable{e->text() + " is neither a relation nor an aggregate"};
    return finish(block(e));
  } catch (const Untranslatable& u) {
    return NotTranslatable{u.reason};
  }
}

}  // namespace relsynth::emit
