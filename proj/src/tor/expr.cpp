#include <algorithm>

#include "internal.hpp"

namespace relsynth::tor {

const char* spelling(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

const char* spelling(AggKind k) {
  switch (k) {
    case AggKind::Sum: return "sum";
    case AggKind::Count: return "count";
    case AggKind::Min: return "min";
    case AggKind::Max: return "max";
  }
  return "?";
}

std::optional<CmpOp> parse_cmp(std::string_view s) {
  for (CmpOp op : {CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge})
    if (s == spelling(op)) return op;
  return std::nullopt;
}

std::optional<AggKind> parse_agg(std::string_view s) {
  for (AggKind k : {AggKind::Sum, AggKind::Count, AggKind::Min, AggKind::Max})
    if (s == spelling(k)) return k;
  return std::nullopt;
}

bool is_relation(const Expr& e) { return e->sort() == Sort::Relation; }
bool is_pred(const Expr& e) { return e->sort() == Sort::Bool; }

bool equal(const Expr& a, const Expr& b) { return a == b || a->text() == b->text(); }

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

bool scalar_sort(Sort s) { return s == Sort::Int || s == Sort::Text; }

FieldType field_type(Sort s) { return s == Sort::Int ? FieldType::Int : FieldType::Text; }

int find_column(const Schema& schema, const Column& c) {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].qualifier == c.qualifier && schema[i].name == c.name) return static_cast<int>(i);
  return -1;
}

}  // namespace

struct Builder {
  static std::shared_ptr<Node> make(Op op, Sort sort, std::vector<Expr> kids) {
    auto n = std::make_shared<Node>();
    n->op_ = op;
    n->sort_ = sort;
    n->kids_ = std::move(kids);
    for (const auto& k : n->kids_) {
      n->cost_ += k->cost();
      n->depth_ = std::max(n->depth_, k->depth() + 1);
    }
    return n;
  }

  static void render(Node& n) {
    auto kid = [&](std::size_t i) -> const std::string& { return n.kids_[i]->text(); };
    switch (n.op_) {
      case Op::Query: n.text_ = "(query " + n.name_ + ")"; break;
      case Op::Empty: {
        n.text_ = "(empty";
        for (const auto& c : *n.schema_) n.text_ += " (" + c.qualified_name() + " " + to_string(c.type) + ")";
        n.text_ += ")";
        break;
      }
      case Op::Sel: n.text_ = "(sel " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Proj: {
        n.text_ = "(proj (";
        for (std::size_t i = 0; i < n.columns_.size(); ++i) {
          if (i) n.text_ += " ";
          n.text_ += n.columns_[i].qualified_name();
        }
        n.text_ += ") " + kid(0) + ")";
        break;
      }
      case Op::Join: n.text_ = "(join " + kid(2) + " " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Top: n.text_ = "(top " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Append: n.text_ = "(append " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Concat: n.text_ = "(concat " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Agg:
        n.text_ = std::string("(agg ") + spelling(n.agg_) + " ";
        if (n.has_column_) n.text_ += "(field " + n.column_.qualified_name() + ") ";
        n.text_ += kid(0) + ")";
        break;
      case Op::Get: n.text_ = "(get " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Size: n.text_ = "(size " + kid(0) + ")"; break;
      case Op::IntLit: n.text_ = std::to_string(n.int_value_); break;
      case Op::TextLit: n.text_ = quote(n.name_); break;
      case Op::Param: n.text_ = "(param " + n.name_ + ")"; break;
      case Op::Index: n.text_ = "(index " + n.name_ + ")"; break;
      case Op::Add: n.text_ = "(+ " + kid(0) + " " + kid(1) + ")"; break;
      case Op::Field: n.text_ = "(field " + n.column_.qualified_name() + ")"; break;
      case Op::True: n.text_ = "true"; break;
      case Op::And:
      case Op::Or: {
        n.text_ = n.op_ == Op::And ? "(and" : "(or";
        for (const auto& k : n.kids_) n.text_ += " " + k->text();
        n.text_ += ")";
        break;
      }
      case Op::Not: n.text_ = "(not " + kid(0) + ")"; break;
      case Op::Cmp: n.text_ = std::string("(") + spelling(n.cmp_) + " " + kid(0) + " " + kid(1) + ")"; break;
    }
  }

  static Expr finish(std::shared_ptr<Node> n) {
    render(*n);
    return n;
  }

  static void set_schema(Node& n, SchemaRef s) { n.schema_ = std::move(s); }
  static void set_name(Node& n, std::string s) { n.name_ = std::move(s); }
  static void set_int(Node& n, std::int64_t v) { n.int_value_ = v; }
  static void set_cmp(Node& n, CmpOp op) { n.cmp_ = op; }
  static void set_agg(Node& n, AggKind k) { n.agg_ = k; }
  static void set_column(Node& n, Column c) {
    n.column_ = std::move(c);
    n.has_column_ = true;
    n.cost_ += 1;
  }
  // The field reference is the node itself; no extra cost.
  static void set_field(Node& n, Column c) {
    n.column_ = std::move(c);
    n.has_column_ = true;
  }
  static void set_columns(Node& n, std::vector<Column> cs) {
    n.cost_ += cs.size();
    n.columns_ = std::move(cs);
  }
  static void set_compiled(Node& n, CompiledPred p) {
    n.compiled_ = std::make_shared<const CompiledPred>(std::move(p));
  }
};

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw SchemaError(msg);
}

void require_relation(const Expr& e, const char* what) {
  require(e && e->sort() == Sort::Relation, std::string(what) + " requires a relation operand, got " +
                                                (e ? e->text() : std::string("null")));
}

}  // namespace

Expr query(const std::string& relation, const Schema& schema) {
  require(!schema.empty(), "relation '" + relation + "' has an empty schema");
  auto n = Builder::make(Op::Query, Sort::Relation, {});
  Builder::set_name(*n, relation);
  Builder::set_schema(*n, qualify(schema, relation));
  return Builder::finish(n);
}

Expr empty(SchemaRef schema) {
  require(schema && !schema->empty(), "empty relation needs a non-empty schema");
  auto n = Builder::make(Op::Empty, Sort::Relation, {});
  Builder::set_schema(*n, std::move(schema));
  return Builder::finish(n);
}

Expr sel(Expr pred, Expr e) {
  require_relation(e, "sel");
  require(pred && is_pred(pred), "sel requires a predicate");
  CompiledPred cp = compile_pred(pred, *e->schema());
  SchemaRef s = e->schema();
  auto n = Builder::make(Op::Sel, Sort::Relation, {std::move(pred), std::move(e)});
  Builder::set_schema(*n, std::move(s));
  Builder::set_compiled(*n, std::move(cp));
  return Builder::finish(n);
}

Expr proj(std::vector<Column> columns, Expr e) {
  require_relation(e, "proj");
  require(!columns.empty(), "proj requires at least one column");
  const Schema& in = *e->schema();
  std::vector<int> positions;
  for (auto& c : columns) {
    int pos = find_column(in, c);
    require(pos >= 0, "proj column " + c.qualified_name() + " not in " + to_string(in));
    require(std::find(positions.begin(), positions.end(), pos) == positions.end(),
            "proj column " + c.qualified_name() + " listed twice");
    positions.push_back(pos);
    c.type = in[static_cast<std::size_t>(pos)].type;
  }
  Schema out = columns;
  auto n = Builder::make(Op::Proj, Sort::Relation, {std::move(e)});
  Builder::set_columns(*n, std::move(columns));
  Builder::set_schema(*n, make_schema(std::move(out)));
  return Builder::finish(n);
}

Expr join(Expr left, Expr right, Expr pred) {
  require_relation(left, "join");
  require_relation(right, "join");
  require(pred && is_pred(pred), "join requires a predicate");
  Schema s = *left->schema();
  for (const auto& c : *right->schema()) {
    require(find_column(s, c) < 0, "join operands share column " + c.qualified_name());
    s.push_back(c);
  }
  CompiledPred cp = compile_pred(pred, s);
  auto n = Builder::make(Op::Join, Sort::Relation, {std::move(left), std::move(right), std::move(pred)});
  Builder::set_schema(*n, make_schema(std::move(s)));
  Builder::set_compiled(*n, std::move(cp));
  return Builder::finish(n);
}

Expr top(Expr e, Expr k) {
  require_relation(e, "top");
  require(k && k->sort() == Sort::Int, "top requires an int bound");
  SchemaRef s = e->schema();
  auto n = Builder::make(Op::Top, Sort::Relation, {std::move(e), std::move(k)});
  Builder::set_schema(*n, std::move(s));
  return Builder::finish(n);
}

Expr append(Expr e, Expr record) {
  require_relation(e, "append");
  require(record && record->sort() == Sort::Record, "append requires a record");
  require(same_types(*e->schema(), *record->schema()), "append record schema mismatch");
  SchemaRef s = e->schema();
  auto n = Builder::make(Op::Append, Sort::Relation, {std::move(e), std::move(record)});
  Builder::set_schema(*n, std::move(s));
  return Builder::finish(n);
}

Expr concat(Expr left, Expr right) {
  require_relation(left, "concat");
  require_relation(right, "concat");
  require(same_types(*left->schema(), *right->schema()), "concat operand schemas differ");
  SchemaRef s = left->schema();
  auto n = Builder::make(Op::Concat, Sort::Relation, {std::move(left), std::move(right)});
  Builder::set_schema(*n, std::move(s));
  return Builder::finish(n);
}

Expr agg(AggKind kind, std::optional<Column> column, Expr e) {
  require_relation(e, "agg");
  Sort sort = (kind == AggKind::Min || kind == AggKind::Max) ? Sort::OptInt : Sort::Int;
  std::optional<Column> resolved;
  if (kind == AggKind::Count) {
    require(!column.has_value(), "count takes no column");
  } else {
    require(column.has_value(), std::string(spelling(kind)) + " requires a column");
    int pos = find_column(*e->schema(), *column);
    require(pos >= 0, "agg column " + column->qualified_name() + " not in " + to_string(*e->schema()));
    resolved = (*e->schema())[static_cast<std::size_t>(pos)];
    require(resolved->type == FieldType::Int, "agg column must be int");
  }
  auto n = Builder::make(Op::Agg, sort, {std::move(e)});
  Builder::set_agg(*n, kind);
  if (resolved) Builder::set_column(*n, *resolved);
  return Builder::finish(n);
}

Expr get(Expr e, Expr idx) {
  require_relation(e, "get");
  require(idx && idx->sort() == Sort::Int, "get requires an int index");
  SchemaRef s = e->schema();
  auto n = Builder::make(Op::Get, Sort::Record, {std::move(e), std::move(idx)});
  Builder::set_schema(*n, std::move(s));
  return Builder::finish(n);
}

Expr size(Expr e) {
  require_relation(e, "size");
  return Builder::finish(Builder::make(Op::Size, Sort::Int, {std::move(e)}));
}

Expr int_lit(std::int64_t v) {
  auto n = Builder::make(Op::IntLit, Sort::Int, {});
  Builder::set_int(*n, v);
  return Builder::finish(n);
}

Expr text_lit(std::string v) {
  auto n = Builder::make(Op::TextLit, Sort::Text, {});
  Builder::set_name(*n, std::move(v));
  return Builder::finish(n);
}

Expr param(std::string name, FieldType type) {
  auto n = Builder::make(Op::Param, type == FieldType::Int ? Sort::Int : Sort::Text, {});
  Builder::set_name(*n, std::move(name));
  return Builder::finish(n);
}

Expr index(std::string name) {
  auto n = Builder::make(Op::Index, Sort::Int, {});
  Builder::set_name(*n, std::move(name));
  return Builder::finish(n);
}

Expr add(Expr a, Expr b) {
  require(a->sort() == Sort::Int && b->sort() == Sort::Int, "+ requires int operands");
  return Builder::finish(Builder::make(Op::Add, Sort::Int, {std::move(a), std::move(b)}));
}

Expr field(Column c) {
  auto n = Builder::make(Op::Field, c.type == FieldType::Int ? Sort::Int : Sort::Text, {});
  Builder::set_field(*n, std::move(c));
  return Builder::finish(n);
}

Expr truth() { return Builder::finish(Builder::make(Op::True, Sort::Bool, {})); }

namespace {

Expr connective(Op op, std::vector<Expr> parts) {
  std::vector<Expr> flat;
  for (auto& p : parts) {
    require(p && is_pred(p), "connective requires predicates");
    if (p->op() == op)
      flat.insert(flat.end(), p->kids().begin(), p->kids().end());
    else
      flat.push_back(std::move(p));
  }
  require(!flat.empty(), "connective requires at least one operand");
  if (flat.size() == 1) return flat[0];
  return Builder::finish(Builder::make(op, Sort::Bool, std::move(flat)));
}

bool is_constant(const Expr& e) {
  return e->op() == Op::IntLit || e->op() == Op::TextLit || e->op() == Op::Param;
}

CmpOp mirror(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return CmpOp::Gt;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Ge: return CmpOp::Le;
    default: return op;
  }
}

}  // namespace

Expr conj(std::vector<Expr> parts) { return connective(Op::And, std::move(parts)); }
Expr disj(std::vector<Expr> parts) { return connective(Op::Or, std::move(parts)); }

Expr negate(Expr p) {
  require(p && is_pred(p), "not requires a predicate");
  return Builder::finish(Builder::make(Op::Not, Sort::Bool, {std::move(p)}));
}

Expr cmp(CmpOp op, Expr lhs, Expr rhs) {
  require(scalar_sort(lhs->sort()) && lhs->sort() == rhs->sort(),
          std::string("comparison operands must both be int or both be text: ") + lhs->text() +
              " " + spelling(op) + " " + rhs->text());
  require(lhs->sort() == Sort::Int || op == CmpOp::Eq || op == CmpOp::Ne,
          std::string("text supports only = and !=, not ") + spelling(op));
  if (is_constant(lhs) && !is_constant(rhs)) {
    std::swap(lhs, rhs);
    op = mirror(op);
  }
  auto n = Builder::make(Op::Cmp, Sort::Bool, {std::move(lhs), std::move(rhs)});
  Builder::set_cmp(*n, op);
  return Builder::finish(n);
}

namespace {

class PredCompiler {
 public:
  explicit PredCompiler(const Schema& schema, CompiledPred& out) : schema_(schema), out_(out) {}

  PredNode node(const Expr& p) {
    PredNode n;
    n.op = p->op();
    switch (p->op()) {
      case Op::True: break;
      case Op::And:
      case Op::Or:
      case Op::Not:
        for (const auto& k : p->kids()) n.kids.push_back(node(k));
        break;
      case Op::Cmp:
        n.cmp = p->cmp();
        n.lhs = operand(p->kid(0));
        n.rhs = operand(p->kid(1));
        break;
      default:
        throw SchemaError("not a predicate: " + p->text());
    }
    return n;
  }

 private:
  PredOperand operand(const Expr& e) {
    PredOperand o;
    switch (e->op()) {
      case Op::Field: {
        o.kind = PredOperand::Kind::Column;
        o.column = find_column(schema_, e->column());
        require(o.column >= 0, "field " + e->column().qualified_name() + " not in operand schema " +
                                   to_string(schema_));
        require(schema_[static_cast<std::size_t>(o.column)].type == field_type(e->sort()),
                "field " + e->column().qualified_name() + " has the wrong type");
        break;
      }
      case Op::IntLit:
        o.constant = e->int_value();
        break;
      case Op::TextLit:
        o.constant = e->text_value();
        break;
      default:
        o.kind = PredOperand::Kind::External;
        o.external = static_cast<int>(out_.externals.size());
        out_.externals.push_back(e);
        break;
    }
    return o;
  }

  const Schema& schema_;
  CompiledPred& out_;
};

void collect(const Expr& e, FreeNames& out) {
  switch (e->op()) {
    case Op::Query: out.relations.insert(e->name()); break;
    case Op::Param: out.params.insert(e->name()); break;
    case Op::Index: out.indices.insert(e->name()); break;
    default: break;
  }
  for (const auto& k : e->kids()) collect(k, out);
}

}  // namespace

CompiledPred compile_pred(const Expr& pred, const Schema& schema) {
  CompiledPred out;
  PredCompiler pc(schema, out);
  out.root = pc.node(pred);
  return out;
}

FreeNames free_names(const Expr& e) {
  FreeNames out;
  collect(e, out);
  return out;
}

}  // namespace relsynth::tor
