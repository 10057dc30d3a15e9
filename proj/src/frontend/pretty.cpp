#include "relsynth/frontend.hpp"

namespace relsynth::frontend {

const char* spelling(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

bool is_comparison(BinOp op) {
  return op == BinOp::Eq || op == BinOp::Ne || op == BinOp::Lt || op == BinOp::Le ||
         op == BinOp::Gt || op == BinOp::Ge;
}

std::string to_string(TypeKind k) {
  switch (k) {
    case TypeKind::Int: return "int";
    case TypeKind::Text: return "text";
    case TypeKind::Bool: return "bool";
    case TypeKind::OptInt: return "opt int";
    case TypeKind::Record: return "record";
    case TypeKind::Relation: return "rel";
    case TypeKind::List: return "list";
  }
  return "?";
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.int_value != b.int_value || a.name != b.name || a.index != b.index ||
      a.field != b.field || a.args.size() != b.args.size())
    return false;
  if (a.kind == ExprKind::Binary && a.op != b.op) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(a.args[i], b.args[i])) return false;
  return true;
}

namespace {

bool same_schema(const Schema& a, const Schema& b) { return a == b; }

bool same_record(const RecordExpr& a, const RecordExpr& b) {
  if (a.whole_row != b.whole_row || a.relation != b.relation || a.index != b.index ||
      a.fields.size() != b.fields.size())
    return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    if (a.fields[i].first != b.fields[i].first) return false;
    if (!structurally_equal(a.fields[i].second, b.fields[i].second)) return false;
  }
  return true;
}

bool same_body(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structurally_equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool structurally_equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.target != b.target || a.relation != b.relation) return false;
  switch (a.kind) {
    case StmtKind::Assign:
      return structurally_equal(a.value, b.value);
    case StmtKind::Append:
      return same_record(a.record, b.record);
    case StmtKind::If:
      return structurally_equal(a.value, b.value) && same_body(a.body, b.body);
    case StmtKind::For:
      return same_body(a.body, b.body);
    case StmtKind::Break:
      return true;
  }
  return false;
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.name != b.name || a.result != b.result || a.params.size() != b.params.size() ||
      a.decls.size() != b.decls.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& p = a.params[i];
    const auto& q = b.params[i];
    if (p.name != q.name || p.kind != q.kind || !same_schema(p.schema, q.schema)) return false;
  }
  for (std::size_t i = 0; i < a.decls.size(); ++i) {
    const auto& d = a.decls[i];
    const auto& e = b.decls[i];
    if (d.name != e.name || d.kind != e.kind || !same_schema(d.schema, e.schema)) return false;
    if (d.init.has_value() != e.init.has_value()) return false;
    if (d.init && !structurally_equal(*d.init, *e.init)) return false;
  }
  return same_body(a.body, b.body);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string fields(const Schema& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += s[i].name + ": " + to_string(s[i].type);
  }
  return out + ")";
}

std::string print_expr(const Expr& e);

// Nested operators are always parenthesized so that re-parsing reproduces
// the same tree regardless of precedence.
std::string operand(const Expr& e) {
  if (e.kind == ExprKind::Binary || e.kind == ExprKind::Not) return "(" + print_expr(e) + ")";
  return print_expr(e);
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: return std::to_string(e.int_value);
    case ExprKind::TextLit: return quote(e.name);
    case ExprKind::Var: return e.name;
    case ExprKind::Field: return e.name + "[" + e.index + "]." + e.field;
    case ExprKind::Binary:
      return operand(e.args[0]) + " " + spelling(e.op) + " " + operand(e.args[1]);
    case ExprKind::Not: return "!" + operand(e.args[0]);
    case ExprKind::Min:
    case ExprKind::Max:
      return std::string(e.kind == ExprKind::Min ? "min(" : "max(") + print_expr(e.args[0]) +
             ", " + print_expr(e.args[1]) + ")";
  }
  return "?";
}

void print_body(const std::vector<Stmt>& body, int depth, std::string& out);

void print_stmt(const Stmt& s, int depth, std::string& out) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (s.kind) {
    case StmtKind::Assign:
      out += pad + s.target + " = " + print_expr(s.value) + ";\n";
      break;
    case StmtKind::Append: {
      out += pad + s.target + ".append(";
      if (s.record.whole_row) {
        out += s.record.relation + "[" + s.record.index + "]";
      } else {
        out += "{";
        for (std::size_t i = 0; i < s.record.fields.size(); ++i) {
          if (i) out += ", ";
          out += s.record.fields[i].first + ": " + print_expr(s.record.fields[i].second);
        }
        out += "}";
      }
      out += ");\n";
      break;
    }
    case StmtKind::If:
      out += pad + "if " + print_expr(s.value) + " {\n";
      print_body(s.body, depth + 1, out);
      out += pad + "}\n";
      break;
    case StmtKind::For:
      out += pad + "for " + s.target + " in 0..size(" + s.relation + ") {\n";
      print_body(s.body, depth + 1, out);
      out += pad + "}\n";
      break;
    case StmtKind::Break:
      out += pad + "break;\n";
      break;
  }
}

void print_body(const std::vector<Stmt>& body, int depth, std::string& out) {
  for (const auto& s : body) print_stmt(s, depth, out);
}

}  // namespace

std::string pretty(const Program& p) {
  std::string out = "fn " + p.name + "(";
  for (std::size_t i = 0; i < p.params.size(); ++i) {
    if (i) out += ", ";
    const auto& q = p.params[i];
    out += q.name + ": ";
    switch (q.kind) {
      case ParamKind::Rel: out += "rel" + fields(q.schema); break;
      case ParamKind::Int: out += "int"; break;
      case ParamKind::Text: out += "text"; break;
    }
  }
  out += ") {\n";
  for (const auto& d : p.decls) {
    out += "  var " + d.name + ": ";
    switch (d.kind) {
      case DeclKind::List: out += "list" + fields(d.schema); break;
      case DeclKind::OptInt: out += "opt int"; break;
      case DeclKind::Int: out += "int = " + print_expr(*d.init); break;
      case DeclKind::Text: out += "text = " + print_expr(*d.init); break;
    }
    out += ";\n";
  }
  print_body(p.body, 1, out);
  out += "  return " + p.result + ";\n}\n";
  return out;
}

}  // namespace relsynth::frontend
