#include <cctype>
#include <charconv>

#include "internal.hpp"

namespace relsynth::tor {

namespace {

struct SExpr {
  bool is_list = false;
  bool is_string = false;
  std::string atom;
  std::vector<SExpr> items;
};

class SReader {
 public:
  explicit SReader(std::string_view text) : text_(text) {}

  SExpr top() {
    SExpr e = next();
    skip();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ReadError(msg + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  SExpr next() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    SExpr e;
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) fail("unbalanced parenthesis");
        if (text_[pos_] == ')') {
          ++pos_;
          return e;
        }
        e.items.push_back(next());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      ++pos_;
      e.is_string = true;
      for (;;) {
        if (pos_ >= text_.size()) fail("unterminated string");
        char d = text_[pos_++];
        if (d == '"') return e;
        if (d == '\\') {
          if (pos_ >= text_.size()) fail("unterminated string");
          d = text_[pos_++];
        }
        e.atom += d;
      }
    }
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      e.atom += text_[pos_++];
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  explicit Reader(const Vocabulary& v) : vocab_(v) {}

  Expr expr(const SExpr& s) {
    if (s.is_string) return text_lit(s.atom);
    if (!s.is_list) return atom(s.atom);
    if (s.items.empty() || s.items[0].is_list || s.items[0].is_string) fail("expected operator", s);
    const std::string& head = s.items[0].atom;
    auto arg = [&](std::size_t i) -> const SExpr& {
      if (i >= s.items.size()) fail("missing operand for '" + head + "'", s);
      return s.items[i];
    };
    auto arity = [&](std::size_t n) {
      if (s.items.size() != n + 1) fail("'" + head + "' takes " + std::to_string(n) + " operands", s);
    };
    if (head == "query") {
      arity(1);
      const std::string& name = arg(1).atom;
      auto it = vocab_.relations.find(name);
      if (it == vocab_.relations.end()) throw UnboundName("unknown relation '" + name + "'");
      return query(name, it->second);
    }
    if (head == "empty") {
      Schema schema;
      for (std::size_t i = 1; i < s.items.size(); ++i) {
        const SExpr& c = s.items[i];
        if (!c.is_list || c.items.size() != 2) fail("empty expects (name type) columns", s);
        Column col = split(c.items[0].atom);
        if (c.items[1].atom == "int") col.type = FieldType::Int;
        else if (c.items[1].atom == "text") col.type = FieldType::Text;
        else fail("unknown type '" + c.items[1].atom + "'", s);
        schema.push_back(col);
      }
      return empty(make_schema(std::move(schema)));
    }
    if (head == "sel") {
      arity(2);
      return sel(expr(arg(1)), expr(arg(2)));
    }
    if (head == "proj") {
      arity(2);
      if (!arg(1).is_list) fail("proj expects a column list", s);
      std::vector<Column> cols;
      for (const auto& c : arg(1).items) cols.push_back(split(c.atom));
      return proj(std::move(cols), expr(arg(2)));
    }
    if (head == "join") {
      arity(3);
      Expr p = expr(arg(1));
      return join(expr(arg(2)), expr(arg(3)), std::move(p));
    }
    if (head == "top") {
      arity(2);
      return top(expr(arg(1)), expr(arg(2)));
    }
    if (head == "append") {
      arity(2);
      return append(expr(arg(1)), expr(arg(2)));
    }
    if (head == "concat") {
      arity(2);
      return concat(expr(arg(1)), expr(arg(2)));
    }
    if (head == "agg") {
      auto kind = parse_agg(arg(1).atom);
      if (!kind) fail("unknown aggregate '" + arg(1).atom + "'", s);
      if (*kind == AggKind::Count) {
        arity(2);
        return agg(*kind, std::nullopt, expr(arg(2)));
      }
      arity(3);
      Expr f = expr(arg(2));
      if (f->op() != Op::Field) fail("aggregate column must be (field ...)", s);
      return agg(*kind, f->column(), expr(arg(3)));
    }
    if (head == "get") {
      arity(2);
      return get(expr(arg(1)), expr(arg(2)));
    }
    if (head == "size") {
      arity(1);
      return size(expr(arg(1)));
    }
    if (head == "param") {
      arity(1);
      auto it = vocab_.params.find(arg(1).atom);
      if (it == vocab_.params.end()) throw UnboundName("unknown parameter '" + arg(1).atom + "'");
      return param(it->first, it->second);
    }
    if (head == "index") {
      arity(1);
      if (!vocab_.indices.count(arg(1).atom))
        throw UnboundName("unknown index '" + arg(1).atom + "'");
      return index(arg(1).atom);
    }
    if (head == "+") {
      arity(2);
      return add(expr(arg(1)), expr(arg(2)));
    }
    if (head == "field") {
      arity(1);
      return field(resolve(arg(1).atom));
    }
    if (head == "and" || head == "or") {
      std::vector<Expr> parts;
      for (std::size_t i = 1; i < s.items.size(); ++i) parts.push_back(expr(s.items[i]));
      if (parts.size() < 2) fail("'" + head + "' needs at least two operands", s);
      return head == "and" ? conj(std::move(parts)) : disj(std::move(parts));
    }
    if (head == "not") {
      arity(1);
      return negate(expr(arg(1)));
    }
    if (auto op = parse_cmp(head)) {
      arity(2);
      return cmp(*op, expr(arg(1)), expr(arg(2)));
    }
    fail("unknown operator '" + head + "'", s);
  }

 private:
  [[noreturn]] static void fail(const std::string& msg, const SExpr&) { throw ReadError(msg); }

  Expr atom(const std::string& a) {
    if (a == "true") return truth();
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(a.data(), a.data() + a.size(), v);
    if (ec == std::errc() && p == a.data() + a.size()) return int_lit(v);
    throw ReadError("unexpected atom '" + a + "'");
  }

  static Column split(const std::string& qualified) {
    auto dot = qualified.find('.');
    if (dot == std::string::npos) throw ReadError("column '" + qualified + "' must be qualified");
    return Column{qualified.substr(0, dot), qualified.substr(dot + 1), FieldType::Int};
  }

  Column resolve(const std::string& qualified) {
    Column c = split(qualified);
    auto it = vocab_.relations.find(c.qualifier);
    if (it == vocab_.relations.end()) throw UnboundName("unknown relation '" + c.qualifier + "'");
    for (const auto& f : it->second)
      if (f.name == c.name) {
        c.type = f.type;
        return c;
      }
    throw SchemaError("unknown field '" + qualified + "'");
  }

  const Vocabulary& vocab_;
};

}  // namespace

Expr read(std::string_view text, const Vocabulary& vocab) {
  SReader sr(text);
  SExpr s = sr.top();
  Reader r(vocab);
  return r.expr(s);
}

}  // namespace relsynth::tor
