#include <cctype>
#include <charconv>

#include "relsynth/emit.hpp"

namespace relsynth::emit {

namespace {

const char* sql_op(tor::CmpOp op) {
  switch (op) {
    case tor::CmpOp::Eq: return "=";
    case tor::CmpOp::Ne: return "<>";
    case tor::CmpOp::Lt: return "<";
    case tor::CmpOp::Le: return "<=";
    case tor::CmpOp::Gt: return ">";
    case tor::CmpOp::Ge: return ">=";
  }
  return "=";
}

std::string ref(const ColumnRef& c) { return c.table + "." + c.column; }

std::string operand(const Operand& o) {
  switch (o.kind) {
    case Operand::Kind::Column: return ref(o.ref);
    case Operand::Kind::Int: return std::to_string(o.int_value);
    case Operand::Kind::Param: return ":" + o.text;
    case Operand::Kind::Text: {
      std::string out = "'";
      for (char c : o.text) {
        if (c == '\'') out += '\'';
        out += c;
      }
      return out + "'";
    }
  }
  return "";
}

std::string condition(const Condition& c);

// Connectives nested in another connective or under NOT are parenthesized.
std::string nested(const Condition& c) {
  if (c.kind == Condition::Kind::And || c.kind == Condition::Kind::Or) return "(" + condition(c) + ")";
  return condition(c);
}

std::string condition(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::True: return "TRUE";
    case Condition::Kind::Cmp: return operand(c.lhs) + " " + sql_op(c.op) + " " + operand(c.rhs);
    case Condition::Kind::Not: return "NOT (" + condition(c.kids[0]) + ")";
    case Condition::Kind::And:
    case Condition::Kind::Or: {
      std::string out;
      const char* sep = c.kind == Condition::Kind::And ? " AND " : " OR ";
      for (std::size_t i = 0; i < c.kids.size(); ++i) {
        if (i) out += sep;
        out += nested(c.kids[i]);
      }
      return out;
    }
  }
  return "";
}

std::string select_item(const SelectItem& s) {
  switch (s.kind) {
    case SelectItem::Kind::Star: return s.ref.table + ".*";
    case SelectItem::Kind::Column: return ref(s.ref);
    case SelectItem::Kind::Aggregate:
      switch (s.fn) {
        case AggFn::Count: return "COUNT(*)";
        case AggFn::Sum:
          return s.coalesce_zero ? "COALESCE(SUM(" + ref(s.ref) + "), 0)" : "SUM(" + ref(s.ref) + ")";
        case AggFn::Min: return "MIN(" + ref(s.ref) + ")";
        case AggFn::Max: return "MAX(" + ref(s.ref) + ")";
      }
  }
  return "";
}

// ---- reader ----

enum class T { Ident, Int, Str, Param, Punct, End };

struct Tok {
  T kind;
  std::string text;
  std::int64_t value = 0;
  std::size_t pos = 0;
};

std::vector<Tok> lex(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& m) { throw SqlError(m + " at offset " + std::to_string(i)); };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({T::Ident, std::string(s.substr(start, i - start)), 0, start});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      ++i;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      Tok t{T::Int, std::string(s.substr(start, i - start)), 0, start};
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (ec != std::errc() || p != t.text.data() + t.text.size()) fail("bad integer");
      out.push_back(t);
      continue;
    }
    if (c == '\'') {
      ++i;
      std::string text;
      for (;;) {
        if (i >= s.size()) fail("unterminated string");
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            text += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text += s[i++];
      }
      out.push_back({T::Str, text, 0, start});
      continue;
    }
    if (c == ':') {
      ++i;
      std::size_t b = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      if (b == i) fail("expected parameter name");
      out.push_back({T::Param, std::string(s.substr(b, i - b)), 0, start});
      continue;
    }
    if ((c == '<' || c == '>') && i + 1 < s.size() && (s[i + 1] == '=' || (c == '<' && s[i + 1] == '>'))) {
      out.push_back({T::Punct, std::string(s.substr(i, 2)), 0, start});
      i += 2;
      continue;
    }
    if (std::string_view("(),.*=<>").find(c) != std::string_view::npos) {
      out.push_back({T::Punct, std::string(1, c), 0, start});
      ++i;
      continue;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
  out.push_back({T::End, "", 0, s.size()});
  return out;
}

class Reader {
 public:
  explicit Reader(std::vector<Tok> toks) : t_(std::move(toks)) {}

  SqlQuery query() {
    SqlQuery q;
    keyword("SELECT");
    do q.select.push_back(select_item());
    while (punct(","));
    keyword("FROM");
    do q.from.push_back(ident());
    while (punct(","));
    if (is_keyword("WHERE")) {
      ++p_;
      q.where = disjunction();
    }
    if (is_keyword("ORDER")) {
      ++p_;
      keyword("BY");
      do q.order_by.push_back(column_ref());
      while (punct(","));
    }
    if (is_keyword("LIMIT")) {
      ++p_;
      Limit l;
      if (cur().kind == T::Int) {
        l.value = cur().value;
      } else if (cur().kind == T::Param) {
        l.param = cur().text;
      } else {
        fail("expected limit");
      }
      ++p_;
      q.limit = l;
    }
    if (cur().kind != T::End) fail("trailing input");
    return q;
  }

 private:
  const Tok& cur() const { return t_[p_]; }
  [[noreturn]] void fail(const std::string& m) const {
    throw SqlError(m + " at offset " + std::to_string(cur().pos) + " near '" + cur().text + "'");
  }
  bool is_keyword(const char* k) const { return cur().kind == T::Ident && cur().text == k; }
  void keyword(const char* k) {
    if (!is_keyword(k)) fail(std::string("expected ") + k);
    ++p_;
  }
  bool punct(const char* s) {
    if (cur().kind == T::Punct && cur().text == s) {
      ++p_;
      return true;
    }
    return false;
  }
  void expect(const char* s) {
    if (!punct(s)) fail(std::string("expected '") + s + "'");
  }
  std::string ident() {
    if (cur().kind != T::Ident) fail("expected identifier");
    return t_[p_++].text;
  }
  ColumnRef column_ref() {
    ColumnRef r;
    r.table = ident();
    expect(".");
    r.column = ident();
    return r;
  }

  SelectItem aggregate(AggFn fn, bool coalesce) {
    SelectItem s;
    s.kind = SelectItem::Kind::Aggregate;
    s.fn = fn;
    s.coalesce_zero = coalesce;
    expect("(");
    if (fn == AggFn::Count) {
      expect("*");
    } else {
      s.ref = column_ref();
    }
    expect(")");
    return s;
  }

  SelectItem select_item() {
    if (is_keyword("COALESCE")) {
      ++p_;
      expect("(");
      keyword("SUM");
      SelectItem s = aggregate(AggFn::Sum, true);
      expect(",");
      if (cur().kind != T::Int || cur().value != 0) fail("expected 0");
      ++p_;
      expect(")");
      return s;
    }
    if (is_keyword("COUNT")) return ++p_, aggregate(AggFn::Count, false);
    if (is_keyword("SUM")) return ++p_, aggregate(AggFn::Sum, false);
    if (is_keyword("MIN")) return ++p_, aggregate(AggFn::Min, false);
    if (is_keyword("MAX")) return ++p_, aggregate(AggFn::Max, false);
    SelectItem s;
    s.ref.table = ident();
    expect(".");
    if (punct("*")) {
      s.kind = SelectItem::Kind::Star;
      return s;
    }
    s.kind = SelectItem::Kind::Column;
    s.ref.column = ident();
    return s;
  }

  Condition connective(Condition::Kind kind, const char* word, Condition (Reader::*next)()) {
    Condition first = (this->*next)();
    if (!is_keyword(word)) return first;
    Condition c;
    c.kind = kind;
    c.kids.push_back(std::move(first));
    while (is_keyword(word)) {
      ++p_;
      c.kids.push_back((this->*next)());
    }
    return c;
  }

  Condition disjunction() { return connective(Condition::Kind::Or, "OR", &Reader::conjunction); }
  Condition conjunction() { return connective(Condition::Kind::And, "AND", &Reader::primary); }

  Condition primary() {
    Condition c;
    if (is_keyword("TRUE")) {
      ++p_;
      return c;
    }
    if (is_keyword("NOT")) {
      ++p_;
      c.kind = Condition::Kind::Not;
      expect("(");
      c.kids.push_back(disjunction());
      expect(")");
      return c;
    }
    if (punct("(")) {
      Condition inner = disjunction();
      expect(")");
      return inner;
    }
    c.kind = Condition::Kind::Cmp;
    c.lhs = operand();
    if (cur().kind != T::Punct) fail("expected comparison");
    const std::string& op = cur().text;
    if (op == "=") c.op = tor::CmpOp::Eq;
    else if (op == "<>") c.op = tor::CmpOp::Ne;
    else if (op == "<") c.op = tor::CmpOp::Lt;
    else if (op == "<=") c.op = tor::CmpOp::Le;
    else if (op == ">") c.op = tor::CmpOp::Gt;
    else if (op == ">=") c.op = tor::CmpOp::Ge;
    else fail("expected comparison");
    ++p_;
    c.rhs = operand();
    return c;
  }

  Operand operand() {
    Operand o;
    switch (cur().kind) {
      case T::Int:
        o.kind = Operand::Kind::Int;
        o.int_value = t_[p_++].value;
        return o;
      case T::Str:
        o.kind = Operand::Kind::Text;
        o.text = t_[p_++].text;
        return o;
      case T::Param:
        o.kind = Operand::Kind::Param;
        o.text = t_[p_++].text;
        return o;
      case T::Ident:
        o.kind = Operand::Kind::Column;
        o.ref = column_ref();
        return o;
      default:
        fail("expected operand");
    }
  }

  std::vector<Tok> t_;
  std::size_t p_ = 0;
};

}  // namespace

std::string render(const SqlQuery& q) {
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out += ", ";
    out += select_item(q.select[i]);
  }
  out += " FROM ";
  for (std::size_t i = 0; i < q.from.size(); ++i) {
    if (i) out += ", ";
    out += q.from[i];
  }
  if (q.where) out += " WHERE " + condition(*q.where);
  if (!q.order_by.empty()) {
    out += " ORDER BY ";
    for (std::size_t i = 0; i < q.order_by.size(); ++i) {
      if (i) out += ", ";
      out += ref(q.order_by[i]);
    }
  }
  if (q.limit) out += " LIMIT " + (q.limit->value ? std::to_string(*q.limit->value) : ":" + q.limit->param);
  return out;
}

SqlQuery parse_sql(std::string_view text) {
  Reader r(lex(text));
  return r.query();
}

}  // namespace relsynth::emit
