#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "relsynth/frontend.hpp"

namespace relsynth::frontend {

ParseError::ParseError(SourceLoc loc, const std::string& msg)
    : std::runtime_error("parse error at " + std::to_string(loc.line) + ":" +
                         std::to_string(loc.column) + ": " + msg),
      loc_(loc),
      detail_(msg) {}

namespace {

enum class Tok {
  Ident, Int, String,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Semi, Colon, Dot, DotDot,
  Assign, EqEq, NotEq, Lt, Le, Gt, Ge, Plus, Minus, Bang, AndAnd, OrOr,
  End
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
        if (ec != std::errc()) throw ParseError(t.loc, "integer literal out of range");
      } else if (c == '"') {
        advance();
        t.kind = Tok::String;
        for (;;) {
          if (pos_ >= src_.size() || src_[pos_] == '\n')
            throw ParseError(t.loc, "unterminated string literal");
          char d = src_[pos_];
          advance();
          if (d == '"') break;
          if (d == '\\') {
            if (pos_ >= src_.size()) throw ParseError(t.loc, "unterminated string literal");
            char e = src_[pos_];
            advance();
            if (e == 'n') t.text += '\n';
            else if (e == '"' || e == '\\') t.text += e;
            else throw ParseError(t.loc, "unknown escape sequence");
          } else {
            t.text += d;
          }
        }
      } else {
        t.kind = punct(t.loc);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool peek_is(char c, std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() && src_[pos_ + ahead] == c;
  }

  void skip_space() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
      if (peek_is('/') && peek_is('/', 1)) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      return;
    }
  }

  Tok punct(SourceLoc loc) {
    char c = src_[pos_];
    auto two = [&](char next, Tok yes, Tok no) {
      advance();
      if (peek_is(next)) {
        advance();
        return yes;
      }
      return no;
    };
    switch (c) {
      case '(': advance(); return Tok::LParen;
      case ')': advance(); return Tok::RParen;
      case '{': advance(); return Tok::LBrace;
      case '}': advance(); return Tok::RBrace;
      case '[': advance(); return Tok::LBracket;
      case ']': advance(); return Tok::RBracket;
      case ',': advance(); return Tok::Comma;
      case ';': advance(); return Tok::Semi;
      case ':': advance(); return Tok::Colon;
      case '+': advance(); return Tok::Plus;
      case '-': advance(); return Tok::Minus;
      case '.': return two('.', Tok::DotDot, Tok::Dot);
      case '=': return two('=', Tok::EqEq, Tok::Assign);
      case '<': return two('=', Tok::Le, Tok::Lt);
      case '>': return two('=', Tok::Ge, Tok::Gt);
      case '!': return two('=', Tok::NotEq, Tok::Bang);
      case '&':
        if (peek_is('&', 1)) {
          advance();
          advance();
          return Tok::AndAnd;
        }
        break;
      case '|':
        if (peek_is('|', 1)) {
          advance();
          advance();
          return Tok::OrOr;
        }
        break;
      default:
        break;
    }
    throw ParseError(loc, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::DotDot: return "'..'";
    case Tok::Assign: return "'='";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Bang: return "'!'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    p.loc = cur().loc;
    keyword("fn");
    p.name = ident();
    expect(Tok::LParen);
    if (!at(Tok::RParen)) {
      do {
        p.params.push_back(param());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen);
    expect(Tok::LBrace);
    while (at_keyword("var")) p.decls.push_back(decl());
    while (!at_keyword("return")) {
      if (at(Tok::End) || at(Tok::RBrace)) fail("expected statement or 'return'");
      p.body.push_back(stmt());
    }
    keyword("return");
    p.result_loc = cur().loc;
    p.result = ident();
    expect(Tok::Semi);
    expect(Tok::RBrace);
    if (!at(Tok::End)) fail("trailing input after function");
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_keyword(const char* kw) const { return at(Tok::Ident) && cur().text == kw; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string found = t.kind == Tok::Ident ? "'" + t.text + "'" : tok_name(t.kind);
    throw ParseError(t.loc, msg + ", found " + found);
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    ++pos_;
    return true;
  }

  Token expect(Tok k) {
    if (!at(k)) fail(std::string("expected ") + tok_name(k));
    return toks_[pos_++];
  }

  void keyword(const char* kw) {
    if (!at_keyword(kw)) fail(std::string("expected '") + kw + "'");
    ++pos_;
  }

  std::string ident() { return expect(Tok::Ident).text; }

  FieldType field_type() {
    if (at_keyword("int")) {
      ++pos_;
      return FieldType::Int;
    }
    if (at_keyword("text")) {
      ++pos_;
      return FieldType::Text;
    }
    fail("expected field type 'int' or 'text'");
  }

  Schema field_list() {
    expect(Tok::LParen);
    Schema s;
    do {
      Column c;
      c.name = ident();
      expect(Tok::Colon);
      c.type = field_type();
      s.push_back(std::move(c));
    } while (accept(Tok::Comma));
    expect(Tok::RParen);
    return s;
  }

  Param param() {
    Param p;
    p.loc = cur().loc;
    p.name = ident();
    expect(Tok::Colon);
    if (at_keyword("rel")) {
      ++pos_;
      p.kind = ParamKind::Rel;
      p.schema = field_list();
    } else if (at_keyword("int")) {
      ++pos_;
      p.kind = ParamKind::Int;
    } else if (at_keyword("text")) {
      ++pos_;
      p.kind = ParamKind::Text;
    } else {
      fail("expected parameter type");
    }
    return p;
  }

  Decl decl() {
    Decl d;
    d.loc = cur().loc;
    keyword("var");
    d.name = ident();
    expect(Tok::Colon);
    if (at_keyword("list")) {
      ++pos_;
      d.kind = DeclKind::List;
      d.schema = field_list();
    } else if (at_keyword("opt")) {
      ++pos_;
      keyword("int");
      d.kind = DeclKind::OptInt;
    } else if (at_keyword("int") || at_keyword("text")) {
      d.kind = at_keyword("int") ? DeclKind::Int : DeclKind::Text;
      ++pos_;
      expect(Tok::Assign);
      d.init = expr();
    } else {
      fail("expected declaration type");
    }
    expect(Tok::Semi);
    return d;
  }

  std::vector<Stmt> block() {
    expect(Tok::LBrace);
    std::vector<Stmt> out;
    while (!at(Tok::RBrace)) {
      if (at(Tok::End)) fail("expected '}'");
      out.push_back(stmt());
    }
    expect(Tok::RBrace);
    return out;
  }

  Stmt stmt() {
    Stmt s;
    s.loc = cur().loc;
    if (at_keyword("for")) {
      ++pos_;
      s.kind = StmtKind::For;
      s.target = ident();
      keyword("in");
      Token zero = expect(Tok::Int);
      if (zero.value != 0) throw ParseError(zero.loc, "loop range must start at 0");
      expect(Tok::DotDot);
      keyword("size");
      expect(Tok::LParen);
      s.relation = ident();
      expect(Tok::RParen);
      s.body = block();
      return s;
    }
    if (at_keyword("if")) {
      ++pos_;
      s.kind = StmtKind::If;
      s.value = expr();
      s.body = block();
      return s;
    }
    if (at_keyword("break")) {
      ++pos_;
      s.kind = StmtKind::Break;
      expect(Tok::Semi);
      return s;
    }
    s.target = ident();
    if (accept(Tok::Dot)) {
      if (!at_keyword("append")) fail("expected 'append'");
      ++pos_;
      s.kind = StmtKind::Append;
      expect(Tok::LParen);
      s.record = record();
      expect(Tok::RParen);
      expect(Tok::Semi);
      return s;
    }
    expect(Tok::Assign);
    s.kind = StmtKind::Assign;
    s.value = expr();
    expect(Tok::Semi);
    return s;
  }

  RecordExpr record() {
    RecordExpr r;
    r.loc = cur().loc;
    if (accept(Tok::LBrace)) {
      do {
        std::string name = ident();
        expect(Tok::Colon);
        r.fields.emplace_back(std::move(name), expr());
      } while (accept(Tok::Comma));
      expect(Tok::RBrace);
      return r;
    }
    r.whole_row = true;
    r.relation = ident();
    expect(Tok::LBracket);
    r.index = ident();
    expect(Tok::RBracket);
    return r;
  }

  Expr binary(BinOp op, Expr lhs, Expr rhs, SourceLoc loc) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.op = op;
    e.loc = loc;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (at(Tok::OrOr)) {
      SourceLoc loc = cur().loc;
      ++pos_;
      lhs = binary(BinOp::Or, std::move(lhs), and_expr(), loc);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = unary();
    while (at(Tok::AndAnd)) {
      SourceLoc loc = cur().loc;
      ++pos_;
      lhs = binary(BinOp::And, std::move(lhs), unary(), loc);
    }
    return lhs;
  }

  Expr unary() {
    if (at(Tok::Bang)) {
      Expr e;
      e.kind = ExprKind::Not;
      e.loc = cur().loc;
      ++pos_;
      e.args.push_back(unary());
      return e;
    }
    return comparison();
  }

  Expr comparison() {
    Expr lhs = sum();
    BinOp op;
    switch (cur().kind) {
      case Tok::EqEq: op = BinOp::Eq; break;
      case Tok::NotEq: op = BinOp::Ne; break;
      case Tok::Lt: op = BinOp::Lt; break;
      case Tok::Le: op = BinOp::Le; break;
      case Tok::Gt: op = BinOp::Gt; break;
      case Tok::Ge: op = BinOp::Ge; break;
      default: return lhs;
    }
    SourceLoc loc = cur().loc;
    ++pos_;
    return binary(op, std::move(lhs), sum(), loc);
  }

  Expr sum() {
    Expr lhs = atom();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinOp op = at(Tok::Plus) ? BinOp::Add : BinOp::Sub;
      SourceLoc loc = cur().loc;
      ++pos_;
      lhs = binary(op, std::move(lhs), atom(), loc);
    }
    return lhs;
  }

  Expr atom() {
    Expr e;
    e.loc = cur().loc;
    if (at(Tok::Minus)) {
      ++pos_;
      Token t = expect(Tok::Int);
      e.kind = ExprKind::IntLit;
      e.int_value = -t.value;
      return e;
    }
    if (at(Tok::Int)) {
      e.kind = ExprKind::IntLit;
      e.int_value = cur().value;
      ++pos_;
      return e;
    }
    if (at(Tok::String)) {
      e.kind = ExprKind::TextLit;
      e.name = cur().text;
      ++pos_;
      return e;
    }
    if (accept(Tok::LParen)) {
      Expr inner = expr();
      expect(Tok::RParen);
      return inner;
    }
    if ((at_keyword("min") || at_keyword("max")) && toks_[pos_ + 1].kind == Tok::LParen) {
      e.kind = at_keyword("min") ? ExprKind::Min : ExprKind::Max;
      pos_ += 2;
      e.args.push_back(expr());
      expect(Tok::Comma);
      e.args.push_back(expr());
      expect(Tok::RParen);
      return e;
    }
    if (at(Tok::Ident)) {
      std::string name = ident();
      if (accept(Tok::LBracket)) {
        e.kind = ExprKind::Field;
        e.name = std::move(name);
        e.index = ident();
        expect(Tok::RBracket);
        expect(Tok::Dot);
        e.field = ident();
        return e;
      }
      e.kind = ExprKind::Var;
      e.name = std::move(name);
      return e;
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(std::string_view source) {
  Lexer lexer(source);
  Parser parser(lexer.run());
  return parser.program();
}

TypedProgram load_program(std::string_view source) { return typecheck(parse(source)); }

TypedProgram load_program_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str());
}

}  // namespace relsynth::frontend
