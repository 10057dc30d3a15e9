#include <algorithm>
#include <map>
#include <set>

#include "relsynth/frontend.hpp"

namespace relsynth::frontend {

TypeCheckError::TypeCheckError(std::vector<TypeError> errors)
    : std::runtime_error([&] {
        std::string msg = "type errors:";
        for (const auto& e : errors)
          msg += "\n  " + std::to_string(e.loc.line) + ":" + std::to_string(e.loc.column) + ": " +
                 e.message;
        return msg;
      }()),
      errors_(std::move(errors)) {}

int TypedProgram::slot_of(const std::string& name) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].name == name) return static_cast<int>(i);
  return -1;
}

std::span<const Stmt> TypedProgram::body_of(int loop_id) const {
  return loops.at(static_cast<std::size_t>(loop_id)).stmt->body;
}

LoopSplit TypedProgram::split(int loop_id) const {
  const LoopInfo& loop = loops.at(static_cast<std::size_t>(loop_id));
  std::span<const Stmt> outer =
      loop.parent < 0 ? std::span<const Stmt>(ast->body) : body_of(loop.parent);
  for (std::size_t k = 0; k < outer.size(); ++k) {
    if (&outer[k] == loop.stmt) return {outer.subspan(0, k), outer.subspan(k + 1)};
  }
  throw std::logic_error("loop statement not found in its parent");
}

namespace {

struct LoopScope {
  std::string index;
  std::string relation;
  int index_slot;
};

class Checker {
 public:
  explicit Checker(Program& p) : p_(p) {}

  std::vector<TypeError> run(std::vector<SlotInfo>& slots, std::vector<int>& carried,
                             int& result_slot) {
    std::set<std::string> seen;
    for (auto& param : p_.params) {
      if (!seen.insert(param.name).second)
        error(param.loc, "duplicate identifier '" + param.name + "'");
      SlotInfo s;
      s.name = param.name;
      s.is_param = true;
      switch (param.kind) {
        case ParamKind::Rel:
          s.type = TypeKind::Relation;
          check_schema(param.schema, param.loc);
          s.schema = make_schema(param.schema);
          break;
        case ParamKind::Int: s.type = TypeKind::Int; break;
        case ParamKind::Text: s.type = TypeKind::Text; break;
      }
      add_slot(std::move(s));
    }
    for (auto& d : p_.decls) {
      if (!seen.insert(d.name).second) error(d.loc, "duplicate identifier '" + d.name + "'");
      SlotInfo s;
      s.name = d.name;
      switch (d.kind) {
        case DeclKind::List:
          s.type = TypeKind::List;
          check_schema(d.schema, d.loc);
          s.schema = make_schema(d.schema);
          break;
        case DeclKind::Int: s.type = TypeKind::Int; break;
        case DeclKind::Text: s.type = TypeKind::Text; break;
        case DeclKind::OptInt: s.type = TypeKind::OptInt; break;
      }
      if (d.init) {
        TypeKind want = d.kind == DeclKind::Int ? TypeKind::Int : TypeKind::Text;
        TypeKind got = expr(*d.init);
        if (got != want)
          error(d.init->loc, "type mismatch: initializer of '" + d.name + "' has type " +
                                 to_string(got) + ", expected " + to_string(want));
      }
      add_slot(std::move(s));
    }
    locals_end_ = static_cast<int>(slots_.size());
    body(p_.body, /*in_loop_body=*/false);

    auto it = names_.find(p_.result);
    if (it == names_.end()) {
      error(p_.result_loc, "undeclared identifier '" + p_.result + "'");
    } else if (it->second < param_count() || it->second >= locals_end_) {
      error(p_.result_loc, "illegal result: '" + p_.result + "' is not a local variable");
    } else {
      result_slot = it->second;
    }
    slots = slots_;
    carried.assign(carried_.begin(), carried_.end());
    return errors_;
  }

 private:
  int param_count() const { return static_cast<int>(p_.params.size()); }

  void error(SourceLoc loc, std::string msg) { errors_.push_back({loc, std::move(msg)}); }

  void add_slot(SlotInfo s) {
    names_.emplace(s.name, static_cast<int>(slots_.size()));
    slots_.push_back(std::move(s));
  }

  void check_schema(const Schema& s, SourceLoc loc) {
    std::set<std::string> names;
    for (const auto& c : s)
      if (!names.insert(c.name).second) error(loc, "duplicate field '" + c.name + "'");
  }

  const SlotInfo* lookup(const std::string& name, int* slot) {
    auto it = names_.find(name);
    if (it == names_.end()) return nullptr;
    // Loop indices are only visible inside their loop.
    if (slots_[static_cast<std::size_t>(it->second)].is_index) {
      bool in_scope = std::any_of(loops_.begin(), loops_.end(),
                                  [&](const LoopScope& l) { return l.index == name; });
      if (!in_scope) return nullptr;
    }
    *slot = it->second;
    return &slots_[static_cast<std::size_t>(it->second)];
  }

  const LoopScope* loop_over(const std::string& index) const {
    for (const auto& l : loops_)
      if (l.index == index) return &l;
    return nullptr;
  }

  // Resolves `R[i]`; returns the relation slot or -1.
  int indexed_relation(const std::string& rel, const std::string& index, SourceLoc loc,
                       int* index_slot) {
    int slot = -1;
    const SlotInfo* r = lookup(rel, &slot);
    if (!r) {
      error(loc, "undeclared identifier '" + rel + "'");
      return -1;
    }
    if (r->type != TypeKind::Relation) {
      error(loc, "type mismatch: '" + rel + "' is not a relation parameter");
      return -1;
    }
    const LoopScope* l = loop_over(index);
    if (!l) {
      int dummy;
      if (!lookup(index, &dummy))
        error(loc, "undeclared identifier '" + index + "'");
      else
        error(loc, "illegal index: '" + index + "' is not an enclosing loop index");
      return -1;
    }
    if (l->relation != rel) {
      error(loc, "illegal index: loop index '" + index + "' ranges over '" + l->relation +
                     "', not '" + rel + "'");
      return -1;
    }
    *index_slot = l->index_slot;
    return slot;
  }

  TypeKind expr(Expr& e) {
    e.type = infer(e);
    return e.type;
  }

  TypeKind infer(Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return TypeKind::Int;
      case ExprKind::TextLit: return TypeKind::Text;
      case ExprKind::Var: {
        int slot = -1;
        const SlotInfo* s = lookup(e.name, &slot);
        if (!s) {
          error(e.loc, "undeclared identifier '" + e.name + "'");
          return TypeKind::Int;
        }
        e.slot = slot;
        if (s->type == TypeKind::Relation || s->type == TypeKind::List) {
          error(e.loc, "type mismatch: '" + e.name + "' is not a scalar");
          return TypeKind::Int;
        }
        return s->type;
      }
      case ExprKind::Field: {
        int index_slot = -1;
        int slot = indexed_relation(e.name, e.index, e.loc, &index_slot);
        if (slot < 0) return TypeKind::Int;
        const Schema& schema = *slots_[static_cast<std::size_t>(slot)].schema;
        for (std::size_t c = 0; c < schema.size(); ++c) {
          if (schema[c].name == e.field) {
            e.slot = slot;
            e.index_slot = index_slot;
            e.column = static_cast<int>(c);
            return schema[c].type == FieldType::Int ? TypeKind::Int : TypeKind::Text;
          }
        }
        error(e.loc, "unknown field '" + e.field + "' of '" + e.name + "'");
        return TypeKind::Int;
      }
      case ExprKind::Binary: {
        TypeKind l = expr(e.args[0]);
        TypeKind r = expr(e.args[1]);
        switch (e.op) {
          case BinOp::Add:
          case BinOp::Sub:
            if (l != TypeKind::Int || r != TypeKind::Int)
              error(e.loc, std::string("type mismatch: '") + spelling(e.op) +
                               "' requires int operands, got " + to_string(l) + " and " +
                               to_string(r));
            return TypeKind::Int;
          case BinOp::And:
          case BinOp::Or:
            if (l != TypeKind::Bool || r != TypeKind::Bool)
              error(e.loc, std::string("type mismatch: '") + spelling(e.op) +
                               "' requires bool operands");
            return TypeKind::Bool;
          default:
            if (l != r || (l != TypeKind::Int && l != TypeKind::Text)) {
              error(e.loc, std::string("type mismatch: cannot compare ") + to_string(l) +
                               " with " + to_string(r));
            } else if (l == TypeKind::Text && e.op != BinOp::Eq && e.op != BinOp::Ne) {
              error(e.loc, std::string("type mismatch: text supports only == and !=, not '") +
                               spelling(e.op) + "'");
            }
            return TypeKind::Bool;
        }
      }
      case ExprKind::Not:
        if (expr(e.args[0]) != TypeKind::Bool)
          error(e.loc, "type mismatch: '!' requires a bool operand");
        return TypeKind::Bool;
      case ExprKind::Min:
      case ExprKind::Max:
        error(e.loc,
              "type mismatch: min/max may only appear as an accumulator update of an opt int");
        for (auto& a : e.args) expr(a);
        return TypeKind::Int;
    }
    return TypeKind::Int;
  }

  void body(std::vector<Stmt>& stmts, bool in_loop_body) {
    int loops_here = 0;
    for (std::size_t k = 0; k < stmts.size(); ++k) {
      Stmt& s = stmts[k];
      if (s.kind == StmtKind::For && ++loops_here > 1)
        error(s.loc, "illegal loop shape: at most one loop per block");
      bool tail = in_loop_body && k + 1 == stmts.size();
      stmt(s, tail);
    }
  }

  bool is_guarded_break(const Stmt& s) const {
    return s.kind == StmtKind::If && s.body.size() == 1 && s.body[0].kind == StmtKind::Break;
  }

  void mark_carried(int slot) {
    if (!loops_.empty()) carried_.insert(slot);
  }

  void stmt(Stmt& s, bool loop_tail) {
    switch (s.kind) {
      case StmtKind::Assign: assign(s); break;
      case StmtKind::Append: append(s); break;
      case StmtKind::Break:
        error(s.loc, "break not in guarded tail position");
        break;
      case StmtKind::If: {
        if (expr(s.value) != TypeKind::Bool)
          error(s.value.loc, "type mismatch: condition must be bool");
        if (is_guarded_break(s)) {
          if (!loop_tail || loops_.empty()) error(s.loc, "break not in guarded tail position");
          break;
        }
        ++if_depth_;
        for (auto& b : s.body) stmt(b, false);
        --if_depth_;
        break;
      }
      case StmtKind::For: loop(s); break;
    }
  }

  void assign(Stmt& s) {
    int slot = -1;
    const SlotInfo* t = lookup(s.target, &slot);
    if (!t) {
      error(s.loc, "undeclared identifier '" + s.target + "'");
      return;
    }
    if (t->is_param || t->is_index) {
      error(s.loc, "illegal assignment: '" + s.target + "' is not a local variable");
      return;
    }
    s.slot = slot;
    mark_carried(slot);
    if (t->type == TypeKind::List) {
      error(s.loc, "type mismatch: cannot assign to list '" + s.target + "'");
      return;
    }
    if (t->type == TypeKind::OptInt) {
      Expr& v = s.value;
      bool shape = (v.kind == ExprKind::Min || v.kind == ExprKind::Max) &&
                   v.args[0].kind == ExprKind::Var && v.args[0].name == s.target;
      if (!shape) {
        error(s.loc, "type mismatch: opt int '" + s.target + "' may only be updated as '" +
                         s.target + " = min(" + s.target + ", e)' or max");
        return;
      }
      v.args[0].slot = slot;
      v.args[0].type = TypeKind::OptInt;
      if (expr(v.args[1]) != TypeKind::Int)
        error(v.args[1].loc, "type mismatch: accumulator operand must be int");
      v.type = TypeKind::OptInt;
      return;
    }
    TypeKind got = expr(s.value);
    if (got != t->type)
      error(s.loc, "type mismatch: cannot assign " + to_string(got) + " to " + to_string(t->type) +
                       " '" + s.target + "'");
  }

  void append(Stmt& s) {
    int slot = -1;
    const SlotInfo* t = lookup(s.target, &slot);
    if (!t) {
      error(s.loc, "undeclared identifier '" + s.target + "'");
      return;
    }
    if (t->type != TypeKind::List) {
      error(s.loc, "type mismatch: '" + s.target + "' is not a list");
      return;
    }
    s.slot = slot;
    mark_carried(slot);
    const Schema& want = *t->schema;
    RecordExpr& r = s.record;
    if (r.whole_row) {
      int index_slot = -1;
      int rel = indexed_relation(r.relation, r.index, r.loc, &index_slot);
      if (rel < 0) return;
      r.slot = rel;
      r.index_slot = index_slot;
      if (*slots_[static_cast<std::size_t>(rel)].schema != want)
        error(r.loc, "type mismatch: schema of '" + r.relation + "' " +
                         to_string(*slots_[static_cast<std::size_t>(rel)].schema) +
                         " differs from list schema " + to_string(want));
      return;
    }
    bool names_ok = r.fields.size() == want.size();
    for (std::size_t i = 0; i < r.fields.size(); ++i) {
      TypeKind got = expr(r.fields[i].second);
      if (i < want.size()) {
        if (r.fields[i].first != want[i].name) names_ok = false;
        TypeKind need = want[i].type == FieldType::Int ? TypeKind::Int : TypeKind::Text;
        if (got != need)
          error(r.fields[i].second.loc, "type mismatch: field '" + r.fields[i].first +
                                            "' has type " + to_string(got) + ", expected " +
                                            to_string(need));
      }
    }
    if (!names_ok)
      error(r.loc, "type mismatch: record fields do not match list schema " + to_string(want));
  }

  void loop(Stmt& s) {
    if (if_depth_ > 0) error(s.loc, "illegal loop shape: loop inside a conditional");
    if (loops_.size() >= 2) {
      error(s.loc, "nesting depth exceeded");
      return;
    }
    int rel_slot = -1;
    const SlotInfo* r = lookup(s.relation, &rel_slot);
    if (!r) {
      error(s.loc, "undeclared identifier '" + s.relation + "'");
    } else if (r->type != TypeKind::Relation) {
      error(s.loc, "illegal loop shape: '" + s.relation + "' is not a relation parameter");
    } else if (!loops_.empty() && loops_[0].relation == s.relation) {
      error(s.loc, "illegal loop shape: nested loop must traverse a different relation");
    }
    if (names_.count(s.target)) {
      error(s.loc, "duplicate identifier '" + s.target + "'");
      return;
    }
    SlotInfo idx;
    idx.name = s.target;
    idx.type = TypeKind::Int;
    idx.is_index = true;
    int index_slot = static_cast<int>(slots_.size());
    add_slot(std::move(idx));
    s.slot = index_slot;
    s.rel_slot = rel_slot;
    s.loop_id = loop_count_++;
    loops_.push_back({s.target, s.relation, index_slot});
    int saved_if = if_depth_;
    if_depth_ = 0;
    body(s.body, true);
    if_depth_ = saved_if;
    loops_.pop_back();
  }

  Program& p_;
  std::vector<SlotInfo> slots_;
  std::map<std::string, int> names_;
  std::vector<TypeError> errors_;
  std::set<int> carried_;
  int locals_end_ = 0;
  int if_depth_ = 0;
  int loop_count_ = 0;
  std::vector<LoopScope> loops_;
};

}  // namespace

TypedProgram typecheck(const Program& ast) {
  auto program = std::make_shared<Program>(ast);
  TypedProgram tp;
  Checker checker(*program);
  std::vector<TypeError> errors = checker.run(tp.slots, tp.loop_carried, tp.result_slot);
  if (!errors.empty()) throw TypeCheckError(std::move(errors));
  tp.ast = program;
  tp.param_count = static_cast<int>(program->params.size());

  const Stmt* outer = nullptr;
  for (const auto& s : program->body)
    if (s.kind == StmtKind::For) outer = &s;
  if (outer) {
    auto describe = [&](const Stmt& s, int depth, int parent) {
      LoopInfo l;
      l.id = s.loop_id;
      l.label = "L" + std::to_string(s.loop_id);
      l.index = s.target;
      l.relation = s.relation;
      l.index_slot = s.slot;
      l.rel_slot = s.rel_slot;
      l.depth = depth;
      l.parent = parent;
      l.stmt = &s;
      l.has_break = !s.body.empty() && s.body.back().kind == StmtKind::If &&
                    s.body.back().body.size() == 1 &&
                    s.body.back().body[0].kind == StmtKind::Break;
      return l;
    };
    tp.loops.push_back(describe(*outer, 1, -1));
    for (const auto& s : outer->body)
      if (s.kind == StmtKind::For) tp.loops.push_back(describe(s, 2, 0));
  }
  return tp;
}

}  // namespace relsynth::frontend
