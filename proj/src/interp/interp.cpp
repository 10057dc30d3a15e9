#include "relsynth/interp.hpp"

#include <algorithm>

namespace relsynth::interp {

using frontend::BinOp;
using frontend::Expr;
using frontend::ExprKind;
using frontend::StmtKind;
using frontend::TypeKind;

namespace {

Relation empty_relation(const frontend::SlotInfo& s) { return Relation{s.schema, {}}; }

bool matches(const Value& v, const frontend::SlotInfo& s) {
  switch (s.type) {
    case TypeKind::Int: return std::holds_alternative<std::int64_t>(v);
    case TypeKind::Text: return std::holds_alternative<std::string>(v);
    case TypeKind::Relation: {
      const auto* r = std::get_if<Relation>(&v);
      if (!r) return false;
      return std::all_of(r->rows.begin(), r->rows.end(),
                         [&](const Row& row) { return conforms(row, *s.schema); });
    }
    default: return false;
  }
}

std::int64_t as_int(const Scalar& s) { return std::get<std::int64_t>(s); }

bool compare(BinOp op, const Scalar& a, const Scalar& b) {
  switch (op) {
    case BinOp::Eq: return a == b;
    case BinOp::Ne: return a != b;
    case BinOp::Lt: return a < b;
    case BinOp::Le: return a <= b;
    case BinOp::Gt: return a > b;
    case BinOp::Ge: return a >= b;
    default: return false;
  }
}

Scalar eval(const Expr& e, const Frame& f) {
  switch (e.kind) {
    case ExprKind::IntLit: return e.int_value;
    case ExprKind::TextLit: return e.name;
    case ExprKind::Var: {
      const Value& v = f.slots[static_cast<std::size_t>(e.slot)];
      if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
      return std::get<std::string>(v);
    }
    case ExprKind::Field: {
      const auto& rel = std::get<Relation>(f.slots[static_cast<std::size_t>(e.slot)]);
      auto idx = std::get<std::int64_t>(f.slots[static_cast<std::size_t>(e.index_slot)]);
      return rel.rows[static_cast<std::size_t>(idx)][static_cast<std::size_t>(e.column)];
    }
    case ExprKind::Binary: {
      if (e.op == BinOp::And) {
        if (!as_int(eval(e.args[0], f))) return std::int64_t{0};
        return std::int64_t{as_int(eval(e.args[1], f)) != 0};
      }
      if (e.op == BinOp::Or) {
        if (as_int(eval(e.args[0], f))) return std::int64_t{1};
        return std::int64_t{as_int(eval(e.args[1], f)) != 0};
      }
      Scalar a = eval(e.args[0], f);
      Scalar b = eval(e.args[1], f);
      if (e.op == BinOp::Add) return as_int(a) + as_int(b);
      if (e.op == BinOp::Sub) return as_int(a) - as_int(b);
      return std::int64_t{compare(e.op, a, b)};
    }
    case ExprKind::Not: return std::int64_t{as_int(eval(e.args[0], f)) == 0};
    case ExprKind::Min:
    case ExprKind::Max:
      break;
  }
  throw std::logic_error("unexpected expression in scalar context");
}

Value accumulate(const Expr& e, const Frame& f) {
  const auto& acc = std::get<OptInt>(f.slots[static_cast<std::size_t>(e.args[0].slot)]);
  std::int64_t x = as_int(eval(e.args[1], f));
  if (!acc) return OptInt{x};
  return OptInt{e.kind == ExprKind::Min ? std::min(*acc, x) : std::max(*acc, x)};
}

Value to_value(Scalar s) {
  if (auto* i = std::get_if<std::int64_t>(&s)) return *i;
  return std::get<std::string>(std::move(s));
}

class Executor {
 public:
  Executor(const TypedProgram& prog, Frame& frame, std::vector<LoopHeadState>* trace)
      : prog_(prog), frame_(frame), trace_(trace) {}

  Flow block(std::span<const Stmt> stmts) {
    for (const Stmt& s : stmts)
      if (stmt(s) == Flow::Break) return Flow::Break;
    return Flow::Normal;
  }

  void snapshot(const std::string& label) {
    LoopHeadState st;
    st.loop = label;
    for (const auto& [name, slot] : open_) {
      st.indices.emplace_back(
          name, std::get<std::int64_t>(frame_.slots[static_cast<std::size_t>(slot)]));
    }
    for (int s = prog_.param_count; s < static_cast<int>(prog_.slots.size()); ++s) {
      const auto& info = prog_.slots[static_cast<std::size_t>(s)];
      if (info.is_index) continue;
      st.vars.emplace_back(info.name, frame_.slots[static_cast<std::size_t>(s)]);
    }
    trace_->push_back(std::move(st));
  }

 private:
  Flow stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign: {
        auto& slot = frame_.slots[static_cast<std::size_t>(s.slot)];
        if (s.value.kind == ExprKind::Min || s.value.kind == ExprKind::Max)
          slot = accumulate(s.value, frame_);
        else
          slot = to_value(eval(s.value, frame_));
        return Flow::Normal;
      }
      case StmtKind::Append: {
        Row row;
        if (s.record.whole_row) {
          const auto& rel = std::get<Relation>(frame_.slots[static_cast<std::size_t>(s.record.slot)]);
          auto idx = std::get<std::int64_t>(frame_.slots[static_cast<std::size_t>(s.record.index_slot)]);
          row = rel.rows[static_cast<std::size_t>(idx)];
        } else {
          row.reserve(s.record.fields.size());
          for (const auto& [name, e] : s.record.fields) row.push_back(eval(e, frame_));
        }
        std::get<Relation>(frame_.slots[static_cast<std::size_t>(s.slot)]).rows.push_back(std::move(row));
        return Flow::Normal;
      }
      case StmtKind::If:
        if (as_int(eval(s.value, frame_))) return block(s.body);
        return Flow::Normal;
      case StmtKind::Break:
        return Flow::Break;
      case StmtKind::For: {
        const auto n = static_cast<std::int64_t>(
            std::get<Relation>(frame_.slots[static_cast<std::size_t>(s.rel_slot)]).size());
        auto& index = frame_.slots[static_cast<std::size_t>(s.slot)];
        if (trace_) open_.emplace_back(s.target, s.slot);
        for (std::int64_t i = 0;; ++i) {
          index = i;
          if (trace_) snapshot("L" + std::to_string(s.loop_id));
          if (i >= n) break;
          if (block(s.body) == Flow::Break) break;
        }
        if (trace_) open_.pop_back();
        return Flow::Normal;
      }
    }
    return Flow::Normal;
  }

  const TypedProgram& prog_;
  Frame& frame_;
  std::vector<LoopHeadState>* trace_;
  std::vector<std::pair<std::string, int>> open_;
};

}  // namespace

std::vector<Value> arrange_inputs(const TypedProgram& prog, const Inputs& inputs) {
  std::vector<Value> args;
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& info = prog.slots[static_cast<std::size_t>(p)];
    auto it = inputs.find(info.name);
    if (it == inputs.end()) throw InputError("missing binding for parameter '" + info.name + "'");
    if (!matches(it->second, info))
      throw InputError("binding for '" + info.name + "' does not match its declared type");
    Value v = it->second;
    if (auto* r = std::get_if<Relation>(&v)) r->schema = info.schema;
    args.push_back(std::move(v));
  }
  for (const auto& [name, v] : inputs) {
    int slot = prog.slot_of(name);
    if (slot < 0 || slot >= prog.param_count) throw InputError("unknown parameter '" + name + "'");
  }
  return args;
}

Frame initial_frame(const TypedProgram& prog, std::span<const Value> args) {
  Frame f;
  f.slots.resize(prog.slots.size());
  for (std::size_t p = 0; p < args.size(); ++p) f.slots[p] = args[p];
  const auto& decls = prog.program().decls;
  for (std::size_t d = 0; d < decls.size(); ++d) {
    std::size_t slot = static_cast<std::size_t>(prog.param_count) + d;
    const auto& info = prog.slots[slot];
    switch (decls[d].kind) {
      case frontend::DeclKind::List: f.slots[slot] = empty_relation(info); break;
      case frontend::DeclKind::OptInt: f.slots[slot] = OptInt{}; break;
      default: f.slots[slot] = to_value(eval(*decls[d].init, f)); break;
    }
  }
  return f;
}

Flow exec(const TypedProgram& prog, std::span<const Stmt> stmts, Frame& frame) {
  Executor ex(prog, frame, nullptr);
  return ex.block(stmts);
}

Value run(const TypedProgram& prog, std::span<const Value> args) {
  Frame f = initial_frame(prog, args);
  exec(prog, prog.program().body, f);
  return f.slots[static_cast<std::size_t>(prog.result_slot)];
}

Value run(const TypedProgram& prog, const Inputs& inputs) {
  auto args = arrange_inputs(prog, inputs);
  return run(prog, std::span<const Value>(args));
}

std::vector<LoopHeadState> trace(const TypedProgram& prog, const Inputs& inputs) {
  auto args = arrange_inputs(prog, inputs);
  Frame f = initial_frame(prog, args);
  std::vector<LoopHeadState> out;
  Executor ex(prog, f, &out);
  ex.block(prog.program().body);
  ex.snapshot("exit");
  return out;
}

}  // namespace relsynth::interp
