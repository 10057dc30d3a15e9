#include "relsynth/synth.hpp"

namespace relsynth::synth {

using frontend::BinOp;
using frontend::ExprKind;
using frontend::Stmt;
using frontend::StmtKind;
using frontend::TypeKind;

int Template::nesting() const {
  int d = 0;
  for (const auto& l : loops) d = std::max(d, l.depth);
  return d;
}

namespace {

std::optional<tor::CmpOp> cmp_of(BinOp op) {
  switch (op) {
    case BinOp::Eq: return tor::CmpOp::Eq;
    case BinOp::Ne: return tor::CmpOp::Ne;
    case BinOp::Lt: return tor::CmpOp::Lt;
    case BinOp::Le: return tor::CmpOp::Le;
    case BinOp::Gt: return tor::CmpOp::Gt;
    case BinOp::Ge: return tor::CmpOp::Ge;
    default: return std::nullopt;
  }
}

class Scanner {
 public:
  Scanner(const frontend::TypedProgram& prog, Template& tpl) : prog_(prog), tpl_(tpl) {}

  void expr(const frontend::Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: tpl_.int_constants.insert(e.int_value); break;
      case ExprKind::TextLit: tpl_.text_constants.insert(e.name); break;
      case ExprKind::Binary:
        if (auto c = cmp_of(e.op)) tpl_.cmps.insert(*c);
        break;
      default: break;
    }
    for (const auto& a : e.args) expr(a);
  }

  void stmts(const std::vector<Stmt>& body) {
    for (const auto& s : body) stmt(s);
  }

 private:
  bool is_self(const frontend::Expr& e, int slot) const { return e.kind == ExprKind::Var && e.slot == slot; }

  void accumulator(const Stmt& s) {
    TypeKind t = prog_.slots[static_cast<std::size_t>(s.slot)].type;
    const auto& v = s.value;
    if (t == TypeKind::OptInt) {
      if (v.kind == ExprKind::Min) tpl_.agg_kinds.insert(tor::AggKind::Min);
      if (v.kind == ExprKind::Max) tpl_.agg_kinds.insert(tor::AggKind::Max);
      return;
    }
    if (t != TypeKind::Int || v.kind != ExprKind::Binary || v.op != BinOp::Add) return;
    const frontend::Expr* step = nullptr;
    if (is_self(v.args[0], s.slot)) step = &v.args[1];
    else if (is_self(v.args[1], s.slot)) step = &v.args[0];
    if (!step) return;
    bool unit = step->kind == ExprKind::IntLit && step->int_value == 1;
    tpl_.agg_kinds.insert(unit ? tor::AggKind::Count : tor::AggKind::Sum);
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Assign:
        expr(s.value);
        accumulator(s);
        break;
      case StmtKind::Append:
        tpl_.has_append = true;
        for (const auto& [name, e] : s.record.fields) expr(e);
        break;
      case StmtKind::If:
        expr(s.value);
        stmts(s.body);
        break;
      case StmtKind::For: stmts(s.body); break;
      case StmtKind::Break: tpl_.has_break = true; break;
    }
  }

  const frontend::TypedProgram& prog_;
  Template& tpl_;
};

}  // namespace

Template extract_template(const frontend::TypedProgram& prog) {
  Template tpl;
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& s = prog.slots[static_cast<std::size_t>(p)];
    if (s.type == TypeKind::Relation) tpl.relations.emplace_back(s.name, *s.schema);
    else tpl.scalar_params.emplace_back(s.name, s.type == TypeKind::Int ? FieldType::Int : FieldType::Text);
  }
  Scanner scan(prog, tpl);
  for (const auto& d : prog.program().decls)
    if (d.init) scan.expr(*d.init);
  scan.stmts(prog.program().body);

  for (const auto& l : prog.loops) tpl.loops.push_back({l.id, l.label, l.index, l.relation, l.depth, l.has_break});

  std::set<int> slots(prog.loop_carried.begin(), prog.loop_carried.end());
  slots.insert(prog.result_slot);
  for (int slot : slots) {
    const auto& info = prog.slots[static_cast<std::size_t>(slot)];
    bool carried = std::find(prog.loop_carried.begin(), prog.loop_carried.end(), slot) != prog.loop_carried.end();
    tpl.targets.push_back({slot, info.name, info.type, info.schema, carried});
  }
  return tpl;
}

}  // namespace relsynth::synth
