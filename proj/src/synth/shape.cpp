#include <algorithm>

#include "relsynth/synth.hpp"

namespace relsynth::synth {

using frontend::TypeKind;
using tor::Expr;
using tor::Op;

namespace {

int position(const Schema& s, const Column& c) {
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s[k].qualifier == c.qualifier && s[k].name == c.name) return static_cast<int>(k);
  return -1;
}

class Shape {
 public:
  explicit Shape(const Template& tpl) : tpl_(tpl) {}

  bool atom(const Expr& p, const Schema& s) const {
    if (p->op() != Op::Cmp || !tpl_.cmps.count(p->cmp())) return false;
    const Expr& l = p->kid(0);
    const Expr& r = p->kid(1);
    if (l->op() != Op::Field) return false;
    int a = position(s, l->column());
    if (a < 0) return false;
    FieldType t = s[static_cast<std::size_t>(a)].type;
    bool sym = p->cmp() == tor::CmpOp::Eq || p->cmp() == tor::CmpOp::Ne;
    if (t == FieldType::Text && !sym) return false;
    switch (r->op()) {
      case Op::Field: {
        int b = position(s, r->column());
        if (b < 0 || b == a || s[static_cast<std::size_t>(b)].type != t) return false;
        return !sym || a < b;
      }
      case Op::IntLit: return t == FieldType::Int && tpl_.int_constants.count(r->int_value());
      case Op::TextLit: return t == FieldType::Text && tpl_.text_constants.count(r->text_value());
      case Op::Param:
        return std::find(tpl_.scalar_params.begin(), tpl_.scalar_params.end(), std::pair{r->name(), t}) !=
               tpl_.scalar_params.end();
      default: return false;
    }
  }

  bool literal(const Expr& p, const Schema& s) const {
    return p->op() == Op::Not ? atom(p->kid(0), s) : atom(p, s);
  }

  bool pred(const Expr& p, const Schema& s) const {
    if (p->op() != Op::And && p->op() != Op::Or) return literal(p, s);
    const auto& ks = p->kids();
    if (ks.size() < 2) return false;
    for (std::size_t k = 0; k < ks.size(); ++k) {
      if (!literal(ks[k], s)) return false;
      if (k && !(ks[k - 1]->text() < ks[k]->text())) return false;
    }
    return true;
  }

  bool query(const Expr& e) const {
    if (e->op() != Op::Query) return false;
    for (const auto& [name, schema] : tpl_.relations)
      if (name == e->name()) return true;
    return false;
  }

  bool loop_relation(const Expr& e) const {
    for (const auto& l : tpl_.loops)
      if (l.relation == e->name()) return true;
    return false;
  }

  bool source(const Expr& e) const {
    if (query(e)) return true;
    if (e->op() != Op::Join || tpl_.nesting() < 2) return false;
    const Expr& a = e->kid(0);
    const Expr& b = e->kid(1);
    if (!query(a) || !query(b) || !loop_relation(a) || !loop_relation(b) || a->name() == b->name()) return false;
    return e->kid(2)->op() == Op::True || pred(e->kid(2), *e->schema());
  }

  bool filtered(const Expr& e) const {
    if (e->op() == Op::Sel) return source(e->kid(1)) && pred(e->kid(0), *e->kid(1)->schema());
    return source(e);
  }

  bool limit(const Expr& k) const {
    if (k->op() == Op::IntLit) return tpl_.int_constants.count(k->int_value()) > 0;
    if (k->op() == Op::Param)
      return std::find(tpl_.scalar_params.begin(), tpl_.scalar_params.end(), std::pair{k->name(), FieldType::Int}) !=
             tpl_.scalar_params.end();
    return false;
  }

  bool topped(const Expr& e) const {
    if (e->op() == Op::Top) return tpl_.has_break && limit(e->kid(1)) && filtered(e->kid(0));
    return filtered(e);
  }

  bool relation(const Expr& e, const Schema& want) const {
    auto types = [](const Schema& s) {
      std::vector<FieldType> t;
      for (const auto& c : s) t.push_back(c.type);
      return t;
    };
    if (types(*e->schema()) != types(want)) return false;
    if (e->op() != Op::Proj) return topped(e);
    const Expr& in = e->kid(0);
    const auto& cols = e->columns();
    const Schema& s = *in->schema();
    if (cols.size() == s.size()) {
      bool same = true;
      for (std::size_t k = 0; k < s.size(); ++k) same = same && position(s, cols[k]) == static_cast<int>(k);
      if (same) return false;
    }
    return topped(in);
  }

  bool aggregate(const Expr& e, TypeKind type) const {
    if (e->op() != Op::Agg || !tpl_.agg_kinds.count(e->agg())) return false;
    bool opt = e->agg() == tor::AggKind::Min || e->agg() == tor::AggKind::Max;
    if (opt != (type == TypeKind::OptInt)) return false;
    return filtered(e->kid(0));
  }

 private:
  const Template& tpl_;
};

}  // namespace

bool is_well_shaped(const Expr& e, const Target& target, const Template& tpl) {
  Shape shape(tpl);
  switch (target.type) {
    case TypeKind::List: return tor::is_relation(e) && shape.relation(e, *target.schema);
    case TypeKind::Int:
    case TypeKind::OptInt: return shape.aggregate(e, target.type);
    default: return false;
  }
}

}  // namespace relsynth::synth
