#include <algorithm>

#include "internal.hpp"

namespace relsynth::tor {

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> k) {
  switch (e->op()) {
    case Op::Sel: return sel(k[0], k[1]);
    case Op::Proj: return proj(e->columns(), k[0]);
    case Op::Join: return join(k[0], k[1], k[2]);
    case Op::Top: return top(k[0], k[1]);
    case Op::Append: return append(k[0], k[1]);
    case Op::Concat: return concat(k[0], k[1]);
    case Op::Agg:
      return agg(e->agg(), e->has_column() ? std::optional<Column>(e->column()) : std::nullopt, k[0]);
    case Op::Get: return get(k[0], k[1]);
    case Op::Size: return size(k[0]);
    case Op::Add: return add(k[0], k[1]);
    case Op::And: return conj(std::move(k));
    case Op::Or: return disj(std::move(k));
    case Op::Not: return negate(k[0]);
    case Op::Cmp: return cmp(e->cmp(), k[0], k[1]);
    default: return e;
  }
}

bool mentions_only(const Expr& p, const std::vector<Column>& cols) {
  if (p->op() == Op::Field)
    return std::any_of(cols.begin(), cols.end(), [&](const Column& c) {
      return c.qualifier == p->column().qualifier && c.name == p->column().name;
    });
  for (const auto& k : p->kids()) {
    // Relation-valued subterms (e.g. inside Size) have their own scope.
    if (k->sort() == Sort::Relation) continue;
    if (!mentions_only(k, cols)) return false;
  }
  return true;
}

bool same_columns(const std::vector<Column>& cols, const Schema& schema) {
  if (cols.size() != schema.size()) return false;
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (cols[i].qualifier != schema[i].qualifier || cols[i].name != schema[i].name) return false;
  return true;
}

// One rewrite at the root, or nullptr. Rules are tried in a fixed order;
// each strictly decreases (node count, number of sel-over-proj pairs).
Expr step(const Expr& e) {
  switch (e->op()) {
    case Op::Sel: {
      const Expr& p = e->kid(0);
      const Expr& in = e->kid(1);
      if (p->op() == Op::True) return in;
      if (in->op() == Op::Empty) return in;
      if (in->op() == Op::Sel) return sel(conj({in->kid(0), p}), in->kid(1));
      if (in->op() == Op::Proj && mentions_only(p, in->columns()))
        return proj(in->columns(), sel(p, in->kid(0)));
      return nullptr;
    }
    case Op::Proj: {
      const Expr& in = e->kid(0);
      if (same_columns(e->columns(), *in->schema())) return in;
      if (in->op() == Op::Proj) return proj(e->columns(), in->kid(0));
      if (in->op() == Op::Empty) return empty(e->schema());
      return nullptr;
    }
    case Op::Top: {
      const Expr& in = e->kid(0);
      const Expr& k = e->kid(1);
      if (in->op() == Op::Empty) return in;
      if (k->op() == Op::Size && equal(k->kid(0), in)) return in;
      if (in->op() == Op::Top && k->op() == Op::IntLit && in->kid(1)->op() == Op::IntLit)
        return top(in->kid(0), int_lit(std::min(k->int_value(), in->kid(1)->int_value())));
      return nullptr;
    }
    case Op::Concat: {
      const Expr& l = e->kid(0);
      const Expr& r = e->kid(1);
      if (r->op() == Op::Empty) return l;
      if (l->op() == Op::Empty && same_columns(*l->schema(), *r->schema())) return r;
      if (r->op() == Op::Append && r->kid(0)->op() == Op::Empty) return append(l, r->kid(1));
      return nullptr;
    }
    default:
      return nullptr;
  }
}

Expr pass(const Expr& e) {
  std::vector<Expr> kids;
  kids.reserve(e->kids().size());
  bool changed = false;
  for (const auto& k : e->kids()) {
    Expr s = pass(k);
    changed = changed || s != k;
    kids.push_back(std::move(s));
  }
  Expr cur = changed ? rebuild(e, std::move(kids)) : e;
  while (Expr next = step(cur)) cur = next;
  return cur;
}

}  // namespace

Expr simplify(const Expr& e) {
  Expr cur = e;
  for (;;) {
    Expr next = pass(cur);
    if (next->text() == cur->text()) return next;
    cur = next;
  }
}

}  // namespace relsynth::tor
