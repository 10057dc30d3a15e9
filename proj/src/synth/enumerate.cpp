#include <algorithm>
#include <map>

#include "relsynth/synth.hpp"

namespace relsynth::synth {

using frontend::TypeKind;
using tor::Expr;
using tor::Op;

namespace {

bool symmetric(tor::CmpOp op) { return op == tor::CmpOp::Eq || op == tor::CmpOp::Ne; }

std::vector<FieldType> types_of(const Schema& s) {
  std::vector<FieldType> out;
  for (const auto& c : s) out.push_back(c.type);
  return out;
}

bool is_identity(const std::vector<Column>& cols, const Schema& s) {
  if (cols.size() != s.size()) return false;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (!(cols[k].qualifier == s[k].qualifier && cols[k].name == s[k].name)) return false;
  return true;
}

std::string schema_key(const Schema& s) {
  std::string k;
  for (const auto& c : s) k += c.qualified_name() + (c.type == FieldType::Int ? ":i," : ":t,");
  return k;
}

// Vectors indexed by exact cost.
using Levels = std::vector<std::vector<Expr>>;

}  // namespace

struct CandidateStream::Impl {
  const frontend::TypedProgram& prog;
  Template tpl;
  std::size_t bound;
  std::size_t cost = 0;  // level currently buffered
  std::vector<Candidate> level;
  std::size_t pos = 0;

  std::vector<Expr> queries;           // (query R) per relation parameter
  std::vector<std::pair<Expr, Expr>> join_pairs;  // ordered (left, right)
  std::vector<Expr> limits;            // Top bounds

  struct PredScope {
    Schema schema;
    std::vector<Expr> literals;  // sorted by text
    Levels by_cost;
    std::size_t filled = 0;
  };
  std::map<std::string, PredScope> scopes;
  Levels sources, filtered, topped;
  std::size_t sources_filled = 0, filtered_filled = 0, topped_filled = 0;
  std::map<int, Levels> target_pools;

  Impl(const frontend::TypedProgram& p, Template t, std::size_t b) : prog(p), tpl(std::move(t)), bound(b) {
    for (const auto& [name, schema] : tpl.relations) queries.push_back(tor::query(name, schema));
    if (tpl.nesting() >= 2) {
      std::vector<Expr> loop_rels;
      for (const auto& l : tpl.loops)
        for (const auto& q : queries)
          if (q->name() == l.relation && std::find(loop_rels.begin(), loop_rels.end(), q) == loop_rels.end())
            loop_rels.push_back(q);
      for (const auto& a : loop_rels)
        for (const auto& b2 : loop_rels)
          if (a != b2) join_pairs.emplace_back(a, b2);
    }
    if (tpl.has_break) {
      for (auto v : tpl.int_constants) limits.push_back(tor::int_lit(v));
      for (const auto& [name, type] : tpl.scalar_params)
        if (type == FieldType::Int) limits.push_back(tor::param(name, type));
    }
  }

  // -- predicates -----------------------------------------------------------

  PredScope& scope(const Schema& s) {
    auto key = schema_key(s);
    auto it = scopes.find(key);
    if (it != scopes.end()) return it->second;
    PredScope sc;
    sc.schema = s;
    std::vector<Expr> atoms;
    for (auto op : tpl.cmps) {
      for (std::size_t a = 0; a < s.size(); ++a) {
        const Column& lhs = s[a];
        if (lhs.type == FieldType::Text && !symmetric(op)) continue;
        auto l = tor::field(lhs);
        for (std::size_t b = 0; b < s.size(); ++b) {
          if (b == a || s[b].type != lhs.type) continue;
          if (symmetric(op) && b < a) continue;
          atoms.push_back(tor::cmp(op, l, tor::field(s[b])));
        }
        if (lhs.type == FieldType::Int)
          for (auto v : tpl.int_constants) atoms.push_back(tor::cmp(op, l, tor::int_lit(v)));
        else
          for (const auto& v : tpl.text_constants) atoms.push_back(tor::cmp(op, l, tor::text_lit(v)));
        for (const auto& [name, type] : tpl.scalar_params)
          if (type == lhs.type) atoms.push_back(tor::cmp(op, l, tor::param(name, type)));
      }
    }
    for (const auto& a : atoms) {
      sc.literals.push_back(a);
      sc.literals.push_back(tor::negate(a));
    }
    std::sort(sc.literals.begin(), sc.literals.end(), [](const Expr& x, const Expr& y) { return x->text() < y->text(); });
    return scopes.emplace(key, std::move(sc)).first->second;
  }

  // Sorted, duplicate-free literal lists whose costs sum to `budget`.
  static void subsets(const std::vector<Expr>& lits, std::size_t from, std::size_t budget, std::vector<Expr>& cur,
                      std::vector<std::vector<Expr>>& out) {
    if (budget == 0) {
      if (cur.size() >= 2) out.push_back(cur);
      return;
    }
    for (std::size_t k = from; k < lits.size(); ++k) {
      if (lits[k]->cost() > budget) continue;
      cur.push_back(lits[k]);
      subsets(lits, k + 1, budget - lits[k]->cost(), cur, out);
      cur.pop_back();
    }
  }

  const std::vector<Expr>& preds(const Schema& s, std::size_t c) {
    PredScope& sc = scope(s);
    while (sc.filled <= c) {
      std::size_t k = sc.filled++;
      sc.by_cost.emplace_back();
      auto& out = sc.by_cost.back();
      for (const auto& l : sc.literals)
        if (l->cost() == k) out.push_back(l);
      if (k >= 7) {
        std::vector<std::vector<Expr>> sets;
        std::vector<Expr> cur;
        subsets(sc.literals, 0, k - 1, cur, sets);
        for (const auto& set : sets) out.push_back(tor::conj(set));
        for (const auto& set : sets) out.push_back(tor::disj(set));
      }
    }
    return sc.by_cost[c];
  }

  // -- relation layers --------------------------------------------------------

  const std::vector<Expr>& source(std::size_t c) {
    while (sources_filled <= c) {
      std::size_t k = sources_filled++;
      sources.emplace_back();
      auto& out = sources.back();
      if (k == 1) out = queries;
      for (const auto& [a, b] : join_pairs) {
        if (k < 4) continue;
        if (k == 4) out.push_back(tor::join(a, b, tor::truth()));
        Schema js = *tor::join(a, b, tor::truth())->schema();
        for (const auto& p : preds(js, k - 3)) out.push_back(tor::join(a, b, p));
      }
    }
    return sources[c];
  }

  const std::vector<Expr>& filter(std::size_t c) {
    while (filtered_filled <= c) {
      std::size_t k = filtered_filled++;
      std::vector<Expr> out = source(k);
      for (std::size_t cs = 1; cs + 4 <= k; ++cs)
        for (const auto& s : source(cs))
          for (const auto& p : preds(*s->schema(), k - 1 - cs)) out.push_back(tor::sel(p, s));
      filtered.push_back(std::move(out));
    }
    return filtered[c];
  }

  const std::vector<Expr>& top(std::size_t c) {
    while (topped_filled <= c) {
      std::size_t k = topped_filled++;
      std::vector<Expr> out = filter(k);
      if (k >= 3)
        for (const auto& f : filter(k - 2))
          for (const auto& lim : limits) out.push_back(tor::top(f, lim));
      topped.push_back(std::move(out));
    }
    return topped[c];
  }

  static void column_lists(const Schema& s, const std::vector<FieldType>& want, std::vector<Column>& cur,
                           std::vector<bool>& used, std::vector<std::vector<Column>>& out) {
    if (cur.size() == want.size()) {
      if (!is_identity(cur, s)) out.push_back(cur);
      return;
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (used[k] || s[k].type != want[cur.size()]) continue;
      used[k] = true;
      cur.push_back(s[k]);
      column_lists(s, want, cur, used, out);
      cur.pop_back();
      used[k] = false;
    }
  }

  std::vector<Expr> bodies(const Target& t, std::size_t c) {
    std::vector<Expr> out;
    if (t.type == TypeKind::List) {
      auto want = types_of(*t.schema);
      for (const auto& e : top(c))
        if (types_of(*e->schema()) == want) out.push_back(e);
      std::size_t n = want.size();
      if (c > n + 1) {
        for (const auto& e : top(c - 1 - n)) {
          std::vector<std::vector<Column>> lists;
          std::vector<Column> cur;
          std::vector<bool> used(e->schema()->size(), false);
          column_lists(*e->schema(), want, cur, used, lists);
          for (auto& cols : lists) out.push_back(tor::proj(std::move(cols), e));
        }
      }
      return out;
    }
    std::vector<tor::AggKind> kinds;
    for (auto k : tpl.agg_kinds) {
      bool opt = k == tor::AggKind::Min || k == tor::AggKind::Max;
      if ((t.type == TypeKind::OptInt && opt) || (t.type == TypeKind::Int && !opt)) kinds.push_back(k);
    }
    for (auto k : kinds) {
      if (k == tor::AggKind::Count) {
        if (c >= 2)
          for (const auto& f : filter(c - 1)) out.push_back(tor::agg(k, std::nullopt, f));
        continue;
      }
      if (c < 3) continue;
      for (const auto& f : filter(c - 2))
        for (const auto& col : *f->schema())
          if (col.type == FieldType::Int) out.push_back(tor::agg(k, col, f));
    }
    return out;
  }

  const std::vector<Expr>& pool(std::size_t t, std::size_t c) {
    auto& levels = target_pools[static_cast<int>(t)];
    while (levels.size() <= c) levels.push_back(bodies(tpl.targets[t], levels.size()));
    return levels[c];
  }

  // -- candidates --------------------------------------------------------------

  Candidate assemble(const std::vector<Expr>& bs, std::size_t c) {
    Candidate cand;
    for (const auto& l : tpl.loops) {
      Invariant inv{l.id, {}};
      for (std::size_t t = 0; t < tpl.targets.size(); ++t)
        if (tpl.targets[t].carried)
          inv.equalities.push_back({tpl.targets[t].slot, tpl.targets[t].var, lift(bs[t], l.id, tpl)});
      cand.invariants.push_back(std::move(inv));
    }
    for (std::size_t t = 0; t < tpl.targets.size(); ++t)
      if (tpl.targets[t].slot == prog.result_slot) cand.post = bs[t];
    cand.cost = c;
    cand.key = serialize(cand, prog);
    return cand;
  }

  void combos(std::size_t t, std::size_t budget, std::vector<Expr>& cur, std::size_t c) {
    if (t == tpl.targets.size()) {
      if (budget != 0) return;
      if (!std::holds_alternative<emit::SqlQuery>(emit::to_sql(cur[static_cast<std::size_t>(result_index())])))
        return;
      level.push_back(assemble(cur, c));
      return;
    }
    std::size_t rest = tpl.targets.size() - t - 1;  // each later target needs cost >= 1
    for (std::size_t ct = 1; ct + rest <= budget; ++ct) {
      if (rest == 0 && ct != budget) continue;
      for (const auto& e : pool(t, ct)) {
        cur.push_back(e);
        combos(t + 1, budget - ct, cur, c);
        cur.pop_back();
      }
    }
  }

  int result_index() const {
    for (std::size_t t = 0; t < tpl.targets.size(); ++t)
      if (tpl.targets[t].slot == prog.result_slot) return static_cast<int>(t);
    return 0;
  }

  bool fill_next_level() {
    while (cost < bound) {
      ++cost;
      level.clear();
      pos = 0;
      std::size_t overhead = tpl.loops.size();
      if (cost <= overhead || tpl.targets.empty()) continue;
      std::vector<Expr> cur;
      combos(0, cost - overhead, cur, cost);
      std::sort(level.begin(), level.end(), [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
      if (!level.empty()) return true;
    }
    return false;
  }
};

CandidateStream::CandidateStream(const frontend::TypedProgram& prog, Template tpl, std::size_t cost_bound)
    : impl_(std::make_unique<Impl>(prog, std::move(tpl), cost_bound)) {}
CandidateStream::~CandidateStream() = default;
CandidateStream::CandidateStream(CandidateStream&&) noexcept = default;
CandidateStream& CandidateStream::operator=(CandidateStream&&) noexcept = default;

std::optional<Candidate> CandidateStream::next() {
  if (impl_->pos == impl_->level.size() && !impl_->fill_next_level()) return std::nullopt;
  return std::move(impl_->level[impl_->pos++]);
}

std::vector<Candidate> enumerate(const frontend::TypedProgram& prog, const Template& tpl, std::size_t cost_bound) {
  CandidateStream s(prog, tpl, cost_bound);
  std::vector<Candidate> out;
  while (auto c = s.next()) out.push_back(std::move(*c));
  return out;
}

// -- lifting ---------------------------------------------------------------------

namespace {

struct Lifter {
  const Template& tpl;
  int loop;

  Expr prefix(const Expr& q, const LoopShape& l) const { return tor::top(q, tor::index(l.index)); }

  Expr operator()(const Expr& e) const {
    const LoopShape& outer = tpl.loops[0];
    switch (e->op()) {
      case Op::Query:
        for (const auto& l : tpl.loops)
          if (l.id <= loop && l.relation == e->name()) return prefix(e, l);
        return e;
      case Op::Join: {
        if (loop == 1 && e->kid(0)->op() == Op::Query && e->kid(1)->op() == Op::Query &&
            e->kid(0)->name() == outer.relation && e->kid(1)->name() == tpl.loops[1].relation) {
          // Pairs processed so far: all earlier outer rows with every inner
          // row, then the current outer row with the inner prefix.
          const Expr& l = e->kid(0);
          const Expr& r = e->kid(1);
          const Expr& p = e->kid(2);
          Expr row = tor::append(tor::empty(l->schema()), tor::get(l, tor::index(outer.index)));
          return tor::concat(tor::join(prefix(l, outer), r, p), tor::join(row, prefix(r, tpl.loops[1]), p));
        }
        return tor::join((*this)(e->kid(0)), (*this)(e->kid(1)), e->kid(2));
      }
      case Op::Sel: return tor::sel(e->kid(0), (*this)(e->kid(1)));
      case Op::Proj: return tor::proj(e->columns(), (*this)(e->kid(0)));
      case Op::Top: return tor::top((*this)(e->kid(0)), e->kid(1));
      case Op::Agg:
        return tor::agg(e->agg(), e->has_column() ? std::optional<Column>(e->column()) : std::nullopt,
                        (*this)(e->kid(0)));
      default: return e;
    }
  }
};

}  // namespace

Expr lift(const Expr& body, int loop, const Template& tpl) { return Lifter{tpl, loop}(body); }

}  // namespace relsynth::synth
