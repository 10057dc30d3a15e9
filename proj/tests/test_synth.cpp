#include <doctest.h>

#include <map>
#include <set>

#include "relsynth/synth.hpp"

using namespace relsynth;
using namespace relsynth::synth;
using frontend::TypedProgram;
using tor::Expr;

namespace {

TypedProgram bench(const std::string& name) {
  return frontend::load_program_file(std::string(RELSYNTH_BENCH_DIR) + "/" + name + ".qil");
}

std::vector<std::string> keys(const std::vector<Candidate>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs) out.push_back(c.key);
  return out;
}

// Unrestricted generator over a deliberately larger vocabulary than any
// template: every comparison, constants 0..2, any nesting of operators.
class BruteForce {
 public:
  BruteForce(const Template& tpl) : tpl_(tpl) {
    for (const auto& [name, schema] : tpl.relations) queries_.push_back(tor::query(name, schema));
  }

  const std::vector<Expr>& rel(std::size_t c) {
    while (rels_.size() <= c) rels_.push_back(build_rel(rels_.size()));
    return rels_[c];
  }

  std::vector<Expr> aggs(std::size_t c) {
    std::vector<Expr> out;
    for (auto k : {tor::AggKind::Sum, tor::AggKind::Count, tor::AggKind::Min, tor::AggKind::Max}) {
      if (k == tor::AggKind::Count) {
        if (c >= 2)
          for (const auto& e : rel(c - 1)) out.push_back(tor::agg(k, std::nullopt, e));
        continue;
      }
      if (c >= 3)
        for (const auto& e : rel(c - 2))
          for (const auto& col : *e->schema())
            if (col.type == FieldType::Int) out.push_back(tor::agg(k, col, e));
    }
    return out;
  }

 private:
  std::vector<Expr> operands(FieldType t) const {
    std::vector<Expr> out;
    if (t == FieldType::Int)
      for (std::int64_t v = 0; v <= 2; ++v) out.push_back(tor::int_lit(v));
    else
      for (const auto& s : {"a", "b"}) out.push_back(tor::text_lit(s));
    for (const auto& [name, type] : tpl_.scalar_params)
      if (type == t) out.push_back(tor::param(name, type));
    return out;
  }

  std::vector<Expr> preds(const Schema& s, std::size_t c) {
    std::string key = to_string(s);
    auto& levels = preds_[key];
    while (levels.size() <= c) {
      std::size_t k = levels.size();
      std::vector<Expr> out;
      if (k == 3) {
        for (auto op : {tor::CmpOp::Eq, tor::CmpOp::Ne, tor::CmpOp::Lt, tor::CmpOp::Le, tor::CmpOp::Gt, tor::CmpOp::Ge})
          for (const auto& l : s) {
            if (l.type == FieldType::Text && op != tor::CmpOp::Eq && op != tor::CmpOp::Ne) continue;
            for (const auto& r : s)
              if (r.type == l.type) out.push_back(tor::cmp(op, tor::field(l), tor::field(r)));
            for (const auto& r : operands(l.type)) out.push_back(tor::cmp(op, tor::field(l), r));
          }
      }
      if (k >= 2)
        for (const auto& p : levels[k - 1]) out.push_back(tor::negate(p));
      // Binary and n-ary connectives over any sub-predicates.
      std::vector<Expr> cur;
      connect(levels, k, 1, cur, out);
      levels.push_back(std::move(out));
    }
    return levels[c];
  }

  static void connect(const std::vector<std::vector<Expr>>& levels, std::size_t total, std::size_t used,
                      std::vector<Expr>& cur, std::vector<Expr>& out) {
    if (used == total && cur.size() >= 2) {
      out.push_back(tor::conj(cur));
      out.push_back(tor::disj(cur));
    }
    for (std::size_t c = 1; used + c <= total && c < levels.size(); ++c)
      for (const auto& p : levels[c]) {
        if (p->op() == tor::Op::And || p->op() == tor::Op::Or) continue;  // builders flatten these
        cur.push_back(p);
        connect(levels, total, used + c, cur, out);
        cur.pop_back();
      }
  }

  static void column_lists(const Schema& s, std::size_t n, std::vector<Column>& cur, std::vector<std::vector<Column>>& out) {
    if (cur.size() == n) {
      out.push_back(cur);
      return;
    }
    for (const auto& c : s) {
      bool dup = false;
      for (const auto& x : cur) dup |= x == c;
      if (dup) continue;
      cur.push_back(c);
      column_lists(s, n, cur, out);
      cur.pop_back();
    }
  }

  std::vector<Expr> build_rel(std::size_t c) {
    std::vector<Expr> out;
    if (c == 1) out = queries_;
    for (std::size_t ce = 1; ce < c; ++ce) {
      for (const auto& e : rel(ce)) {
        const Schema& s = *e->schema();
        if (c > ce + 1)
          for (const auto& p : preds(s, c - 1 - ce)) out.push_back(tor::sel(p, e));
        for (std::size_t n = 1; n <= s.size() && 1 + n + ce <= c; ++n) {
          if (1 + n + ce != c) continue;
          std::vector<std::vector<Column>> lists;
          std::vector<Column> cur;
          column_lists(s, n, cur, lists);
          for (auto& cols : lists) out.push_back(tor::proj(cols, e));
        }
        if (ce + 2 == c) {
          for (const auto& k : operands(FieldType::Int)) out.push_back(tor::top(e, k));
        }
        for (std::size_t cr = 1; ce + cr + 2 <= c; ++cr)
          for (const auto& r : rel(cr)) {
            std::size_t cp = c - 1 - ce - cr;
            std::vector<Expr> ps;
            if (cp == 1) ps.push_back(tor::truth());
            Expr probe;
            try {
              probe = tor::join(e, r, tor::truth());
            } catch (const tor::SchemaError&) {
              continue;  // same relation on both sides
            }
            for (const auto& p : preds(*probe->schema(), cp)) ps.push_back(p);
            for (const auto& p : ps) out.push_back(tor::join(e, r, p));
          }
      }
    }
    return out;
  }

  const Template& tpl_;
  std::vector<Expr> queries_;
  std::vector<std::vector<Expr>> rels_;
  std::map<std::string, std::vector<std::vector<Expr>>> preds_;
};

// Posts of all enumerated candidates, which must be pairwise distinct.
std::multiset<std::string> enumerated_posts(const TypedProgram& prog, const Template& tpl, std::size_t bound) {
  std::multiset<std::string> out;
  for (const auto& c : enumerate(prog, tpl, bound)) out.insert(c.post->text());
  return out;
}

}  // namespace

TEST_CASE("template extraction") {
  auto sel = extract_template(bench("selection"));
  CHECK(sel.int_constants == std::set<std::int64_t>{2});
  CHECK(sel.cmps == std::set<tor::CmpOp>{tor::CmpOp::Gt});
  CHECK(sel.agg_kinds.empty());
  CHECK(sel.loops.size() == 1);
  CHECK(sel.loops[0].relation == "R");
  CHECK(sel.has_append);
  CHECK_FALSE(sel.has_break);

  auto sum = extract_template(bench("sum"));
  CHECK(sum.agg_kinds == std::set<tor::AggKind>{tor::AggKind::Sum});
  CHECK_FALSE(sum.has_append);
  CHECK(extract_template(bench("count")).agg_kinds == std::set<tor::AggKind>{tor::AggKind::Count});
  CHECK(extract_template(bench("max")).agg_kinds == std::set<tor::AggKind>{tor::AggKind::Max});

  auto join = extract_template(bench("equijoin"));
  REQUIRE(join.loops.size() == 2);
  CHECK(join.nesting() == 2);
  CHECK(join.loops[1].relation == "S");
  CHECK(join.cmps == std::set<tor::CmpOp>{tor::CmpOp::Eq});
  REQUIRE(join.relations.size() == 2);
  CHECK(join.relations[0].second.size() == 2);
  CHECK(join.relations[1].second.size() == 1);

  auto top = extract_template(bench("topk"));
  CHECK(top.has_break);
  CHECK(top.loops[0].has_break);
  CHECK(top.scalar_params.size() == 1);
}

TEST_CASE("enumeration examples") {
  auto prog = bench("selection");
  auto tpl = extract_template(prog);
  CHECK(enumerate(prog, tpl, 1).empty());
  auto all = keys(enumerate(prog, tpl, 10));
  CHECK(std::find(all.begin(), all.end(),
                  "L0: out = (sel (> (field R.a) 2) (top (query R) (index i))); "
                  "post: out = (sel (> (field R.a) 2) (query R))") != all.end());
  for (const auto& c : enumerate(prog, tpl, 10)) CHECK(c.post->text().find("agg") == std::string::npos);

  auto sum = bench("sum");
  for (const auto& c : enumerate(sum, extract_template(sum), 10)) CHECK(c.post->op() == tor::Op::Agg);
}

TEST_CASE("enumeration order and determinism") {
  auto prog = bench("joinselproj");
  auto tpl = extract_template(prog);
  CandidateStream a(prog, tpl, 24), b(prog, tpl, 24);
  std::optional<Candidate> prev;
  for (int n = 0; n < 1000; ++n) {
    auto x = a.next();
    auto y = b.next();
    REQUIRE(x);
    REQUIRE(y);
    CHECK(x->key == y->key);
    if (prev) {
      bool increasing = prev->cost < x->cost || (prev->cost == x->cost && prev->key < x->key);
      REQUIRE(increasing);
    }
    prev = x;
  }
}

TEST_CASE("enumerated candidates stay inside the template vocabulary") {
  for (const char* name : {"selection", "topk", "equijoin", "min", "crossjoin"}) {
    CAPTURE(name);
    auto prog = bench(name);
    auto tpl = extract_template(prog);
    auto vocab = vocabulary(prog);
    const Target* result = nullptr;
    for (const auto& t : tpl.targets)
      if (t.slot == prog.result_slot) result = &t;
    REQUIRE(result);
    for (const auto& c : enumerate(prog, tpl, 11)) {
      REQUIRE(is_well_shaped(c.post, *result, tpl));
      REQUIRE(std::holds_alternative<emit::SqlQuery>(emit::to_sql(c.post)));
      REQUIRE(c.invariants.size() == prog.loops.size());
      for (const auto& inv : c.invariants) {
        auto names = tor::free_names(inv.equalities.at(0).rhs);
        for (const auto& r : names.relations) CHECK(vocab.relations.count(r));
        for (const auto& p : names.params) CHECK(vocab.params.count(p));
        for (const auto& i : names.indices) CHECK(vocab.indices.count(i));
      }
    }
  }
}

TEST_CASE("enumeration is complete against brute force") {
  struct Case {
    const char* name;
    std::size_t bound;
  };
  for (auto [name, bound] : {Case{"selection", 11}, Case{"topk", 10}, Case{"count", 13}, Case{"equijoin", 12},
                             Case{"crossjoin", 12}, Case{"min", 12}}) {
    CAPTURE(name);
    auto prog = bench(name);
    auto tpl = extract_template(prog);
    REQUIRE(tpl.targets.size() == 1);
    const Target& target = tpl.targets[0];
    std::size_t loops = tpl.loops.size();

    std::multiset<std::string> want;
    BruteForce bf(tpl);
    for (std::size_t c = 1; c + loops <= bound; ++c) {
      std::vector<Expr> pool = target.type == frontend::TypeKind::List ? bf.rel(c) : bf.aggs(c);
      for (const auto& e : pool)
        if (is_well_shaped(e, target, tpl)) want.insert(e->text());
    }
    auto got = enumerated_posts(prog, tpl, bound);
    CHECK(got.size() == want.size());
    CHECK(got == want);
    for (const auto& k : got) CHECK(got.count(k) == 1);
    CHECK(!got.empty());
  }
}

TEST_CASE("synthesis returns the least accepted candidate") {
  for (const char* name : {"selection", "count", "topk", "min"}) {
    CAPTURE(name);
    auto prog = bench(name);
    SynthConfig cfg;
    cfg.cost_bound = 12;
    auto r = synthesize(prog, cfg);
    REQUIRE(std::holds_alternative<Solution>(r));
    const auto& sol = std::get<Solution>(r);
    // Keep going past the solution and validate everything at the bound.
    std::optional<std::string> least;
    std::size_t position = 0, index = 0;
    for (const auto& c : enumerate(prog, extract_template(prog), cfg.cost_bound)) {
      ++index;
      if (!verify::is_valid(verify::validate(prog, c, cfg.bounds))) continue;
      if (!least) {
        least = c.key;
        position = index;
      }
    }
    REQUIRE(least);
    CHECK(sol.candidate.key == *least);
    CHECK(sol.stats.candidates_tried == position);
    CHECK(sol.stats.candidates_rejected == position - 1);
  }
}

TEST_CASE("synthesis is independent of parallelism") {
  for (const char* name : {"joinselproj", "min"}) {
    CAPTURE(name);
    auto prog = bench(name);
    SynthConfig one;
    SynthConfig many;
    many.jobs = 4;
    auto a = synthesize(prog, one);
    auto b = synthesize(prog, many);
    REQUIRE(std::holds_alternative<Solution>(a));
    REQUIRE(std::holds_alternative<Solution>(b));
    const auto& x = std::get<Solution>(a);
    const auto& y = std::get<Solution>(b);
    CHECK(x.candidate.key == y.candidate.key);
    CHECK(x.sql_text == y.sql_text);
    CHECK(x.stats.candidates_tried == y.stats.candidates_tried);
    CHECK(x.stats.vcs_checked == y.stats.vcs_checked);
    CHECK(x.stats.instances == y.stats.instances);
  }
}

TEST_CASE("synthesis examples") {
  auto sel = synthesize(bench("selection"), SynthConfig{});
  REQUIRE(std::holds_alternative<Solution>(sel));
  CHECK(std::get<Solution>(sel).simplified->text() == "(sel (> (field R.a) 2) (query R))");

  auto id = synthesize(bench("identity"), SynthConfig{});
  REQUIRE(std::holds_alternative<Solution>(id));
  CHECK(std::get<Solution>(id).candidate.post->text() == "(query R)");
  CHECK(std::get<Solution>(id).sql_text == "SELECT R.* FROM R ORDER BY R.rid");

  auto constant = frontend::load_program(
      "fn ones(R: rel(a:int)) { var out: list(a:int); for i in 0..size(R) { out.append({a: 1}); } return out; }");
  auto r = synthesize(constant, SynthConfig{});
  REQUIRE(std::holds_alternative<Failure>(r));
  CHECK(std::get<Failure>(r).reason == Failure::Reason::Exhausted);
  CHECK(std::get<Failure>(r).stats.candidates_tried == std::get<Failure>(r).stats.candidates_rejected);

  SynthConfig hurry;
  hurry.timeout_seconds = 1e-12;
  auto t = synthesize(bench("equijoin"), hurry);
  REQUIRE(std::holds_alternative<Failure>(t));
  CHECK(std::get<Failure>(t).reason == Failure::Reason::Timeout);
}

TEST_CASE("lifting wraps loop relations in index prefixes") {
  auto prog = bench("equijoin");
  auto tpl = extract_template(prog);
  Expr q = tor::query("R", tpl.relations[0].second);
  Expr s = tor::query("S", tpl.relations[1].second);
  Expr j = tor::join(q, s, tor::truth());
  CHECK(lift(j, 0, tpl)->text() == "(join true (top (query R) (index i)) (query S))");
  CHECK(lift(j, 1, tpl)->text() ==
        "(concat (join true (top (query R) (index i)) (query S)) "
        "(join true (append (empty (R.k int) (R.a int)) (get (query R) (index i))) (top (query S) (index j))))");
  CHECK(lift(tor::join(s, q, tor::truth()), 1, tpl)->text() ==
        "(join true (top (query S) (index j)) (top (query R) (index i)))");
}
