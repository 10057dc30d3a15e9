#pragma once

// Shared helpers for the test binaries: exhaustive relation enumeration and a
// random generator for well-formed relational expressions.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "relsynth/tor.hpp"
#include "relsynth/value.hpp"

namespace testsupport {

using namespace relsynth;

inline Schema plain_schema(std::vector<std::pair<std::string, FieldType>> cols) {
  Schema s;
  for (auto& [n, t] : cols) s.push_back({"", n, t});
  return s;
}

// All values a column can take under the given domains.
inline std::vector<Scalar> column_values(FieldType t, int int_max, const std::vector<std::string>& texts) {
  std::vector<Scalar> out;
  if (t == FieldType::Int)
    for (int v = 0; v <= int_max; ++v) out.emplace_back(std::int64_t{v});
  else
    for (const auto& s : texts) out.emplace_back(s);
  return out;
}

// Every relation over `schema` with at most max_size rows, ordered by size
// and then row-lexicographically.
inline std::vector<Relation> all_relations(const Schema& schema, int max_size, int int_max,
                                           const std::vector<std::string>& texts = {"a", "b"}) {
  std::vector<Row> rows{Row{}};
  for (const auto& c : schema) {
    std::vector<Row> next;
    for (const auto& r : rows)
      for (const auto& v : column_values(c.type, int_max, texts)) {
        Row x = r;
        x.push_back(v);
        next.push_back(std::move(x));
      }
    rows = std::move(next);
  }
  auto ref = make_schema(schema);
  std::vector<Relation> out;
  for (int n = 0; n <= max_size; ++n) {
    std::vector<std::size_t> digit(static_cast<std::size_t>(n), 0);
    for (;;) {
      Relation r{ref, {}};
      for (auto d : digit) r.rows.push_back(rows[d]);
      out.push_back(std::move(r));
      int k = n - 1;
      while (k >= 0 && digit[static_cast<std::size_t>(k)] + 1 == rows.size()) digit[static_cast<std::size_t>(k--)] = 0;
      if (k < 0) break;
      ++digit[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

// Random relation-valued expressions over a fixed vocabulary of two
// relations and one int parameter `k`.
class RandomTor {
 public:
  struct Options {
    bool translatable_only = false;  // Query, Sel, Proj, Join, Top
  };

  RandomTor(std::uint64_t seed, std::string r, Schema rs, std::string s, Schema ss, Options opt)
      : rng_(seed), r_(std::move(r)), rs_(std::move(rs)), s_(std::move(s)), ss_(std::move(ss)), opt_(opt) {}

  // Relation-valued expression of depth at most `depth`.
  tor::Expr rel(int depth) { return rel(depth, true); }

  // Scalar-valued aggregate over a relation of depth at most depth - 1.
  tor::Expr aggregate(int depth) {
    tor::Expr e = rel(depth - 1);
    std::vector<Column> ints;
    for (const auto& c : *e->schema())
      if (c.type == FieldType::Int) ints.push_back(c);
    int kind = pick(0, 3);
    if (kind == 1 || ints.empty()) return tor::agg(tor::AggKind::Count, std::nullopt, e);
    tor::AggKind k = kind == 0 ? tor::AggKind::Sum : kind == 2 ? tor::AggKind::Min : tor::AggKind::Max;
    return tor::agg(k, ints[static_cast<std::size_t>(pick(0, static_cast<int>(ints.size()) - 1))], e);
  }

  tor::Expr pred(const Schema& schema, int depth) {
    int k = depth <= 1 ? 0 : pick(0, 5);
    if (k == 4) return tor::truth();
    if (k == 1 || k == 2) {
      std::vector<tor::Expr> parts{pred(schema, depth - 1), pred(schema, depth - 1)};
      return k == 1 ? tor::conj(parts) : tor::disj(parts);
    }
    if (k == 3) return tor::negate(pred(schema, depth - 1));
    return atom(schema);
  }

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  tor::Expr base(bool first) {
    bool use_r = first ? pick(0, 1) == 0 : true;
    if (!opt_.translatable_only && pick(0, 5) == 0)
      return tor::empty(qualify(use_r ? rs_ : ss_, use_r ? r_ : s_));
    return use_r ? tor::query(r_, rs_) : tor::query(s_, ss_);
  }

  tor::Expr rel(int depth, bool allow_join) {
    if (depth <= 1) return base(true);
    int choices = opt_.translatable_only ? 5 : 8;
    switch (pick(0, choices)) {
      case 0: return base(true);
      case 1: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::sel(pred(*e->schema(), 2), e);
      }
      case 2: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::proj(columns(*e->schema()), e);
      }
      case 3: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::top(e, limit(depth - 1));
      }
      case 4:
      case 5: {
        if (!allow_join) return tor::top(rel(depth - 1, false), limit(depth - 1));
        tor::Expr l = side(depth - 1, r_, rs_);
        tor::Expr r = side(depth - 1, s_, ss_);
        if (pick(0, 1)) std::swap(l, r);
        Schema both = *l->schema();
        both.insert(both.end(), r->schema()->begin(), r->schema()->end());
        return tor::join(l, r, pick(0, 2) == 0 ? tor::truth() : pred(both, 2));
      }
      case 6: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::concat(e, variant_of(e, depth - 1));
      }
      case 7: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::append(e, tor::get(e, tor::int_lit(pick(0, 1))));
      }
      default: {
        tor::Expr e = rel(depth - 1, allow_join);
        return tor::sel(pred(*e->schema(), 1), e);
      }
    }
  }

  // Unary chain over a single relation, used as a join operand.
  tor::Expr side(int depth, const std::string& name, const Schema& schema) {
    tor::Expr e = tor::query(name, schema);
    for (int d = 1; d < depth; ++d) {
      int k = pick(0, 3);
      if (k == 0) e = tor::sel(pred(*e->schema(), 2), e);
      else if (k == 1 && !opt_.translatable_only) e = tor::top(e, limit(1));
      else if (k == 2) e = tor::proj(columns(*e->schema()), e);
      else break;
    }
    return e;
  }

  // Same schema as e, different contents.
  tor::Expr variant_of(const tor::Expr& e, int depth) {
    switch (pick(0, 3)) {
      case 0: return tor::empty(e->schema());
      case 1: return tor::sel(pred(*e->schema(), 2), e);
      case 2: return tor::top(e, limit(depth));
      default: return e;
    }
  }

  std::vector<Column> columns(const Schema& s) {
    std::vector<Column> all(s.begin(), s.end());
    std::shuffle(all.begin(), all.end(), rng_);
    all.resize(static_cast<std::size_t>(pick(1, static_cast<int>(all.size()))));
    return all;
  }

  tor::Expr limit(int depth) {
    switch (pick(0, opt_.translatable_only ? 1 : 4)) {
      case 0: return tor::int_lit(pick(-1, 3));
      case 1: return tor::param("k", FieldType::Int);
      case 2: return tor::size(rel(std::max(1, depth - 1), false));
      case 3: return tor::add(tor::param("k", FieldType::Int), tor::int_lit(1));
      default: return tor::int_lit(pick(0, 2));
    }
  }

  tor::Expr atom(const Schema& schema) {
    const Column& c = schema[static_cast<std::size_t>(pick(0, static_cast<int>(schema.size()) - 1))];
    tor::Expr lhs = tor::field(c);
    std::vector<tor::Expr> rhs_options;
    for (const auto& d : schema)
      if (d.type == c.type && !(d == c)) rhs_options.push_back(tor::field(d));
    if (c.type == FieldType::Int) {
      rhs_options.push_back(tor::int_lit(pick(0, 2)));
      rhs_options.push_back(tor::param("k", FieldType::Int));
    } else {
      rhs_options.push_back(tor::text_lit(pick(0, 1) ? "a" : "b"));
    }
    tor::Expr rhs = rhs_options[static_cast<std::size_t>(pick(0, static_cast<int>(rhs_options.size()) - 1))];
    tor::CmpOp op = c.type == FieldType::Int ? static_cast<tor::CmpOp>(pick(0, 5))
                                             : static_cast<tor::CmpOp>(pick(0, 1));
    return tor::cmp(op, lhs, rhs);
  }

  std::mt19937_64 rng_;
  std::string r_;
  Schema rs_;
  std::string s_;
  Schema ss_;
  Options opt_;
};

}  // namespace testsupport
