#include <doctest.h>

#include "relsynth/emit.hpp"
#include "support.hpp"

using namespace relsynth;
using namespace relsynth::emit;
using testsupport::all_relations;
using testsupport::plain_schema;

namespace {

const Schema kR = plain_schema({{"a", FieldType::Int}});
const Schema kS = plain_schema({{"b", FieldType::Int}});

Column col(const std::string& q, const std::string& n) { return Column{q, n, FieldType::Int}; }

SqlQuery sql_of(const tor::Expr& e) {
  auto r = to_sql(e);
  REQUIRE(std::holds_alternative<SqlQuery>(r));
  return std::get<SqlQuery>(r);
}

bool translatable(const tor::Expr& e) { return std::holds_alternative<SqlQuery>(to_sql(e)); }

}  // namespace

TEST_CASE("to_sql renders the documented forms") {
  tor::Expr q = tor::query("R", kR);
  CHECK(render(sql_of(q)) == "SELECT R.* FROM R ORDER BY R.rid");
  tor::Expr p = tor::cmp(tor::CmpOp::Gt, tor::field(col("R", "a")), tor::int_lit(2));
  CHECK(render(sql_of(tor::sel(p, q))) == "SELECT R.* FROM R WHERE R.a > 2 ORDER BY R.rid");
  CHECK(render(sql_of(tor::agg(tor::AggKind::Sum, col("R", "a"), tor::sel(p, q)))) ==
        "SELECT COALESCE(SUM(R.a), 0) FROM R WHERE R.a > 2");
  CHECK(render(sql_of(tor::agg(tor::AggKind::Count, std::nullopt, q))) == "SELECT COUNT(*) FROM R");
  CHECK(render(sql_of(tor::agg(tor::AggKind::Max, col("R", "a"), q))) == "SELECT MAX(R.a) FROM R");

  Schema rk = plain_schema({{"k", FieldType::Int}, {"a", FieldType::Int}});
  Schema sk = plain_schema({{"k", FieldType::Int}});
  tor::Expr j = tor::join(tor::query("R", rk), tor::query("S", sk),
                          tor::cmp(tor::CmpOp::Eq, tor::field(col("R", "k")), tor::field(col("S", "k"))));
  tor::Expr e = tor::top(tor::proj({col("R", "a")}, j), tor::int_lit(2));
  SqlQuery sq = sql_of(e);
  CHECK(render(sq) == "SELECT R.a FROM R, S WHERE R.k = S.k ORDER BY R.rid, S.rid LIMIT 2");
  CHECK(render(sq) == render(sq));
  CHECK(parse_sql(render(sq)) == sq);

  tor::Expr t = tor::top(q, tor::param("k", FieldType::Int));
  CHECK(render(sql_of(t)) == "SELECT R.* FROM R ORDER BY R.rid LIMIT :k");
  tor::Expr txt = tor::sel(tor::cmp(tor::CmpOp::Ne, tor::field(Column{"T", "s", FieldType::Text}), tor::text_lit("it's")),
                           tor::query("T", plain_schema({{"s", FieldType::Text}})));
  CHECK(render(sql_of(txt)) == "SELECT T.* FROM T WHERE T.s <> 'it''s' ORDER BY T.rid");
  CHECK(parse_sql(render(sql_of(txt))) == sql_of(txt));
}

TEST_CASE("untranslatable shapes") {
  tor::Expr q = tor::query("R", kR);
  tor::Expr p = tor::cmp(tor::CmpOp::Gt, tor::field(col("R", "a")), tor::int_lit(0));
  CHECK_FALSE(translatable(tor::append(q, tor::get(q, tor::int_lit(0)))));
  CHECK_FALSE(translatable(tor::concat(q, q)));
  CHECK_FALSE(translatable(tor::empty(q->schema())));
  CHECK_FALSE(translatable(tor::sel(p, tor::top(q, tor::int_lit(1)))));
  CHECK_FALSE(translatable(tor::top(q, tor::size(q))));
  CHECK_FALSE(translatable(tor::top(tor::top(q, tor::param("k", FieldType::Int)), tor::int_lit(1))));
  CHECK_FALSE(translatable(tor::agg(tor::AggKind::Sum, col("R", "a"), tor::top(q, tor::int_lit(1)))));
  CHECK_FALSE(translatable(tor::top(q, tor::index("i"))));
  CHECK_FALSE(translatable(tor::size(q)));
  CHECK(translatable(tor::top(tor::top(q, tor::int_lit(3)), tor::int_lit(1))));
}

TEST_CASE("mini engine examples") {
  MiniDb db;
  Relation r{make_schema(kR), {{std::int64_t{4}}, {std::int64_t{1}}, {std::int64_t{9}}}};
  db.add_table("R", r);
  CHECK(std::get<Relation>(eval_sql(parse_sql("SELECT R.* FROM R ORDER BY R.rid"), db)) == r);

  Relation s{make_schema(kS), {{std::int64_t{7}}, {std::int64_t{8}}}};
  Relation r2{make_schema(kR), {{std::int64_t{1}}, {std::int64_t{2}}}};
  MiniDb db2;
  db2.add_table("R", r2);
  db2.add_table("S", s);
  Relation x = std::get<Relation>(eval_sql(parse_sql("SELECT R.*, S.* FROM R, S ORDER BY R.rid, S.rid"), db2));
  // Oracle: brute-force product, position i*2+j.
  REQUIRE(x.size() == 4);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(x.rows[i * 2 + j] == Row{r2.rows[i][0], s.rows[j][0]});
  Relation y = std::get<Relation>(eval_sql(parse_sql("SELECT R.*, S.* FROM R, S ORDER BY S.rid, R.rid"), db2));
  CHECK(y.rows[1] == Row{r2.rows[1][0], s.rows[0][0]});

  MiniDb empty;
  empty.add_table("R", Relation{make_schema(kR), {}});
  CHECK(std::get<std::int64_t>(eval_sql(parse_sql("SELECT COALESCE(SUM(R.a), 0) FROM R"), empty)) == 0);
  CHECK_FALSE(std::get<OptInt>(eval_sql(parse_sql("SELECT SUM(R.a) FROM R"), empty)).has_value());
  CHECK_FALSE(std::get<OptInt>(eval_sql(parse_sql("SELECT MIN(R.a) FROM R"), empty)).has_value());
  CHECK(std::get<std::int64_t>(eval_sql(parse_sql("SELECT COUNT(*) FROM R"), empty)) == 0);

  CHECK(std::get<Relation>(eval_sql(parse_sql("SELECT R.* FROM R ORDER BY R.rid LIMIT :k"), db,
                                    Params{{"k", std::int64_t{-1}}}))
            .rows.empty());
  CHECK_THROWS_AS(eval_sql(parse_sql("SELECT T.* FROM T"), db), UnknownTable);
  CHECK_THROWS_AS(eval_sql(parse_sql("SELECT R.zz FROM R"), db), UnknownColumn);
  CHECK_THROWS_AS(eval_sql(parse_sql("SELECT R.a FROM R WHERE S.b = 1"), db), UnknownColumn);
  CHECK_THROWS_AS(parse_sql("SELECT FROM"), SqlError);
  CHECK_THROWS_AS(parse_sql("SELECT R.* FROM R extra"), SqlError);
}

TEST_CASE("MiniDb loads the shared binding format") {
  auto doc = nlohmann::json::parse(R"({"R": {"schema": [["a","int"],["t","text"]], "rows": [[1,"x"],[2,"y"]]}, "k": 3})");
  MiniDb db = MiniDb::from_json(doc);
  REQUIRE(db.table("R"));
  CHECK(db.table("R")->size() == 2);
  CHECK(db.table("k") == nullptr);
  Params ps = params_from_json(doc);
  CHECK(std::get<std::int64_t>(ps.at("k")) == 3);
  Relation got = std::get<Relation>(eval_sql(parse_sql("SELECT R.t FROM R WHERE R.a >= 2 ORDER BY R.rid"), db, ps));
  REQUIRE(got.size() == 1);
  CHECK(std::get<std::string>(got.rows[0][0]) == "y");
}

TEST_CASE("emitted queries agree with the relational evaluator") {
  auto rs = all_relations(kR, 2, 2);
  auto ss = all_relations(kS, 2, 2);
  testsupport::RandomTor gen(3, "R", kR, "S", kS, {true});
  int accepted = 0;
  for (int n = 0; n < 300; ++n) {
    tor::Expr e = gen.pick(0, 3) == 0 ? gen.aggregate(4) : gen.rel(4);
    auto r = to_sql(e);
    if (!std::holds_alternative<SqlQuery>(r)) continue;
    ++accepted;
    const SqlQuery& q = std::get<SqlQuery>(r);
    CAPTURE(e->text());
    CAPTURE(render(q));
    REQUIRE(parse_sql(render(q)) == q);
    if (!q.is_aggregate()) {
      REQUIRE(q.order_by.size() == q.from.size());
      for (std::size_t i = 0; i < q.from.size(); ++i) CHECK(q.order_by[i] == ColumnRef{q.from[i], "rid"});
    }
    for (const auto& a : rs)
      for (const auto& b : ss)
        for (std::int64_t k = 0; k <= 2; ++k) {
          tor::Env env;
          env.bind_relation("R", &a).bind_relation("S", &b).bind_scalar("k", k);
          MiniDb db;
          db.add_table("R", a);
          db.add_table("S", b);
          REQUIRE(eval_sql(q, db, {{"k", k}}) == tor::eval(e, env));
        }
  }
  CHECK(accepted > 100);
}
