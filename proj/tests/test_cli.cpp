#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "relsynth/cli.hpp"

using namespace relsynth;
using namespace relsynth::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bench_path(const std::string& name) { return std::string(RELSYNTH_BENCH_DIR) + "/" + name + ".qil"; }

frontend::TypedProgram bench(const std::string& name) { return frontend::load_program_file(bench_path(name)); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh scratch directory, removed on scope exit.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& tag) {
    dir = fs::temp_directory_path() / ("relsynth_cli_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    auto p = (dir / name).string();
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "relsynth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

emit::SqlQuery sql(const std::string& text) { return emit::parse_sql(text); }

RunConfig quick() {
  RunConfig c;
  c.cases = 50;
  return c;
}

}  // namespace

TEST_CASE("splitmix64 matches the reference sequence") {
  // Published first outputs for state 0 and for state 1234567.
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64(1234567) == 6457827717110365317ULL);
  CHECK(splitmix64(1234567 + 0x9E3779B97F4A7C15ULL) == 3203168211198807973ULL);
}

TEST_CASE("generated cases stay in range and cover it") {
  auto prog = bench("min");
  std::set<std::size_t> sizes;
  std::set<std::int64_t> ints;
  for (std::uint64_t c = 0; c < 500; ++c) {
    auto in = generate_case(prog, 7, c);
    REQUIRE(in.size() == 1);
    const auto& r = std::get<Relation>(in.at("R"));
    sizes.insert(r.size());
    for (const auto& row : r.rows)
      for (const auto& v : row) ints.insert(std::get<std::int64_t>(v));
    CHECK(in == generate_case(prog, 7, c));
  }
  CHECK(sizes == std::set<std::size_t>{0, 1, 2, 3, 4, 5});
  CHECK(ints == std::set<std::int64_t>{0, 1, 2, 3, 4});
  CHECK(generate_case(prog, 7, 3) != generate_case(prog, 8, 3));

  auto topk = bench("topk");
  std::set<std::int64_t> ks;
  for (std::uint64_t c = 0; c < 200; ++c) ks.insert(std::get<std::int64_t>(generate_case(topk, 1, c).at("k")));
  CHECK(ks == std::set<std::int64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("difftest passes the right query and catches a mutant") {
  auto prog = bench("selection");
  auto good = difftest(prog, sql("SELECT R.* FROM R WHERE R.a > 2 ORDER BY R.rid"), 1000, 1);
  CHECK(good.cases == 1000);
  CHECK(good.failures == 0);
  CHECK_FALSE(good.first);

  auto mutant = sql("SELECT R.* FROM R WHERE R.a > 1 ORDER BY R.rid");
  auto bad = difftest(prog, mutant, 1000, 1);
  REQUIRE(bad.first);
  CHECK(bad.failures >= 1);

  // The witness must contain a row with a = 2 and survive a JSON round trip.
  const auto& f = *bad.first;
  bool has_two = false;
  for (const auto& row : std::get<Relation>(f.inputs.at("R")).rows) has_two |= std::get<std::int64_t>(row[0]) == 2;
  CHECK(has_two);
  json doc = diff_to_json(prog, bad, 1);
  CHECK(doc["firstFailure"]["case"] == f.index);
  auto replayed = interp::read_bindings(doc["firstFailure"]["input"], prog);
  Value expected = interp::run(prog, replayed);
  Value actual = emit::eval_sql(mutant, emit::MiniDb::from_values(replayed), emit::params_from_values(replayed));
  CHECK_FALSE(expected == actual);

  // Independent count: rerun every case by hand.
  std::uint64_t failures = 0, first = ~0ULL;
  for (std::uint64_t c = 0; c < 1000; ++c) {
    auto in = generate_case(prog, 1, c);
    if (!(interp::run(prog, in) == emit::eval_sql(mutant, emit::MiniDb::from_values(in)))) {
      ++failures;
      first = std::min(first, c);
    }
  }
  CHECK(bad.failures == failures);
  CHECK(f.index == first);
}

TEST_CASE("difftest results do not depend on jobs") {
  auto prog = bench("joinselproj");
  auto q = sql("SELECT R.a FROM R, S WHERE R.k = S.k AND R.a > 2 ORDER BY R.rid, S.rid");
  DiffOptions one, many;
  many.jobs = 4;
  auto a = difftest(prog, q, 300, 5, one);
  auto b = difftest(prog, q, 300, 5, many);
  REQUIRE(a.first);
  REQUIRE(b.first);
  CHECK(a.failures == b.failures);
  CHECK(a.first->index == b.first->index);
  CHECK(diff_to_json(prog, a, 5).dump() == diff_to_json(prog, b, 5).dump());
}

TEST_CASE("empty-relation generator trivially agrees on identity") {
  DiffOptions opt;
  opt.max_relation_size = 0;
  auto d = difftest(bench("identity"), sql("SELECT R.* FROM R ORDER BY R.rid"), 1, 1, opt);
  CHECK(d.cases == 1);
  CHECK(d.failures == 0);
}

TEST_CASE("difftest reports SQL errors as failures") {
  auto prog = bench("selection");
  auto d = difftest(prog, sql("SELECT R.* FROM T ORDER BY T.rid"), 10, 1);
  CHECK(d.failures == 10);
  REQUIRE(d.first);
  CHECK(d.first->index == 0);
  CHECK_FALSE(d.first->error.empty());
}

TEST_CASE("pipeline examples") {
  auto r = run_pipeline(bench_path("selection"), quick());
  CHECK(r.status == Status::Synthesized);
  CHECK(exit_code(r.status) == 0);
  std::string q = r.doc["solution"]["sql"];
  CHECK(q.find("WHERE") != std::string::npos);
  CHECK(q.find("ORDER BY R.rid") != std::string::npos);
  CHECK(r.doc["difftest"]["failures"] == 0);
  CHECK(r.doc["stats"]["wallSeconds"].is_null());

  Scratch tmp("pipeline");
  auto bad = run_pipeline(tmp.write("bad.qil", "fn f(R: rel(a:int) { return R; }"), quick());
  CHECK(bad.status == Status::Error);
  CHECK(exit_code(bad.status) == 1);
  CHECK(bad.doc["error"]["kind"] == "parse");

  auto ill = run_pipeline(tmp.write("ill.qil", "fn f(R: rel(a:int)) { var n: int = 0; n = R; return n; }"), quick());
  CHECK(ill.status == Status::Error);
  CHECK(ill.doc["error"]["kind"] == "type");

  auto missing = run_pipeline((tmp.dir / "missing.qil").string(), quick());
  CHECK(missing.status == Status::Error);
  CHECK(missing.doc["error"]["kind"] == "io");

  auto ones = run_pipeline(
      tmp.write("ones.qil",
                "fn ones(R: rel(a:int)) { var out: list(a:int); for i in 0..size(R) { out.append({a: 1}); } return out; }"),
      quick());
  CHECK(ones.status == Status::Failed);
  CHECK(exit_code(ones.status) == 2);
  CHECK(ones.doc["reason"] == "exhausted");
  CHECK(ones.doc["solution"].is_null());
}

TEST_CASE("timing fills in wall seconds and timeouts report progress") {
  RunConfig cfg = quick();
  cfg.timing = true;
  auto r = run_pipeline(bench_path("count"), cfg);
  CHECK(r.doc["stats"]["wallSeconds"].is_number());
  CHECK(r.doc["config"]["jobs"] == 1);

  cfg.synth.timeout_seconds = 1e-9;
  auto t = run_pipeline(bench_path("joinselproj"), cfg);
  CHECK(t.status == Status::Failed);
  CHECK(t.doc["reason"] == "timeout");
}

TEST_CASE("garbage never crashes the pipeline") {
  Scratch tmp("fuzz");
  std::mt19937_64 rng(99);
  const std::string alphabet = "fnvarlistrelintforifbreakreturn(){}[]<>=!+-.,:;0123456789 \n\tRabkixyz\"'#";
  std::vector<std::string> sources;
  for (int k = 0; k < 60; ++k) {
    std::string s;
    auto n = rng() % 80;
    for (std::uint64_t c = 0; c < n; ++c) s += alphabet[rng() % alphabet.size()];
    sources.push_back(s);
  }
  for (const char* name : {"selection", "equijoin", "topk", "min"}) {
    std::string base = slurp(bench_path(name));
    for (int k = 0; k < 15; ++k) {
      std::string s = base;
      int edits = 1 + static_cast<int>(rng() % 3);
      for (int e = 0; e < edits && !s.empty(); ++e) {
        auto pos = rng() % s.size();
        switch (rng() % 3) {
          case 0: s.erase(pos, 1 + rng() % 4); break;
          case 1: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
          default: s[pos] = alphabet[rng() % alphabet.size()]; break;
        }
      }
      sources.push_back(s);
    }
  }
  sources.push_back(std::string("\0\xff\xfe", 3));

  RunConfig cfg = quick();
  cfg.cases = 20;
  cfg.synth.timeout_seconds = 2;
  int k = 0;
  for (const auto& s : sources) {
    auto path = tmp.write("g" + std::to_string(k++) + ".qil", s);
    RunReport r;
    REQUIRE_NOTHROW(r = run_pipeline(path, cfg));
    std::string status = r.doc["status"];
    CHECK(status == to_string(r.status));
    if (r.status == Status::Synthesized) CHECK(r.doc["difftest"]["failures"] == 0);
    if (r.status == Status::Error) CHECK(r.doc["error"].is_object());

    auto run = invoke({"synth", path, "--cases", "20", "--timeout", "2"});
    CHECK(run.code == exit_code(r.status));
  }
}

TEST_CASE("synth reports are byte-identical across runs and jobs") {
  for (const char* name : {"selection", "equijoin", "topk", "sum"}) {
    auto a = invoke({"synth", bench_path(name), "--cases", "200"});
    auto b = invoke({"synth", bench_path(name), "--cases", "200"});
    auto c = invoke({"synth", bench_path(name), "--cases", "200", "--jobs", "8"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
  }
}

TEST_CASE("flags reach the config echo") {
  auto r = invoke({"synth", bench_path("count"), "--cost-bound", "9", "--rel-bound", "2", "--int-domain", "3", "--cases",
                "7", "--seed", "42", "--timeout", "30"});
  CHECK(r.code == 0);
  json d = json::parse(r.out);
  CHECK(d["config"] == json{{"costBound", 9},
                            {"relBound", 2},
                            {"intDomain", 3},
                            {"textDomain", {"a", "b"}},
                            {"timeoutSeconds", 30.0},
                            {"cases", 7},
                            {"seed", 42}});
  CHECK(d["difftest"]["cases"] == 7);

  // A cost bound below every candidate exhausts.
  CHECK(invoke({"synth", bench_path("count"), "--cost-bound", "1"}).code == 2);
  CHECK(invoke({"synth", bench_path("count"), "--cases", "0"}).code == 1);
  CHECK(invoke({"synth", bench_path("count"), "--jobs", "0"}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"synth", "--help"}).code == 0);
}

TEST_CASE("bench over directories") {
  Scratch empty("empty");
  auto e = invoke({"bench", empty.dir.string()});
  CHECK(e.code == 0);
  json ed = json::parse(e.out);
  CHECK(ed["benchmarks"] == 0);
  CHECK(ed["reports"].empty());

  Scratch mixed("mixed");
  for (const auto& ent : fs::directory_iterator(RELSYNTH_BENCH_DIR))
    if (ent.path().extension() == ".qil") fs::copy_file(ent.path(), mixed.dir / ent.path().filename());
  mixed.write("zz_broken.qil", "fn broken(");
  mixed.write("notes.txt", "ignored");

  auto m = invoke({"bench", mixed.dir.string(), "--cases", "100"});
  CHECK(m.code == 1);
  json md = json::parse(m.out);
  CHECK(md["benchmarks"] == 13);
  CHECK(md["synthesized"] == 12);
  CHECK(md["errors"] == 1);
  CHECK(md["failed"] == 0);
  int counted = 0;
  std::vector<std::string> files;
  for (const auto& r : md["reports"]) {
    counted += r["status"] == "synthesized";
    files.push_back(fs::path(r["file"].get<std::string>()).filename().string());
  }
  CHECK(counted == 12);
  CHECK(std::is_sorted(files.begin(), files.end()));
  CHECK(files.back() == "zz_broken.qil");
  CHECK(m.err.find("13 benchmarks: 12 synthesized, 0 failed, 1 errors") != std::string::npos);

  CHECK(invoke({"bench", (mixed.dir / "nope").string()}).code == 1);
}

TEST_CASE("replay runs a witness through both sides") {
  Scratch tmp("replay");
  auto prog = bench("selection");
  auto d = difftest(prog, sql("SELECT R.* FROM R WHERE R.a > 1 ORDER BY R.rid"), 200, 3);
  REQUIRE(d.first);
  auto input = tmp.write("in.json", interp::write_bindings(prog, d.first->inputs).dump());
  auto wrong = tmp.write("wrong.json", json{{"sql", "SELECT R.* FROM R WHERE R.a > 1 ORDER BY R.rid"}}.dump());
  auto right = tmp.write("right.json", json{{"sql", "SELECT R.* FROM R WHERE R.a > 2 ORDER BY R.rid"}}.dump());

  auto only = invoke({"replay", bench_path("selection"), "--input", input});
  CHECK(only.code == 0);
  CHECK(json::parse(only.out)["interpreter"] == interp::value_to_json(*d.first->expected));

  auto w = invoke({"replay", bench_path("selection"), "--input", input, "--solution", wrong});
  CHECK(w.code == 2);
  CHECK(json::parse(w.out)["match"] == false);

  auto r = invoke({"replay", bench_path("selection"), "--input", input, "--solution", right});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["match"] == true);

  // A full report works as the solution, and a failed report as the input.
  auto report = invoke({"synth", bench_path("selection"), "--cases", "20"});
  auto rep = tmp.write("report.json", report.out);
  CHECK(invoke({"replay", bench_path("selection"), "--input", input, "--solution", rep}).code == 0);

  auto ones = tmp.write("ones.qil",
                        "fn ones(R: rel(a:int)) { var out: list(a:int); for i in 0..size(R) { out.append({a: 1}); } "
                        "return out; }");
  auto failed = tmp.write("failed.json", invoke({"synth", ones}).out);
  CHECK(invoke({"replay", ones, "--input", failed}).code == 1);
  CHECK(invoke({"replay", bench_path("selection"), "--input", (tmp.dir / "none.json").string()}).code == 1);
}
