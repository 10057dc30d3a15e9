#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "relsynth/cli.hpp"

namespace relsynth::cli {

using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

// Bindings may come straight from a file or from a report's difftest witness.
json bindings_of(const json& doc) {
  if (doc.is_object() && doc.contains("difftest")) {
    const json& w = doc["difftest"];
    if (!w.is_object() || !w["firstFailure"].is_object())
      throw std::runtime_error("report has no difftest witness");
    return w["firstFailure"]["input"];
  }
  return doc;
}

std::string sql_of(const json& doc) {
  if (doc.contains("solution")) {
    if (!doc["solution"].is_object()) throw std::runtime_error("report has no solution");
    return doc["solution"]["sql"].get<std::string>();
  }
  return doc.at("sql").get<std::string>();
}

int replay(const std::string& file, const std::string& input, const std::string& solution, std::ostream& out,
           std::ostream& err) {
  try {
    auto prog = frontend::load_program_file(file);
    auto inputs = interp::read_bindings(bindings_of(read_json(input)), prog);
    json doc{{"programName", prog.program().name}, {"input", interp::write_bindings(prog, inputs)}};
    Value expected = interp::run(prog, inputs);
    doc["interpreter"] = interp::value_to_json(expected);
    int code = 0;
    if (!solution.empty()) {
      auto sql = emit::parse_sql(sql_of(read_json(solution)));
      Value actual = emit::eval_sql(sql, emit::MiniDb::from_values(inputs), emit::params_from_values(inputs));
      doc["sqlText"] = emit::render(sql);
      doc["sql"] = interp::value_to_json(actual);
      doc["match"] = expected == actual;
      if (!(expected == actual)) code = 2;
    }
    out << doc.dump(2) << "\n";
    return code;
  } catch (const std::exception& e) {
    err << "replay: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infers SQL queries equivalent to imperative kernel loops"};
  app.require_subcommand(1);

  RunConfig cfg;
  int cost_bound = static_cast<int>(cfg.synth.cost_bound);
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--cost-bound", cost_bound, "largest candidate cost enumerated")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--rel-bound", cfg.synth.bounds.max_relation_size, "verifier relation size bound")
        ->check(CLI::Range(0, 8))
        ->capture_default_str();
    sub->add_option("--int-domain", cfg.synth.bounds.int_max, "verifier ints range over 0..D")
        ->check(CLI::Range(0, 16))
        ->capture_default_str();
    sub->add_option("--cases", cfg.cases, "difftest cases")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", cfg.seed, "difftest seed")->capture_default_str();
    sub->add_option("--timeout", cfg.synth.timeout_seconds, "wall-clock seconds per file, 0 for none")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--jobs", cfg.synth.jobs, "worker threads")->check(CLI::Range(1u, 256u))->capture_default_str();
    sub->add_flag("--timing", cfg.timing, "record wall-clock seconds (reports stop being reproducible)");
  };

  std::string file;
  auto* synth_cmd = app.add_subcommand("synth", "synthesize one file");
  synth_cmd->add_option("file", file, ".qil source")->required();
  add_flags(synth_cmd);

  std::string dir;
  auto* bench_cmd = app.add_subcommand("bench", "synthesize every .qil file in a directory");
  bench_cmd->add_option("dir", dir, "benchmark directory")->required();
  add_flags(bench_cmd);

  std::string replay_file, input, solution;
  auto* replay_cmd = app.add_subcommand("replay", "run one input through the interpreter and a solution's SQL");
  replay_cmd->add_option("file", replay_file, ".qil source")->required();
  replay_cmd->add_option("--input", input, "bindings JSON, or a report with a difftest witness")->required();
  replay_cmd->add_option("--solution", solution, "report JSON or {\"sql\": ...}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  cfg.synth.cost_bound = static_cast<std::size_t>(cost_bound);

  if (*synth_cmd) {
    auto r = run_pipeline(file, cfg);
    out << r.doc.dump(2) << "\n";
    return exit_code(r.status);
  }
  if (*bench_cmd) {
    BenchmarkSummary s;
    try {
      s = run_benchmarks(dir, cfg);
    } catch (const std::exception& e) {
      err << "bench: " << e.what() << "\n";
      return 1;
    }
    out << s.doc.dump(2) << "\n";
    err << summary_table(s);
    if (s.errors) return 1;
    return s.failed ? 2 : 0;
  }
  return replay(replay_file, input, solution, out, err);
}

}  // namespace relsynth::cli
