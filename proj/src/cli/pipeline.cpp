#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "relsynth/cli.hpp"

namespace relsynth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Status s) {
  switch (s) {
    case Status::Synthesized: return "synthesized";
    case Status::Failed: return "failed";
    default: return "error";
  }
}

int exit_code(Status s) {
  switch (s) {
    case Status::Synthesized: return 0;
    case Status::Failed: return 2;
    default: return 1;
  }
}

namespace {

json config_json(const RunConfig& cfg) {
  json c{{"costBound", cfg.synth.cost_bound},
         {"relBound", cfg.synth.bounds.max_relation_size},
         {"intDomain", cfg.synth.bounds.int_max},
         {"textDomain", cfg.synth.bounds.text_domain},
         {"timeoutSeconds", cfg.synth.timeout_seconds},
         {"cases", cfg.cases},
         {"seed", cfg.seed}};
  // Parallelism only shows up in timed runs, which are not reproducible anyway.
  if (cfg.timing) c["jobs"] = cfg.synth.jobs;
  return c;
}

json stats_json(const synth::SynthStats& s) {
  return {{"candidatesTried", s.candidates_tried},
          {"candidatesRejected", s.candidates_rejected},
          {"vcsChecked", s.vcs_checked},
          {"instancesEnumerated", s.instances},
          {"wallSeconds", nullptr}};
}

json solution_json(const synth::Solution& s, const frontend::TypedProgram& prog) {
  json c = synth::candidate_to_json(s.candidate, prog);
  return {{"invariants", c["invariants"]}, {"postcondition", c["post"]}, {"candidate", c["text"]},
          {"cost", c["cost"]},             {"simplified", s.simplified->text()}, {"sql", s.sql_text}};
}

json error_json(const std::string& kind, const std::string& message) {
  return {{"kind", kind}, {"message", message}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunReport run_pipeline(const std::string& path, const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  RunReport r;
  json& d = r.doc;
  d = {{"programName", fs::path(path).stem().string()},
       {"file", path},
       {"status", nullptr},
       {"reason", nullptr},
       {"error", nullptr},
       {"solution", nullptr},
       {"stats", stats_json({})},
       {"difftest", nullptr},
       {"config", config_json(cfg)}};

  auto finish = [&](Status s) {
    r.status = s;
    d["status"] = to_string(s);
    if (cfg.timing) d["stats"]["wallSeconds"] = std::chrono::duration<double>(clock::now() - start).count();
    return r;
  };

  std::string source;
  try {
    source = read_file(path);
  } catch (const std::exception& e) {
    d["error"] = error_json("io", e.what());
    return finish(Status::Error);
  }

  std::optional<frontend::TypedProgram> prog;
  try {
    prog = frontend::load_program(source);
    d["programName"] = prog->program().name;
  } catch (const frontend::ParseError& e) {
    d["error"] = error_json("parse", e.what());
    return finish(Status::Error);
  } catch (const frontend::TypeCheckError& e) {
    d["error"] = error_json("type", e.what());
    return finish(Status::Error);
  } catch (const std::exception& e) {
    d["error"] = error_json("parse", e.what());
    return finish(Status::Error);
  }

  try {
    auto res = synth::synthesize(*prog, cfg.synth);
    if (auto* f = std::get_if<synth::Failure>(&res)) {
      d["stats"] = stats_json(f->stats);
      d["reason"] = synth::to_string(f->reason);
      return finish(Status::Failed);
    }
    const auto& sol = std::get<synth::Solution>(res);
    d["stats"] = stats_json(sol.stats);
    d["solution"] = solution_json(sol, *prog);

    DiffOptions opt;
    opt.jobs = cfg.synth.jobs;
    auto diff = difftest(*prog, sol.sql, cfg.cases, cfg.seed, opt);
    d["difftest"] = diff_to_json(*prog, diff, cfg.seed);
    if (diff.failures) {
      d["reason"] = "difftest";
      return finish(Status::Failed);
    }
    return finish(Status::Synthesized);
  } catch (const std::exception& e) {
    d["error"] = error_json("internal", e.what());
    return finish(Status::Error);
  }
}

BenchmarkSummary run_benchmarks(const std::string& dir, const RunConfig& cfg) {
  std::vector<std::string> files;
  for (const auto& ent : fs::directory_iterator(dir))
    if (ent.path().extension() == ".qil") files.push_back(ent.path().string());
  std::sort(files.begin(), files.end(), [](const std::string& a, const std::string& b) {
    return fs::path(a).filename().string() < fs::path(b).filename().string();
  });

  BenchmarkSummary s;
  json reports = json::array();
  for (const auto& f : files) {
    auto r = run_pipeline(f, cfg);
    switch (r.status) {
      case Status::Synthesized: ++s.synthesized; break;
      case Status::Failed: ++s.failed; break;
      default: ++s.errors; break;
    }
    reports.push_back(r.doc);
    s.reports.push_back(std::move(r));
  }
  s.doc = {{"benchmarks", s.reports.size()},
           {"synthesized", s.synthesized},
           {"failed", s.failed},
           {"errors", s.errors},
           {"reports", std::move(reports)}};
  return s;
}

std::string summary_table(const BenchmarkSummary& s) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "benchmark" << std::setw(13) << "status" << std::setw(8) << "tried"
     << "sql\n";
  for (const auto& r : s.reports) {
    const json& d = r.doc;
    std::string status = d["status"].get<std::string>();
    if (d["reason"].is_string()) status += "/" + d["reason"].get<std::string>();
    std::string sql = d["solution"].is_object() ? d["solution"]["sql"].get<std::string>() : "-";
    os << std::setw(14) << d["programName"].get<std::string>() << std::setw(13) << status << std::setw(8)
       << d["stats"]["candidatesTried"].get<std::uint64_t>() << sql << "\n";
  }
  os << s.reports.size() << " benchmarks: " << s.synthesized << " synthesized, " << s.failed << " failed, "
     << s.errors << " errors\n";
  return os.str();
}

}  // namespace relsynth::cli
