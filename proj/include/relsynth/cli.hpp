#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "relsynth/emit.hpp"
#include "relsynth/interp.hpp"
#include "relsynth/synth.hpp"

// Pipeline orchestration, differential testing and the command-line driver.
namespace relsynth::cli {

// One step of the splitmix64 sequence started at `x`.
std::uint64_t splitmix64(std::uint64_t x);

struct DiffOptions {
  int max_relation_size = 5;
  int int_max = 4;
  std::vector<std::string> alphabet{"a", "b", "c"};
  unsigned jobs = 1;
};

// Case `index` of the stream for `seed`; see docs/rng.md.
interp::Inputs generate_case(const frontend::TypedProgram& prog, std::uint64_t seed, std::uint64_t index,
                             const DiffOptions& opt = {});

struct DiffFailure {
  std::uint64_t index = 0;
  interp::Inputs inputs;
  std::optional<Value> expected;  // interpreter
  std::optional<Value> actual;    // SQL engine
  std::string error;
};

struct DiffResult {
  std::uint64_t cases = 0;
  std::uint64_t failures = 0;
  std::optional<DiffFailure> first;  // lowest failing index
};

// Compares the interpreter against the SQL engine on `cases` generated
// inputs. Counts and the reported failure do not depend on opt.jobs.
DiffResult difftest(const frontend::TypedProgram& prog, const emit::SqlQuery& sql, std::uint64_t cases,
                    std::uint64_t seed, const DiffOptions& opt = {});

nlohmann::json diff_to_json(const frontend::TypedProgram& prog, const DiffResult& d, std::uint64_t seed);

struct RunConfig {
  synth::SynthConfig synth;
  std::uint64_t cases = 1000;
  std::uint64_t seed = 1;
  bool timing = false;  // wallSeconds is null otherwise
};

enum class Status { Synthesized, Failed, Error };

const char* to_string(Status s);
int exit_code(Status s);

struct RunReport {
  Status status = Status::Error;
  nlohmann::json doc;
};

// Parse, synthesize, emit and difftest one file. Never throws.
RunReport run_pipeline(const std::string& path, const RunConfig& cfg);

struct BenchmarkSummary {
  std::vector<RunReport> reports;
  int synthesized = 0;
  int failed = 0;
  int errors = 0;
  nlohmann::json doc;
};

// Every `.qil` file in `dir`, in filename order.
BenchmarkSummary run_benchmarks(const std::string& dir, const RunConfig& cfg);

// Fixed-width table of a summary for humans.
std::string summary_table(const BenchmarkSummary& s);

// Entry point behind the relsynth executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relsynth::cli
