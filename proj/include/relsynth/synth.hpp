#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relsynth/candidate.hpp"
#include "relsynth/emit.hpp"
#include "relsynth/frontend.hpp"
#include "relsynth/verify.hpp"

// Template extraction, candidate enumeration and the synthesis driver.
namespace relsynth::synth {

struct LoopShape {
  int id = 0;
  std::string label;
  std::string index;
  std::string relation;
  int depth = 1;
  bool has_break = false;
};

// A variable the candidate must define: every loop-carried local plus the
// returned variable.
struct Target {
  int slot = -1;
  std::string var;
  frontend::TypeKind type = frontend::TypeKind::List;
  SchemaRef schema;  // List only
  bool carried = false;
};

// Vocabulary scanned from the program text.
struct Template {
  std::vector<std::pair<std::string, Schema>> relations;  // unqualified schemas
  std::vector<std::pair<std::string, FieldType>> scalar_params;
  std::set<std::int64_t> int_constants;
  std::set<std::string> text_constants;
  std::set<tor::CmpOp> cmps;
  std::set<tor::AggKind> agg_kinds;
  bool has_append = false;
  bool has_break = false;
  std::vector<LoopShape> loops;
  std::vector<Target> targets;  // slot order

  int nesting() const;
};

Template extract_template(const frontend::TypedProgram& prog);

// Lazily produces candidates in strictly increasing (cost, key) order. The
// program must outlive the stream.
class CandidateStream {
 public:
  CandidateStream(const frontend::TypedProgram& prog, Template tpl, std::size_t cost_bound);
  ~CandidateStream();
  CandidateStream(CandidateStream&&) noexcept;
  CandidateStream& operator=(CandidateStream&&) noexcept;

  std::optional<Candidate> next();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Every candidate up to the bound, in order. Meant for small bounds.
std::vector<Candidate> enumerate(const frontend::TypedProgram& prog, const Template& tpl, std::size_t cost_bound);

// Whether `e` belongs to the body grammar for `target` under `tpl`. Decided
// structurally, independent of the enumerator.
bool is_well_shaped(const tor::Expr& e, const Target& target, const Template& tpl);

// Invariant right-hand side for `loop` derived from a body expression.
tor::Expr lift(const tor::Expr& body, int loop, const Template& tpl);

struct SynthConfig {
  std::size_t cost_bound = 24;
  verify::Bounds bounds;
  double timeout_seconds = 120;  // <= 0 disables the limit
  unsigned jobs = 1;
};

struct SynthStats {
  std::uint64_t candidates_tried = 0;
  std::uint64_t candidates_rejected = 0;
  std::uint64_t vcs_checked = 0;
  std::uint64_t instances = 0;
};

struct Solution {
  Candidate candidate;
  tor::Expr simplified;  // postcondition after tor::simplify
  emit::SqlQuery sql;
  std::string sql_text;
  SynthStats stats;
};

struct Failure {
  enum class Reason { Exhausted, Timeout };
  Reason reason = Reason::Exhausted;
  SynthStats stats;
};

const char* to_string(Failure::Reason r);

using SynthResult = std::variant<Solution, Failure>;

// The least (cost, key) candidate that validates, independent of cfg.jobs.
SynthResult synthesize(const frontend::TypedProgram& prog, const SynthConfig& cfg);

}  // namespace relsynth::synth
