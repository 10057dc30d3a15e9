#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "relsynth/candidate.hpp"
#include "relsynth/interp.hpp"

// Verification conditions for a candidate and a bounded inductive checker
// that decides them by exhaustive enumeration of small inputs.
namespace relsynth::verify {

using frontend::TypedProgram;
using synth::Candidate;

enum class VcKind { Initiation, Preservation, Exit, BreakExit };

const char* to_string(VcKind k);

struct VerificationCondition {
  VcKind kind = VcKind::Initiation;
  int loop = 0;
  const TypedProgram* prog = nullptr;
  Candidate cand;

  // "Preservation(L0)"
  std::string name() const;
};

class NonCheckable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bounds {
  int max_relation_size = 3;
  int int_max = 2;  // int domain 0..int_max
  std::vector<std::string> text_domain{"a", "b"};
};

struct Valid {};

struct Counterexample {
  interp::Inputs inputs;
  std::vector<std::pair<std::string, std::int64_t>> indices;
  std::string vc;      // VerificationCondition::name()
  std::string detail;  // what differed
};

using Verdict = std::variant<Valid, Counterexample>;

inline bool is_valid(const Verdict& v) { return std::holds_alternative<Valid>(v); }

// One Initiation, Preservation and Exit per loop in loop-id order, each
// followed by a BreakExit for loops that end in a guarded break.
// Throws NonCheckable when some loop lacks an invariant or an invariant
// leaves a loop-carried variable undefined.
std::vector<VerificationCondition> gen_vcs(const TypedProgram& prog, const Candidate& cand);

// Enumerates every input within the bounds (parameters in declaration order,
// first slowest; relations by size, then row-lexicographically; scalars
// ascending) and every in-range index assignment (ascending), and reports
// the first violation.
Verdict check(const VerificationCondition& vc, const Bounds& b);

// Valid iff every VC checks; otherwise the earliest failing VC's witness.
Verdict validate(const TypedProgram& prog, const Candidate& cand, const Bounds& b);

// True iff the counterexample is a genuine violation of its VC.
bool replay(const TypedProgram& prog, const Candidate& cand, const Counterexample& cex);

nlohmann::json counterexample_to_json(const TypedProgram& prog, const Counterexample& cex);

// Effort counters for one check/validate call.
struct CheckStats {
  std::uint64_t vcs = 0;
  std::uint64_t instances = 0;  // (input, index assignment) pairs examined

  CheckStats& operator+=(const CheckStats& o) {
    vcs += o.vcs;
    instances += o.instances;
    return *this;
  }
};

// Precomputed instance space for one program and one set of bounds, reused
// across candidates. Safe for concurrent check/validate calls.
class Verifier {
 public:
  Verifier(const TypedProgram& prog, Bounds b);

  const Bounds& bounds() const { return bounds_; }
  // Number of input tuples in the instance space.
  std::size_t input_count() const { return inputs_.size(); }

  Verdict check(const VerificationCondition& vc, CheckStats* stats = nullptr) const;
  Verdict validate(const Candidate& cand, CheckStats* stats = nullptr) const;

 private:
  const TypedProgram& prog_;
  Bounds bounds_;
  std::vector<std::vector<Value>> inputs_;
};

// Pluggable decision procedure for single VCs.
enum class Decision { Valid, Counterexample, Unknown };

struct ProverResult {
  Decision decision = Decision::Unknown;
  std::optional<Counterexample> counterexample;
};

class ProverBackend {
 public:
  virtual ~ProverBackend() = default;
  virtual ProverResult decide(const VerificationCondition& vc) = 0;
};

// The bounded checker behind the backend interface.
class BoundedBackend : public ProverBackend {
 public:
  explicit BoundedBackend(Bounds b) : bounds_(std::move(b)) {}
  ProverResult decide(const VerificationCondition& vc) override;

 private:
  Bounds bounds_;
};

}  // namespace relsynth::verify
