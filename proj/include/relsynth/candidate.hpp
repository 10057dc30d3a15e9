#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relsynth/frontend.hpp"
#include "relsynth/tor.hpp"

namespace relsynth::synth {

// v = rhs, where v is a loop-carried local.
struct Equality {
  int slot = -1;
  std::string var;
  tor::Expr rhs;
};

// Conjunction of the index bounds 0 <= idx <= size(R) (implicit) and one
// equality per live variable.
struct Invariant {
  int loop = 0;
  std::vector<Equality> equalities;

  const Equality* find(int slot) const {
    for (const auto& e : equalities)
      if (e.slot == slot) return &e;
    return nullptr;
  }
};

// Invariants for every loop plus the postcondition result = post.
struct Candidate {
  std::vector<Invariant> invariants;
  tor::Expr post;
  std::size_t cost = 0;
  std::string key;  // canonical text; tie-breaker after cost

  const Invariant* invariant(int loop) const {
    for (const auto& i : invariants)
      if (i.loop == loop) return &i;
    return nullptr;
  }
};

// Canonical one-line serialization, e.g.
//   L0: out = (sel ... (top (query R) (index i))); post: out = (sel ... (query R))
std::string serialize(const Candidate& c, const frontend::TypedProgram& prog);

nlohmann::json candidate_to_json(const Candidate& c, const frontend::TypedProgram& prog);

// Names a candidate of `prog` may mention: relation parameters, scalar
// parameters and loop indices.
tor::Vocabulary vocabulary(const frontend::TypedProgram& prog);

// Reads the serialize() form back. Throws tor::ReadError on malformed text
// and tor::TorError on names or shapes the program does not support. The
// cost is that of the postcondition.
Candidate parse_candidate(std::string_view text, const frontend::TypedProgram& prog);

}  // namespace relsynth::synth
