#include "relsynth/candidate.hpp"

#include <algorithm>
#include <cctype>

namespace relsynth::synth {

std::string serialize(const Candidate& c, const frontend::TypedProgram& prog) {
  std::string out;
  for (const auto& inv : c.invariants) {
    out += prog.loops[static_cast<std::size_t>(inv.loop)].label + ":";
    for (std::size_t k = 0; k < inv.equalities.size(); ++k) {
      out += k ? ", " : " ";
      out += inv.equalities[k].var + " = " + inv.equalities[k].rhs->text();
    }
    out += "; ";
  }
  out += "post: " + prog.slots[static_cast<std::size_t>(prog.result_slot)].name + " = " +
         (c.post ? c.post->text() : std::string("?"));
  return out;
}

nlohmann::json candidate_to_json(const Candidate& c, const frontend::TypedProgram& prog) {
  nlohmann::json invs = nlohmann::json::array();
  for (const auto& inv : c.invariants) {
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& e : inv.equalities) eqs.push_back({{"var", e.var}, {"rhs", e.rhs->text()}});
    invs.push_back({{"loop", prog.loops[static_cast<std::size_t>(inv.loop)].label}, {"equalities", eqs}});
  }
  return {{"invariants", invs},
          {"post",
           {{"var", prog.slots[static_cast<std::size_t>(prog.result_slot)].name},
            {"rhs", c.post ? c.post->text() : ""}}},
          {"cost", c.cost},
          {"text", serialize(c, prog)}};
}

}  // namespace relsynth::synth

namespace relsynth::synth {

tor::Vocabulary vocabulary(const frontend::TypedProgram& prog) {
  tor::Vocabulary v;
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& s = prog.slots[static_cast<std::size_t>(p)];
    if (s.type == frontend::TypeKind::Relation) v.relations[s.name] = *s.schema;
    else v.params[s.name] = s.type == frontend::TypeKind::Int ? FieldType::Int : FieldType::Text;
  }
  for (const auto& l : prog.loops) v.indices.insert(l.index);
  return v;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on `sep` outside parentheses and string literals.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  int depth = 0;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    char c = s[k];
    if (quoted) {
      if (c == '\\') ++k;
      else if (c == '"') quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    } else if (c == sep && depth == 0) {
      out.push_back(trim(s.substr(start, k - start)));
      start = k + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

}  // namespace

Candidate parse_candidate(std::string_view text, const frontend::TypedProgram& prog) {
  const auto vocab = vocabulary(prog);
  Candidate c;
  for (auto part : split_top(text, ';')) {
    if (part.empty()) continue;
    auto colon = part.find(':');
    if (colon == std::string_view::npos) throw tor::ReadError("expected 'L<n>:' or 'post:' in '" + std::string(part) + "'");
    std::string head(trim(part.substr(0, colon)));
    auto body = part.substr(colon + 1);

    int loop = -1;
    if (head != "post") {
      for (const auto& l : prog.loops)
        if (l.label == head) loop = l.id;
      if (loop < 0) throw tor::ReadError("unknown loop label '" + head + "'");
      if (c.invariant(loop)) throw tor::ReadError("duplicate invariant for " + head);
    }

    Invariant inv{loop, {}};
    for (auto eq : split_top(body, ',')) {
      auto at = eq.find('=');
      if (at == std::string_view::npos) throw tor::ReadError("expected 'var = expr' in '" + std::string(eq) + "'");
      std::string var(trim(eq.substr(0, at)));
      int slot = prog.slot_of(var);
      if (slot < prog.param_count || prog.slots[static_cast<std::size_t>(slot)].is_index) throw tor::ReadError("'" + var + "' is not a local variable");
      tor::Expr rhs = tor::read(trim(eq.substr(at + 1)), vocab);
      if (loop < 0) {
        if (slot != prog.result_slot) throw tor::ReadError("postcondition must define the result '" + var + "'");
        if (c.post) throw tor::ReadError("duplicate postcondition");
        c.post = rhs;
      } else {
        if (inv.find(slot)) throw tor::ReadError("duplicate equality for '" + var + "'");
        inv.equalities.push_back({slot, var, rhs});
      }
    }
    if (loop >= 0) c.invariants.push_back(std::move(inv));
  }
  if (!c.post) throw tor::ReadError("candidate has no postcondition");
  std::sort(c.invariants.begin(), c.invariants.end(), [](const Invariant& a, const Invariant& b) { return a.loop < b.loop; });
  c.cost = c.post->cost();
  c.key = serialize(c, prog);
  return c;
}

}  // namespace relsynth::synth
