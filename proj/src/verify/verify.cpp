#include "relsynth/verify.hpp"

#include <algorithm>

namespace relsynth::verify {

using frontend::TypeKind;
using interp::Flow;
using interp::Frame;

const char* to_string(VcKind k) {
  switch (k) {
    case VcKind::Initiation: return "Initiation";
    case VcKind::Preservation: return "Preservation";
    case VcKind::Exit: return "Exit";
    case VcKind::BreakExit: return "BreakExit";
  }
  return "?";
}

std::string VerificationCondition::name() const {
  std::string where = loop < 0 ? "program" : prog->loops[static_cast<std::size_t>(loop)].label;
  return std::string(to_string(kind)) + "(" + where + ")";
}

std::vector<VerificationCondition> gen_vcs(const TypedProgram& prog, const Candidate& cand) {
  if (!cand.post) throw NonCheckable("candidate has no postcondition");
  std::vector<VerificationCondition> out;
  if (prog.loops.empty()) {
    out.push_back({VcKind::Exit, -1, &prog, cand});
    return out;
  }
  for (const auto& l : prog.loops) {
    const auto* inv = cand.invariant(l.id);
    if (!inv) throw NonCheckable("no invariant for loop " + l.label);
    for (int slot : prog.loop_carried)
      if (!inv->find(slot))
        throw NonCheckable("invariant of " + l.label + " does not define '" +
                           prog.slots[static_cast<std::size_t>(slot)].name + "'");
    out.push_back({VcKind::Initiation, l.id, &prog, cand});
    out.push_back({VcKind::Preservation, l.id, &prog, cand});
    out.push_back({VcKind::Exit, l.id, &prog, cand});
    if (l.has_break) out.push_back({VcKind::BreakExit, l.id, &prog, cand});
  }
  return out;
}

namespace {

// One concrete instance: argument values in parameter order plus the loop
// index values (outer first).
struct Instance {
  const std::vector<Value>* args;
  std::vector<std::int64_t> idx;
};

class Checker {
 public:
  Checker(const TypedProgram& prog, const Candidate& cand) : prog_(prog), cand_(cand) {}

  // Failure description, or empty when the VC holds at this instance.
  std::string run(const VerificationCondition& vc, const Instance& in) const {
    try {
      return dispatch(vc, in);
    } catch (const tor::TorError& e) {
      return std::string("evaluation error: ") + e.what();
    }
  }

 private:
  tor::Env env(const Instance& in, std::size_t nidx) const {
    tor::Env e;
    for (int p = 0; p < prog_.param_count; ++p) {
      const auto& info = prog_.slots[static_cast<std::size_t>(p)];
      const Value& v = (*in.args)[static_cast<std::size_t>(p)];
      if (const auto* r = std::get_if<Relation>(&v)) e.bind_relation(info.name, r);
      else if (const auto* i = std::get_if<std::int64_t>(&v)) e.bind_scalar(info.name, *i);
      else e.bind_scalar(info.name, std::get<std::string>(v));
    }
    for (std::size_t k = 0; k < nidx && k < in.idx.size(); ++k) e.bind_index(prog_.loops[k].index, in.idx[k]);
    return e;
  }

  void store(Frame& f, int slot, Value v) const {
    auto& dst = f.slots[static_cast<std::size_t>(slot)];
    if (prog_.slots[static_cast<std::size_t>(slot)].type == TypeKind::List) {
      if (auto* r = std::get_if<Relation>(&v)) {
        std::get<Relation>(dst).rows = std::move(r->rows);
        return;
      }
    }
    dst = std::move(v);
  }

  void set_index(Frame& f, int loop, std::int64_t v) const {
    f.slots[static_cast<std::size_t>(prog_.loops[static_cast<std::size_t>(loop)].index_slot)] = v;
  }

  // Overwrites loop-carried variables with the invariant's right-hand sides.
  void assume(Frame& f, int loop, const Instance& in) const {
    tor::Env e = env(in, static_cast<std::size_t>(loop) + 1);
    for (const auto& eq : cand_.invariant(loop)->equalities) store(f, eq.slot, tor::eval(eq.rhs, e));
  }

  std::string holds(const Frame& f, int loop, const Instance& in) const {
    tor::Env e = env(in, static_cast<std::size_t>(loop) + 1);
    for (const auto& eq : cand_.invariant(loop)->equalities) {
      Value want = tor::eval(eq.rhs, e);
      const Value& got = f.slots[static_cast<std::size_t>(eq.slot)];
      if (!(got == want))
        return prog_.loops[static_cast<std::size_t>(loop)].label + " invariant: " + eq.var + " is " +
               relsynth::to_string(got) + " but " + eq.rhs->text() + " is " + relsynth::to_string(want);
    }
    return {};
  }

  std::string post_holds(const Frame& f, const Instance& in) const {
    Value want = tor::eval(cand_.post, env(in, 0));
    const Value& got = f.slots[static_cast<std::size_t>(prog_.result_slot)];
    if (!(got == want))
      return "postcondition: " + prog_.slots[static_cast<std::size_t>(prog_.result_slot)].name + " is " +
             relsynth::to_string(got) + " but " + cand_.post->text() + " is " + relsynth::to_string(want);
    return {};
  }

  // State at the head of `loop` for the instance's index values.
  Frame head(int loop, const Instance& in) const {
    Frame f = interp::initial_frame(prog_, *in.args);
    interp::exec(prog_, prog_.split(0).before, f);
    assume(f, 0, in);
    set_index(f, 0, in.idx[0]);
    if (loop == 1) {
      interp::exec(prog_, prog_.split(1).before, f);
      assume(f, 1, in);
      set_index(f, 1, in.idx[1]);
    }
    return f;
  }

  // What must hold once `loop` has been left, normally or by break.
  std::string after_loop(int loop, Frame& f, const Instance& in) const {
    if (loop == 1) {
      if (interp::exec(prog_, prog_.split(1).after, f) == Flow::Normal) {
        Instance next = in;
        next.idx.resize(1);
        ++next.idx[0];
        return holds(f, 0, next);
      }
    }
    interp::exec(prog_, prog_.split(0).after, f);
    return post_holds(f, in);
  }

  std::string dispatch(const VerificationCondition& vc, const Instance& in) const {
    if (vc.loop < 0) {
      Frame f = interp::initial_frame(prog_, *in.args);
      interp::exec(prog_, prog_.program().body, f);
      return post_holds(f, in);
    }
    const int l = vc.loop;
    switch (vc.kind) {
      case VcKind::Initiation: {
        Frame f = interp::initial_frame(prog_, *in.args);
        interp::exec(prog_, prog_.split(0).before, f);
        if (l == 1) {
          assume(f, 0, in);
          set_index(f, 0, in.idx[0]);
          interp::exec(prog_, prog_.split(1).before, f);
        }
        return holds(f, l, in);
      }
      case VcKind::Preservation: {
        Frame f = head(l, in);
        if (interp::exec(prog_, prog_.body_of(l), f) == Flow::Break) return {};
        Instance next = in;
        ++next.idx[static_cast<std::size_t>(l)];
        return holds(f, l, next);
      }
      case VcKind::Exit: {
        Frame f = head(l, in);
        return after_loop(l, f, in);
      }
      case VcKind::BreakExit: {
        Frame f = head(l, in);
        if (interp::exec(prog_, prog_.body_of(l), f) == Flow::Normal) return {};
        return after_loop(l, f, in);
      }
    }
    return {};
  }

  const TypedProgram& prog_;
  const Candidate& cand_;
};

std::size_t rel_size(const TypedProgram& prog, const std::vector<Value>& args, int loop) {
  int slot = prog.loops[static_cast<std::size_t>(loop)].rel_slot;
  return std::get<Relation>(args[static_cast<std::size_t>(slot)]).size();
}

// Index assignments the VC quantifies over, ascending (outer slowest).
std::vector<std::vector<std::int64_t>> index_space(const VerificationCondition& vc,
                                                   const std::vector<Value>& args) {
  const TypedProgram& prog = *vc.prog;
  std::vector<std::vector<std::int64_t>> out;
  if (vc.loop < 0) {
    out.push_back({});
    return out;
  }
  auto own = [&](std::vector<std::int64_t> prefix, std::int64_t n) {
    auto push = [&](std::int64_t v) {
      auto x = prefix;
      x.push_back(v);
      out.push_back(std::move(x));
    };
    switch (vc.kind) {
      case VcKind::Initiation: push(0); break;
      case VcKind::Exit: push(n); break;
      default:
        for (std::int64_t v = 0; v < n; ++v) push(v);
        break;
    }
  };
  auto n0 = static_cast<std::int64_t>(rel_size(prog, args, 0));
  if (vc.loop == 0) {
    own({}, n0);
  } else {
    auto n1 = static_cast<std::int64_t>(rel_size(prog, args, 1));
    for (std::int64_t i = 0; i < n0; ++i) own({i}, n1);
  }
  return out;
}

std::vector<Row> all_rows(const Schema& schema, const Bounds& b) {
  std::vector<Row> rows{Row{}};
  for (const auto& c : schema) {
    std::vector<Row> next;
    for (const auto& r : rows) {
      if (c.type == FieldType::Int) {
        for (int v = 0; v <= b.int_max; ++v) {
          next.push_back(r);
          next.back().emplace_back(std::int64_t{v});
        }
      } else {
        for (const auto& t : b.text_domain) {
          next.push_back(r);
          next.back().emplace_back(t);
        }
      }
    }
    rows = std::move(next);
  }
  return rows;
}

std::vector<Value> domain(const frontend::SlotInfo& info, const Bounds& b) {
  std::vector<Value> out;
  switch (info.type) {
    case TypeKind::Relation: {
      auto rows = all_rows(*info.schema, b);
      for (int n = 0; n <= b.max_relation_size; ++n) {
        std::vector<std::size_t> digit(static_cast<std::size_t>(n), 0);
        for (;;) {
          Relation r{info.schema, {}};
          for (auto d : digit) r.rows.push_back(rows[d]);
          out.emplace_back(std::move(r));
          int k = n - 1;
          while (k >= 0 && digit[static_cast<std::size_t>(k)] + 1 == rows.size())
            digit[static_cast<std::size_t>(k--)] = 0;
          if (k < 0 || rows.empty()) break;
          ++digit[static_cast<std::size_t>(k)];
        }
        if (rows.empty()) break;
      }
      break;
    }
    case TypeKind::Int:
      for (int v = 0; v <= b.int_max; ++v) out.emplace_back(std::int64_t{v});
      break;
    default:
      for (const auto& t : b.text_domain) out.emplace_back(t);
      break;
  }
  return out;
}

interp::Inputs to_inputs(const TypedProgram& prog, const std::vector<Value>& args) {
  interp::Inputs in;
  for (int p = 0; p < prog.param_count; ++p)
    in.emplace(prog.slots[static_cast<std::size_t>(p)].name, args[static_cast<std::size_t>(p)]);
  return in;
}

std::vector<std::pair<std::string, std::int64_t>> name_indices(const TypedProgram& prog,
                                                               const std::vector<std::int64_t>& idx) {
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (std::size_t k = 0; k < idx.size(); ++k) out.emplace_back(prog.loops[k].index, idx[k]);
  return out;
}

}  // namespace

Verifier::Verifier(const TypedProgram& prog, Bounds b) : prog_(prog), bounds_(std::move(b)) {
  if (bounds_.max_relation_size < 0 || bounds_.int_max < 0 || bounds_.text_domain.empty())
    throw std::invalid_argument("bounds need a non-negative size, a non-empty int domain and texts");
  inputs_.push_back({});
  for (int p = 0; p < prog.param_count; ++p) {
    auto values = domain(prog.slots[static_cast<std::size_t>(p)], bounds_);
    std::vector<std::vector<Value>> next;
    next.reserve(inputs_.size() * values.size());
    for (const auto& prefix : inputs_)
      for (const auto& v : values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    inputs_ = std::move(next);
  }
}

Verdict Verifier::check(const VerificationCondition& vc, CheckStats* stats) const {
  Checker checker(prog_, vc.cand);
  if (stats) ++stats->vcs;
  for (const auto& args : inputs_) {
    for (auto& idx : index_space(vc, args)) {
      if (stats) ++stats->instances;
      std::string failure = checker.run(vc, Instance{&args, idx});
      if (!failure.empty())
        return Counterexample{to_inputs(prog_, args), name_indices(prog_, idx), vc.name(), failure};
    }
  }
  return Valid{};
}

Verdict Verifier::validate(const Candidate& cand, CheckStats* stats) const {
  for (const auto& vc : gen_vcs(prog_, cand)) {
    Verdict v = check(vc, stats);
    if (!is_valid(v)) return v;
  }
  return Valid{};
}

Verdict check(const VerificationCondition& vc, const Bounds& b) {
  Verifier v(*vc.prog, b);
  return v.check(vc);
}

Verdict validate(const TypedProgram& prog, const Candidate& cand, const Bounds& b) {
  Verifier v(prog, b);
  return v.validate(cand);
}

bool replay(const TypedProgram& prog, const Candidate& cand, const Counterexample& cex) {
  std::vector<Value> args = interp::arrange_inputs(prog, cex.inputs);
  std::vector<std::int64_t> idx;
  for (const auto& [name, v] : cex.indices) idx.push_back(v);
  for (const auto& vc : gen_vcs(prog, cand)) {
    if (vc.name() != cex.vc) continue;
    // The assignment must be one the VC quantifies over.
    auto space = index_space(vc, args);
    if (std::find(space.begin(), space.end(), idx) == space.end()) return false;
    Checker checker(prog, cand);
    return !checker.run(vc, Instance{&args, idx}).empty();
  }
  return false;
}

nlohmann::json counterexample_to_json(const TypedProgram& prog, const Counterexample& cex) {
  nlohmann::json idx = nlohmann::json::object();
  for (const auto& [name, v] : cex.indices) idx[name] = v;
  return {{"vc", cex.vc},
          {"indices", idx},
          {"inputs", interp::write_bindings(prog, cex.inputs)},
          {"detail", cex.detail}};
}

ProverResult BoundedBackend::decide(const VerificationCondition& vc) {
  Verdict v = check(vc, bounds_);
  if (is_valid(v)) return {Decision::Valid, std::nullopt};
  return {Decision::Counterexample, std::get<Counterexample>(v)};
}

}  // namespace relsynth::verify
