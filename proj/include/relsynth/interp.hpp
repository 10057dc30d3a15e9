#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relsynth/frontend.hpp"
#include "relsynth/value.hpp"

namespace relsynth::interp {

using frontend::Stmt;
using frontend::TypedProgram;

// Named input bindings, one per program parameter.
using Inputs = std::map<std::string, Value>;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mutable machine state: one Value per program slot.
struct Frame {
  std::vector<Value> slots;
};

enum class Flow { Normal, Break };

struct LoopHeadState {
  std::string loop;  // loop label, or "exit" for the final state
  std::vector<std::pair<std::string, std::int64_t>> indices;
  std::vector<std::pair<std::string, Value>> vars;
};

// Orders inputs by parameter position and checks their types.
std::vector<Value> arrange_inputs(const TypedProgram& prog, const Inputs& inputs);

// Parameters bound, locals initialized (lists empty, opt int absent).
Frame initial_frame(const TypedProgram& prog, std::span<const Value> args);

// Executes a statement sequence against `frame`. A Break result means a
// guarded break fired and the innermost enclosing loop must stop.
Flow exec(const TypedProgram& prog, std::span<const Stmt> stmts, Frame& frame);

Value run(const TypedProgram& prog, std::span<const Value> args);
Value run(const TypedProgram& prog, const Inputs& inputs);

std::vector<LoopHeadState> trace(const TypedProgram& prog, const Inputs& inputs);

// Shared JSON input-binding format:
//   {"R": {"schema": [["a","int"]], "rows": [[1],[3]]}, "k": 2}
Inputs read_bindings(const nlohmann::json& doc, const TypedProgram& prog);
nlohmann::json write_bindings(const TypedProgram& prog, const Inputs& inputs);
nlohmann::json value_to_json(const Value& v);
nlohmann::json relation_to_json(const Relation& r);
Relation relation_from_json(const nlohmann::json& doc);

}  // namespace relsynth::interp
