#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "relsynth/ast.hpp"

namespace relsynth::frontend {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& msg);
  SourceLoc loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

 private:
  SourceLoc loc_;
  std::string detail_;
};

struct TypeError {
  SourceLoc loc;
  std::string message;
  friend bool operator==(const TypeError& a, const TypeError& b) {
    return a.loc.line == b.loc.line && a.loc.column == b.loc.column && a.message == b.message;
  }
};

class TypeCheckError : public std::runtime_error {
 public:
  explicit TypeCheckError(std::vector<TypeError> errors);
  const std::vector<TypeError>& errors() const { return errors_; }

 private:
  std::vector<TypeError> errors_;
};

Program parse(std::string_view source);
std::string pretty(const Program& program);

// Variable storage used by the interpreter: parameters first, then locals in
// declaration order, then loop indices in loop-id order.
struct SlotInfo {
  std::string name;
  TypeKind type = TypeKind::Int;
  SchemaRef schema;  // Relation/List only
  bool is_param = false;
  bool is_index = false;
};

// A counted loop. The loop structure is a path: at most one loop in the
// function body and at most one loop directly inside it.
struct LoopInfo {
  int id = 0;
  std::string label;  // "L0", "L1"
  std::string index;
  std::string relation;
  int index_slot = -1;
  int rel_slot = -1;
  int depth = 1;
  int parent = -1;
  const Stmt* stmt = nullptr;
  bool has_break = false;
};

// Straight-line pieces around a loop: code before it and after it within
// its enclosing statement list.
struct LoopSplit {
  std::span<const Stmt> before;
  std::span<const Stmt> after;
};

struct TypedProgram {
  std::shared_ptr<const Program> ast;
  std::vector<SlotInfo> slots;
  std::vector<LoopInfo> loops;
  std::vector<int> loop_carried;  // local slots assigned inside any loop
  int result_slot = -1;
  int param_count = 0;

  const Program& program() const { return *ast; }
  int slot_of(const std::string& name) const;
  // Split of the enclosing statement list around loop `id`.
  LoopSplit split(int loop_id) const;
  std::span<const Stmt> body_of(int loop_id) const;
  const LoopInfo* outer_loop() const { return loops.empty() ? nullptr : &loops[0]; }
  const LoopInfo* inner_loop() const { return loops.size() < 2 ? nullptr : &loops[1]; }
};

TypedProgram typecheck(const Program& ast);

// Convenience: parse then typecheck.
TypedProgram load_program(std::string_view source);
TypedProgram load_program_file(const std::string& path);

}  // namespace relsynth::frontend
