#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "relsynth/value.hpp"

namespace relsynth::frontend {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class BinOp { Add, Sub, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class ExprKind { IntLit, TextLit, Var, Field, Binary, Not, Min, Max };
enum class TypeKind { Int, Text, Bool, OptInt, Record, Relation, List };

const char* spelling(BinOp op);
bool is_comparison(BinOp op);
std::string to_string(TypeKind k);

// Kernel expressions. Annotation members (type, slot, index_slot, column) are
// left at their defaults by the parser and filled in by typecheck.
struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourceLoc loc;
  std::int64_t int_value = 0;
  std::string name;   // Var: identifier, TextLit: contents, Field: relation
  std::string index;  // Field: index variable
  std::string field;  // Field: field name
  BinOp op = BinOp::Add;
  std::vector<Expr> args;

  TypeKind type = TypeKind::Int;
  int slot = -1;
  int index_slot = -1;
  int column = -1;
};

// Argument of `out.append(...)`: either a whole row `R[i]` or a record
// literal `{f: e, ...}`.
struct RecordExpr {
  SourceLoc loc;
  bool whole_row = false;
  std::string relation;
  std::string index;
  std::vector<std::pair<std::string, Expr>> fields;

  int slot = -1;
  int index_slot = -1;
};

enum class StmtKind { Assign, Append, If, For, Break };

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  SourceLoc loc;
  std::string target;    // Assign/Append: variable, For: index variable
  std::string relation;  // For: iterated relation parameter
  Expr value;            // Assign: right-hand side, If: condition
  RecordExpr record;     // Append
  std::vector<Stmt> body;

  int slot = -1;      // Assign/Append target slot, For index slot
  int rel_slot = -1;  // For
  int loop_id = -1;   // For
};

enum class ParamKind { Rel, Int, Text };

struct Param {
  SourceLoc loc;
  std::string name;
  ParamKind kind = ParamKind::Int;
  Schema schema;  // Rel only, unqualified
};

enum class DeclKind { List, Int, Text, OptInt };

struct Decl {
  SourceLoc loc;
  std::string name;
  DeclKind kind = DeclKind::Int;
  Schema schema;              // List only
  std::optional<Expr> init;   // Int/Text only
};

struct Program {
  SourceLoc loc;
  std::string name;
  std::vector<Param> params;
  std::vector<Decl> decls;
  std::vector<Stmt> body;
  std::string result;
  SourceLoc result_loc;
};

// Structural equality: ignores source locations and type annotations.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const Program& a, const Program& b);

}  // namespace relsynth::frontend
