#pragma once

#include <vector>

#include "relsynth/tor.hpp"

namespace relsynth::tor {

// A predicate with field references resolved to column positions of the
// operand schema. Operands that do not depend on the row (params, indices,
// arbitrary scalar expressions) are evaluated once per evaluation and read
// from a side table.
struct PredOperand {
  enum class Kind { Column, Constant, External } kind = Kind::Constant;
  int column = -1;
  Scalar constant;
  int external = -1;
};

struct PredNode {
  Op op = Op::True;
  CmpOp cmp = CmpOp::Eq;
  PredOperand lhs;
  PredOperand rhs;
  std::vector<PredNode> kids;
};

struct CompiledPred {
  PredNode root;
  std::vector<Expr> externals;
};

CompiledPred compile_pred(const Expr& pred, const Schema& schema);

}  // namespace relsynth::tor
