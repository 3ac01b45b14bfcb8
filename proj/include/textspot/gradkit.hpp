// Copyright 2026 The textspot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEXTSPOT_GRADKIT_HPP_
#define TEXTSPOT_GRADKIT_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "textspot/matrix.hpp"

namespace textspot::grad {

using NodeId = std::size_t;

enum class OpKind {
  kLeaf,
  kMatMul,
  kAdd,
  kAddRow,
  kMul,
  kScale,
  kConcatCols,
  kTanh,
  kSigmoid,
  kSoftmaxRows,
  kSoftmaxCrossEntropy,
  kGatherRow,
  kTranspose,
  kSum,
  kDotConst,
};

// Append-only computation record. Nodes are created in topological order and
// every value is checked to be finite as soon as it is computed.
class Tape {
 public:
  NodeId Leaf(Matrix value);

  NodeId MatMul(NodeId a, NodeId b);
  // Elementwise sum of equal shapes, or r x c plus a 1 x c row (bias).
  NodeId Add(NodeId a, NodeId b);
  NodeId Mul(NodeId a, NodeId b);
  NodeId Scale(NodeId a, double factor);
  NodeId ConcatCols(NodeId a, NodeId b);
  NodeId Tanh(NodeId a);
  NodeId Sigmoid(NodeId a);
  NodeId SoftmaxRows(NodeId a);
  // -log softmax(logits)[target] for a 1 x l row, as a 1 x 1 node.
  NodeId SoftmaxCrossEntropy(NodeId logits, std::size_t target);
  NodeId GatherRow(NodeId a, std::size_t row);
  NodeId Transpose(NodeId a);
  NodeId Sum(NodeId a);
  // sum(a .* weights) for a constant `weights` of the same shape.
  NodeId DotConst(NodeId a, Matrix weights);

  const Matrix& value(NodeId id) const { return nodes_.at(id).value; }
  OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a 1 x 1 node. Returns one gradient per node; nodes
  // that do not reach `loss` get zeros.
  std::vector<Matrix> Backward(NodeId loss) const;

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    NodeId a = 0;
    NodeId b = 0;
    double scalar = 0.0;
    std::size_t index = 0;
    Matrix constant;
    Matrix value;
  };

  NodeId Push(Node node, const char* op);
  const Node& at(NodeId id) const;

  std::vector<Node> nodes_;
};

struct FiniteDifferenceReport {
  double max_rel_error = 0.0;   // over entries with magnitude >= abs_floor
  double max_abs_error = 0.0;   // over entries below abs_floor
  std::size_t worst_index = 0;  // coordinate with the largest relative error
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;

  bool Passed(double rel_tol, double abs_tol) const {
    return max_rel_error <= rel_tol && max_abs_error <= abs_tol;
  }
};

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences of f at `point`, one coordinate at a time.
std::vector<double> NumericGradient(const ScalarFunction& f,
                                    std::span<const double> point,
                                    double step);

// Compares `analytic` with central differences. Entries whose analytic and
// numeric magnitudes are both below `abs_floor` are compared absolutely.
FiniteDifferenceReport FiniteDifferenceCheck(const ScalarFunction& f,
                                             std::span<const double> point,
                                             std::span<const double> analytic,
                                             double step,
                                             double abs_floor = 1e-8);

}  // namespace textspot::grad

#endif  // TEXTSPOT_GRADKIT_HPP_
