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

#include "textspot/gradkit.hpp"

#include <algorithm>
#include <cmath>

#include "textspot/error.hpp"

namespace textspot::grad {
namespace {

[[noreturn]] void ShapeError(const char* op, const Matrix& a,
                             const Matrix& b) {
  throw ArgumentError(std::string(op) + ": incompatible shapes " +
                      a.shape_string() + " and " + b.shape_string());
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void SoftmaxInPlace(std::span<double> row) {
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double& x : row) {
    x = std::exp(x - peak);
    sum += x;
  }
  for (double& x : row) x /= sum;
}

void AddInto(Matrix& dst, const Matrix& src, double factor = 1.0) {
  for (std::size_t k = 0; k < dst.data.size(); ++k) {
    dst.data[k] += factor * src.data[k];
  }
}

// dst += a * b^T
void AddMatMulBt(Matrix& dst, const Matrix& a, const Matrix& b) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(j, k);
      dst(i, j) += s;
    }
  }
}

// dst += a^T * b
void AddMatMulAt(Matrix& dst, const Matrix& a, const Matrix& b) {
  for (std::size_t k = 0; k < a.rows; ++k) {
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) dst(i, j) += aki * b(k, j);
    }
  }
}

}  // namespace

const Tape::Node& Tape::at(NodeId id) const {
  if (id >= nodes_.size()) {
    throw ArgumentError("node id " + std::to_string(id) + " not on tape");
  }
  return nodes_[id];
}

NodeId Tape::Push(Node node, const char* op) {
  for (double x : node.value.data) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
  nodes_.push_back(std::move(node));
  return nodes_.size() - 1;
}

NodeId Tape::Leaf(Matrix value) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.value = std::move(value);
  return Push(std::move(n), "leaf");
}

NodeId Tape::MatMul(NodeId a, NodeId b) {
  const Matrix& x = at(a).value;
  const Matrix& y = at(b).value;
  if (x.cols != y.rows) ShapeError("matmul", x, y);
  Node n;
  n.kind = OpKind::kMatMul;
  n.a = a;
  n.b = b;
  n.value = Matrix(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t k = 0; k < x.cols; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (std::size_t j = 0; j < y.cols; ++j) n.value(i, j) += xik * y(k, j);
    }
  }
  return Push(std::move(n), "matmul");
}

NodeId Tape::Add(NodeId a, NodeId b) {
  const Matrix& x = at(a).value;
  const Matrix& y = at(b).value;
  Node n;
  n.a = a;
  n.b = b;
  n.value = x;
  if (x.rows == y.rows && x.cols == y.cols) {
    n.kind = OpKind::kAdd;
    AddInto(n.value, y);
  } else if (y.rows == 1 && y.cols == x.cols) {
    n.kind = OpKind::kAddRow;
    for (std::size_t i = 0; i < x.rows; ++i) {
      for (std::size_t j = 0; j < x.cols; ++j) n.value(i, j) += y(0, j);
    }
  } else {
    ShapeError("add", x, y);
  }
  return Push(std::move(n), "add");
}

NodeId Tape::Mul(NodeId a, NodeId b) {
  const Matrix& x = at(a).value;
  const Matrix& y = at(b).value;
  if (x.rows != y.rows || x.cols != y.cols) ShapeError("mul", x, y);
  Node n;
  n.kind = OpKind::kMul;
  n.a = a;
  n.b = b;
  n.value = x;
  for (std::size_t k = 0; k < x.data.size(); ++k) n.value.data[k] *= y.data[k];
  return Push(std::move(n), "mul");
}

NodeId Tape::Scale(NodeId a, double factor) {
  Node n;
  n.kind = OpKind::kScale;
  n.a = a;
  n.scalar = factor;
  n.value = at(a).value;
  for (double& v : n.value.data) v *= factor;
  return Push(std::move(n), "scale");
}

NodeId Tape::ConcatCols(NodeId a, NodeId b) {
  const Matrix& x = at(a).value;
  const Matrix& y = at(b).value;
  if (x.rows != y.rows) ShapeError("concat", x, y);
  Node n;
  n.kind = OpKind::kConcatCols;
  n.a = a;
  n.b = b;
  n.value = Matrix(x.rows, x.cols + y.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.row(i).begin(), x.row(i).end(), n.value.row(i).begin());
    std::copy(y.row(i).begin(), y.row(i).end(),
              n.value.row(i).begin() + static_cast<std::ptrdiff_t>(x.cols));
  }
  return Push(std::move(n), "concat");
}

NodeId Tape::Tanh(NodeId a) {
  Node n;
  n.kind = OpKind::kTanh;
  n.a = a;
  n.value = at(a).value;
  for (double& v : n.value.data) v = std::tanh(v);
  return Push(std::move(n), "tanh");
}

NodeId Tape::Sigmoid(NodeId a) {
  Node n;
  n.kind = OpKind::kSigmoid;
  n.a = a;
  n.value = at(a).value;
  for (double& v : n.value.data) v = StableSigmoid(v);
  return Push(std::move(n), "sigmoid");
}

NodeId Tape::SoftmaxRows(NodeId a) {
  Node n;
  n.kind = OpKind::kSoftmaxRows;
  n.a = a;
  n.value = at(a).value;
  for (std::size_t i = 0; i < n.value.rows; ++i) SoftmaxInPlace(n.value.row(i));
  return Push(std::move(n), "softmax");
}

NodeId Tape::SoftmaxCrossEntropy(NodeId logits, std::size_t target) {
  const Matrix& x = at(logits).value;
  if (x.rows != 1 || x.cols == 0) {
    throw ArgumentError("softmax_cross_entropy expects a 1 x l row, got " +
                        x.shape_string());
  }
  if (target >= x.cols) {
    throw ArgumentError("softmax_cross_entropy target " +
                        std::to_string(target) + " out of range for " +
                        x.shape_string());
  }
  auto row = x.row(0);
  const double peak = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - peak);
  Node n;
  n.kind = OpKind::kSoftmaxCrossEntropy;
  n.a = logits;
  n.index = target;
  n.value = Matrix(1, 1, peak + std::log(sum) - row[target]);
  return Push(std::move(n), "softmax_cross_entropy");
}

NodeId Tape::GatherRow(NodeId a, std::size_t row) {
  const Matrix& x = at(a).value;
  if (row >= x.rows) {
    throw ArgumentError("gather_row " + std::to_string(row) +
                        " out of range for " + x.shape_string());
  }
  Node n;
  n.kind = OpKind::kGatherRow;
  n.a = a;
  n.index = row;
  n.value = Matrix::RowVector(x.row(row));
  return Push(std::move(n), "gather_row");
}

NodeId Tape::Transpose(NodeId a) {
  const Matrix& x = at(a).value;
  Node n;
  n.kind = OpKind::kTranspose;
  n.a = a;
  n.value = Matrix(x.cols, x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) n.value(j, i) = x(i, j);
  }
  return Push(std::move(n), "transpose");
}

NodeId Tape::Sum(NodeId a) {
  double s = 0.0;
  for (double v : at(a).value.data) s += v;
  Node n;
  n.kind = OpKind::kSum;
  n.a = a;
  n.value = Matrix(1, 1, s);
  return Push(std::move(n), "sum");
}

NodeId Tape::DotConst(NodeId a, Matrix weights) {
  const Matrix& x = at(a).value;
  if (x.rows != weights.rows || x.cols != weights.cols) {
    ShapeError("dot_const", x, weights);
  }
  double s = 0.0;
  for (std::size_t k = 0; k < x.data.size(); ++k) s += x.data[k] * weights.data[k];
  Node n;
  n.kind = OpKind::kDotConst;
  n.a = a;
  n.constant = std::move(weights);
  n.value = Matrix(1, 1, s);
  return Push(std::move(n), "dot_const");
}

std::vector<Matrix> Tape::Backward(NodeId loss) const {
  const Matrix& out = at(loss).value;
  if (out.rows != 1 || out.cols != 1) {
    throw ArgumentError("backward needs a scalar loss, got " +
                        out.shape_string());
  }
  std::vector<Matrix> grads(nodes_.size());
  std::vector<char> reached(nodes_.size(), 0);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    grads[id] = Matrix(nodes_[id].value.rows, nodes_[id].value.cols);
  }
  grads[loss](0, 0) = 1.0;
  reached[loss] = 1;

  for (std::size_t id = loss + 1; id-- > 0;) {
    if (!reached[id]) continue;
    const Node& n = nodes_[id];
    const Matrix& g = grads[id];
    auto touch = [&](NodeId input) -> Matrix& {
      reached[input] = 1;
      return grads[input];
    };
    switch (n.kind) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatMul: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& y = nodes_[n.b].value;
        AddMatMulBt(touch(n.a), g, y);
        AddMatMulAt(touch(n.b), x, g);
        break;
      }
      case OpKind::kAdd:
        AddInto(touch(n.a), g);
        AddInto(touch(n.b), g);
        break;
      case OpKind::kAddRow: {
        AddInto(touch(n.a), g);
        Matrix& gb = touch(n.b);
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < g.cols; ++j) gb(0, j) += g(i, j);
        }
        break;
      }
      case OpKind::kMul: {
        const Matrix& x = nodes_[n.a].value;
        const Matrix& y = nodes_[n.b].value;
        Matrix& ga = touch(n.a);
        Matrix& gb = touch(n.b);
        for (std::size_t k = 0; k < g.data.size(); ++k) {
          ga.data[k] += g.data[k] * y.data[k];
          gb.data[k] += g.data[k] * x.data[k];
        }
        break;
      }
      case OpKind::kScale:
        AddInto(touch(n.a), g, n.scalar);
        break;
      case OpKind::kConcatCols: {
        Matrix& ga = touch(n.a);
        Matrix& gb = touch(n.b);
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += g(i, j);
          for (std::size_t j = 0; j < gb.cols; ++j) {
            gb(i, j) += g(i, ga.cols + j);
          }
        }
        break;
      }
      case OpKind::kTanh: {
        Matrix& ga = touch(n.a);
        for (std::size_t k = 0; k < g.data.size(); ++k) {
          const double y = n.value.data[k];
          ga.data[k] += g.data[k] * (1.0 - y * y);
        }
        break;
      }
      case OpKind::kSigmoid: {
        Matrix& ga = touch(n.a);
        for (std::size_t k = 0; k < g.data.size(); ++k) {
          const double y = n.value.data[k];
          ga.data[k] += g.data[k] * y * (1.0 - y);
        }
        break;
      }
      case OpKind::kSoftmaxRows: {
        Matrix& ga = touch(n.a);
        for (std::size_t i = 0; i < g.rows; ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < g.cols; ++j) dot += g(i, j) * n.value(i, j);
          for (std::size_t j = 0; j < g.cols; ++j) {
            ga(i, j) += n.value(i, j) * (g(i, j) - dot);
          }
        }
        break;
      }
      case OpKind::kSoftmaxCrossEntropy: {
        Matrix probs = nodes_[n.a].value;
        SoftmaxInPlace(probs.row(0));
        probs(0, n.index) -= 1.0;
        AddInto(touch(n.a), probs, g(0, 0));
        break;
      }
      case OpKind::kGatherRow: {
        Matrix& ga = touch(n.a);
        for (std::size_t j = 0; j < g.cols; ++j) ga(n.index, j) += g(0, j);
        break;
      }
      case OpKind::kTranspose: {
        Matrix& ga = touch(n.a);
        for (std::size_t i = 0; i < g.rows; ++i) {
          for (std::size_t j = 0; j < g.cols; ++j) ga(j, i) += g(i, j);
        }
        break;
      }
      case OpKind::kSum: {
        Matrix& ga = touch(n.a);
        for (double& v : ga.data) v += g(0, 0);
        break;
      }
      case OpKind::kDotConst:
        AddInto(touch(n.a), n.constant, g(0, 0));
        break;
    }
  }
  return grads;
}

std::vector<double> NumericGradient(const ScalarFunction& f,
                                    std::span<const double> point,
                                    double step) {
  if (!(step > 0.0)) throw ArgumentError("finite-difference step must be > 0");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

FiniteDifferenceReport FiniteDifferenceCheck(const ScalarFunction& f,
                                             std::span<const double> point,
                                             std::span<const double> analytic,
                                             double step, double abs_floor) {
  if (analytic.size() != point.size()) {
    throw ArgumentError("analytic gradient size does not match the point");
  }
  const auto numeric = NumericGradient(f, point, step);
  FiniteDifferenceReport report;
  report.checked = numeric.size();
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic[i];
    const double n = numeric[i];
    const double diff = std::abs(a - n);
    const double mag = std::max(std::abs(a), std::abs(n));
    if (mag < abs_floor) {
      report.max_abs_error = std::max(report.max_abs_error, diff);
      continue;
    }
    const double rel = diff / mag;
    if (rel > report.max_rel_error || (i == 0 && report.max_rel_error == 0)) {
      report.max_rel_error = std::max(report.max_rel_error, rel);
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = n;
    }
  }
  return report;
}

}  // namespace textspot::grad
