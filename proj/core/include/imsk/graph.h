// Copyright 2026 The imsk Authors.
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

// Reverse-mode differentiation over dense matrices.
//
// A Graph records every operation applied to its variables; Backward() walks
// the record in reverse and accumulates gradients, ending in the `grad`
// fields of the parameters that took part. Column-wise operations treat each
// column as an independent example, which is how hypotheses and sequence
// frames are batched.

#ifndef IMSK_GRAPH_H_
#define IMSK_GRAPH_H_

#include <functional>
#include <span>
#include <vector>

#include "imsk/tensor.h"

namespace imsk {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

template <typename T>
class Graph {
 public:
  // Receives the output gradient and one pointer per input (null when that
  // input does not need a gradient).
  using BackwardFn =
      std::function<void(const Mat<T>& out_grad, std::span<Mat<T>*> in_grads)>;

  explicit Graph(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool requires_grad() const { return requires_grad_; }
  int NumNodes() const { return static_cast<int>(nodes_.size()); }

  Var Input(Mat<T> value, bool needs_grad = false);
  // Borrowed constant; `value` must outlive the graph.
  Var InputRef(const Mat<T>& value);
  Var Param(const Parameter<T>& p);

  const Mat<T>& Value(Var v) const;
  T Scalar(Var v) const { return Value(v)(0, 0); }
  // Gradient of an input created with needs_grad = true.
  const Mat<T>& Grad(Var v) const;

  void Backward(Var loss);

  Var MatMul(Var a, Var b);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var a, T s);
  // x: m x n, bias: m x 1, broadcast over columns.
  Var AddBias(Var x, Var bias);
  Var Sigmoid(Var x);
  Var Tanh(Var x);
  Var Relu(Var x);
  Var Transpose(Var x);
  Var Softmax(Var x);     // per column
  Var LogSoftmax(Var x);  // per column
  Var Rows(Var x, int start, int count);
  Var Cols(Var x, int start, int count);
  Var ConcatRows(std::span<const Var> parts);
  Var ConcatCols(std::span<const Var> parts);
  // out has shape rows x cols; out.data()[i] = x.data()[index[i]], or 0 when
  // index[i] < 0. Indices are column-major flat offsets.
  Var Gather(Var x, std::vector<int> index, int rows, int cols);
  // 1 x n row with x(rows[j], j).
  Var Pick(Var x, std::span<const int> rows);
  Var Sum(Var x);
  // x: C x (height * width), column index h * width + w. Pools 2x2 with
  // ceil-mode edges.
  Var MaxPool2x2(Var x, int height, int width);
  // gates: 4H x B laid out [input; forget; candidate; output]; c_prev: H x B.
  // Returns [h; c] (2H x B).
  Var LstmPointwise(Var gates, Var c_prev);
  // x: D x T. Returns [mean; stddev] (2D x T) over frames [t-left, t+right]
  // clipped to the sequence.
  Var StatsPool(Var x, int left, int right);
  Var Custom(std::span<const Var> inputs, Mat<T> value, BackwardFn backward);

 private:
  // Backward closures look values and gradients up by node id, since the
  // node vector may grow (and move) while the graph is being built.
  using Closure = std::function<void(Graph&, int self)>;

  struct Node {
    Mat<T> value;
    const Mat<T>* ref = nullptr;
    Mat<T> grad;
    Mat<T>* param_grad = nullptr;
    bool needs_grad = false;
    std::vector<int> inputs;
    Closure backward;
  };

  const Mat<T>& V(int id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  bool NeedsGrad(std::span<const Var> inputs) const;
  Var Push(Mat<T> value, std::span<const Var> inputs, Closure backward);
  Mat<T>& GradOf(int id);
  // Gradient accumulator of `id`, or null when it needs none.
  Mat<T>* G(int id) { return nodes_[id].needs_grad ? &GradOf(id) : nullptr; }
  const Mat<T>& OutGrad(int id) const { return nodes_[id].grad; }

  bool requires_grad_;
  std::vector<Node> nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace imsk

#endif  // IMSK_GRAPH_H_
