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

#include "imsk/graph.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "imsk/error.h"

namespace imsk {
namespace {

template <typename T>
std::string Shape(const Mat<T>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template <typename T>
T SigmoidScalar(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace

template <typename T>
bool Graph<T>::NeedsGrad(std::span<const Var> inputs) const {
  if (!requires_grad_) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [&](Var v) { return nodes_[v.id].needs_grad; });
}

template <typename T>
Var Graph<T>::Push(Mat<T> value, std::span<const Var> inputs,
                   Closure backward) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = NeedsGrad(inputs);
  if (n.needs_grad) {
    n.inputs.reserve(inputs.size());
    for (Var v : inputs) n.inputs.push_back(v.id);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Mat<T>& Graph<T>::GradOf(int id) {
  Node& n = nodes_[id];
  const Mat<T>& v = V(id);
  Mat<T>& g = n.param_grad ? *n.param_grad : n.grad;
  if (g.rows() != v.rows() || g.cols() != v.cols()) {
    g.setZero(v.rows(), v.cols());
  }
  return g;
}

template <typename T>
Var Graph<T>::Input(Mat<T> value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = requires_grad_ && needs_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::InputRef(const Mat<T>& value) {
  Node n;
  n.ref = &value;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
Var Graph<T>::Param(const Parameter<T>& p) {
  Node n;
  n.ref = &p.value;
  if (requires_grad_) {
    n.needs_grad = true;
    n.param_grad = &p.grad;
  }
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const Mat<T>& Graph<T>::Value(Var v) const {
  Require(v.id >= 0 && v.id < NumNodes(), Errc::kOutOfRange, "invalid Var");
  return V(v.id);
}

template <typename T>
const Mat<T>& Graph<T>::Grad(Var v) const {
  Require(v.id >= 0 && v.id < NumNodes(), Errc::kOutOfRange, "invalid Var");
  const Node& n = nodes_[v.id];
  return n.param_grad ? *n.param_grad : n.grad;
}

template <typename T>
void Graph<T>::Backward(Var loss) {
  Require(requires_grad_, Errc::kInvalidArgument,
          "Backward() on a graph built without gradients");
  const Mat<T>& lv = Value(loss);
  if (!(lv.rows() == 1 && lv.cols() == 1))
    Fail(Errc::kDimMismatch, "Backward() needs a scalar, got " + Shape(lv));
  if (!nodes_[loss.id].needs_grad) return;
  GradOf(loss.id)(0, 0) += T(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.backward || n.grad.size() == 0) continue;
    n.backward(*this, id);
  }
}

template <typename T>
Var Graph<T>::MatMul(Var a, Var b) {
  Mat<T> out;
  MatMulInto(V(a.id), V(b.id), &out);
  const Var in[] = {a, b};
  return Push(std::move(out), in, [a = a.id, b = b.id](Graph& g, int self) {
    const Mat<T>& dy = g.OutGrad(self);
    if (Mat<T>* da = g.G(a)) da->noalias() += dy * g.V(b).transpose();
    if (Mat<T>* db = g.G(b)) db->noalias() += g.V(a).transpose() * dy;
  });
}

template <typename T>
Var Graph<T>::Add(Var a, Var b) {
  if (!(V(a.id).rows() == V(b.id).rows() && V(a.id).cols() == V(b.id).cols()))
    Fail(Errc::kDimMismatch,
         "add: " + Shape(V(a.id)) + " vs " + Shape(V(b.id)));
  const Var in[] = {a, b};
  return Push(V(a.id) + V(b.id), in, [a = a.id, b = b.id](Graph& g, int self) {
    const Mat<T>& dy = g.OutGrad(self);
    if (Mat<T>* da = g.G(a)) *da += dy;
    if (Mat<T>* db = g.G(b)) *db += dy;
  });
}

template <typename T>
Var Graph<T>::Sub(Var a, Var b) {
  if (!(V(a.id).rows() == V(b.id).rows() && V(a.id).cols() == V(b.id).cols()))
    Fail(Errc::kDimMismatch,
         "sub: " + Shape(V(a.id)) + " vs " + Shape(V(b.id)));
  const Var in[] = {a, b};
  return Push(V(a.id) - V(b.id), in, [a = a.id, b = b.id](Graph& g, int self) {
    const Mat<T>& dy = g.OutGrad(self);
    if (Mat<T>* da = g.G(a)) *da += dy;
    if (Mat<T>* db = g.G(b)) *db -= dy;
  });
}

template <typename T>
Var Graph<T>::Mul(Var a, Var b) {
  if (!(V(a.id).rows() == V(b.id).rows() && V(a.id).cols() == V(b.id).cols()))
    Fail(Errc::kDimMismatch,
         "mul: " + Shape(V(a.id)) + " vs " + Shape(V(b.id)));
  const Var in[] = {a, b};
  return Push(V(a.id).cwiseProduct(V(b.id)), in,
              [a = a.id, b = b.id](Graph& g, int self) {
                const Mat<T>& dy = g.OutGrad(self);
                if (Mat<T>* da = g.G(a)) *da += dy.cwiseProduct(g.V(b));
                if (Mat<T>* db = g.G(b)) *db += dy.cwiseProduct(g.V(a));
              });
}

template <typename T>
Var Graph<T>::Scale(Var a, T s) {
  const Var in[] = {a};
  return Push(V(a.id) * s, in, [a = a.id, s](Graph& g, int self) {
    if (Mat<T>* da = g.G(a)) *da += g.OutGrad(self) * s;
  });
}

template <typename T>
Var Graph<T>::AddBias(Var x, Var bias) {
  const Mat<T>& xv = V(x.id);
  const Mat<T>& bv = V(bias.id);
  if (!(bv.cols() == 1 && bv.rows() == xv.rows()))
    Fail(Errc::kDimMismatch,
         "add_bias: " + Shape(xv) + " with bias " + Shape(bv));
  Mat<T> out = xv;
  out.colwise() += bv.col(0);
  const Var in[] = {x, bias};
  return Push(std::move(out), in, [x = x.id, b = bias.id](Graph& g, int self) {
    const Mat<T>& dy = g.OutGrad(self);
    if (Mat<T>* dx = g.G(x)) *dx += dy;
    if (Mat<T>* db = g.G(b)) *db += dy.rowwise().sum();
  });
}

template <typename T>
Var Graph<T>::Sigmoid(Var x) {
  const Var in[] = {x};
  return Push(V(x.id).unaryExpr([](T v) { return SigmoidScalar(v); }), in,
              [x = x.id](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const Mat<T>& y = g.V(self);
                  *dx += g.OutGrad(self).cwiseProduct(
                      y.unaryExpr([](T v) { return v * (T(1) - v); }));
                }
              });
}

template <typename T>
Var Graph<T>::Tanh(Var x) {
  const Var in[] = {x};
  return Push(V(x.id).unaryExpr([](T v) { return std::tanh(v); }), in,
              [x = x.id](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const Mat<T>& y = g.V(self);
                  *dx += g.OutGrad(self).cwiseProduct(
                      y.unaryExpr([](T v) { return T(1) - v * v; }));
                }
              });
}

template <typename T>
Var Graph<T>::Relu(Var x) {
  const Var in[] = {x};
  return Push(V(x.id).unaryExpr([](T v) { return v > T(0) ? v : T(0); }), in,
              [x = x.id](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const Mat<T>& y = g.V(self);
                  const Mat<T>& dy = g.OutGrad(self);
                  for (Eigen::Index i = 0; i < y.size(); ++i) {
                    if (y.data()[i] > T(0)) dx->data()[i] += dy.data()[i];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::Transpose(Var x) {
  const Var in[] = {x};
  return Push(V(x.id).transpose(), in, [x = x.id](Graph& g, int self) {
    if (Mat<T>* dx = g.G(x)) *dx += g.OutGrad(self).transpose();
  });
}

template <typename T>
Var Graph<T>::Softmax(Var x) {
  const Mat<T>& xv = V(x.id);
  Mat<T> out(xv.rows(), xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    const T mx = xv.col(j).maxCoeff();
    T sum = T(0);
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      out(i, j) = std::exp(xv(i, j) - mx);
      sum += out(i, j);
    }
    for (Eigen::Index i = 0; i < xv.rows(); ++i) out(i, j) /= sum;
  }
  const Var in[] = {x};
  return Push(std::move(out), in, [x = x.id](Graph& g, int self) {
    if (Mat<T>* dx = g.G(x)) {
      const Mat<T>& y = g.V(self);
      const Mat<T>& dy = g.OutGrad(self);
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        T dot = T(0);
        for (Eigen::Index i = 0; i < y.rows(); ++i) dot += dy(i, j) * y(i, j);
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
          (*dx)(i, j) += y(i, j) * (dy(i, j) - dot);
        }
      }
    }
  });
}

template <typename T>
Var Graph<T>::LogSoftmax(Var x) {
  const Mat<T>& xv = V(x.id);
  Mat<T> out(xv.rows(), xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    const T mx = xv.col(j).maxCoeff();
    T sum = T(0);
    for (Eigen::Index i = 0; i < xv.rows(); ++i) sum += std::exp(xv(i, j) - mx);
    const T lse = mx + std::log(sum);
    for (Eigen::Index i = 0; i < xv.rows(); ++i) out(i, j) = xv(i, j) - lse;
  }
  const Var in[] = {x};
  return Push(std::move(out), in, [x = x.id](Graph& g, int self) {
    if (Mat<T>* dx = g.G(x)) {
      const Mat<T>& y = g.V(self);
      const Mat<T>& dy = g.OutGrad(self);
      for (Eigen::Index j = 0; j < y.cols(); ++j) {
        T total = T(0);
        for (Eigen::Index i = 0; i < y.rows(); ++i) total += dy(i, j);
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
          (*dx)(i, j) += dy(i, j) - std::exp(y(i, j)) * total;
        }
      }
    }
  });
}

template <typename T>
Var Graph<T>::Rows(Var x, int start, int count) {
  const Mat<T>& xv = V(x.id);
  if (!(start >= 0 && count >= 0 && start + count <= xv.rows()))
    Fail(Errc::kOutOfRange, "rows: slice outside " + Shape(xv));
  const Var in[] = {x};
  return Push(xv.middleRows(start, count), in,
              [x = x.id, start, count](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  dx->middleRows(start, count) += g.OutGrad(self);
                }
              });
}

template <typename T>
Var Graph<T>::Cols(Var x, int start, int count) {
  const Mat<T>& xv = V(x.id);
  if (!(start >= 0 && count >= 0 && start + count <= xv.cols()))
    Fail(Errc::kOutOfRange, "cols: slice outside " + Shape(xv));
  const Var in[] = {x};
  return Push(xv.middleCols(start, count), in,
              [x = x.id, start, count](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  dx->middleCols(start, count) += g.OutGrad(self);
                }
              });
}

template <typename T>
Var Graph<T>::ConcatRows(std::span<const Var> parts) {
  Require(!parts.empty(), Errc::kInvalidArgument, "concat of nothing");
  const Eigen::Index cols = V(parts[0].id).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    Require(V(p.id).cols() == cols, Errc::kDimMismatch,
            "concat_rows: column counts differ");
    rows += V(p.id).rows();
  }
  Mat<T> out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, V(p.id).rows()) = V(p.id);
    r += V(p.id).rows();
  }
  std::vector<int> ids;
  for (Var p : parts) ids.push_back(p.id);
  return Push(std::move(out), parts, [ids](Graph& g, int self) {
    Eigen::Index r = 0;
    for (int id : ids) {
      const Eigen::Index n = g.V(id).rows();
      if (Mat<T>* d = g.G(id)) *d += g.OutGrad(self).middleRows(r, n);
      r += n;
    }
  });
}

template <typename T>
Var Graph<T>::ConcatCols(std::span<const Var> parts) {
  Require(!parts.empty(), Errc::kInvalidArgument, "concat of nothing");
  const Eigen::Index rows = V(parts[0].id).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    Require(V(p.id).rows() == rows, Errc::kDimMismatch,
            "concat_cols: row counts differ");
    cols += V(p.id).cols();
  }
  Mat<T> out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, V(p.id).cols()) = V(p.id);
    c += V(p.id).cols();
  }
  std::vector<int> ids;
  for (Var p : parts) ids.push_back(p.id);
  return Push(std::move(out), parts, [ids](Graph& g, int self) {
    Eigen::Index c = 0;
    for (int id : ids) {
      const Eigen::Index n = g.V(id).cols();
      if (Mat<T>* d = g.G(id)) *d += g.OutGrad(self).middleCols(c, n);
      c += n;
    }
  });
}

template <typename T>
Var Graph<T>::Gather(Var x, std::vector<int> index, int rows, int cols) {
  const Mat<T>& xv = V(x.id);
  Require(static_cast<Eigen::Index>(index.size()) ==
              static_cast<Eigen::Index>(rows) * cols,
          Errc::kDimMismatch, "gather: index size does not match shape");
  Mat<T> out(rows, cols);
  for (size_t i = 0; i < index.size(); ++i) {
    Require(index[i] < xv.size(), Errc::kOutOfRange, "gather: index overflow");
    out.data()[i] = index[i] >= 0 ? xv.data()[index[i]] : T(0);
  }
  const Var in[] = {x};
  return Push(std::move(out), in,
              [x = x.id, index = std::move(index)](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const T* dy = g.OutGrad(self).data();
                  for (size_t i = 0; i < index.size(); ++i) {
                    if (index[i] >= 0) dx->data()[index[i]] += dy[i];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::Pick(Var x, std::span<const int> rows) {
  const Mat<T>& xv = V(x.id);
  Require(static_cast<Eigen::Index>(rows.size()) == xv.cols(),
          Errc::kDimMismatch, "pick: one row index per column required");
  Mat<T> out(1, xv.cols());
  for (Eigen::Index j = 0; j < xv.cols(); ++j) {
    Require(rows[j] >= 0 && rows[j] < xv.rows(), Errc::kOutOfRange,
            "pick: row index out of range");
    out(0, j) = xv(rows[j], j);
  }
  const Var in[] = {x};
  return Push(std::move(out), in,
              [x = x.id, r = std::vector<int>(rows.begin(), rows.end())](
                  Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const Mat<T>& dy = g.OutGrad(self);
                  for (size_t j = 0; j < r.size(); ++j) {
                    (*dx)(r[j], static_cast<Eigen::Index>(j)) += dy(0, j);
                  }
                }
              });
}

template <typename T>
Var Graph<T>::Sum(Var x) {
  Mat<T> out(1, 1);
  out(0, 0) = V(x.id).sum();
  const Var in[] = {x};
  return Push(std::move(out), in, [x = x.id](Graph& g, int self) {
    if (Mat<T>* dx = g.G(x)) dx->array() += g.OutGrad(self)(0, 0);
  });
}

template <typename T>
Var Graph<T>::MaxPool2x2(Var x, int height, int width) {
  const Mat<T>& xv = V(x.id);
  if (!(height > 0 && width > 0 &&
        xv.cols() == static_cast<Eigen::Index>(height) * width))
    Fail(Errc::kDimMismatch, "max_pool: input " + Shape(xv) +
                                 " does not match " + std::to_string(height) +
                                 "x" + std::to_string(width));
  const int oh = (height + 1) / 2;
  const int ow = (width + 1) / 2;
  const Eigen::Index channels = xv.rows();
  Mat<T> out(channels, static_cast<Eigen::Index>(oh) * ow);
  std::vector<int> arg(out.size());
  for (int h = 0; h < oh; ++h) {
    for (int w = 0; w < ow; ++w) {
      const Eigen::Index oc = static_cast<Eigen::Index>(h) * ow + w;
      for (Eigen::Index c = 0; c < channels; ++c) {
        int best = -1;
        T best_v = T(0);
        for (int dh = 0; dh < 2; ++dh) {
          for (int dw = 0; dw < 2; ++dw) {
            const int ih = 2 * h + dh, iw = 2 * w + dw;
            if (ih >= height || iw >= width) continue;
            const int flat = static_cast<int>(
                (static_cast<Eigen::Index>(ih) * width + iw) * channels + c);
            if (best < 0 || xv.data()[flat] > best_v) {
              best = flat;
              best_v = xv.data()[flat];
            }
          }
        }
        out(c, oc) = best_v;
        arg[oc * channels + c] = best;
      }
    }
  }
  const Var in[] = {x};
  return Push(std::move(out), in,
              [x = x.id, arg = std::move(arg)](Graph& g, int self) {
                if (Mat<T>* dx = g.G(x)) {
                  const T* dy = g.OutGrad(self).data();
                  for (size_t i = 0; i < arg.size(); ++i) {
                    dx->data()[arg[i]] += dy[i];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::LstmPointwise(Var gates, Var c_prev) {
  const Mat<T>& a = V(gates.id);
  const Mat<T>& cp = V(c_prev.id);
  const Eigen::Index h = cp.rows(), b = cp.cols();
  if (!(a.rows() == 4 * h && a.cols() == b))
    Fail(Errc::kDimMismatch,
         "lstm: gates " + Shape(a) + " vs cell " + Shape(cp));
  Mat<T> out(2 * h, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    for (Eigen::Index k = 0; k < h; ++k) {
      const T ig = SigmoidScalar(a(k, j));
      const T fg = SigmoidScalar(a(h + k, j));
      const T gg = std::tanh(a(2 * h + k, j));
      const T og = SigmoidScalar(a(3 * h + k, j));
      const T c = fg * cp(k, j) + ig * gg;
      out(h + k, j) = c;
      out(k, j) = og * std::tanh(c);
    }
  }
  const Var in[] = {gates, c_prev};
  return Push(std::move(out), in,
              [ga = gates.id, cid = c_prev.id](Graph& g, int self) {
                const Mat<T>& a = g.V(ga);
                const Mat<T>& cp = g.V(cid);
                const Mat<T>& y = g.V(self);
                const Mat<T>& dy = g.OutGrad(self);
                Mat<T>* da = g.G(ga);
                Mat<T>* dcp = g.G(cid);
                const Eigen::Index h = cp.rows();
                for (Eigen::Index j = 0; j < cp.cols(); ++j) {
                  for (Eigen::Index k = 0; k < h; ++k) {
                    const T ig = SigmoidScalar(a(k, j));
                    const T fg = SigmoidScalar(a(h + k, j));
                    const T gg = std::tanh(a(2 * h + k, j));
                    const T og = SigmoidScalar(a(3 * h + k, j));
                    const T tc = std::tanh(y(h + k, j));
                    const T dh = dy(k, j);
                    const T dc = dy(h + k, j) + dh * og * (T(1) - tc * tc);
                    if (da) {
                      (*da)(k, j) += dc * gg * ig * (T(1) - ig);
                      (*da)(h + k, j) += dc * cp(k, j) * fg * (T(1) - fg);
                      (*da)(2 * h + k, j) += dc * ig * (T(1) - gg * gg);
                      (*da)(3 * h + k, j) += dh * tc * og * (T(1) - og);
                    }
                    if (dcp) (*dcp)(k, j) += dc * fg;
                  }
                }
              });
}

template <typename T>
Var Graph<T>::StatsPool(Var x, int left, int right) {
  const Mat<T>& xv = V(x.id);
  Require(left >= 0 && right >= 0, Errc::kInvalidArgument,
          "stats_pool: negative context");
  const Eigen::Index d = xv.rows(), n = xv.cols();
  Mat<T> out(2 * d, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - left);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + right);
    const T count = static_cast<T>(hi - lo + 1);
    for (Eigen::Index k = 0; k < d; ++k) {
      T sum = T(0);
      for (Eigen::Index s = lo; s <= hi; ++s) sum += xv(k, s);
      const T mean = sum / count;
      T var = T(0);
      for (Eigen::Index s = lo; s <= hi; ++s) {
        const T diff = xv(k, s) - mean;
        var += diff * diff;
      }
      out(k, t) = mean;
      out(d + k, t) = std::sqrt(var / count);
    }
  }
  const Var in[] = {x};
  return Push(std::move(out), in, [x = x.id, left, right](Graph& g, int self) {
    Mat<T>* dx = g.G(x);
    if (!dx) return;
    const Mat<T>& xv = g.V(x);
    const Mat<T>& y = g.V(self);
    const Mat<T>& dy = g.OutGrad(self);
    const Eigen::Index d = xv.rows(), n = xv.cols();
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, t - left);
      const Eigen::Index hi = std::min<Eigen::Index>(n - 1, t + right);
      const T count = static_cast<T>(hi - lo + 1);
      for (Eigen::Index k = 0; k < d; ++k) {
        const T dmean = dy(k, t) / count;
        const T sd = y(d + k, t);
        // d(std)/dx_s = (x_s - mean) / (count * std); zero when std == 0.
        const T dstd = sd > T(0) ? dy(d + k, t) / (count * sd) : T(0);
        const T mean = y(k, t);
        for (Eigen::Index s = lo; s <= hi; ++s) {
          (*dx)(k, s) += dmean + dstd * (xv(k, s) - mean);
        }
      }
    }
  });
}

template <typename T>
Var Graph<T>::Custom(std::span<const Var> inputs, Mat<T> value,
                     BackwardFn backward) {
  std::vector<int> ids;
  for (Var v : inputs) ids.push_back(v.id);
  return Push(std::move(value), inputs,
              [ids, fn = std::move(backward)](Graph& g, int self) {
                std::vector<Mat<T>*> grads;
                for (int id : ids) grads.push_back(g.G(id));
                fn(g.OutGrad(self), grads);
              });
}

template class Graph<float>;
template class Graph<double>;

}  // namespace imsk
