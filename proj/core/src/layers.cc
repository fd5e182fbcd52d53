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

#include "imsk/layers.h"

#include <algorithm>

#include "imsk/error.h"

namespace imsk {

std::vector<int> Im2ColIndex(int channels, int height, int width) {
  const int rows = 9 * channels;
  std::vector<int> index(static_cast<size_t>(rows) * height * width);
  size_t i = 0;
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      for (int dh = 0; dh < 3; ++dh) {
        for (int dw = 0; dw < 3; ++dw) {
          const int sh = h + dh - 1, sw = w + dw - 1;
          const bool inside = sh >= 0 && sh < height && sw >= 0 && sw < width;
          for (int c = 0; c < channels; ++c) {
            index[i++] = inside ? (sh * width + sw) * channels + c : -1;
          }
        }
      }
    }
  }
  return index;
}

template <typename T>
Var SelectColumns(Graph<T>& g, Var x, std::span<const int> cols) {
  const int rows = static_cast<int>(g.Value(x).rows());
  std::vector<int> index;
  index.reserve(cols.size() * rows);
  for (int c : cols) {
    for (int r = 0; r < rows; ++r) index.push_back(c * rows + r);
  }
  return g.Gather(x, std::move(index), rows, static_cast<int>(cols.size()));
}

template Var SelectColumns(Graph<float>&, Var, std::span<const int>);
template Var SelectColumns(Graph<double>&, Var, std::span<const int>);

std::vector<int> ChannelsToFeaturesIndex(int channels, int height, int width) {
  std::vector<int> index(static_cast<size_t>(channels) * height * width);
  size_t i = 0;
  for (int h = 0; h < height; ++h) {
    for (int c = 0; c < channels; ++c) {
      for (int w = 0; w < width; ++w) {
        index[i++] = (h * width + w) * channels + c;
      }
    }
  }
  return index;
}

template <typename T>
Affine<T>::Affine(const std::string& name, int in_dim, int out_dim, bool bias)
    : w_(name + ".w", out_dim, in_dim), has_bias_(bias) {
  if (bias) b_ = Parameter<T>(name + ".b", out_dim, 1);
}

template <typename T>
Var Affine<T>::Apply(Graph<T>& g, Var x) const {
  Var y = g.MatMul(g.Param(w_), x);
  return has_bias_ ? g.AddBias(y, g.Param(b_)) : y;
}

template <typename T>
void Affine<T>::Collect(ParamList<T>* out) {
  out->push_back(&w_);
  if (has_bias_) out->push_back(&b_);
}

template <typename T>
Embedding<T>::Embedding(const std::string& name, int vocab, int dim)
    : table_(name + ".table", dim, vocab) {}

template <typename T>
Var Embedding<T>::Lookup(Graph<T>& g, std::span<const int> ids) const {
  const int d = dim();
  std::vector<int> index;
  index.reserve(ids.size() * d);
  for (int id : ids) {
    if (!(id >= 0 && id < vocab()))
      Fail(Errc::kOutOfRange,
           "embedding id " + std::to_string(id) + " out of range");
    for (int r = 0; r < d; ++r) index.push_back(id * d + r);
  }
  return g.Gather(g.Param(table_), std::move(index), d,
                  static_cast<int>(ids.size()));
}

template <typename T>
void Embedding<T>::Collect(ParamList<T>* out) {
  out->push_back(&table_);
}

template <typename T>
Lstm<T>::Lstm(const std::string& name, int in_dim, int hidden)
    : wx_(name + ".wx", 4 * hidden, in_dim),
      wh_(name + ".wh", 4 * hidden, hidden),
      b_(name + ".b", 4 * hidden, 1) {}

template <typename T>
LstmState Lstm<T>::ZeroState(Graph<T>& g, int batch) const {
  return {g.Input(Mat<T>::Zero(hidden(), batch)),
          g.Input(Mat<T>::Zero(hidden(), batch))};
}

template <typename T>
LstmState Lstm<T>::Step(Graph<T>& g, Var x, LstmState s) const {
  const int h = hidden();
  Var gates =
      g.AddBias(g.Add(g.MatMul(g.Param(wx_), x), g.MatMul(g.Param(wh_), s.h)),
                g.Param(b_));
  Var hc = g.LstmPointwise(gates, s.c);
  return {g.Rows(hc, 0, h), g.Rows(hc, h, h)};
}

template <typename T>
Var Lstm<T>::Run(Graph<T>& g, Var xs, bool reverse) const {
  return RunBatch(g, std::span<const Var>(&xs, 1), reverse).front();
}

template <typename T>
std::vector<Var> Lstm<T>::RunBatch(Graph<T>& g, std::span<const Var> xs,
                                   bool reverse) const {
  const int h = hidden();
  const int n = static_cast<int>(xs.size());
  Require(n > 0, Errc::kEmptyInput, "lstm over no sequences");
  std::vector<int> len(n), offset(n);
  int total = 0, max_len = 0;
  for (int j = 0; j < n; ++j) {
    const Mat<T>& x = g.Value(xs[j]);
    if (!(x.rows() == in_dim()))
      Fail(Errc::kDimMismatch, "lstm input has " + std::to_string(x.rows()) +
                                   " rows, expected " +
                                   std::to_string(in_dim()));
    Require(x.cols() > 0, Errc::kEmptyInput, "lstm over an empty sequence");
    len[j] = static_cast<int>(x.cols());
    offset[j] = total;
    total += len[j];
    max_len = std::max(max_len, len[j]);
  }
  // Input projections of every frame of every sequence at once.
  Var all = n == 1 ? xs[0] : g.ConcatCols(xs);
  Var proj = g.AddBias(g.MatMul(g.Param(wx_), all), g.Param(b_));
  Var wh = g.Param(wh_);

  // Step k advances every sequence longer than k; with `reverse` sequence j
  // visits its frames from len[j] - 1 down to 0.
  std::vector<Var> step_h;
  std::vector<int> step_offset;
  // (step, column within step) of every output frame, per sequence.
  std::vector<std::vector<int>> where(n);
  for (int j = 0; j < n; ++j) where[j].assign(len[j], -1);
  LstmState s;
  std::vector<int> active_prev;
  int out_cols = 0;
  for (int k = 0; k < max_len; ++k) {
    std::vector<int> active;
    for (int j = 0; j < n; ++j) {
      if (len[j] > k) active.push_back(j);
    }
    const int b = static_cast<int>(active.size());
    std::vector<int> frame_cols(b);
    for (int i = 0; i < b; ++i) {
      const int j = active[i];
      frame_cols[i] = offset[j] + (reverse ? len[j] - 1 - k : k);
    }
    Var gx = SelectColumns(g, proj, frame_cols);
    if (k == 0) {
      s = ZeroState(g, b);
    } else if (b != static_cast<int>(active_prev.size())) {
      std::vector<int> keep(b);
      for (int i = 0, p = 0; i < b; ++i) {
        while (active_prev[p] != active[i]) ++p;
        keep[i] = p;
      }
      s = {SelectColumns(g, s.h, keep), SelectColumns(g, s.c, keep)};
    }
    Var gates = g.Add(gx, g.MatMul(wh, s.h));
    Var hc = g.LstmPointwise(gates, s.c);
    s = {g.Rows(hc, 0, h), g.Rows(hc, h, h)};
    step_h.push_back(s.h);
    for (int i = 0; i < b; ++i) {
      const int j = active[i];
      where[j][reverse ? len[j] - 1 - k : k] = out_cols + i;
    }
    out_cols += b;
    active_prev = std::move(active);
  }
  Var outs = step_h.size() == 1 ? step_h[0] : g.ConcatCols(step_h);
  std::vector<Var> result(n);
  for (int j = 0; j < n; ++j) result[j] = SelectColumns(g, outs, where[j]);
  return result;
}

template <typename T>
void Lstm<T>::Collect(ParamList<T>* out) {
  out->push_back(&wx_);
  out->push_back(&wh_);
  out->push_back(&b_);
}

template <typename T>
Blstm<T>::Blstm(const std::string& name, int in_dim, int hidden)
    : fwd_(name + ".fwd", in_dim, hidden),
      bwd_(name + ".bwd", in_dim, hidden) {}

template <typename T>
Var Blstm<T>::Apply(Graph<T>& g, Var xs) const {
  return ApplyBatch(g, std::span<const Var>(&xs, 1)).front();
}

template <typename T>
std::vector<Var> Blstm<T>::ApplyBatch(Graph<T>& g,
                                      std::span<const Var> xs) const {
  const std::vector<Var> f = fwd_.RunBatch(g, xs, false);
  const std::vector<Var> b = bwd_.RunBatch(g, xs, true);
  std::vector<Var> out(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    const Var parts[] = {f[j], b[j]};
    out[j] = g.ConcatRows(parts);
  }
  return out;
}

template <typename T>
void Blstm<T>::Collect(ParamList<T>* out) {
  fwd_.Collect(out);
  bwd_.Collect(out);
}

template <typename T>
Conv3x3<T>::Conv3x3(const std::string& name, int in_channels, int out_channels)
    : w_(name + ".w", out_channels, 9 * in_channels),
      b_(name + ".b", out_channels, 1) {}

template <typename T>
Var Conv3x3<T>::Apply(Graph<T>& g, Var x, int height, int width) const {
  const Mat<T>& xv = g.Value(x);
  Require(height > 0 && width > 0, Errc::kEmptyInput,
          "convolution over an empty map");
  Require(xv.rows() == in_channels() &&
              xv.cols() == static_cast<Eigen::Index>(height) * width,
          Errc::kDimMismatch, "convolution input shape mismatch");
  Var cols = g.Gather(x, Im2ColIndex(in_channels(), height, width),
                      9 * in_channels(), height * width);
  return g.AddBias(g.MatMul(g.Param(w_), cols), g.Param(b_));
}

template <typename T>
void Conv3x3<T>::Collect(ParamList<T>* out) {
  out->push_back(&w_);
  out->push_back(&b_);
}

template <typename T>
VggBlock<T>::VggBlock(const std::string& name, int in_channels,
                      int out_channels)
    : conv1_(name + ".conv1", in_channels, out_channels),
      conv2_(name + ".conv2", out_channels, out_channels) {}

template <typename T>
Var VggBlock<T>::Apply(Graph<T>& g, Var x, int* height, int* width) const {
  Var y = g.Relu(conv1_.Apply(g, x, *height, *width));
  y = g.Relu(conv2_.Apply(g, y, *height, *width));
  y = g.MaxPool2x2(y, *height, *width);
  *height = (*height + 1) / 2;
  *width = (*width + 1) / 2;
  return y;
}

template <typename T>
void VggBlock<T>::Collect(ParamList<T>* out) {
  conv1_.Collect(out);
  conv2_.Collect(out);
}

template class Affine<float>;
template class Affine<double>;
template class Embedding<float>;
template class Embedding<double>;
template class Lstm<float>;
template class Lstm<double>;
template class Blstm<float>;
template class Blstm<double>;
template class Conv3x3<float>;
template class Conv3x3<double>;
template class VggBlock<float>;
template class VggBlock<double>;

}  // namespace imsk
