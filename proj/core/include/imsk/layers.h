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

// Building blocks shared by the acoustic model, the language model and the
// activity detector. Each layer owns its parameters and appends them to a
// ParamList on request; forward passes are recorded on a Graph.

#ifndef IMSK_LAYERS_H_
#define IMSK_LAYERS_H_

#include <span>
#include <string>
#include <vector>

#include "imsk/graph.h"

namespace imsk {

// y = W x + b, applied to every column of x.
template <typename T>
class Affine {
 public:
  Affine() = default;
  Affine(const std::string& name, int in_dim, int out_dim, bool bias = true);

  Var Apply(Graph<T>& g, Var x) const;
  void Collect(ParamList<T>* out);

  int in_dim() const { return static_cast<int>(w_.value.cols()); }
  int out_dim() const { return static_cast<int>(w_.value.rows()); }
  Parameter<T>& weight() { return w_; }
  Parameter<T>& bias() { return b_; }

 private:
  Parameter<T> w_;
  Parameter<T> b_;
  bool has_bias_ = true;
};

// Columns of an embedding table.
template <typename T>
class Embedding {
 public:
  Embedding() = default;
  Embedding(const std::string& name, int vocab, int dim);

  // dim x ids.size()
  Var Lookup(Graph<T>& g, std::span<const int> ids) const;
  void Collect(ParamList<T>* out);

  int vocab() const { return static_cast<int>(table_.value.cols()); }
  int dim() const { return static_cast<int>(table_.value.rows()); }

 private:
  Parameter<T> table_;
};

struct LstmState {
  Var h;
  Var c;
};

template <typename T>
class Lstm {
 public:
  Lstm() = default;
  Lstm(const std::string& name, int in_dim, int hidden);

  // One step for a batch of columns. x: in x B, state: H x B each.
  LstmState Step(Graph<T>& g, Var x, LstmState s) const;
  LstmState ZeroState(Graph<T>& g, int batch) const;
  // Runs over the columns of xs (in x T) and returns H x T. With `reverse`
  // the recursion starts at the last column; output column t still belongs
  // to input column t.
  Var Run(Graph<T>& g, Var xs, bool reverse = false) const;
  // Runs several sequences of different lengths in lockstep. Each output is
  // bitwise equal to Run() on that sequence alone.
  std::vector<Var> RunBatch(Graph<T>& g, std::span<const Var> xs,
                            bool reverse = false) const;
  void Collect(ParamList<T>* out);

  int in_dim() const { return static_cast<int>(wx_.value.cols()); }
  int hidden() const { return static_cast<int>(wh_.value.cols()); }

 private:
  Parameter<T> wx_;  // 4H x in, gate order [i; f; g; o]
  Parameter<T> wh_;  // 4H x H
  Parameter<T> b_;   // 4H x 1
};

// Forward and backward LSTMs with concatenated outputs ([fwd; bwd]).
template <typename T>
class Blstm {
 public:
  Blstm() = default;
  Blstm(const std::string& name, int in_dim, int hidden);

  Var Apply(Graph<T>& g, Var xs) const;
  std::vector<Var> ApplyBatch(Graph<T>& g, std::span<const Var> xs) const;
  void Collect(ParamList<T>* out);

  int out_dim() const { return 2 * fwd_.hidden(); }

 private:
  Lstm<T> fwd_;
  Lstm<T> bwd_;
};

// 3x3 convolution with zero "same" padding over a C x (H * W) map whose
// column index is h * W + w.
template <typename T>
class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(const std::string& name, int in_channels, int out_channels);

  Var Apply(Graph<T>& g, Var x, int height, int width) const;
  void Collect(ParamList<T>* out);

  int in_channels() const { return static_cast<int>(w_.value.cols()) / 9; }
  int out_channels() const { return static_cast<int>(w_.value.rows()); }

 private:
  Parameter<T> w_;  // Cout x (9 * Cin), row (dh * 3 + dw) * Cin + c
  Parameter<T> b_;
};

// Two ReLU convolutions followed by 2x2 max pooling (ceil mode).
template <typename T>
class VggBlock {
 public:
  VggBlock() = default;
  VggBlock(const std::string& name, int in_channels, int out_channels);

  // Updates *height and *width to the pooled sizes.
  Var Apply(Graph<T>& g, Var x, int* height, int* width) const;
  void Collect(ParamList<T>* out);

  int out_channels() const { return conv2_.out_channels(); }

 private:
  Conv3x3<T> conv1_;
  Conv3x3<T> conv2_;
};

// Columns `cols` of x, in that order.
template <typename T>
Var SelectColumns(Graph<T>& g, Var x, std::span<const int> cols);

// im2col index for a 3x3 same-padded convolution (see Graph::Gather).
std::vector<int> Im2ColIndex(int channels, int height, int width);

// Reorders a C x (H * W) map into (C * W) x H, row c * W + w.
std::vector<int> ChannelsToFeaturesIndex(int channels, int height, int width);

extern template class Affine<float>;
extern template class Affine<double>;
extern template class Embedding<float>;
extern template class Embedding<double>;
extern template class Lstm<float>;
extern template class Lstm<double>;
extern template class Blstm<float>;
extern template class Blstm<double>;
extern template class Conv3x3<float>;
extern template class Conv3x3<double>;
extern template class VggBlock<float>;
extern template class VggBlock<double>;

}  // namespace imsk

#endif  // IMSK_LAYERS_H_
