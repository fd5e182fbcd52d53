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

#ifndef IMSK_TENSOR_H_
#define IMSK_TENSOR_H_

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace imsk {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// A trainable tensor. Gradients are accumulators owned by the parameter and
// are `mutable` so that graphs built over a const model can still report
// gradients back.
template <typename T>
struct Parameter {
  Parameter() = default;
  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)),
        value(Mat<T>::Zero(rows, cols)),
        grad(Mat<T>::Zero(rows, cols)) {}

  void ZeroGrad() const { grad.setZero(value.rows(), value.cols()); }

  std::string name;
  Mat<T> value;
  mutable Mat<T> grad;
};

template <typename T>
using ParamList = std::vector<Parameter<T>*>;

// C = A * B. Each output column is produced by the same sequence of scalar
// operations no matter how many columns B has, so results do not depend on
// how hypotheses or utterances are batched together.
template <typename T>
void MatMulInto(const Mat<T>& a, const Mat<T>& b, Mat<T>* c);

// Uniform in [-scale, scale] from a seeded generator.
template <typename T>
void InitUniform(const ParamList<T>& params, double scale, uint64_t seed);

template <typename T>
void ZeroGrads(const ParamList<T>& params) {
  for (auto* p : params) p->ZeroGrad();
}

template <typename T>
int64_t CountParameters(const ParamList<T>& params) {
  int64_t n = 0;
  for (auto* p : params) n += p->value.size();
  return n;
}

// Copies values between two parameter lists of identical layout.
template <typename To, typename From>
void CopyParameters(const ParamList<From>& from, const ParamList<To>& to);

}  // namespace imsk

#endif  // IMSK_TENSOR_H_
