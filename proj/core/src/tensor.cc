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

#include "imsk/tensor.h"

#include <random>

#include "imsk/error.h"

namespace imsk {

template <typename T>
void MatMulInto(const Mat<T>& a, const Mat<T>& b, Mat<T>* c) {
  if (!(a.cols() == b.rows()))
    Fail(Errc::kDimMismatch, "matmul: " + std::to_string(a.rows()) + "x" +
                                 std::to_string(a.cols()) + " * " +
                                 std::to_string(b.rows()) + "x" +
                                 std::to_string(b.cols()));
  const Eigen::Index m = a.rows(), k = a.cols(), n = b.cols();
  c->setZero(m, n);
  const T* ad = a.data();
  Eigen::Index j = 0;
  for (; j + 4 <= n; j += 4) {
    T* __restrict c0 = c->col(j).data();
    T* __restrict c1 = c->col(j + 1).data();
    T* __restrict c2 = c->col(j + 2).data();
    T* __restrict c3 = c->col(j + 3).data();
    for (Eigen::Index p = 0; p < k; ++p) {
      const T* __restrict ap = ad + p * m;
      const T b0 = b(p, j), b1 = b(p, j + 1), b2 = b(p, j + 2),
              b3 = b(p, j + 3);
      for (Eigen::Index i = 0; i < m; ++i) {
        const T av = ap[i];
        c0[i] += av * b0;
        c1[i] += av * b1;
        c2[i] += av * b2;
        c3[i] += av * b3;
      }
    }
  }
  for (; j < n; ++j) {
    T* __restrict c0 = c->col(j).data();
    for (Eigen::Index p = 0; p < k; ++p) {
      const T* __restrict ap = ad + p * m;
      const T b0 = b(p, j);
      for (Eigen::Index i = 0; i < m; ++i) c0[i] += ap[i] * b0;
    }
  }
}

template <typename T>
void InitUniform(const ParamList<T>& params, double scale, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      p->value.data()[i] = static_cast<T>(dist(rng));
    }
    p->ZeroGrad();
  }
}

template <typename To, typename From>
void CopyParameters(const ParamList<From>& from, const ParamList<To>& to) {
  Require(from.size() == to.size(), Errc::kDimMismatch,
          "parameter lists differ in length");
  for (size_t i = 0; i < from.size(); ++i) {
    if (!(from[i]->value.rows() == to[i]->value.rows() &&
          from[i]->value.cols() == to[i]->value.cols()))
      Fail(Errc::kDimMismatch, "shape mismatch for " + from[i]->name);
    to[i]->value = from[i]->value.template cast<To>();
    to[i]->ZeroGrad();
  }
}

template void MatMulInto<float>(const Mat<float>&, const Mat<float>&,
                                Mat<float>*);
template void MatMulInto<double>(const Mat<double>&, const Mat<double>&,
                                 Mat<double>*);
template void InitUniform<float>(const ParamList<float>&, double, uint64_t);
template void InitUniform<double>(const ParamList<double>&, double, uint64_t);
template void CopyParameters<float, float>(const ParamList<float>&,
                                           const ParamList<float>&);
template void CopyParameters<double, float>(const ParamList<float>&,
                                            const ParamList<double>&);
template void CopyParameters<float, double>(const ParamList<double>&,
                                            const ParamList<float>&);
template void CopyParameters<double, double>(const ParamList<double>&,
                                             const ParamList<double>&);

}  // namespace imsk
