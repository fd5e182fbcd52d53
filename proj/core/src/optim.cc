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

#include "imsk/optim.h"

#include <cmath>

#include "imsk/error.h"

namespace imsk {
namespace {

template <typename T>
void EnsureState(const ParamList<T>& params, std::vector<Mat<T>>* state) {
  if (state->size() == params.size()) return;
  Require(state->empty(), Errc::kInvalidArgument,
          "optimizer called with a different parameter list");
  for (auto* p : params) {
    state->push_back(Mat<T>::Zero(p->value.rows(), p->value.cols()));
  }
}

}  // namespace

template <typename T>
void CheckFiniteGradients(const ParamList<T>& params) {
  for (auto* p : params) {
    if (!p->grad.allFinite()) {
      Fail(Errc::kNonFinite, "non-finite gradient in parameter " + p->name);
    }
  }
}

template <typename T>
double ClipGradients(const ParamList<T>& params, double threshold) {
  Require(threshold > 0, Errc::kInvalidArgument,
          "clip threshold must be positive");
  double sq = 0.0;
  for (auto* p : params) {
    sq += p->grad.template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (norm > threshold) {
    const T scale = static_cast<T>(threshold / norm);
    for (auto* p : params) p->grad *= scale;
  }
  return norm;
}

template <typename T>
AdaDelta<T>::AdaDelta(AdaDeltaOptions opts) : opts_(opts) {
  Require(opts.rho > 0 && opts.rho < 1, Errc::kInvalidArgument,
          "adadelta rho must be in (0, 1)");
  set_eps(opts.eps);
}

template <typename T>
void AdaDelta<T>::set_eps(double eps) {
  Require(eps > 0, Errc::kInvalidArgument, "adadelta eps must be positive");
  opts_.eps = eps;
}

template <typename T>
void AdaDelta<T>::Step(const ParamList<T>& params) {
  CheckFiniteGradients(params);
  EnsureState(params, &sq_grad_);
  EnsureState(params, &sq_update_);
  const T rho = static_cast<T>(opts_.rho);
  const T eps = static_cast<T>(opts_.eps);
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    T* x = p.value.data();
    const T* g = p.grad.data();
    T* eg = sq_grad_[i].data();
    T* ex = sq_update_[i].data();
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      eg[k] = rho * eg[k] + (T(1) - rho) * g[k] * g[k];
      const T dx = -std::sqrt(ex[k] + eps) / std::sqrt(eg[k] + eps) * g[k];
      ex[k] = rho * ex[k] + (T(1) - rho) * dx * dx;
      x[k] += dx;
    }
    p.ZeroGrad();
  }
}

template <typename T>
Adam<T>::Adam(AdamOptions opts) : opts_(opts) {
  Require(opts.lr > 0 && opts.eps > 0, Errc::kInvalidArgument,
          "adam lr and eps must be positive");
}

template <typename T>
void Adam<T>::Step(const ParamList<T>& params) {
  CheckFiniteGradients(params);
  EnsureState(params, &m_);
  EnsureState(params, &v_);
  ++step_;
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  const T b1 = static_cast<T>(opts_.beta1), b2 = static_cast<T>(opts_.beta2);
  const T lr = static_cast<T>(opts_.lr * std::sqrt(c2) / c1);
  const T eps = static_cast<T>(opts_.eps * std::sqrt(c2));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter<T>& p = *params[i];
    T* x = p.value.data();
    const T* g = p.grad.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      m[k] = b1 * m[k] + (T(1) - b1) * g[k];
      v[k] = b2 * v[k] + (T(1) - b2) * g[k] * g[k];
      x[k] -= lr * m[k] / (std::sqrt(v[k]) + eps);
    }
    p.ZeroGrad();
  }
}

template <typename T>
void Sgd<T>::Step(const ParamList<T>& params) {
  CheckFiniteGradients(params);
  for (auto* p : params) {
    p->value -= static_cast<T>(lr_) * p->grad;
    p->ZeroGrad();
  }
}

template void CheckFiniteGradients(const ParamList<float>&);
template void CheckFiniteGradients(const ParamList<double>&);
template double ClipGradients(const ParamList<float>&, double);
template double ClipGradients(const ParamList<double>&, double);
template class AdaDelta<float>;
template class AdaDelta<double>;
template class Adam<float>;
template class Adam<double>;
template class Sgd<float>;
template class Sgd<double>;

}  // namespace imsk
