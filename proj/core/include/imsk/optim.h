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

#ifndef IMSK_OPTIM_H_
#define IMSK_OPTIM_H_

#include <vector>

#include "imsk/tensor.h"

namespace imsk {

// Throws kNonFinite naming the first parameter whose gradient holds a NaN or
// infinity.
template <typename T>
void CheckFiniteGradients(const ParamList<T>& params);

// Scales all gradients by threshold / norm when their global L2 norm exceeds
// `threshold`. Returns the norm before clipping.
template <typename T>
double ClipGradients(const ParamList<T>& params, double threshold);

template <typename T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Applies one update from the accumulated gradients, then zeroes them.
  // The list must be the same (same order) on every call.
  virtual void Step(const ParamList<T>& params) = 0;
};

struct AdaDeltaOptions {
  double rho = 0.95;
  double eps = 1e-8;
};

template <typename T>
class AdaDelta : public Optimizer<T> {
 public:
  explicit AdaDelta(AdaDeltaOptions opts = {});
  void Step(const ParamList<T>& params) override;

  double eps() const { return opts_.eps; }
  void set_eps(double eps);
  const std::vector<Mat<T>>& sq_grad() const { return sq_grad_; }
  const std::vector<Mat<T>>& sq_update() const { return sq_update_; }

 private:
  AdaDeltaOptions opts_;
  std::vector<Mat<T>> sq_grad_;
  std::vector<Mat<T>> sq_update_;
};

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
class Adam : public Optimizer<T> {
 public:
  explicit Adam(AdamOptions opts = {});
  void Step(const ParamList<T>& params) override;
  double lr() const { return opts_.lr; }
  void set_lr(double lr) { opts_.lr = lr; }

 private:
  AdamOptions opts_;
  long step_ = 0;
  std::vector<Mat<T>> m_;
  std::vector<Mat<T>> v_;
};

template <typename T>
class Sgd : public Optimizer<T> {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void Step(const ParamList<T>& params) override;
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
};

extern template class AdaDelta<float>;
extern template class AdaDelta<double>;
extern template class Adam<float>;
extern template class Adam<double>;
extern template class Sgd<float>;
extern template class Sgd<double>;

}  // namespace imsk

#endif  // IMSK_OPTIM_H_
