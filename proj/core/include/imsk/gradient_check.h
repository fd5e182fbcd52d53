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

// Central finite-difference check of analytic parameter gradients.

#ifndef IMSK_GRADIENT_CHECK_H_
#define IMSK_GRADIENT_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>

#include "imsk/tensor.h"

namespace imsk {

struct GradCheckOptions {
  double step = 1e-5;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|,
  // denominator_floor), so near-zero gradients are judged on absolute error.
  double denominator_floor = 1e-3;
  // 0 checks every entry; otherwise this many entries per parameter, drawn
  // with `seed`.
  int max_entries_per_param = 0;
  uint64_t seed = 7;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  long worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  long entries_checked = 0;

  bool Passed(double tol) const { return max_rel_error <= tol; }
};

// `loss(true)` must evaluate the loss and accumulate its gradient into the
// parameters' grad fields; `loss(false)` only evaluates it.
GradCheckReport CheckGradients(const ParamList<double>& params,
                               const std::function<double(bool)>& loss,
                               const GradCheckOptions& opts = {});

}  // namespace imsk

#endif  // IMSK_GRADIENT_CHECK_H_
