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

#include "imsk/gradient_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace imsk {

GradCheckReport CheckGradients(const ParamList<double>& params,
                               const std::function<double(bool)>& loss,
                               const GradCheckOptions& opts) {
  ZeroGrads(params);
  loss(true);
  std::vector<Mat<double>> analytic;
  for (auto* p : params) analytic.push_back(p->grad);
  ZeroGrads(params);

  std::mt19937_64 rng(opts.seed);
  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter<double>& p = *params[pi];
    std::vector<long> entries(p.value.size());
    std::iota(entries.begin(), entries.end(), 0L);
    if (opts.max_entries_per_param > 0 &&
        static_cast<long>(entries.size()) > opts.max_entries_per_param) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(opts.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (long k : entries) {
      double& x = p.value.data()[k];
      const double saved = x;
      x = saved + opts.step;
      const double up = loss(false);
      x = saved - opts.step;
      const double down = loss(false);
      x = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[pi].data()[k];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), opts.denominator_floor});
      double rel = std::abs(a - numeric) / denom;
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      ++report.entries_checked;
      if (rel > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = std::max(report.max_rel_error, rel);
        if (rel >= report.max_rel_error) {
          report.worst_param = p.name;
          report.worst_index = k;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  ZeroGrads(params);
  return report;
}

}  // namespace imsk
