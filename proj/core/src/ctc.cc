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

#include "imsk/ctc.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "imsk/error.h"

namespace imsk {

double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

Eigen::MatrixXd LogSoftmaxColumns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    const double mx = logits.col(t).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      sum += std::exp(logits(k, t) - mx);
    }
    const double lse = mx + std::log(sum);
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      out(k, t) = logits(k, t) - lse;
    }
  }
  return out;
}

int CtcMinFrames(std::span<const int> labels) {
  int n = static_cast<int>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] == labels[i - 1]) ++n;
  }
  return n;
}

CtcLossResult CtcLoss(const Eigen::MatrixXd& log_probs,
                      std::span<const int> labels, int blank) {
  const int frames = static_cast<int>(log_probs.cols());
  const int vocab = static_cast<int>(log_probs.rows());
  Require(frames > 0, Errc::kEmptyInput, "ctc over zero frames");
  Require(blank >= 0 && blank < vocab, Errc::kOutOfRange, "blank out of range");
  for (int l : labels) {
    if (!(l >= 0 && l < vocab && l != blank))
      Fail(Errc::kOutOfRange,
           "ctc label " + std::to_string(l) + " out of range");
  }
  const int need = CtcMinFrames(labels);
  if (frames < need) {
    Fail(Errc::kInfeasibleAlignment,
         "ctc needs at least " + std::to_string(need) + " frames for " +
             std::to_string(labels.size()) + " labels, got " +
             std::to_string(frames));
  }

  // Extended sequence: blank, l1, blank, l2, ..., blank.
  const int s_len = 2 * static_cast<int>(labels.size()) + 1;
  std::vector<int> ext(s_len, blank);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto skip_ok = [&](int s) {
    return s >= 2 && ext[s] != blank && ext[s] != ext[s - 2];
  };

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(s_len, frames, kLogZero);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Constant(s_len, frames, kLogZero);
  alpha(0, 0) = log_probs(ext[0], 0);
  if (s_len > 1) alpha(1, 0) = log_probs(ext[1], 0);
  for (int t = 1; t < frames; ++t) {
    for (int s = 0; s < s_len; ++s) {
      double a = alpha(s, t - 1);
      if (s >= 1) a = LogAdd(a, alpha(s - 1, t - 1));
      if (skip_ok(s)) a = LogAdd(a, alpha(s - 2, t - 1));
      alpha(s, t) = a == kLogZero ? kLogZero : a + log_probs(ext[s], t);
    }
  }
  beta(s_len - 1, frames - 1) = log_probs(ext[s_len - 1], frames - 1);
  if (s_len > 1) {
    beta(s_len - 2, frames - 1) = log_probs(ext[s_len - 2], frames - 1);
  }
  for (int t = frames - 2; t >= 0; --t) {
    for (int s = 0; s < s_len; ++s) {
      double b = beta(s, t + 1);
      if (s + 1 < s_len) b = LogAdd(b, beta(s + 1, t + 1));
      if (s + 2 < s_len && skip_ok(s + 2)) b = LogAdd(b, beta(s + 2, t + 1));
      beta(s, t) = b == kLogZero ? kLogZero : b + log_probs(ext[s], t);
    }
  }

  double log_p = alpha(s_len - 1, frames - 1);
  if (s_len > 1) log_p = LogAdd(log_p, alpha(s_len - 2, frames - 1));
  if (log_p == kLogZero) {
    Fail(Errc::kInfeasibleAlignment, "ctc labels have zero probability");
  }

  // Occupancy: alpha * beta counts the emission at (s, t) twice.
  Eigen::MatrixXd log_occ = Eigen::MatrixXd::Constant(vocab, frames, kLogZero);
  for (int t = 0; t < frames; ++t) {
    for (int s = 0; s < s_len; ++s) {
      if (alpha(s, t) == kLogZero || beta(s, t) == kLogZero) continue;
      const double v = alpha(s, t) + beta(s, t) - log_probs(ext[s], t);
      log_occ(ext[s], t) = LogAdd(log_occ(ext[s], t), v);
    }
  }

  CtcLossResult r;
  r.loss = -log_p;
  r.grad_log_probs.resize(vocab, frames);
  r.grad_logits.resize(vocab, frames);
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < vocab; ++k) {
      const double occ =
          log_occ(k, t) == kLogZero ? 0.0 : std::exp(log_occ(k, t) - log_p);
      r.grad_log_probs(k, t) = -occ;
      r.grad_logits(k, t) = std::exp(log_probs(k, t)) - occ;
    }
  }
  return r;
}

CtcPrefixScorer::CtcPrefixScorer(const Eigen::MatrixXd& log_probs, int blank)
    : x_(log_probs), blank_(blank) {
  Require(log_probs.cols() > 0, Errc::kEmptyInput, "ctc over zero frames");
  Require(blank >= 0 && blank < log_probs.rows(), Errc::kOutOfRange,
          "blank out of range");
}

CtcPrefixState CtcPrefixScorer::Initial() const {
  const int frames = num_frames();
  CtcPrefixState s;
  s.r_n.assign(frames, kLogZero);
  s.r_b.resize(frames);
  double acc = 0.0;
  for (int t = 0; t < frames; ++t) {
    acc += x_(blank_, t);
    s.r_b[t] = acc;
  }
  s.log_psi = 0.0;
  s.last = -1;
  return s;
}

void CtcPrefixScorer::ExtendAll(const CtcPrefixState& state,
                                std::span<const int> labels,
                                std::vector<CtcPrefixState>* out) const {
  const int frames = num_frames();
  const size_t n = labels.size();
  for (int c : labels) {
    Require(c >= 0 && c < vocab_size() && c != blank_, Errc::kOutOfRange,
            "prefix extension label out of range");
  }
  out->assign(n, CtcPrefixState{});
  std::vector<double> psi(n);
  for (size_t j = 0; j < n; ++j) {
    CtcPrefixState& h = (*out)[j];
    h.r_n.resize(frames);
    h.r_b.resize(frames);
    h.last = labels[j];
    h.r_n[0] = state.last < 0 ? x_(labels[j], 0) : kLogZero;
    h.r_b[0] = kLogZero;
    psi[j] = h.r_n[0];
  }
  for (int t = 1; t < frames; ++t) {
    const double both = LogAdd(state.r_n[t - 1], state.r_b[t - 1]);
    const double xb = x_(blank_, t);
    for (size_t j = 0; j < n; ++j) {
      CtcPrefixState& h = (*out)[j];
      const int c = labels[j];
      // A repeated label must be separated by a blank.
      const double phi = c == state.last ? state.r_b[t - 1] : both;
      const double xc = x_(c, t);
      const double rn = LogAdd(h.r_n[t - 1], phi);
      h.r_n[t] = rn == kLogZero ? kLogZero : rn + xc;
      const double rb = LogAdd(h.r_n[t - 1], h.r_b[t - 1]);
      h.r_b[t] = rb == kLogZero ? kLogZero : rb + xb;
      if (phi != kLogZero) psi[j] = LogAdd(psi[j], phi + xc);
    }
  }
  for (size_t j = 0; j < n; ++j) (*out)[j].log_psi = psi[j];
}

CtcPrefixState CtcPrefixScorer::Extend(const CtcPrefixState& state,
                                       int label) const {
  std::vector<CtcPrefixState> out;
  const int labels[] = {label};
  ExtendAll(state, labels, &out);
  return std::move(out[0]);
}

double CtcPrefixScorer::Final(const CtcPrefixState& state) const {
  const int last = num_frames() - 1;
  return LogAdd(state.r_n[last], state.r_b[last]);
}

}  // namespace imsk
