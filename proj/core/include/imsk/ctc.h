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

// Connectionist temporal classification: loss by forward-backward over the
// blank-extended label lattice, and incremental prefix scoring for joint
// decoding. Everything here works on log-probabilities in double precision,
// laid out V x T (one column per encoder frame).

#ifndef IMSK_CTC_H_
#define IMSK_CTC_H_

#include <Eigen/Core>
#include <limits>
#include <span>
#include <vector>

namespace imsk {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b);

// Column-wise log-softmax.
Eigen::MatrixXd LogSoftmaxColumns(const Eigen::MatrixXd& logits);

// Minimum number of frames able to emit `labels`: one per label plus a
// separating blank between equal neighbours.
int CtcMinFrames(std::span<const int> labels);

struct CtcLossResult {
  double loss = 0.0;  // -log p(labels | X)
  // d loss / d log_probs: minus the label occupancy of each (symbol, frame).
  Eigen::MatrixXd grad_log_probs;
  // d loss / d logits when log_probs = LogSoftmaxColumns(logits).
  Eigen::MatrixXd grad_logits;
};

// Throws kInfeasibleAlignment when T < CtcMinFrames(labels).
CtcLossResult CtcLoss(const Eigen::MatrixXd& log_probs,
                      std::span<const int> labels, int blank);

// Forward variables of one prefix: log probability that frames 0..t emit the
// prefix and end in a non-blank (r_n) or blank (r_b) symbol.
struct CtcPrefixState {
  std::vector<double> r_n;
  std::vector<double> r_b;
  double log_psi = 0.0;  // log prefix probability
  int last = -1;         // last label, -1 for the empty prefix
};

class CtcPrefixScorer {
 public:
  // `log_probs` must outlive the scorer.
  CtcPrefixScorer(const Eigen::MatrixXd& log_probs, int blank);

  int num_frames() const { return static_cast<int>(x_.cols()); }
  int vocab_size() const { return static_cast<int>(x_.rows()); }
  int blank() const { return blank_; }

  CtcPrefixState Initial() const;

  // Prefix probabilities of `state` extended by each label in `labels` (none
  // of which may be the blank). Computes all candidates in one pass over the
  // frames; each result is bitwise equal to extending by that label alone.
  void ExtendAll(const CtcPrefixState& state, std::span<const int> labels,
                 std::vector<CtcPrefixState>* out) const;
  CtcPrefixState Extend(const CtcPrefixState& state, int label) const;

  // Log probability of the complete sequence the prefix stands for.
  double Final(const CtcPrefixState& state) const;

 private:
  const Eigen::MatrixXd& x_;
  int blank_;
};

}  // namespace imsk

#endif  // IMSK_CTC_H_
