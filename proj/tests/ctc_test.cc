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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "imsk/error.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace imsk {
namespace {

using Eigen::MatrixXd;
using testing::AllSequences;
using testing::BruteForceCtcLogProb;
using testing::BruteForcePrefixLogProb;

// Random V x T log-probabilities with uneven columns.
MatrixXd RandomLogProbs(int vocab, int frames, uint64_t seed) {
  return LogSoftmaxColumns(testing::RandomMatrix(vocab, frames, seed, 2.0));
}

// Labels use the non-blank symbols; `blank` is placed at the given row.
std::vector<int> ToSymbols(const std::vector<int>& seq, int blank) {
  std::vector<int> out;
  for (int l : seq) out.push_back(l >= blank ? l + 1 : l);
  return out;
}

double RelErr(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

TEST(CtcMinFramesTest, RepeatsNeedSeparatingBlank) {
  EXPECT_EQ(CtcMinFrames(std::vector<int>{}), 0);
  EXPECT_EQ(CtcMinFrames(std::vector<int>{1, 2, 3}), 3);
  EXPECT_EQ(CtcMinFrames(std::vector<int>{1, 1}), 3);
  EXPECT_EQ(CtcMinFrames(std::vector<int>{1, 1, 2, 2, 1}), 7);
}

TEST(CtcLossTest, SingleFrameSingleLabel) {
  MatrixXd lp(2, 1);
  lp << std::log(0.25), std::log(0.75);
  EXPECT_NEAR(CtcLoss(lp, std::vector<int>{1}, 0).loss, -std::log(0.75), 1e-15);
  EXPECT_NEAR(CtcLoss(lp, std::vector<int>{}, 0).loss, -std::log(0.25), 1e-15);
}

// Two frames, one label a: paths aa, a-, -a.
TEST(CtcLossTest, TwoFrameHandExample) {
  MatrixXd p(2, 2);  // rows: blank, a
  p << 0.4, 0.3, 0.6, 0.7;
  const double expect = 0.6 * 0.7 + 0.6 * 0.3 + 0.4 * 0.7;
  EXPECT_NEAR(CtcLoss(p.array().log().matrix(), std::vector<int>{1}, 0).loss,
              -std::log(expect), 1e-14);
}

// Every instance with T <= 6, |U| <= 3, |Y| <= 3 against enumeration of all
// V^T frame paths.
TEST(CtcLossTest, MatchesBruteForceEnumeration) {
  int checked = 0;
  double worst = 0.0;
  for (int labels = 1; labels <= 3; ++labels) {
    const int vocab = labels + 1;
    for (int frames = 1; frames <= 6; ++frames) {
      const int blank = (frames + labels) % vocab;
      const MatrixXd lp = RandomLogProbs(vocab, frames, 100 * labels + frames);
      for (const auto& seq : AllSequences(labels, 3)) {
        const std::vector<int> y = ToSymbols(seq, blank);
        if (CtcMinFrames(y) > frames) continue;
        const double loss = CtcLoss(lp, y, blank).loss;
        const double ref = -BruteForceCtcLogProb(lp, y, blank);
        worst = std::max(worst, RelErr(loss, ref));
        ++checked;
      }
    }
  }
  EXPECT_LE(worst, 1e-10);
  EXPECT_GT(checked, 200);
}

// Probabilities of all label sequences sum to one when every output length
// the frames allow is included.
TEST(CtcLossTest, SequenceProbabilitiesSumToOne) {
  for (int labels = 1; labels <= 2; ++labels) {
    for (int frames = 1; frames <= 4; ++frames) {
      const MatrixXd lp =
          RandomLogProbs(labels + 1, frames, 7 * frames + labels);
      double total = 0.0;
      for (const auto& seq : AllSequences(labels, frames)) {
        const std::vector<int> y = ToSymbols(seq, 0);
        if (CtcMinFrames(y) > frames) continue;
        total += std::exp(-CtcLoss(lp, y, 0).loss);
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << labels << " " << frames;
    }
  }
}

TEST(CtcLossTest, InfeasibleLengthIsRejected) {
  const MatrixXd lp = RandomLogProbs(3, 2, 1);
  try {
    CtcLoss(lp, std::vector<int>{1, 1}, 0);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInfeasibleAlignment);
  }
  EXPECT_NO_THROW(CtcLoss(RandomLogProbs(3, 3, 1), std::vector<int>{1, 1}, 0));
}

TEST(CtcLossTest, OccupanciesSumToOnePerFrame) {
  const MatrixXd lp = RandomLogProbs(5, 9, 3);
  const auto r = CtcLoss(lp, std::vector<int>{1, 3, 3, 2}, 0);
  for (int t = 0; t < 9; ++t) {
    EXPECT_NEAR(-r.grad_log_probs.col(t).sum(), 1.0, 1e-12);
    EXPECT_NEAR(r.grad_logits.col(t).sum(), 0.0, 1e-12);
  }
}

double NumericDerivative(const std::function<double(const MatrixXd&)>& f,
                         MatrixXd x, int i, int j) {
  const double h = 1e-5, x0 = x(i, j);
  x(i, j) = x0 + h;
  const double up = f(x);
  x(i, j) = x0 - h;
  return (up - f(x)) / (2 * h);
}

TEST(CtcLossTest, GradientsMatchFiniteDifferences) {
  const std::vector<int> y = {2, 1, 1};
  const MatrixXd logits = testing::RandomMatrix(4, 7, 5, 1.5);
  const auto r = CtcLoss(LogSoftmaxColumns(logits), y, 3);
  auto via_logits = [&](const MatrixXd& z) {
    return CtcLoss(LogSoftmaxColumns(z), y, 3).loss;
  };
  const MatrixXd lp = LogSoftmaxColumns(logits);
  auto via_log_probs = [&](const MatrixXd& x) { return CtcLoss(x, y, 3).loss; };
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 7; ++j) {
      const double a = NumericDerivative(via_logits, logits, i, j);
      const double b = NumericDerivative(via_log_probs, lp, i, j);
      worst = std::max(worst, std::abs(a - r.grad_logits(i, j)) /
                                  std::max({std::abs(a), 1e-3}));
      worst = std::max(worst, std::abs(b - r.grad_log_probs(i, j)) /
                                  std::max({std::abs(b), 1e-3}));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(CtcLossTest, LongSequenceStaysFinite) {
  const MatrixXd lp = RandomLogProbs(30, 400, 9) * 4.0;
  std::vector<int> y;
  for (int i = 0; i < 150; ++i) y.push_back(1 + i % 29);
  const auto r = CtcLoss(lp, y, 0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_TRUE(r.grad_logits.allFinite());
}

// ---- prefix scoring ---------------------------------------------------------

TEST(CtcPrefixTest, EmptyPrefixIsAllBlank) {
  const MatrixXd lp = RandomLogProbs(3, 5, 2);
  CtcPrefixScorer scorer(lp, 1);
  const CtcPrefixState s = scorer.Initial();
  EXPECT_EQ(s.log_psi, 0.0);
  double acc = 0.0;
  for (int t = 0; t < 5; ++t) {
    acc += lp(1, t);
    EXPECT_NEAR(s.r_b[t], acc, 1e-12);
    EXPECT_EQ(s.r_n[t], kLogZero);
  }
  EXPECT_NEAR(scorer.Final(s), acc, 1e-12);
}

TEST(CtcPrefixTest, MatchesBruteForcePrefixAndFullProbabilities) {
  for (int labels = 1; labels <= 3; ++labels) {
    for (int frames = 1; frames <= 5; ++frames) {
      const int blank = labels % (labels + 1);
      const MatrixXd lp =
          RandomLogProbs(labels + 1, frames, 31 * frames + labels);
      CtcPrefixScorer scorer(lp, blank);
      for (const auto& seq : AllSequences(labels, 3)) {
        const std::vector<int> y = ToSymbols(seq, blank);
        CtcPrefixState s = scorer.Initial();
        for (int l : y) s = scorer.Extend(s, l);
        const double psi = BruteForcePrefixLogProb(lp, y, blank);
        const double full = BruteForceCtcLogProb(lp, y, blank);
        if (std::isinf(psi)) {
          EXPECT_EQ(s.log_psi, kLogZero);
        } else {
          // The empty prefix has log probability 0, so judge absolutely
          // near zero.
          EXPECT_LE(std::abs(s.log_psi - psi),
                    1e-10 * std::max(1.0, std::abs(psi)))
              << y.size() << " " << s.log_psi << " " << psi;
        }
        if (std::isinf(full)) {
          EXPECT_EQ(scorer.Final(s), kLogZero);
        } else {
          EXPECT_LE(RelErr(scorer.Final(s), full), 1e-10);
          EXPECT_NEAR(scorer.Final(s), -CtcLoss(lp, y, blank).loss, 1e-6);
        }
      }
    }
  }
}

TEST(CtcPrefixTest, ExtendingNeverIncreasesProbability) {
  const MatrixXd lp = RandomLogProbs(4, 6, 8);
  CtcPrefixScorer scorer(lp, 0);
  for (const auto& seq : AllSequences(3, 3)) {
    CtcPrefixState s = scorer.Initial();
    for (int l : seq) {
      const CtcPrefixState next = scorer.Extend(s, l + 1);
      EXPECT_LE(next.log_psi, s.log_psi);
      s = next;
    }
  }
}

TEST(CtcPrefixTest, ExtendAllIsBitwiseEqualToExtend) {
  const MatrixXd lp = RandomLogProbs(6, 12, 4);
  CtcPrefixScorer scorer(lp, 2);
  CtcPrefixState s = scorer.Extend(scorer.Extend(scorer.Initial(), 3), 3);
  const std::vector<int> cand = {0, 1, 3, 4, 5};
  std::vector<CtcPrefixState> all;
  scorer.ExtendAll(s, cand, &all);
  ASSERT_EQ(all.size(), cand.size());
  for (size_t i = 0; i < cand.size(); ++i) {
    const CtcPrefixState one = scorer.Extend(s, cand[i]);
    EXPECT_EQ(all[i].log_psi, one.log_psi);
    EXPECT_EQ(all[i].r_n, one.r_n);
    EXPECT_EQ(all[i].r_b, one.r_b);
    EXPECT_EQ(all[i].last, cand[i]);
  }
}

TEST(CtcPrefixTest, InfeasibleRepeatHasZeroProbability) {
  const MatrixXd lp = RandomLogProbs(2, 2, 1);
  CtcPrefixScorer scorer(lp, 0);
  const CtcPrefixState a = scorer.Extend(scorer.Initial(), 1);
  const CtcPrefixState aa = scorer.Extend(a, 1);
  EXPECT_EQ(scorer.Final(aa), kLogZero);
  EXPECT_EQ(aa.log_psi, kLogZero);
  EXPECT_GT(scorer.Final(a), kLogZero);
}

TEST(CtcPrefixTest, BlankLabelIsRejected) {
  const MatrixXd lp = RandomLogProbs(3, 3, 1);
  CtcPrefixScorer scorer(lp, 0);
  EXPECT_THROW(scorer.Extend(scorer.Initial(), 0), Error);
}

}  // namespace
}  // namespace imsk
