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

#include "imsk/asr_model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "imsk/ctc.h"
#include "imsk/error.h"
#include "imsk/gradient_check.h"
#include "support/test_support.h"

namespace imsk {
namespace {

using MatD = Mat<double>;
using testing::RandomMatrix;

AsrConfig TinyConfig() {
  AsrConfig c;
  c.input_dim = 3;
  c.vocab_size = 7;
  c.vgg_channels1 = 2;
  c.vgg_channels2 = 2;
  c.blstm_layers = 1;
  c.blstm_units = 3;
  c.attn_dim = 4;
  c.conv_channels = 2;
  c.conv_filters = 3;
  c.dec_units = 4;
  c.embed_dim = 3;
  c.init_scale = 0.5;
  c.seed = 3;
  return c;
}

const std::vector<int> kLabels = {4, 6, 4};

TEST(EncodedLengthTest, TwoCeilHalvings) {
  EXPECT_EQ(EncodedLength(100), 25);
  EXPECT_EQ(EncodedLength(7), 2);
  for (int t = 4; t < 200; ++t) {
    EXPECT_EQ(EncodedLength(t),
              static_cast<int>(std::ceil(std::ceil(t / 2.0) / 2.0)));
  }
}

TEST(EncodeTest, ShapeAndFiniteness) {
  HybridModel<float> model(TinyConfig());
  for (int t : {100, 7, 4}) {
    Graph<float> g(false);
    const auto enc = model.Encode(g, RandomMatrix(3, t, t).cast<float>());
    const Mat<float>& h = g.Value(enc.h);
    EXPECT_EQ(enc.frames, EncodedLength(t));
    EXPECT_EQ(h.rows(), 6);
    EXPECT_EQ(h.cols(), EncodedLength(t));
    EXPECT_TRUE(h.allFinite());
  }
}

TEST(EncodeTest, WrongFeatureDimensionIsRejected) {
  HybridModel<float> model(TinyConfig());
  Graph<float> g(false);
  try {
    model.Encode(g, Mat<float>::Zero(4, 10));
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDimMismatch);
  }
}

TEST(EncodeTest, BatchIsBitwiseEqualToSingle) {
  HybridModel<float> model(TinyConfig());
  std::vector<Mat<float>> xs;
  for (int t : {9, 30, 4, 17})
    xs.push_back(RandomMatrix(3, t, t).cast<float>());
  std::vector<const Mat<float>*> ptrs;
  for (const auto& x : xs) ptrs.push_back(&x);
  Graph<float> g(false);
  const auto batch = model.EncodeBatch(g, ptrs);
  for (size_t i = 0; i < xs.size(); ++i) {
    Graph<float> one(false);
    const auto enc = model.Encode(one, xs[i]);
    EXPECT_EQ(g.Value(batch[i].h), one.Value(enc.h)) << i;
    EXPECT_EQ(g.Value(batch[i].vh), one.Value(enc.vh)) << i;
  }
}

TEST(AttendTest, SingleFrameGivesUnitWeight) {
  HybridModel<double> model(TinyConfig());
  Graph<double> g(false);
  const auto enc = model.Encode(g, RandomMatrix(3, 4, 1));
  ASSERT_EQ(enc.frames, 1);
  const auto att = model.Attend(g, enc, g.Input(RandomMatrix(4, 1, 2)),
                                model.UniformAttention(g, 1, 1));
  EXPECT_NEAR(g.Value(att.weights)(0, 0), 1.0, 1e-15);
  EXPECT_LE((g.Value(att.context) - g.Value(enc.h)).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(AttendTest, WeightsAreDistributionsAndContextIsTheirMixture) {
  HybridModel<double> model(TinyConfig());
  Graph<double> g(false);
  const auto enc = model.Encode(g, RandomMatrix(3, 40, 3));
  const MatD prev =
      g.Value(g.Softmax(g.Input(RandomMatrix(enc.frames, 2, 4, 3.0))));
  const auto att =
      model.Attend(g, enc, g.Input(RandomMatrix(4, 2, 5)), g.Input(prev));
  const MatD& w = g.Value(att.weights);
  for (int b = 0; b < 2; ++b) {
    EXPECT_NEAR(w.col(b).sum(), 1.0, 1e-12);
    EXPECT_GE(w.col(b).minCoeff(), 0.0);
  }
  const MatD mix = g.Value(enc.h) * w;
  EXPECT_LE((g.Value(att.context) - mix).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AttendTest, GradientCheck) {
  HybridModel<double> model(TinyConfig());
  const MatD feats = RandomMatrix(3, 12, 6);
  Parameter<double> q("q", 4, 1), a("a", 3, 1);
  q.value = RandomMatrix(4, 1, 7);
  a.value << 0.2, 0.5, 0.3;
  ParamList<double> params = model.params();
  params.push_back(&q);
  params.push_back(&a);
  const MatD rw = RandomMatrix(3, 1, 8), rc = RandomMatrix(6, 1, 9);
  const auto r = CheckGradients(params, [&](bool backward) {
    Graph<double> g(backward);
    const auto enc = model.Encode(g, feats);
    const auto att = model.Attend(g, enc, g.Param(q), g.Param(a));
    const Var l = g.Add(g.Sum(g.Mul(att.weights, g.Input(rw))),
                        g.Sum(g.Mul(att.context, g.Input(rc))));
    if (backward) g.Backward(l);
    return g.Scalar(l);
  });
  EXPECT_TRUE(r.Passed(1e-5)) << r.worst_param << " " << r.max_rel_error;
}

TEST(DecoderTest, StepIsNormalizedAndDeterministic) {
  HybridModel<double> model(TinyConfig());
  const MatD ctx = RandomMatrix(6, 2, 3);
  MatD first;
  for (int rep = 0; rep < 2; ++rep) {
    Graph<double> g(false);
    auto state = model.DecoderZeroState(g, 2);
    const int prev[] = {1, 5};
    const MatD& lp = g.Value(model.DecoderStep(g, prev, g.Input(ctx), &state));
    ASSERT_EQ(lp.rows(), 7);
    for (int b = 0; b < 2; ++b)
      EXPECT_NEAR(lp.col(b).array().exp().sum(), 1.0, 1e-12);
    if (rep == 0)
      first = lp;
    else
      EXPECT_EQ(lp, first);
  }
}

double LossValue(const HybridModel<double>& model, const MatD& feats,
                 std::span<const int> labels, double lambda) {
  Graph<double> g(false);
  return g.Scalar(model.ComputeLoss(g, feats, labels, lambda).total);
}

TEST(HybridLossTest, BoundariesAndLinearity) {
  HybridModel<double> model(TinyConfig());
  const MatD feats = RandomMatrix(3, 20, 10);
  Graph<double> g(false);
  const auto enc = model.Encode(g, feats);
  const MatD lp = g.Value(model.CtcLogProbs(g, enc));
  const double ctc = CtcLoss(lp, kLabels, 2).loss;
  const std::vector<double> steps = model.TeacherForcedLogProbs(feats, kLabels);
  ASSERT_EQ(steps.size(), kLabels.size() + 1);
  const double att = -std::accumulate(steps.begin(), steps.end(), 0.0);

  const double l0 = LossValue(model, feats, kLabels, 0.0);
  const double l1 = LossValue(model, feats, kLabels, 1.0);
  EXPECT_NEAR(l0, att, 1e-9);
  EXPECT_NEAR(l1, ctc, 1e-9);
  EXPECT_NEAR(LossValue(model, feats, kLabels, 0.5), 0.5 * (l0 + l1), 1e-9);
  EXPECT_NEAR(LossValue(model, feats, kLabels, 0.3), 0.3 * l1 + 0.7 * l0, 1e-9);
  EXPECT_GE(l0, 0.0);
  EXPECT_GE(l1, 0.0);
}

TEST(HybridLossTest, UniformOutputGivesLogVocabularyPerStep) {
  HybridModel<double> model(TinyConfig());
  for (auto* p : model.params()) p->value.setZero();
  const MatD feats = RandomMatrix(3, 20, 11);
  EXPECT_NEAR(LossValue(model, feats, kLabels, 0.0), 4 * std::log(7.0), 1e-12);
}

TEST(HybridLossTest, InfeasibleCtcLengthPropagates) {
  HybridModel<double> model(TinyConfig());
  const std::vector<int> labels = {4, 4, 5};  // needs 4 encoder frames
  try {
    LossValue(model, RandomMatrix(3, 8, 1), labels, 0.5);  // 2 frames
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInfeasibleAlignment);
  }
  EXPECT_NO_THROW(LossValue(model, RandomMatrix(3, 8, 1), labels, 0.0));
}

TEST(HybridLossTest, ReservedLabelsAreRejected) {
  HybridModel<double> model(TinyConfig());
  const std::vector<int> blank = {2}, sos = {1}, big = {7};
  for (const auto* y : {&blank, &sos, &big}) {
    EXPECT_THROW(LossValue(model, RandomMatrix(3, 8, 1), *y, 0.5), Error);
  }
}

TEST(HybridLossTest, FullGradientCheck) {
  HybridModel<double> model(TinyConfig());
  const MatD feats = RandomMatrix(3, 14, 12);
  GradCheckOptions opts;
  opts.max_entries_per_param = 12;
  for (double lambda : {0.0, 0.5, 1.0}) {
    const auto r = CheckGradients(
        model.params(),
        [&](bool backward) {
          Graph<double> g(backward);
          const Var l = model.ComputeLoss(g, feats, kLabels, lambda).total;
          if (backward) g.Backward(l);
          return g.Scalar(l);
        },
        opts);
    EXPECT_TRUE(r.Passed(1e-5))
        << lambda << " " << r.worst_param << " " << r.max_rel_error;
  }
}

TEST(CheckpointTest, SaveLoadReproducesModel) {
  testing::TempDir dir("asr");
  AsrConfig cfg = TinyConfig();
  cfg.vocab_hash = 0xabcdef;
  HybridModel<float> model(cfg);
  SaveAsrModel((dir / "m.nnk").string(), model);
  const auto loaded = LoadAsrModel((dir / "m.nnk").string());
  EXPECT_EQ(loaded->config().ToJson(), cfg.ToJson());
  ASSERT_EQ(loaded->params().size(), model.params().size());
  for (size_t i = 0; i < model.params().size(); ++i) {
    EXPECT_EQ(loaded->params()[i]->value, model.params()[i]->value);
  }
}

TEST(ConfigTest, InvalidValuesAreRejected) {
  AsrConfig c = TinyConfig();
  c.ctc_weight = 1.5;
  EXPECT_THROW(c.Validate(), Error);
  c = TinyConfig();
  c.blstm_layers = 0;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_NO_THROW(AsrConfig::FullScale(80, 5000).Validate());
}

// Gradients clipped to a negligible norm leave the parameters unchanged, so
// every epoch after the first fails to improve and eps halves each time.
TEST(TrainTest, EpsHalvesAfterEachEpochWithoutImprovement) {
  const auto setup = testing::MakeToySetup(24);
  HybridModel<float> model(testing::ToyAsrConfig(setup));
  AsrTrainOptions opts = testing::ToyTrainOptions(3);
  opts.eps = 1e-8;
  opts.rho = 0.95;
  opts.clip = 1e-20;
  const auto result = TrainAsr(model, setup.train, setup.valid, opts);
  ASSERT_EQ(result.epochs.size(), 3u);
  EXPECT_DOUBLE_EQ(result.epochs[0].eps, 1e-8);
  EXPECT_FALSE(result.epochs[1].improved);
  EXPECT_FALSE(result.epochs[2].improved);
  EXPECT_DOUBLE_EQ(result.epochs[2].eps, 2.5e-9);
}

TEST(TrainTest, RestoresTheBestEpoch) {
  const auto setup = testing::MakeToySetup(60);
  HybridModel<float> model(testing::ToyAsrConfig(setup));
  AsrTrainOptions opts = testing::ToyTrainOptions(4);
  opts.halve_on_plateau = false;
  std::vector<double> seen;
  const auto result = TrainAsr(
      model, setup.train, setup.valid, opts,
      [&](const AsrEpochReport& r) { seen.push_back(r.valid_accuracy); });
  ASSERT_EQ(seen.size(), 4u);
  const auto best = std::max_element(seen.begin(), seen.end());
  EXPECT_EQ(result.best_epoch, best - seen.begin() + 1);
  EXPECT_EQ(result.best_accuracy, *best);
  EXPECT_EQ(TokenAccuracy(model, setup.valid), *best);
  for (const auto& e : result.epochs) EXPECT_DOUBLE_EQ(e.eps, opts.eps);
}

TEST(TrainTest, DeterministicForAFixedSeed) {
  const auto setup = testing::MakeToySetup(24);
  AsrTrainOptions opts = testing::ToyTrainOptions(2);
  HybridModel<float> a(testing::ToyAsrConfig(setup)),
      b(testing::ToyAsrConfig(setup));
  const auto ra = TrainAsr(a, setup.train, setup.valid, opts);
  const auto rb = TrainAsr(b, setup.train, setup.valid, opts);
  EXPECT_EQ(ra.epochs.back().train_loss, rb.epochs.back().train_loss);
  for (size_t i = 0; i < a.params().size(); ++i) {
    EXPECT_EQ(a.params()[i]->value, b.params()[i]->value);
  }
}

}  // namespace
}  // namespace imsk
