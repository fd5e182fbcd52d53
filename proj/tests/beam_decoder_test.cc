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

#include "imsk/beam_decoder.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <vector>

#include "imsk/error.h"
#include "imsk/neural_lm.h"
#include "support/test_support.h"

namespace imsk {
namespace {

// One trained toy recognizer and a small LM shared by every test.
class BeamDecoderTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    setup_ = new testing::ToySetup(testing::MakeToySetup());
    model_ = testing::TrainToyModel(*setup_, 10).release();
    LmConfig lc;
    lc.vocab_size = setup_->vocab.Size();
    lc.vocab_hash = setup_->vocab.Hash();
    lc.layers = 1;
    lc.units = 32;
    lc.embed_dim = 16;
    lm_ = new NeuralLm<float>(lc);
    std::vector<std::vector<int>> corpus;
    for (const auto& u : setup_->train) corpus.push_back(u.labels);
    LmTrainOptions lo;
    lo.epochs = 3;
    lo.lr = 0.5;
    TrainLm(*lm_, corpus, lo);
  }
  static void TearDownTestSuite() {
    delete lm_;
    delete model_;
    delete setup_;
  }

  static std::vector<FeatureMatrix> ValidFeatures(size_t n) {
    std::vector<FeatureMatrix> out;
    for (size_t i = 0; i < n && i < setup_->valid.size(); ++i) {
      out.push_back(setup_->valid[i].feats);
    }
    return out;
  }

  static testing::ToySetup* setup_;
  static HybridModel<float>* model_;
  static NeuralLm<float>* lm_;
};

testing::ToySetup* BeamDecoderTest::setup_ = nullptr;
HybridModel<float>* BeamDecoderTest::model_ = nullptr;
NeuralLm<float>* BeamDecoderTest::lm_ = nullptr;

// Argmax attention decoding written directly against the model API.
std::vector<int> GreedyAttention(const HybridModel<float>& model,
                                 const FeatureMatrix& f) {
  const AsrConfig& c = model.config();
  Graph<float> g(false);
  const auto enc = model.Encode(g, ToModelInput<float>(f));
  const int cap = std::max(1, enc.frames);
  auto state = model.DecoderZeroState(g, 1);
  Var a = model.UniformAttention(g, enc.frames, 1);
  std::vector<int> out;
  int prev = c.sos_eos;
  for (;;) {
    const auto att = model.Attend(g, enc, state.back().h, a);
    a = att.weights;
    const int p[] = {prev};
    const Mat<float>& lp =
        g.Value(model.DecoderStep(g, p, att.context, &state));
    int best = c.sos_eos;
    if (static_cast<int>(out.size()) < cap) {
      for (int v = 0; v < c.vocab_size; ++v) {
        if (v != c.blank && lp(v, 0) > lp(best, 0)) best = v;
      }
    }
    if (best == c.sos_eos) return out;
    out.push_back(best);
    prev = best;
  }
}

TEST_F(BeamDecoderTest, BeamOneWithoutCtcIsGreedyAttention) {
  DecodeConfig cfg;
  cfg.beam = 1;
  cfg.ctc_weight = 0.0;
  BeamDecoder dec(*model_, nullptr, cfg);
  for (const auto& f : ValidFeatures(15)) {
    EXPECT_EQ(dec.Decode(f).best().tokens, GreedyAttention(*model_, f));
  }
}

TEST_F(BeamDecoderTest, ZeroLmWeightEqualsNoLm) {
  DecodeConfig cfg;
  cfg.beam = 5;
  cfg.lm_weight = 0.0;
  BeamDecoder with(*model_, lm_, cfg), without(*model_, nullptr, cfg);
  for (const auto& f : ValidFeatures(15)) {
    const Hypothesis a = with.Decode(f).best(), b = without.Decode(f).best();
    EXPECT_EQ(a.tokens, b.tokens);
    EXPECT_EQ(a.score, b.score);
  }
}

TEST_F(BeamDecoderTest, ScoresAreAdditiveAndRecomputable) {
  DecodeConfig cfg;
  cfg.beam = 5;
  cfg.lm_weight = 0.5;
  cfg.nbest = 4;
  BeamDecoder dec(*model_, lm_, cfg);
  for (const auto& f : ValidFeatures(10)) {
    const DecodeResult r = dec.Decode(f);
    for (const Hypothesis& h : r.nbest) {
      EXPECT_NEAR(h.score, 0.5 * h.ctc + 0.5 * h.att + 0.5 * h.lm, 1e-9);
      const Hypothesis re = RescoreHypothesis(*model_, lm_, cfg, f, h.tokens);
      EXPECT_NEAR(re.att, h.att, 1e-5);
      EXPECT_NEAR(re.ctc, h.ctc, 1e-5);
      EXPECT_NEAR(re.lm, h.lm, 1e-5);
      EXPECT_NEAR(re.score, h.score, 1e-5);
    }
  }
}

TEST_F(BeamDecoderTest, NbestIsSortedAndBounded) {
  DecodeConfig cfg;
  cfg.beam = 6;
  cfg.nbest = 6;
  BeamDecoder dec(*model_, nullptr, cfg);
  for (const auto& f : ValidFeatures(8)) {
    const DecodeResult r = dec.Decode(f);
    ASSERT_FALSE(r.nbest.empty());
    EXPECT_LE(r.nbest.size(), 6u);
    for (size_t i = 1; i < r.nbest.size(); ++i) {
      EXPECT_GE(r.nbest[i - 1].score, r.nbest[i].score);
    }
    for (const auto& h : r.nbest) {
      EXPECT_LE(static_cast<int>(h.tokens.size()), r.encoder_frames);
    }
  }
}

TEST_F(BeamDecoderTest, BestScoreDoesNotFallAsTheBeamWidens) {
  const auto feats = ValidFeatures(10);
  std::vector<double> prev(feats.size(), -1e300);
  for (int beam : {1, 2, 5, 10, 20}) {
    DecodeConfig cfg;
    cfg.beam = beam;
    BeamDecoder dec(*model_, nullptr, cfg);
    for (size_t i = 0; i < feats.size(); ++i) {
      const double s = dec.Decode(feats[i]).best().score;
      EXPECT_GE(s, prev[i] - 1e-9) << "beam " << beam << " utt " << i;
      prev[i] = s;
    }
  }
}

TEST_F(BeamDecoderTest, OutputLengthRespectsTheRatioCap) {
  DecodeConfig cfg;
  cfg.beam = 3;
  cfg.max_output_ratio = 0.1;
  BeamDecoder dec(*model_, nullptr, cfg);
  for (const auto& f : ValidFeatures(8)) {
    const DecodeResult r = dec.Decode(f);
    const int cap = std::max(1, static_cast<int>(r.encoder_frames * 0.1));
    EXPECT_LE(static_cast<int>(r.best().tokens.size()), cap);
  }
}

TEST_F(BeamDecoderTest, BatchedDecodingIsIdenticalToSequential) {
  const auto feats = ValidFeatures(20);
  DecodeConfig cfg;
  cfg.beam = 5;
  cfg.lm_weight = 0.3;
  BeamDecoder dec(*model_, lm_, cfg);
  std::vector<Hypothesis> seq;
  for (const auto& f : feats) seq.push_back(dec.Decode(f).best());
  for (int bs : {1, 2, 3, 8, 32}) {
    const auto batched = dec.DecodeBatch(feats, bs);
    ASSERT_EQ(batched.size(), feats.size());
    for (size_t i = 0; i < feats.size(); ++i) {
      EXPECT_EQ(batched[i].best().tokens, seq[i].tokens) << bs << " " << i;
      EXPECT_EQ(batched[i].best().score, seq[i].score) << bs << " " << i;
    }
  }
}

TEST_F(BeamDecoderTest, DecodesTheValidationSetMostlyCorrectly) {
  DecodeConfig cfg;
  cfg.beam = 5;
  BeamDecoder dec(*model_, nullptr, cfg);
  int exact = 0, total = 0;
  for (const auto& u : setup_->valid) {
    exact += dec.Decode(u.feats).best().tokens == u.labels ? 1 : 0;
    ++total;
  }
  EXPECT_GE(exact, total * 0.6) << exact << " / " << total;
}

TEST_F(BeamDecoderTest, InvalidInputsAreRejected) {
  BeamDecoder dec(*model_, nullptr, DecodeConfig{});
  FeatureMatrix empty;
  empty.frames.resize(0, setup_->opts.feat_dim);
  try {
    dec.Decode(empty);
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyInput);
  }
  DecodeConfig bad;
  bad.beam = 0;
  EXPECT_THROW(BeamDecoder(*model_, nullptr, bad), Error);
  EXPECT_THROW(dec.DecodeBatch(ValidFeatures(2), 0), Error);

  LmConfig lc = lm_->config();
  lc.vocab_hash ^= 1;
  NeuralLm<float> other(lc);
  try {
    BeamDecoder(*model_, &other, DecodeConfig{});
    FAIL() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kVocabMismatch);
  }
}

}  // namespace
}  // namespace imsk
