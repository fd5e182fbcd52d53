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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "imsk/asr_model.h"
#include "imsk/beam_decoder.h"
#include "imsk/ctc.h"
#include "imsk/gradient_check.h"
#include "imsk/layers.h"
#include "imsk/neural_lm.h"
#include "imsk/sad.h"
#include "imsk/scoring.h"
#include "imsk/subword_tokenizer.h"
#include "imsk/synthetic.h"
#include "support/cli_workspace.h"
#include "support/oracles.h"
#include "support/test_support.h"

namespace imsk {
namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using MatD = Mat<double>;

// Outcome of one criterion: pass flag plus a one-line summary of what was
// measured.
struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

// ---- 1: CTC against path enumeration
// ------------------------------------------

Outcome CtcOracle() {
  double worst = 0.0;
  int instances = 0;
  for (int labels = 1; labels <= 3; ++labels) {
    const int vocab = labels + 1;
    for (int frames = 1; frames <= 6; ++frames) {
      for (int draw = 0; draw < 3; ++draw) {
        const int blank = draw % vocab;
        const MatrixXd lp = LogSoftmaxColumns(testing::RandomMatrix(
            vocab, frames, 1000 * labels + 10 * frames + draw, 2.0));
        for (const auto& seq : testing::AllSequences(labels, 3)) {
          std::vector<int> y;
          for (int l : seq) y.push_back(l >= blank ? l + 1 : l);
          if (CtcMinFrames(y) > frames) continue;
          const double loss = CtcLoss(lp, y, blank).loss;
          const double ref = -testing::BruteForceCtcLogProb(lp, y, blank);
          worst = std::max(
              worst, std::abs(loss - ref) / std::max(std::abs(ref), 1e-300));
          ++instances;
        }
      }
    }
  }
  return {worst <= 1e-10,
          Fmt("%d instances, max relative error %.2e (limit 1e-10)", instances,
              worst)};
}

// ---- 2: gradient suite ------------------------------------------------------

GradCheckReport CheckLoss(const ParamList<double>& params,
                          const std::function<Var(Graph<double>&)>& loss) {
  return CheckGradients(params, [&](bool backward) {
    Graph<double> g(backward);
    const Var l = loss(g);
    if (backward) g.Backward(l);
    return g.Scalar(l);
  });
}

Outcome GradientSuite() {
  std::vector<std::pair<std::string, GradCheckReport>> reports;
  const MatD r1 = testing::RandomMatrix(4, 5, 1),
             r2 = testing::RandomMatrix(5, 3, 2);

  {
    Affine<double> layer("affine", 3, 4);
    Parameter<double> x("x", 3, 5);
    x.value = testing::RandomMatrix(3, 5, 3);
    ParamList<double> p;
    layer.Collect(&p);
    InitUniform(p, 0.5, 4);
    p.push_back(&x);
    reports.emplace_back(
        "affine", CheckLoss(p, [&](Graph<double>& g) {
          return g.Sum(g.Mul(layer.Apply(g, g.Param(x)), g.Input(r1)));
        }));
  }
  {
    Lstm<double> cell("lstm", 3, 5);
    Parameter<double> x("x", 3, 3);
    x.value = testing::RandomMatrix(3, 3, 5);
    ParamList<double> p;
    cell.Collect(&p);
    InitUniform(p, 0.5, 6);
    p.push_back(&x);
    reports.emplace_back(
        "lstm cell", CheckLoss(p, [&](Graph<double>& g) {
          return g.Sum(g.Mul(cell.Run(g, g.Param(x)), g.Input(r2)));
        }));
  }
  {
    VggBlock<double> block("vgg", 2, 3);
    Parameter<double> x("x", 2, 6 * 3);
    x.value = testing::RandomMatrix(2, 18, 7);
    ParamList<double> p;
    block.Collect(&p);
    InitUniform(p, 0.5, 8);
    p.push_back(&x);
    const MatD w = testing::RandomMatrix(3, 3 * 2, 9);
    reports.emplace_back(
        "conv block", CheckLoss(p, [&](Graph<double>& g) {
          int h = 6, wd = 3;
          return g.Sum(g.Mul(block.Apply(g, g.Param(x), &h, &wd), g.Input(w)));
        }));
  }

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
  HybridModel<double> model(c);
  const MatD feats = testing::RandomMatrix(3, 14, 10);
  const std::vector<int> labels = {4, 6, 4};
  {
    Parameter<double> q("q", 4, 1), a("a", 4, 1);
    q.value = testing::RandomMatrix(4, 1, 11);
    a.value << 0.1, 0.4, 0.3, 0.2;
    ParamList<double> p = model.params();
    p.push_back(&q);
    p.push_back(&a);
    const MatD rw = testing::RandomMatrix(4, 1, 12),
               rc = testing::RandomMatrix(6, 1, 13);
    reports.emplace_back("attention", CheckLoss(p, [&](Graph<double>& g) {
                           const auto enc = model.Encode(g, feats);
                           const auto att =
                               model.Attend(g, enc, g.Param(q), g.Param(a));
                           return g.Add(g.Sum(g.Mul(att.weights, g.Input(rw))),
                                        g.Sum(g.Mul(att.context, g.Input(rc))));
                         }));
  }
  {
    Parameter<double> logits("logits", 5, 8);
    logits.value = testing::RandomMatrix(5, 8, 14, 1.5);
    const std::vector<int> y = {1, 3, 3};
    reports.emplace_back("ctc", CheckGradients({&logits}, [&](bool backward) {
                           const auto r =
                               CtcLoss(LogSoftmaxColumns(logits.value), y, 0);
                           if (backward) logits.grad += r.grad_logits;
                           return r.loss;
                         }));
  }
  reports.emplace_back("hybrid loss",
                       CheckLoss(model.params(), [&](Graph<double>& g) {
                         return model.ComputeLoss(g, feats, labels, 0.5).total;
                       }));

  bool pass = true;
  std::string detail;
  for (const auto& [name, r] : reports) {
    pass = pass && r.Passed(1e-5) && r.entries_checked > 0;
    detail += Fmt("%s%s %.1e", detail.empty() ? "" : ", ", name.c_str(),
                  r.max_rel_error);
  }
  return {pass, "max relative error: " + detail + " (limit 1e-5)"};
}

// ---- 3: tokenizer
// -------------------------------------------------------------

Outcome TokenizerOracle() {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<std::string> multi;
  for (const auto& seq : testing::AllSequences(2, 3)) {
    if (seq.size() < 2) continue;
    std::string s;
    for (int c : seq) s += c == 0 ? 'a' : 'b';
    multi.push_back(s);
  }
  std::vector<std::string> strings;
  for (const auto& seq : testing::AllSequences(2, 10)) {
    if (seq.empty()) continue;
    std::string s;
    for (int c : seq) s += c == 0 ? 'a' : 'b';
    strings.push_back(s);
  }
  int mismatches = 0, checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    std::shuffle(multi.begin(), multi.end(), rng);
    testing::PieceProbs probs = {{"a", u(rng)}, {"b", u(rng)}};
    for (int i = 0; i < 6; ++i) probs[multi[i]] = u(rng);
    double z = 0.0;
    for (const auto& [p, q] : probs) z += q;
    for (auto& [p, q] : probs) q /= z;
    const SubwordVocab v =
        SubwordVocab::FromPieces({probs.begin(), probs.end()});
    for (const auto& s : strings) {
      const double best = testing::BestSegmentationLogProb(s, probs);
      if (std::abs(v.SegmentWord(s).log_prob - best) > 1e-9) ++mismatches;
      ++checked;
    }
  }

  const std::vector<std::string> corpus = {
      "the cat sat on the mat", "a cat and a hat", "that hat is the cat's",
      "mat cat hat sat", "on and on and on"};
  UnigramOptions o;
  o.target_size = 12;
  UnigramTrainer t(corpus, o);
  int em_steps = 0, em_drops = 0;
  for (;;) {
    for (int i = 0; i < o.em_iters_per_round; ++i) {
      const double before = t.LogLikelihood();
      const double after = t.EmStep();
      if (after < before - 1e-9 * std::abs(before)) ++em_drops;
      ++em_steps;
    }
    if (t.Done()) break;
    t.PruneStep();
  }

  std::string oracle_best;
  double best_l = -1.0;
  for (const std::string extra : {"ab", "ba", "aba", "bab"}) {
    const double l =
        testing::MaxLikelihoodOfPieceSet("abab", {"a", "b", extra});
    if (l > best_l + 1e-9) best_l = l, oracle_best = extra;
  }
  UnigramOptions ab;
  ab.target_size = 3;
  ab.seed_max_len = 3;
  const SubwordVocab learned =
      TrainUnigram(std::vector<std::string>(50, "abab"), ab);
  const bool has_ab = learned.Find("ab").has_value();

  return {mismatches == 0 && em_drops == 0 && oracle_best == "ab" && has_ab,
          Fmt("segmentation %d/%d strings match, EM decreases %d/%d steps, "
              "oracle best piece '%s', trained vocabulary %s 'ab'",
              checked - mismatches, checked, em_drops, em_steps,
              oracle_best.c_str(), has_ab ? "contains" : "lacks")};
}

// ---- shared toy model for 4, 5 and 6
// ----------------------------------------------

struct Toy {
  testing::ToySetup setup;
  std::unique_ptr<HybridModel<float>> model;
  std::unique_ptr<NeuralLm<float>> lm;
  AsrTrainResult train;
  double train_cpu_seconds = 0.0;
};

Toy& ToyModel() {
  static Toy* toy = [] {
    auto* t =
        new Toy{testing::MakeToySetup(240, 16), nullptr, nullptr, {}, 0.0};
    const std::clock_t start = std::clock();
    t->model = testing::TrainToyModel(t->setup, 20, &t->train);
    t->train_cpu_seconds =
        static_cast<double>(std::clock() - start) / CLOCKS_PER_SEC;
    LmConfig lc;
    lc.vocab_size = t->setup.vocab.Size();
    lc.vocab_hash = t->setup.vocab.Hash();
    lc.layers = 1;
    lc.units = 32;
    lc.embed_dim = 16;
    t->lm = std::make_unique<NeuralLm<float>>(lc);
    std::vector<std::vector<int>> corpus;
    for (const auto& u : t->setup.train) corpus.push_back(u.labels);
    LmTrainOptions lo;
    lo.epochs = 3;
    lo.lr = 0.5;
    TrainLm(*t->lm, corpus, lo);
    return t;
  }();
  return *toy;
}

std::vector<FeatureMatrix> FirstFeatures(const std::vector<Utterance>& data,
                                         size_t n) {
  std::vector<FeatureMatrix> out;
  for (size_t i = 0; i < n && i < data.size(); ++i)
    out.push_back(data[i].feats);
  return out;
}

// ---- 4: toy end to end
// ----------------------------------------------------------

Outcome ToyOverfit() {
  Toy& toy = ToyModel();
  const auto& s = toy.setup;
  std::map<std::string, std::string> text;
  for (const auto& u : s.corpus) text[u.id] = u.text;
  DecodeConfig cfg;
  cfg.beam = 5;
  BeamDecoder dec(*toy.model, nullptr, cfg);
  std::vector<FeatureMatrix> feats;
  for (const auto& u : s.train) feats.push_back(u.feats);
  const auto results = dec.DecodeBatch(feats, 8);
  std::vector<std::pair<std::string, std::string>> pairs;
  for (size_t i = 0; i < s.train.size(); ++i) {
    pairs.emplace_back(text.at(s.train[i].id),
                       s.vocab.Decode(results[i].best().tokens));
  }
  const WerResult wer = CorpusWer(pairs);
  const bool pass = s.corpus.size() >= 200 && s.vocab.NumPieces() <= 20 &&
                    toy.train.best_accuracy >= 0.95 &&
                    toy.train_cpu_seconds <= 1800 && wer.wer <= 5.0;
  return {pass,
          Fmt("%zu utterances, %d subwords, lambda 0.5, valid accuracy %.2f%% "
              "after %.0f CPU s, beam-5 training-set WER %.2f%%",
              s.corpus.size(), s.vocab.NumPieces(),
              100 * toy.train.best_accuracy, toy.train_cpu_seconds, wer.wer)};
}

// ---- 5: joint decoding contracts
// -----------------------------------------------

Outcome DecodingContracts() {
  Toy& toy = ToyModel();
  const auto feats = FirstFeatures(toy.setup.valid, 20);

  DecodeConfig fused;
  fused.beam = 5;
  fused.lm_weight = 0.5;
  fused.nbest = 5;
  BeamDecoder with_lm(*toy.model, toy.lm.get(), fused);
  double worst_add = 0.0;
  for (const auto& f : feats) {
    for (const Hypothesis& h : with_lm.Decode(f).nbest) {
      const Hypothesis r =
          RescoreHypothesis(*toy.model, toy.lm.get(), fused, f, h.tokens);
      const double recomputed = 0.5 * r.ctc + 0.5 * r.att + 0.5 * r.lm;
      worst_add = std::max(worst_add, std::abs(recomputed - h.score));
    }
  }

  int drops = 0;
  std::vector<double> prev(feats.size(), -INFINITY);
  for (int beam : {1, 2, 5, 10, 20}) {
    DecodeConfig cfg;
    cfg.beam = beam;
    BeamDecoder dec(*toy.model, nullptr, cfg);
    for (size_t i = 0; i < feats.size(); ++i) {
      const double s = dec.Decode(feats[i]).best().score;
      if (s < prev[i]) ++drops;
      prev[i] = s;
    }
  }

  DecodeConfig zero;
  zero.beam = 5;
  zero.lm_weight = 0.0;
  BeamDecoder a(*toy.model, toy.lm.get(), zero), b(*toy.model, nullptr, zero);
  int differ = 0;
  for (const auto& f : feats)
    differ += a.Decode(f).best().tokens != b.Decode(f).best().tokens;

  return {worst_add <= 1e-5 && drops == 0 && differ == 0,
          Fmt("(a) max additivity gap %.1e (limit 1e-5), (b) %d score drops "
              "over beams "
              "1,2,5,10,20, (c) %d token differences with lm weight 0",
              worst_add, drops, differ)};
}

// ---- 6: batching
// ----------------------------------------------------------------

// Wall time of decoding `feats` at a batch size, best of `reps` runs.
double DecodeSeconds(const BeamDecoder& dec,
                     const std::vector<FeatureMatrix>& feats, int batch,
                     int reps) {
  double best = INFINITY;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    dec.DecodeBatch(feats, batch);
    best = std::min(best, Seconds(start));
  }
  return best;
}

Outcome Batching() {
  Toy& toy = ToyModel();
  const auto feats = FirstFeatures(toy.setup.valid, 20);
  DecodeConfig cfg;
  cfg.beam = 5;
  BeamDecoder dec(*toy.model, nullptr, cfg);
  std::vector<std::vector<int>> seq;
  for (const auto& f : feats) seq.push_back(dec.Decode(f).best().tokens);
  int differ = 0;
  for (int bs : {2, 8}) {
    const auto out = dec.DecodeBatch(feats, bs);
    for (size_t i = 0; i < feats.size(); ++i)
      differ += out[i].best().tokens != seq[i];
  }

  double audio = 0.0;
  for (const auto& f : feats) audio += f.NumFrames() * f.frame_shift;
  // Speed is compared with a 512-unit encoder, the size at which weights no
  // longer fit in cache and batching pays off on one core.
  AsrConfig wide = toy.model->config();
  wide.blstm_units = 512;
  wide.attn_dim = 128;
  HybridModel<float> big(wide);
  DecodeConfig fast = cfg;
  fast.max_output_ratio = 0.5;
  BeamDecoder big_dec(big, nullptr, fast);
  const double t1 = DecodeSeconds(big_dec, feats, 1, 3);
  const double t8 = DecodeSeconds(big_dec, feats, 8, 3);
  const double rt1 = RtFactor(t1, audio), rt8 = RtFactor(t8, audio);
  const double toy_rt1 = RtFactor(DecodeSeconds(dec, feats, 1, 3), audio);
  const double toy_rt8 = RtFactor(DecodeSeconds(dec, feats, 8, 3), audio);
  return {
      differ == 0 && rt8 < rt1,
      Fmt("%d token differences for batch 2 and 8 on %zu utterances; RT factor "
          "batch 1 %.4f vs batch 8 %.4f at 512 units (toy width: %.4f vs %.4f)",
          differ, feats.size(), rt1, rt8, toy_rt1, toy_rt8)};
}

// ---- 7: activity detection
// -------------------------------------------------------

Outcome Sad() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  int viterbi_bad = 0, viterbi_total = 0;
  for (int frames = 1; frames <= 12; ++frames) {
    for (double p : {0.5, 0.8, 0.99}) {
      for (int rep = 0; rep < 5; ++rep) {
        MatrixXd lik(frames, 2);
        for (int t = 0; t < frames; ++t) lik(t, 0) = u(rng), lik(t, 1) = u(rng);
        if (rep == 0) lik.setOnes();  // all paths with equal switches tie
        viterbi_bad +=
            ViterbiPath(lik, p) != testing::BruteForceViterbi(lik, p);
        ++viterbi_total;
      }
    }
  }

  MatrixXd post(1, 3);
  post << 0.6, 0.3, 0.1;
  const MatrixXd lik = ToPseudoLikelihoods(post, SadTransform{});
  const bool example =
      std::abs(lik(0, 0) - 1.8) < 1e-12 && std::abs(lik(0, 1) - 1.2) < 1e-12;

  int post_bad = 0;
  std::uniform_real_distribution<double> len(0.1, 45.0), gap(0.01, 6.0);
  for (int rep = 0; rep < 300; ++rep) {
    SegmentList in;
    double t = gap(rng);
    for (int i = 0; i < 1 + rep % 8; ++i) {
      const double s = std::round(t * 100) / 100,
                   e = std::round((t + len(rng)) * 100) / 100;
      in.push_back({s, e});
      t = e + gap(rng);
    }
    std::vector<double> speech(static_cast<size_t>(t * 100) + 1);
    for (double& v : speech) v = u(rng);
    const SegmentList out = Postprocess(in, speech, 0.01);
    for (const auto& s : out) {
      if (s.end - s.start > 30.0 + 1e-9) ++post_bad;
      for (size_t i = 1; i < in.size(); ++i) {
        const bool bridges = s.start < in[i - 1].end && s.end > in[i].start;
        if (bridges && s.end - s.start > 10.0 + 1e-9) ++post_bad;
      }
    }
    if (Postprocess(out, speech, 0.01) != out) ++post_bad;
  }

  auto data = [](int n, uint64_t seed) {
    SadCorpusOptions o;
    o.num_recordings = n;
    o.seed = seed;
    std::pair<std::vector<FeatureMatrix>, std::vector<std::vector<int>>> d;
    for (const auto& r : MakeSadCorpus(o)) {
      d.first.push_back(SadFeatures(r.wave));
      d.second.push_back(r.frame_labels);
    }
    return d;
  };
  const auto train = data(24, 3), test = data(8, 77);
  SadModel model(SadConfig{});
  TrainSad(model, train.first, train.second, SadTrainOptions{});
  const double acc = SadFrameAccuracy(model, test.first, test.second);

  return {
      viterbi_bad == 0 && example && post_bad == 0 && acc >= 0.9,
      Fmt("viterbi %d/%d match exhaustive search, example lik (%.2f, %.2f), "
          "%d post-processing violations in 300 cases, held-out frame accuracy "
          "%.2f%%",
          viterbi_total - viterbi_bad, viterbi_total, lik(0, 0), lik(0, 1),
          post_bad, 100 * acc)};
}

// ---- 8: scoring
// -------------------------------------------------------------------

Outcome Scoring() {
  std::vector<std::vector<std::string>> all;
  for (const auto& seq : testing::AllSequences(2, 6)) {
    std::vector<std::string> w;
    for (int s : seq) w.push_back(s == 0 ? "a" : "b");
    all.push_back(w);
  }
  int bad = 0;
  long pairs = 0;
  for (const auto& r : all) {
    for (const auto& h : all) {
      bad += Align(r, h).Errors() != testing::Levenshtein(r, h);
      ++pairs;
    }
  }
  const std::vector<std::pair<std::string, std::string>> one = {
      {"a b c", "a x c"}};
  const std::vector<std::pair<std::string, std::string>> two = {
      {"a b c", "a b c"}, {"d e f", "d e"}};
  const double w1 = CorpusWer(one).wer, w2 = CorpusWer(two).wer;
  return {bad == 0 && std::abs(w1 - 100.0 / 3) < 1e-9 &&
              std::abs(w2 - 100.0 / 6) < 1e-9,
          Fmt("%ld/%ld pairs match Levenshtein, wer(a b c, a x c) = %.2f%%, "
              "pooled 2-utterance example %.2f%%",
              pairs - bad, pairs, w1, w2)};
}

// ---- 9: determinism
// ------------------------------------------------------------------

Outcome Determinism() {
  testing::TempDir dir("acceptance");
  testing::CliWorkspace ws{dir.path(), IMSK_CLI_PATH, IMSK_TOYDATA_PATH};
  ::setenv("IMSK_SEED", "1234", 1);
  std::string error;
  if (!testing::PrepareCliWorkspace(ws, &error))
    return {false, "setup failed: " + error};
  for (const char* out : {"run1", "run2"}) {
    if (ws.Run("transcribe --config pipeline.ini --manifest "
               "data/recordings.tsv --out-dir " +
               std::string(out)) != 0) {
      return {false, "transcribe failed: " + ws.Output()};
    }
  }
  int files = 0, same = 0;
  size_t bytes = 0;
  for (const auto& e : fs::directory_iterator(ws / "run1")) {
    const std::string a = testing::ReadFile(e.path());
    const fs::path other = ws / "run2" / e.path().filename();
    same += fs::exists(other) && testing::ReadFile(other) == a && !a.empty();
    bytes += a.size();
    ++files;
  }
  return {
      files > 0 && same == files,
      Fmt("%d/%d transcript files byte-identical across two runs (%zu bytes)",
          same, files, bytes)};
}

}  // namespace
}  // namespace imsk

int main() {
  using imsk::Outcome;
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"CTC oracle equivalence", imsk::CtcOracle},
      {"gradient suite", imsk::GradientSuite},
      {"tokenizer oracle", imsk::TokenizerOracle},
      {"toy end-to-end overfit", imsk::ToyOverfit},
      {"joint-decoding contracts", imsk::DecodingContracts},
      {"batching equality", imsk::Batching},
      {"speech activity detection", imsk::Sad},
      {"scoring", imsk::Scoring},
      {"determinism", imsk::Determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, o.detail.c_str(), imsk::Seconds(start));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
