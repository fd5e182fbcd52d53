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

#include <algorithm>
#include <cmath>
#include <memory>

#include "imsk/ctc.h"
#include "imsk/error.h"

namespace imsk {
namespace {

struct Active {
  std::vector<int> tokens;
  double att = 0.0;
  double ctc = 0.0;
  double lm = 0.0;
  double score = 0.0;
  std::vector<Eigen::VectorXf> dec_h, dec_c;
  std::vector<Eigen::VectorXf> lm_h, lm_c;
  Eigen::VectorXf att_prev;
  CtcPrefixState ctc_state;
};

struct Candidate {
  int hyp;
  int token;
  double att, ctc, lm, score;
};

struct Utt {
  Mat<float> h, vh;
  int frames = 0;
  int max_len = 1;
  Eigen::MatrixXd ctc_log_probs;
  std::unique_ptr<CtcPrefixScorer> scorer;
  std::vector<Active> active;
  std::vector<Hypothesis> finished;
  bool done = false;
};

// Higher score first, then the lexicographically smaller sequence pa + ta
// versus pb + tb.
bool Better(double sa, const std::vector<int>& pa, int ta, double sb,
            const std::vector<int>& pb, int tb) {
  if (sa != sb) return sa > sb;
  const size_t na = pa.size() + 1, nb = pb.size() + 1;
  for (size_t i = 0; i < std::min(na, nb); ++i) {
    const int x = i < pa.size() ? pa[i] : ta;
    const int y = i < pb.size() ? pb[i] : tb;
    if (x != y) return x < y;
  }
  return na < nb;
}

bool HypBetter(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

double Combine(const DecodeConfig& cfg, double ctc, double att, double lm,
               bool has_lm) {
  double s = cfg.ctc_weight * ctc + (1.0 - cfg.ctc_weight) * att;
  if (has_lm) s += cfg.lm_weight * lm;
  return s;
}

Mat<float> Columns(const std::vector<const Eigen::VectorXf*>& cols) {
  Mat<float> m(cols.front()->size(), static_cast<Eigen::Index>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) m.col(j) = *cols[j];
  return m;
}

}  // namespace

BeamDecoder::BeamDecoder(const HybridModel<float>& model,
                         const NeuralLm<float>* lm, DecodeConfig cfg)
    : model_(model), lm_(lm), cfg_(cfg) {
  Require(cfg_.beam >= 1, Errc::kInvalidArgument, "beam must be >= 1");
  Require(cfg_.ctc_weight >= 0 && cfg_.ctc_weight <= 1, Errc::kInvalidArgument,
          "ctc weight must be in [0, 1]");
  Require(cfg_.lm_weight >= 0, Errc::kInvalidArgument,
          "lm weight must be >= 0");
  Require(cfg_.max_output_ratio > 0, Errc::kInvalidArgument,
          "max output ratio must be positive");
  if (lm_) {
    Require(lm_->config().vocab_size == model_.config().vocab_size &&
                lm_->config().vocab_hash == model_.config().vocab_hash,
            Errc::kVocabMismatch,
            "language model and acoustic model use different vocabularies");
  }
}

DecodeResult BeamDecoder::Decode(const FeatureMatrix& feats) const {
  return DecodeGroup(std::span<const FeatureMatrix>(&feats, 1)).front();
}

std::vector<DecodeResult> BeamDecoder::DecodeBatch(
    std::span<const FeatureMatrix> feats, int batch_size) const {
  Require(batch_size >= 1, Errc::kInvalidArgument, "batch size must be >= 1");
  std::vector<DecodeResult> out;
  out.reserve(feats.size());
  for (size_t i = 0; i < feats.size(); i += batch_size) {
    const size_t n =
        std::min(feats.size() - i, static_cast<size_t>(batch_size));
    auto part = DecodeGroup(feats.subspan(i, n));
    for (auto& r : part) out.push_back(std::move(r));
  }
  return out;
}

std::vector<DecodeResult> BeamDecoder::DecodeGroup(
    std::span<const FeatureMatrix> feats) const {
  const AsrConfig& mc = model_.config();
  const int vocab = mc.vocab_size;
  const int eos = mc.sos_eos;
  const bool use_ctc = cfg_.ctc_weight > 0;
  const bool use_lm = lm_ != nullptr;
  const int dec_layers = mc.dec_layers;
  const int lm_layers = use_lm ? lm_->config().layers : 0;

  std::vector<Utt> utts(feats.size());
  std::vector<Mat<float>> inputs;
  std::vector<const Mat<float>*> input_ptrs;
  inputs.reserve(feats.size());
  for (const FeatureMatrix& f : feats) {
    inputs.push_back(ToModelInput<float>(f));
    input_ptrs.push_back(&inputs.back());
  }
  Graph<float> eg(false);
  const auto encoded = model_.EncodeBatch(eg, input_ptrs);
  for (size_t i = 0; i < feats.size(); ++i) {
    Utt& u = utts[i];
    Graph<float>& g = eg;
    const auto& enc = encoded[i];
    u.h = g.Value(enc.h);
    u.vh = g.Value(enc.vh);
    u.frames = enc.frames;
    u.max_len = std::max(
        1, static_cast<int>(std::floor(u.frames * cfg_.max_output_ratio)));
    Active start;
    start.dec_h.assign(dec_layers, Eigen::VectorXf::Zero(mc.dec_units));
    start.dec_c = start.dec_h;
    if (use_lm) {
      start.lm_h.assign(lm_layers, Eigen::VectorXf::Zero(lm_->config().units));
      start.lm_c = start.lm_h;
    }
    start.att_prev = Eigen::VectorXf::Constant(u.frames, 1.0f / u.frames);
    if (use_ctc) {
      u.ctc_log_probs = g.Value(model_.CtcLogProbs(g, enc)).cast<double>();
      u.scorer = std::make_unique<CtcPrefixScorer>(u.ctc_log_probs, mc.blank);
      start.ctc_state = u.scorer->Initial();
    }
    u.active.push_back(std::move(start));
  }

  std::vector<int> labels;
  for (int c = 0; c < vocab; ++c) {
    if (c != mc.blank && c != eos) labels.push_back(c);
  }

  for (;;) {
    std::vector<int> live;
    for (size_t i = 0; i < utts.size(); ++i) {
      if (!utts[i].done) live.push_back(static_cast<int>(i));
    }
    if (live.empty()) break;

    Graph<float> g(false);
    std::vector<Var> contexts;
    std::vector<Var> weights;
    std::vector<int> prev;
    std::vector<const Eigen::VectorXf*> cols;
    for (int i : live) {
      Utt& u = utts[i];
      HybridModel<float>::Encoded enc{g.InputRef(u.h), g.InputRef(u.vh),
                                      u.frames};
      cols.clear();
      for (const Active& a : u.active) cols.push_back(&a.dec_h.back());
      Var q = g.Input(Columns(cols));
      cols.clear();
      for (const Active& a : u.active) cols.push_back(&a.att_prev);
      Var a_prev = g.Input(Columns(cols));
      auto att = model_.Attend(g, enc, q, a_prev);
      contexts.push_back(att.context);
      weights.push_back(att.weights);
      for (const Active& a : u.active) {
        prev.push_back(a.tokens.empty() ? eos : a.tokens.back());
      }
    }
    auto gather_states = [&](int layers, auto member_h, auto member_c) {
      std::vector<LstmState> s(layers);
      for (int l = 0; l < layers; ++l) {
        std::vector<const Eigen::VectorXf*> hs, cs;
        for (int i : live) {
          for (const Active& a : utts[i].active) {
            hs.push_back(&(a.*member_h)[l]);
            cs.push_back(&(a.*member_c)[l]);
          }
        }
        s[l] = {g.Input(Columns(hs)), g.Input(Columns(cs))};
      }
      return s;
    };
    std::vector<LstmState> dec =
        gather_states(dec_layers, &Active::dec_h, &Active::dec_c);
    Var att_lp = model_.DecoderStep(g, prev, g.ConcatCols(contexts), &dec);
    std::vector<LstmState> lm_state;
    Var lm_lp;
    if (use_lm) {
      lm_state = gather_states(lm_layers, &Active::lm_h, &Active::lm_c);
      lm_lp = lm_->Step(g, prev, &lm_state);
    }
    const Mat<float>& att_v = g.Value(att_lp);

    int col = 0;
    std::vector<CtcPrefixState> extended;
    for (size_t li = 0; li < live.size(); ++li) {
      Utt& u = utts[live[li]];
      const Mat<float>& w = g.Value(weights[li]);
      const int first_col = col;
      std::vector<Candidate> cands;
      std::vector<std::vector<CtcPrefixState>> ctc_next(u.active.size());
      for (size_t j = 0; j < u.active.size(); ++j, ++col) {
        const Active& a = u.active[j];
        const bool at_cap = static_cast<int>(a.tokens.size()) >= u.max_len;
        auto add = [&](int token, double ctc) {
          const double att = a.att + static_cast<double>(att_v(token, col));
          const double lm =
              use_lm ? a.lm + static_cast<double>(g.Value(lm_lp)(token, col))
                     : 0.0;
          cands.push_back({static_cast<int>(j), token, att, ctc, lm,
                           Combine(cfg_, ctc, att, lm, use_lm)});
        };
        add(eos, use_ctc ? u.scorer->Final(a.ctc_state) : 0.0);
        if (at_cap) continue;
        if (use_ctc) u.scorer->ExtendAll(a.ctc_state, labels, &ctc_next[j]);
        for (size_t k = 0; k < labels.size(); ++k) {
          add(labels[k], use_ctc ? ctc_next[j][k].log_psi : 0.0);
        }
      }
      const size_t keep =
          std::min(cands.size(), static_cast<size_t>(cfg_.beam));
      std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                        [&](const Candidate& x, const Candidate& y) {
                          return Better(x.score, u.active[x.hyp].tokens,
                                        x.token, y.score,
                                        u.active[y.hyp].tokens, y.token);
                        });
      std::vector<Active> next;
      for (size_t k = 0; k < keep; ++k) {
        const Candidate& c = cands[k];
        const Active& a = u.active[c.hyp];
        if (c.token == eos) {
          u.finished.push_back({a.tokens, c.att, c.ctc, c.lm, c.score});
          continue;
        }
        Active n;
        n.tokens = a.tokens;
        n.tokens.push_back(c.token);
        n.att = c.att;
        n.ctc = c.ctc;
        n.lm = c.lm;
        n.score = c.score;
        const int gc = first_col + c.hyp;
        n.dec_h.resize(dec_layers);
        n.dec_c.resize(dec_layers);
        for (int l = 0; l < dec_layers; ++l) {
          n.dec_h[l] = g.Value(dec[l].h).col(gc);
          n.dec_c[l] = g.Value(dec[l].c).col(gc);
        }
        if (use_lm) {
          n.lm_h.resize(lm_layers);
          n.lm_c.resize(lm_layers);
          for (int l = 0; l < lm_layers; ++l) {
            n.lm_h[l] = g.Value(lm_state[l].h).col(gc);
            n.lm_c[l] = g.Value(lm_state[l].c).col(gc);
          }
        }
        n.att_prev = w.col(c.hyp);
        if (use_ctc) {
          const size_t k_label =
              std::lower_bound(labels.begin(), labels.end(), c.token) -
              labels.begin();
          n.ctc_state = ctc_next[c.hyp][k_label];
        }
        next.push_back(std::move(n));
      }
      u.active = std::move(next);
      if (u.active.empty()) {
        u.done = true;
      } else if (!u.finished.empty()) {
        // Scores never increase as a hypothesis grows, so no active
        // hypothesis can overtake a finished one that already beats it.
        double best_finished = u.finished.front().score;
        for (const auto& f : u.finished)
          best_finished = std::max(best_finished, f.score);
        double best_active = u.active.front().score;
        for (const auto& a : u.active)
          best_active = std::max(best_active, a.score);
        if (best_finished >= best_active) u.done = true;
      }
    }
  }

  std::vector<DecodeResult> out(utts.size());
  for (size_t i = 0; i < utts.size(); ++i) {
    auto& fin = utts[i].finished;
    std::sort(fin.begin(), fin.end(), HypBetter);
    const size_t n =
        std::min(fin.size(), static_cast<size_t>(std::max(1, cfg_.nbest)));
    out[i].nbest.assign(fin.begin(), fin.begin() + n);
    out[i].encoder_frames = utts[i].frames;
  }
  return out;
}

Hypothesis RescoreHypothesis(const HybridModel<float>& model,
                             const NeuralLm<float>* lm, const DecodeConfig& cfg,
                             const FeatureMatrix& feats,
                             std::span<const int> tokens) {
  Hypothesis h;
  h.tokens.assign(tokens.begin(), tokens.end());
  const Mat<float> x = ToModelInput<float>(feats);
  for (double v : model.TeacherForcedLogProbs(x, tokens)) h.att += v;
  if (cfg.ctc_weight > 0) {
    Graph<float> g(false);
    auto enc = model.Encode(g, x);
    const Eigen::MatrixXd lp =
        g.Value(model.CtcLogProbs(g, enc)).cast<double>();
    if (static_cast<int>(lp.cols()) >= CtcMinFrames(tokens)) {
      h.ctc = -CtcLoss(lp, tokens, model.config().blank).loss;
    } else {
      h.ctc = kLogZero;
    }
  }
  if (lm) h.lm = lm->SentenceLogProb(tokens);
  h.score = Combine(cfg, h.ctc, h.att, h.lm, lm != nullptr);
  return h;
}

}  // namespace imsk
