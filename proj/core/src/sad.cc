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

#include "imsk/sad.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "imsk/checkpoint.h"
#include "imsk/error.h"
#include "imsk/optim.h"

namespace imsk {

void SadConfig::Validate() const {
  Require(input_dim > 0 && hidden > 0, Errc::kConfig,
          "sad config: input_dim and hidden must be positive");
  Require(!splice1.empty() && !splice2.empty(), Errc::kConfig,
          "sad config: splice offsets must not be empty");
  Require(stats_left >= 0 && stats_right >= 0, Errc::kConfig,
          "sad config: negative pooling context");
  double sum = 0.0;
  for (double p : priors) {
    Require(p > 0.0, Errc::kConfig, "sad config: priors must be positive");
    sum += p;
  }
  Require(std::abs(sum - 1.0) < 1e-6, Errc::kConfig,
          "sad config: priors must sum to 1");
}

std::string SadConfig::ToJson() const {
  nlohmann::json j = {{"kind", "sad"},
                      {"input_dim", input_dim},
                      {"hidden", hidden},
                      {"splice1", splice1},
                      {"splice2", splice2},
                      {"stats_left", stats_left},
                      {"stats_right", stats_right},
                      {"init_scale", init_scale},
                      {"seed", seed},
                      {"priors", priors}};
  return j.dump();
}

SadConfig SadConfig::FromJson(const std::string& text) {
  SadConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    Require(j.value("kind", "") == "sad", Errc::kFormat,
            "checkpoint does not hold an activity detector");
    c.input_dim = j.at("input_dim");
    c.hidden = j.at("hidden");
    c.splice1 = j.at("splice1").get<std::vector<int>>();
    c.splice2 = j.at("splice2").get<std::vector<int>>();
    c.stats_left = j.at("stats_left");
    c.stats_right = j.at("stats_right");
    c.init_scale = j.at("init_scale");
    c.seed = j.at("seed");
    c.priors = j.at("priors").get<std::array<double, kSadClasses>>();
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kFormat, std::string("bad sad config: ") + e.what());
  }
  c.Validate();
  return c;
}

std::vector<int> SpliceIndex(int dim, int frames,
                             std::span<const int> offsets) {
  const int n = static_cast<int>(offsets.size());
  std::vector<int> index(static_cast<size_t>(dim) * n * frames);
  size_t i = 0;
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < n; ++k) {
      const int src = std::clamp(t + offsets[k], 0, frames - 1);
      for (int f = 0; f < dim; ++f) index[i++] = src * dim + f;
    }
  }
  return index;
}

template <typename T>
SadNet<T>::SadNet(const SadConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  const int h = cfg_.hidden;
  l1_ = Affine<T>("sad.l1",
                  cfg_.input_dim * static_cast<int>(cfg_.splice1.size()), h);
  l2_ = Affine<T>("sad.l2", h * static_cast<int>(cfg_.splice2.size()), h);
  l3_ = Affine<T>("sad.l3", 3 * h, h);
  out_ = Affine<T>("sad.out", h, kSadClasses);
  l1_.Collect(&params_);
  l2_.Collect(&params_);
  l3_.Collect(&params_);
  out_.Collect(&params_);
  InitUniform(params_, cfg_.init_scale, cfg_.seed);
}

template <typename T>
Var SadNet<T>::LogPosteriors(Graph<T>& g, const Mat<T>& feats) const {
  Require(feats.rows() == cfg_.input_dim, Errc::kDimMismatch,
          "sad features have dim " + std::to_string(feats.rows()) +
              ", model expects " + std::to_string(cfg_.input_dim));
  Require(feats.cols() > 0, Errc::kEmptyInput, "empty feature matrix");
  const int frames = static_cast<int>(feats.cols());
  const int h = cfg_.hidden;
  Var x = g.InputRef(feats);
  x = g.Gather(x, SpliceIndex(cfg_.input_dim, frames, cfg_.splice1),
               cfg_.input_dim * static_cast<int>(cfg_.splice1.size()), frames);
  x = g.Relu(l1_.Apply(g, x));
  x = g.Gather(x, SpliceIndex(h, frames, cfg_.splice2),
               h * static_cast<int>(cfg_.splice2.size()), frames);
  x = g.Relu(l2_.Apply(g, x));
  const Var parts[] = {x, g.StatsPool(x, cfg_.stats_left, cfg_.stats_right)};
  x = g.Relu(l3_.Apply(g, g.ConcatRows(parts)));
  return g.LogSoftmax(out_.Apply(g, x));
}

template <typename T>
Var SadNet<T>::Loss(Graph<T>& g, const Mat<T>& feats,
                    std::span<const int> labels) const {
  Require(static_cast<Eigen::Index>(labels.size()) == feats.cols(),
          Errc::kDimMismatch, "one label per frame required");
  for (int l : labels) {
    Require(l >= 0 && l < kSadClasses, Errc::kOutOfRange,
            "sad label " + std::to_string(l) + " outside {0, 1, 2}");
  }
  Var lp = LogPosteriors(g, feats);
  return g.Scale(g.Sum(g.Pick(lp, labels)),
                 T(-1) / static_cast<T>(labels.size()));
}

namespace {

template <typename T>
Mat<T> FramesByColumn(const FeatureMatrix& f) {
  return f.frames.transpose().cast<T>();
}

}  // namespace

Eigen::MatrixXd SadPosteriors(const SadModel& model, const FeatureMatrix& f) {
  Graph<float> g(false);
  const Mat<float> x = FramesByColumn<float>(f);
  const Mat<float>& lp = g.Value(model.LogPosteriors(g, x));
  Eigen::MatrixXd post = lp.cast<double>().array().exp().transpose();
  // Renormalize in double so rows sum to one well inside 1e-6.
  for (Eigen::Index t = 0; t < post.rows(); ++t)
    post.row(t) /= post.row(t).sum();
  return post;
}

FeatureMatrix SadFeatures(const Waveform& wave, int dim) {
  MfccOptions o;
  o.num_mels = dim;
  o.num_ceps = dim;
  return ExtractMfcc(wave, o);
}

SadTransform SadTransform::FromModel(const SadModel& model) {
  SadTransform t;
  for (int c = 0; c < kSadClasses; ++c) t.priors(c) = model.config().priors[c];
  return t;
}

void SadTransform::Validate() const {
  for (int c = 0; c < kSadClasses; ++c) {
    Require(priors(c) > 0.0, Errc::kInvalidArgument,
            "class prior " + std::to_string(c) + " is not positive");
  }
  Require(std::abs(priors.sum() - 1.0) < 1e-6, Errc::kInvalidArgument,
          "class priors must sum to 1");
  for (int c = 0; c < kSadClasses; ++c) {
    Require(proportions.col(c).minCoeff() >= 0.0 &&
                std::abs(proportions.col(c).sum() - 1.0) < 1e-9,
            Errc::kInvalidArgument,
            "proportions of each class must be non-negative and sum to 1");
  }
}

Eigen::MatrixXd ToPseudoLikelihoods(const Eigen::MatrixXd& post,
                                    const SadTransform& transform) {
  transform.Validate();
  Require(post.cols() == kSadClasses, Errc::kDimMismatch,
          "posteriors must have 3 columns");
  const Eigen::Vector3d inv = transform.priors.cwiseInverse();
  return post * inv.asDiagonal() * transform.proportions.transpose();
}

std::vector<int> ViterbiPath(const Eigen::MatrixXd& lik, double p_stay) {
  Require(lik.rows() > 0, Errc::kEmptyInput, "viterbi over zero frames");
  Require(lik.cols() == 2, Errc::kDimMismatch,
          "viterbi needs two likelihood columns");
  Require(p_stay > 0.0 && p_stay < 1.0, Errc::kInvalidArgument,
          "p_stay must lie in (0, 1)");
  const Eigen::Index n = lik.rows();
  const double log_stay = std::log(p_stay);
  const double log_switch = std::log(1.0 - p_stay);
  // Score of a path: log(1/2) + sum_t log lik + transition terms, summed
  // left to right.
  Eigen::MatrixXd delta(n, 2);
  std::vector<std::array<int, 2>> from(n);
  for (int s = 0; s < 2; ++s) delta(0, s) = std::log(0.5) + std::log(lik(0, s));
  for (Eigen::Index t = 1; t < n; ++t) {
    for (int s = 0; s < 2; ++s) {
      const double stay = delta(t - 1, s) + log_stay;
      const double sw = delta(t - 1, 1 - s) + log_switch;
      // Ties keep the state, which moves any switch earlier in time.
      from[t][s] = sw > stay ? 1 - s : s;
      delta(t, s) = std::max(stay, sw) + std::log(lik(t, s));
    }
  }
  std::vector<int> path(n);
  path[n - 1] = delta(n - 1, kSpeech) > delta(n - 1, kSilence) ? 1 : 0;
  for (Eigen::Index t = n - 1; t > 0; --t) path[t - 1] = from[t][path[t]];
  return path;
}

SegmentList PathToSegments(std::span<const int> path, double frame_shift) {
  SegmentList out;
  const size_t n = path.size();
  for (size_t t = 0; t < n;) {
    if (path[t] != 1) {
      ++t;
      continue;
    }
    size_t e = t;
    while (e < n && path[e] == 1) ++e;
    out.push_back({t * frame_shift, e * frame_shift});
    t = e;
  }
  return out;
}

bool IsValidSegmentList(std::span<const Segment> segs) {
  for (size_t i = 0; i < segs.size(); ++i) {
    if (!(segs[i].start >= 0.0 && segs[i].start < segs[i].end)) return false;
    if (i > 0 && segs[i].start < segs[i - 1].end) return false;
  }
  return true;
}

namespace {

SegmentList MergePass(const SegmentList& segs, double merge_max) {
  SegmentList out;
  for (const Segment& s : segs) {
    if (!out.empty() && s.end - out.back().start <= merge_max) {
      out.back().end = s.end;
    } else {
      out.push_back(s);
    }
  }
  return out;
}

void SplitInto(const Segment& s, std::span<const double> speech_lik,
               double frame_shift, double max_speech, SegmentList* out) {
  const double len = s.end - s.start;
  if (len <= max_speech) {
    out->push_back(s);
    return;
  }
  const double lo = s.start + 0.25 * len;
  const double hi = s.end - 0.25 * len;
  double cut = s.start + 0.5 * len;
  if (!speech_lik.empty()) {
    const long first = static_cast<long>(std::ceil(lo / frame_shift - 1e-9));
    const long last = static_cast<long>(std::floor(hi / frame_shift + 1e-9));
    double best = 0.0;
    bool found = false;
    for (long f = first; f <= last && f < static_cast<long>(speech_lik.size());
         ++f) {
      if (!found || speech_lik[f] < best) {
        best = speech_lik[f];
        cut = f * frame_shift;
        found = true;
      }
    }
  }
  SplitInto({s.start, cut}, speech_lik, frame_shift, max_speech, out);
  SplitInto({cut, s.end}, speech_lik, frame_shift, max_speech, out);
}

}  // namespace

SegmentList Postprocess(const SegmentList& segs,
                        std::span<const double> speech_lik, double frame_shift,
                        const PostprocessOptions& opts) {
  Require(IsValidSegmentList(segs), Errc::kInvalidArgument,
          "segments must be sorted, disjoint and non-empty");
  Require(opts.max_speech > 0.0 && opts.merge_max >= 0.0,
          Errc::kInvalidArgument, "bad post-processing thresholds");
  Require(frame_shift > 0.0, Errc::kInvalidArgument,
          "frame shift must be positive");
  SegmentList merged = MergePass(segs, opts.merge_max);
  SegmentList split;
  for (const Segment& s : merged) {
    SplitInto(s, speech_lik, frame_shift, opts.max_speech, &split);
  }
  return MergePass(split, opts.merge_max);
}

SegmentList SegmentWaveform(const SadModel& model, const Waveform& wave,
                            const SegmentOptions& opts) {
  const FeatureMatrix f = SadFeatures(wave, model.config().input_dim);
  const Eigen::MatrixXd lik = ToPseudoLikelihoods(
      SadPosteriors(model, f), SadTransform::FromModel(model));
  const std::vector<int> path = ViterbiPath(lik, opts.p_stay);
  const std::vector<double> speech(lik.col(kSpeech).data(),
                                   lik.col(kSpeech).data() + lik.rows());
  return Postprocess(PathToSegments(path, f.frame_shift), speech, f.frame_shift,
                     opts.post);
}

void SaveSad(const std::string& path, const SadModel& model) {
  SaveCheckpoint(path, model.config().ToJson(), model.params());
}

std::unique_ptr<SadModel> LoadSad(const std::string& path) {
  CheckpointData data = ReadCheckpoint(path);
  auto model = std::make_unique<SadModel>(SadConfig::FromJson(data.config));
  AssignParameters(data, model->params());
  return model;
}

std::vector<double> TrainSad(SadModel& model,
                             std::span<const FeatureMatrix> feats,
                             std::span<const std::vector<int>> labels,
                             const SadTrainOptions& opts,
                             const std::function<void(int, double)>& on_epoch) {
  Require(!feats.empty() && feats.size() == labels.size(),
          Errc::kInvalidArgument, "need one label sequence per recording");
  Require(opts.epochs >= 1, Errc::kInvalidArgument, "epochs must be positive");
  std::array<double, kSadClasses> counts = {1.0, 1.0, 1.0};
  std::vector<Mat<float>> inputs;
  for (size_t i = 0; i < feats.size(); ++i) {
    Require(feats[i].NumFrames() == static_cast<int>(labels[i].size()),
            Errc::kDimMismatch,
            "recording " + std::to_string(i) + " has " +
                std::to_string(feats[i].NumFrames()) + " frames but " +
                std::to_string(labels[i].size()) + " labels");
    for (int l : labels[i]) {
      Require(l >= 0 && l < kSadClasses, Errc::kOutOfRange,
              "sad label " + std::to_string(l) + " outside {0, 1, 2}");
      counts[l] += 1.0;
    }
    inputs.push_back(FramesByColumn<float>(feats[i]));
  }
  const double total = counts[0] + counts[1] + counts[2];
  for (int c = 0; c < kSadClasses; ++c) {
    model.mutable_config().priors[c] = counts[c] / total;
  }

  Adam<float> opt(AdamOptions{opts.lr});
  const ParamList<float>& params = model.params();
  std::vector<size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  std::vector<double> losses;
  ZeroGrads(params);
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (size_t i : order) {
      Graph<float> g;
      Var loss = model.Loss(g, inputs[i], labels[i]);
      const double value = g.Scalar(loss);
      if (!std::isfinite(value)) {
        Fail(Errc::kDivergence,
             "non-finite sad loss at epoch " + std::to_string(epoch));
      }
      sum += value;
      g.Backward(loss);
      ClipGradients(params, opts.clip);
      opt.Step(params);
    }
    losses.push_back(sum / static_cast<double>(inputs.size()));
    if (on_epoch) on_epoch(epoch, losses.back());
  }
  return losses;
}

double SadFrameAccuracy(const SadModel& model,
                        std::span<const FeatureMatrix> feats,
                        std::span<const std::vector<int>> labels) {
  Require(feats.size() == labels.size(), Errc::kInvalidArgument,
          "need one label sequence per recording");
  int64_t correct = 0, total = 0;
  for (size_t i = 0; i < feats.size(); ++i) {
    const Eigen::MatrixXd post = SadPosteriors(model, feats[i]);
    Require(post.rows() == static_cast<Eigen::Index>(labels[i].size()),
            Errc::kDimMismatch, "label count differs from frame count");
    for (Eigen::Index t = 0; t < post.rows(); ++t) {
      Eigen::Index best;
      post.row(t).maxCoeff(&best);
      correct += best == labels[i][t];
      ++total;
    }
  }
  Require(total > 0, Errc::kEmptyInput, "no frames to score");
  return static_cast<double>(correct) / static_cast<double>(total);
}

template class SadNet<float>;
template class SadNet<double>;

}  // namespace imsk
