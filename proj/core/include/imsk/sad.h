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

// Speech activity detection: a spliced feed-forward classifier with a
// statistics-pooling layer, a two-state HMM over pseudo-likelihoods and
// segment post-processing.

#ifndef IMSK_SAD_H_
#define IMSK_SAD_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "imsk/audio_features.h"
#include "imsk/layers.h"

namespace imsk {

enum SadClass { kSilence = 0, kSpeech = 1, kGarbage = 2 };
inline constexpr int kSadClasses = 3;

struct SadConfig {
  int input_dim = 40;
  int hidden = 32;
  std::vector<int> splice1 = {-2, -1, 0, 1, 2};
  std::vector<int> splice2 = {-3, 0, 3};
  int stats_left = 50;  // frames of pooling context on each side
  int stats_right = 50;
  double init_scale = 0.1;
  uint64_t seed = 1;
  // Class priors estimated from training labels.
  std::array<double, kSadClasses> priors = {1.0 / 3, 1.0 / 3, 1.0 / 3};

  void Validate() const;
  std::string ToJson() const;
  static SadConfig FromJson(const std::string& text);
};

// Column indices into a column-major d x T matrix that stack the frames at
// the given offsets (edges clamped); the result is (d * |offsets|) x T.
std::vector<int> SpliceIndex(int dim, int frames, std::span<const int> offsets);

template <typename T>
class SadNet {
 public:
  explicit SadNet(const SadConfig& cfg);
  SadNet(const SadNet&) = delete;
  SadNet& operator=(const SadNet&) = delete;

  const SadConfig& config() const { return cfg_; }
  SadConfig& mutable_config() { return cfg_; }
  const ParamList<T>& params() const { return params_; }

  // feats is d x T; returns per-frame log-posteriors, 3 x T.
  Var LogPosteriors(Graph<T>& g, const Mat<T>& feats) const;
  // Mean per-frame cross-entropy.
  Var Loss(Graph<T>& g, const Mat<T>& feats, std::span<const int> labels) const;

 private:
  SadConfig cfg_;
  Affine<T> l1_, l2_, l3_, out_;
  ParamList<T> params_;
};

using SadModel = SadNet<float>;

// T x 3 class posteriors of a feature matrix.
Eigen::MatrixXd SadPosteriors(const SadModel& model, const FeatureMatrix& f);

// Features the detector runs on: MFCC over all mel bands, no normalization.
FeatureMatrix SadFeatures(const Waveform& wave, int dim = 40);

struct SadTransform {
  Eigen::Vector3d priors = Eigen::Vector3d::Constant(1.0 / 3);
  // proportions(s, c): share of class c routed to state s (0 silence,
  // 1 speech). Garbage goes to speech by default.
  Eigen::Matrix<double, 2, 3> proportions =
      (Eigen::Matrix<double, 2, 3>() << 1, 0, 0, 0, 1, 1).finished();

  static SadTransform FromModel(const SadModel& model);
  void Validate() const;
};

// lik(t, s) = sum_c proportions(s, c) * post(t, c) / priors(c); T x 2.
Eigen::MatrixXd ToPseudoLikelihoods(const Eigen::MatrixXd& post,
                                    const SadTransform& transform);

// Best state sequence (0 silence, 1 speech) of the two-state chain with a
// uniform initial distribution. Ties go to silence at the last frame and
// to staying in the current state while tracing back.
std::vector<int> ViterbiPath(const Eigen::MatrixXd& lik, double p_stay);

struct Segment {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const Segment&) const = default;
};
using SegmentList = std::vector<Segment>;

// Maximal runs of the speech state, frame t covering [t, t + 1) * shift.
SegmentList PathToSegments(std::span<const int> path, double frame_shift);

bool IsValidSegmentList(std::span<const Segment> segs);

struct PostprocessOptions {
  double max_speech = 30.0;
  double merge_max = 10.0;
};

// Greedy left-to-right merging while the merged span stays within
// merge_max, then recursive splitting of segments longer than max_speech
// at the frame of lowest speech likelihood inside the middle half (the
// midpoint when no likelihoods are given), then one more merge pass so
// that the result is a fixed point.
SegmentList Postprocess(const SegmentList& segs,
                        std::span<const double> speech_lik, double frame_shift,
                        const PostprocessOptions& opts = {});

struct SegmentOptions {
  double p_stay = 0.99;
  PostprocessOptions post;
};

// Full chain from audio to post-processed speech segments.
SegmentList SegmentWaveform(const SadModel& model, const Waveform& wave,
                            const SegmentOptions& opts = {});

void SaveSad(const std::string& path, const SadModel& model);
std::unique_ptr<SadModel> LoadSad(const std::string& path);

struct SadTrainOptions {
  int epochs = 15;
  double lr = 0.003;  // adam
  double clip = 5.0;
  uint64_t seed = 1;
};

// Cross-entropy training with Adam, one recording per update. Sets the
// model priors from label frequencies (add-one smoothed). Returns the mean
// per-frame loss of each epoch.
std::vector<double> TrainSad(
    SadModel& model, std::span<const FeatureMatrix> feats,
    std::span<const std::vector<int>> labels, const SadTrainOptions& opts,
    const std::function<void(int, double)>& on_epoch = nullptr);

// Fraction of frames whose argmax posterior equals the label.
double SadFrameAccuracy(const SadModel& model,
                        std::span<const FeatureMatrix> feats,
                        std::span<const std::vector<int>> labels);

extern template class SadNet<float>;
extern template class SadNet<double>;

}  // namespace imsk

#endif  // IMSK_SAD_H_
