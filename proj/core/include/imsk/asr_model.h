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

// Attention encoder-decoder with location-aware attention and a CTC head on
// the shared encoder, trained on the interpolated CTC/attention objective.

#ifndef IMSK_ASR_MODEL_H_
#define IMSK_ASR_MODEL_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "imsk/audio_features.h"
#include "imsk/layers.h"

namespace imsk {

struct AsrConfig {
  int input_dim = 80;
  int vocab_size = 0;  // every id of the tokenizer, reserved ones included
  int sos_eos = 1;
  int blank = 2;
  int vgg_channels1 = 8;
  int vgg_channels2 = 16;
  int blstm_layers = 2;
  int blstm_units = 64;
  int attn_dim = 64;
  int conv_channels = 4;
  int conv_filters = 11;  // location kernel width
  int dec_layers = 1;
  int dec_units = 64;
  int embed_dim = 64;
  double ctc_weight = 0.5;
  double init_scale = 0.1;
  uint64_t seed = 1;
  uint64_t vocab_hash = 0;

  // Full-size dimensions for large corpora.
  static AsrConfig FullScale(int input_dim, int vocab_size);

  void Validate() const;
  std::string ToJson() const;
  static AsrConfig FromJson(const std::string& text);
};

// Encoder frames after the two pooling stages.
inline int EncodedLength(int frames) { return ((frames + 1) / 2 + 1) / 2; }

template <typename T>
class HybridModel {
 public:
  explicit HybridModel(const AsrConfig& cfg);
  HybridModel(const HybridModel&) = delete;
  HybridModel& operator=(const HybridModel&) = delete;

  const AsrConfig& config() const { return cfg_; }
  // Parameters in a fixed order; pointers stay valid for the model's life.
  const ParamList<T>& params() const { return params_; }
  void Initialize();

  // Encoder states for the utterance, (2 * blstm_units) x T'.
  struct Encoded {
    Var h;
    Var vh;  // attention key projection of h, attn_dim x T'
    int frames = 0;
  };
  // `feats` is d x T (one column per frame).
  Encoded Encode(Graph<T>& g, const Mat<T>& feats) const;
  // Several utterances at once; each result is bitwise equal to Encode().
  std::vector<Encoded> EncodeBatch(Graph<T>& g,
                                   std::span<const Mat<T>* const> feats) const;
  Var CtcLogProbs(Graph<T>& g, const Encoded& enc) const;

  // Location-aware attention for B queries against one utterance.
  // q_prev: dec_units x B, a_prev: T' x B. Returns weights (T' x B) and
  // contexts (2 * blstm_units x B).
  struct Attention {
    Var weights;
    Var context;
  };
  Attention Attend(Graph<T>& g, const Encoded& enc, Var q_prev,
                   Var a_prev) const;

  // Recurrent decoder update from the previous tokens and current contexts;
  // `layers` holds one state per decoder layer and is advanced in place.
  // Returns log-probabilities over all ids, vocab_size x B.
  Var DecoderStep(Graph<T>& g, std::span<const int> prev_tokens, Var context,
                  std::vector<LstmState>* layers) const;
  std::vector<LstmState> DecoderZeroState(Graph<T>& g, int batch) const;
  Var UniformAttention(Graph<T>& g, int frames, int batch) const;

  struct Loss {
    Var total;
    Var att;          // invalid when the attention weight is zero
    Var ctc;          // invalid when the CTC weight is zero
    int correct = 0;  // teacher-forced argmax hits, eos included
    int tokens = 0;
  };
  // Hybrid loss lambda * ctc + (1 - lambda) * att for one utterance.
  Loss ComputeLoss(Graph<T>& g, const Mat<T>& feats,
                   std::span<const int> labels, double lambda) const;
  // Teacher-forced log p_att(labels + eos | feats), one entry per step.
  std::vector<double> TeacherForcedLogProbs(const Mat<T>& feats,
                                            std::span<const int> labels) const;

 private:
  void Build();

  AsrConfig cfg_;
  VggBlock<T> vgg1_;
  VggBlock<T> vgg2_;
  std::vector<Blstm<T>> blstm_;
  Affine<T> ctc_out_;
  Affine<T> att_key_;      // V h + b
  Affine<T> att_query_;    // W q
  Affine<T> att_loc_;      // U f
  Parameter<T> att_conv_;  // conv_channels x conv_filters
  Affine<T> att_score_;    // w
  Embedding<T> embed_;
  std::vector<Lstm<T>> dec_;
  Affine<T> dec_out_;
  ParamList<T> params_;
};

// d x T matrix of a feature matrix, ready for Encode().
template <typename T>
Mat<T> ToModelInput(const FeatureMatrix& f);

void SaveAsrModel(const std::string& path, const HybridModel<float>& model);
std::unique_ptr<HybridModel<float>> LoadAsrModel(const std::string& path);

struct Utterance {
  std::string id;
  FeatureMatrix feats;
  std::vector<int> labels;
};

struct AsrTrainOptions {
  int epochs = 10;
  int batch_size = 8;
  std::string optimizer = "adadelta";  // adadelta | adam
  double rho = 0.95;
  double eps = 1e-8;
  double lr = 1e-3;  // adam
  double clip = 5.0;
  double ctc_weight = 0.5;
  // Halve adadelta's eps (adam's lr) after an epoch without improvement.
  bool halve_on_plateau = true;
  uint64_t seed = 1;
};

struct AsrEpochReport {
  int epoch = 0;
  double train_loss = 0.0;  // mean per utterance
  double valid_accuracy = 0.0;
  double eps = 0.0;  // value in force for the next epoch (lr for adam)
  bool improved = false;
  double seconds = 0.0;
};

struct AsrTrainResult {
  std::vector<AsrEpochReport> epochs;
  int best_epoch = 0;
  double best_accuracy = -1.0;
};

// Teacher-forced token accuracy over a data set.
double TokenAccuracy(const HybridModel<float>& model,
                     std::span<const Utterance> data);

// Trains in place; on return the model holds the parameters of the epoch
// with the best validation accuracy.
AsrTrainResult TrainAsr(
    HybridModel<float>& model, std::span<const Utterance> train,
    std::span<const Utterance> valid, const AsrTrainOptions& opts,
    const std::function<void(const AsrEpochReport&)>& on_epoch = nullptr);

extern template class HybridModel<float>;
extern template class HybridModel<double>;

}  // namespace imsk

#endif  // IMSK_ASR_MODEL_H_
