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

// Joint CTC/attention beam search with optional language-model fusion.
//
// Every hypothesis is scored as
//   ctc_weight * log p_ctc(prefix) + (1 - ctc_weight) * log p_att(prefix)
//     + lm_weight * log p_lm(prefix)
// where the CTC term is the prefix probability (the full-sequence
// probability once eos has been emitted).

#ifndef IMSK_BEAM_DECODER_H_
#define IMSK_BEAM_DECODER_H_

#include <span>
#include <vector>

#include "imsk/asr_model.h"
#include "imsk/neural_lm.h"

namespace imsk {

struct DecodeConfig {
  int beam = 20;
  double ctc_weight = 0.5;
  double lm_weight = 0.0;
  // Hypotheses hold at most floor(T' * max_output_ratio) tokens (at least 1).
  double max_output_ratio = 1.0;
  // Finished hypotheses kept in DecodeResult::nbest.
  int nbest = 1;
};

struct Hypothesis {
  std::vector<int> tokens;  // without sos and eos
  double att = 0.0;         // log p_att(tokens + eos)
  double ctc = 0.0;         // log p_ctc(tokens)
  double lm = 0.0;          // log p_lm(tokens + eos)
  double score = 0.0;       // combined
};

struct DecodeResult {
  std::vector<Hypothesis> nbest;  // best first
  int encoder_frames = 0;
  const Hypothesis& best() const { return nbest.front(); }
};

class BeamDecoder {
 public:
  // `lm` may be null, in which case lm_weight is ignored. Throws
  // kVocabMismatch when model and lm were trained on different vocabularies.
  BeamDecoder(const HybridModel<float>& model, const NeuralLm<float>* lm,
              DecodeConfig cfg);

  const DecodeConfig& config() const { return cfg_; }

  DecodeResult Decode(const FeatureMatrix& feats) const;
  // Decodes `batch_size` utterances in lockstep; results are the same as
  // calling Decode on each, in input order.
  std::vector<DecodeResult> DecodeBatch(std::span<const FeatureMatrix> feats,
                                        int batch_size) const;

 private:
  std::vector<DecodeResult> DecodeGroup(
      std::span<const FeatureMatrix> feats) const;

  const HybridModel<float>& model_;
  const NeuralLm<float>* lm_;
  DecodeConfig cfg_;
};

// Combined score of a complete hypothesis recomputed from scratch.
Hypothesis RescoreHypothesis(const HybridModel<float>& model,
                             const NeuralLm<float>* lm, const DecodeConfig& cfg,
                             const FeatureMatrix& feats,
                             std::span<const int> tokens);

}  // namespace imsk

#endif  // IMSK_BEAM_DECODER_H_
