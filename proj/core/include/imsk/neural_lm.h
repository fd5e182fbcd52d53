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

// Recurrent subword language model used for shallow fusion.

#ifndef IMSK_NEURAL_LM_H_
#define IMSK_NEURAL_LM_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "imsk/layers.h"

namespace imsk {

struct LmConfig {
  int vocab_size = 0;
  int sos_eos = 1;
  int layers = 2;
  int units = 64;
  int embed_dim = 64;
  double init_scale = 0.1;
  uint64_t seed = 1;
  uint64_t vocab_hash = 0;

  void Validate() const;
  std::string ToJson() const;
  static LmConfig FromJson(const std::string& text);
};

template <typename T>
class NeuralLm {
 public:
  explicit NeuralLm(const LmConfig& cfg);
  NeuralLm(const NeuralLm&) = delete;
  NeuralLm& operator=(const NeuralLm&) = delete;

  const LmConfig& config() const { return cfg_; }
  const ParamList<T>& params() const { return params_; }

  std::vector<LstmState> ZeroState(Graph<T>& g, int batch) const;
  // Log-probabilities of the next token after `prev` (vocab_size x B);
  // advances `state`.
  Var Step(Graph<T>& g, std::span<const int> prev,
           std::vector<LstmState>* state) const;
  // Summed negative log-likelihood of sos + tokens -> tokens + eos.
  Var SentenceLoss(Graph<T>& g, std::span<const int> tokens) const;
  // log p(tokens + eos), and the per-step terms if `steps` is given.
  double SentenceLogProb(std::span<const int> tokens,
                         std::vector<double>* steps = nullptr) const;

 private:
  LmConfig cfg_;
  Embedding<T> embed_;
  std::vector<Lstm<T>> lstm_;
  Affine<T> out_;
  ParamList<T> params_;
};

void SaveLm(const std::string& path, const NeuralLm<float>& lm);
std::unique_ptr<NeuralLm<float>> LoadLm(const std::string& path);

// exp of the mean negative log-likelihood per predicted token.
double PerplexityFromLogProbs(std::span<const double> token_log_probs);
// Over sos/eos-wrapped sentences; eos counts as a token.
double Perplexity(const NeuralLm<float>& lm,
                  std::span<const std::vector<int>> corpus);

struct LmTrainOptions {
  int epochs = 10;
  int batch_size = 16;
  std::string optimizer = "sgd";  // sgd | adam
  double lr = 1.0;
  double clip = 5.0;
  uint64_t seed = 1;
};

// Trains in place; returns the training-set perplexity after each epoch.
std::vector<double> TrainLm(
    NeuralLm<float>& lm, std::span<const std::vector<int>> corpus,
    const LmTrainOptions& opts,
    const std::function<void(int, double)>& on_epoch = nullptr);

extern template class NeuralLm<float>;
extern template class NeuralLm<double>;

}  // namespace imsk

#endif  // IMSK_NEURAL_LM_H_
