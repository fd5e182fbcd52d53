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

#include "imsk/neural_lm.h"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "imsk/checkpoint.h"
#include "imsk/error.h"
#include "imsk/optim.h"

namespace imsk {

void LmConfig::Validate() const {
  Require(vocab_size > 0 && sos_eos >= 0 && sos_eos < vocab_size, Errc::kConfig,
          "lm config: bad vocab_size or sos_eos");
  Require(layers >= 1 && units >= 1 && embed_dim >= 1, Errc::kConfig,
          "lm config: layers, units and embed_dim must be positive");
}

std::string LmConfig::ToJson() const {
  nlohmann::json j = {{"kind", "lm"},
                      {"vocab_size", vocab_size},
                      {"sos_eos", sos_eos},
                      {"layers", layers},
                      {"units", units},
                      {"embed_dim", embed_dim},
                      {"init_scale", init_scale},
                      {"seed", seed},
                      {"vocab_hash", vocab_hash}};
  return j.dump();
}

LmConfig LmConfig::FromJson(const std::string& text) {
  LmConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    Require(j.value("kind", "") == "lm", Errc::kFormat,
            "checkpoint does not hold a language model");
    c.vocab_size = j.at("vocab_size");
    c.sos_eos = j.at("sos_eos");
    c.layers = j.at("layers");
    c.units = j.at("units");
    c.embed_dim = j.at("embed_dim");
    c.init_scale = j.at("init_scale");
    c.seed = j.at("seed");
    c.vocab_hash = j.at("vocab_hash");
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kFormat, std::string("bad lm config: ") + e.what());
  }
  c.Validate();
  return c;
}

template <typename T>
NeuralLm<T>::NeuralLm(const LmConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  embed_ = Embedding<T>("lm.embed", cfg_.vocab_size, cfg_.embed_dim);
  int in = cfg_.embed_dim;
  for (int l = 0; l < cfg_.layers; ++l) {
    lstm_.emplace_back("lm.lstm" + std::to_string(l), in, cfg_.units);
    in = cfg_.units;
  }
  out_ = Affine<T>("lm.out", cfg_.units, cfg_.vocab_size);
  embed_.Collect(&params_);
  for (auto& l : lstm_) l.Collect(&params_);
  out_.Collect(&params_);
  InitUniform(params_, cfg_.init_scale, cfg_.seed);
}

template <typename T>
std::vector<LstmState> NeuralLm<T>::ZeroState(Graph<T>& g, int batch) const {
  std::vector<LstmState> s;
  for (const auto& l : lstm_) s.push_back(l.ZeroState(g, batch));
  return s;
}

template <typename T>
Var NeuralLm<T>::Step(Graph<T>& g, std::span<const int> prev,
                      std::vector<LstmState>* state) const {
  Require(state->size() == lstm_.size(), Errc::kDimMismatch,
          "lm state has the wrong number of layers");
  Var x = embed_.Lookup(g, prev);
  for (size_t l = 0; l < lstm_.size(); ++l) {
    (*state)[l] = lstm_[l].Step(g, x, (*state)[l]);
    x = (*state)[l].h;
  }
  return g.LogSoftmax(out_.Apply(g, x));
}

template <typename T>
Var NeuralLm<T>::SentenceLoss(Graph<T>& g, std::span<const int> tokens) const {
  std::vector<int> inputs = {cfg_.sos_eos};
  inputs.insert(inputs.end(), tokens.begin(), tokens.end());
  std::vector<int> targets(tokens.begin(), tokens.end());
  targets.push_back(cfg_.sos_eos);
  // Teacher forcing lets the whole sentence run as one column per step.
  std::vector<LstmState> state = ZeroState(g, 1);
  std::vector<Var> cols;
  for (int prev : inputs) {
    const int ids[] = {prev};
    cols.push_back(Step(g, ids, &state));
  }
  return g.Scale(g.Sum(g.Pick(g.ConcatCols(cols), targets)), T(-1));
}

template <typename T>
double NeuralLm<T>::SentenceLogProb(std::span<const int> tokens,
                                    std::vector<double>* steps) const {
  Graph<T> g(false);
  std::vector<LstmState> state = ZeroState(g, 1);
  double total = 0.0;
  int prev = cfg_.sos_eos;
  if (steps) steps->clear();
  for (size_t u = 0; u <= tokens.size(); ++u) {
    const int ids[] = {prev};
    Var lp = Step(g, ids, &state);
    const int next = u < tokens.size() ? tokens[u] : cfg_.sos_eos;
    Require(next >= 0 && next < cfg_.vocab_size, Errc::kOutOfRange,
            "lm token out of range");
    const double v = static_cast<double>(g.Value(lp)(next, 0));
    if (steps) steps->push_back(v);
    total += v;
    prev = next;
  }
  return total;
}

void SaveLm(const std::string& path, const NeuralLm<float>& lm) {
  SaveCheckpoint(path, lm.config().ToJson(), lm.params());
}

std::unique_ptr<NeuralLm<float>> LoadLm(const std::string& path) {
  CheckpointData data = ReadCheckpoint(path);
  auto lm = std::make_unique<NeuralLm<float>>(LmConfig::FromJson(data.config));
  AssignParameters(data, lm->params());
  return lm;
}

double PerplexityFromLogProbs(std::span<const double> token_log_probs) {
  Require(!token_log_probs.empty(), Errc::kEmptyInput,
          "perplexity over zero tokens");
  double sum = 0.0;
  for (double v : token_log_probs) sum += v;
  return std::exp(-sum / static_cast<double>(token_log_probs.size()));
}

double Perplexity(const NeuralLm<float>& lm,
                  std::span<const std::vector<int>> corpus) {
  std::vector<double> all, steps;
  for (const auto& s : corpus) {
    lm.SentenceLogProb(s, &steps);
    all.insert(all.end(), steps.begin(), steps.end());
  }
  return PerplexityFromLogProbs(all);
}

std::vector<double> TrainLm(NeuralLm<float>& lm,
                            std::span<const std::vector<int>> corpus,
                            const LmTrainOptions& opts,
                            const std::function<void(int, double)>& on_epoch) {
  Require(!corpus.empty(), Errc::kEmptyInput, "empty lm corpus");
  Require(opts.epochs >= 1 && opts.batch_size >= 1, Errc::kInvalidArgument,
          "epochs and batch_size must be positive");
  for (const auto& s : corpus) {
    for (int id : s) {
      Require(id >= 0 && id < lm.config().vocab_size, Errc::kVocabMismatch,
              "lm corpus id " + std::to_string(id) +
                  " outside the model vocabulary");
    }
  }
  std::unique_ptr<Optimizer<float>> opt;
  if (opts.optimizer == "sgd") {
    opt = std::make_unique<Sgd<float>>(opts.lr);
  } else if (opts.optimizer == "adam") {
    opt = std::make_unique<Adam<float>>(AdamOptions{opts.lr});
  } else {
    Fail(Errc::kConfig, "unknown optimizer " + opts.optimizer);
  }
  const ParamList<float>& params = lm.params();
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  std::vector<double> perplexities;
  ZeroGrads(params);
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t b = 0; b < order.size(); b += opts.batch_size) {
      const size_t end = std::min(order.size(), b + opts.batch_size);
      const float scale = 1.0f / static_cast<float>(end - b);
      for (size_t i = b; i < end; ++i) {
        Graph<float> g;
        Var loss = lm.SentenceLoss(g, corpus[order[i]]);
        if (!std::isfinite(g.Scalar(loss))) {
          Fail(Errc::kDivergence,
               "non-finite lm loss at epoch " + std::to_string(epoch));
        }
        g.Backward(g.Scale(loss, scale));
      }
      ClipGradients(params, opts.clip);
      opt->Step(params);
    }
    const double ppl = Perplexity(lm, corpus);
    perplexities.push_back(ppl);
    if (on_epoch) on_epoch(epoch, ppl);
  }
  return perplexities;
}

template class NeuralLm<float>;
template class NeuralLm<double>;

}  // namespace imsk
