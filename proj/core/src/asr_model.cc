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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "imsk/checkpoint.h"
#include "imsk/ctc.h"
#include "imsk/error.h"
#include "imsk/optim.h"

namespace imsk {

AsrConfig AsrConfig::FullScale(int input_dim, int vocab_size) {
  AsrConfig c;
  c.input_dim = input_dim;
  c.vocab_size = vocab_size;
  c.vgg_channels1 = 64;
  c.vgg_channels2 = 128;
  c.blstm_layers = 5;
  c.blstm_units = 1024;
  c.attn_dim = 1024;
  c.conv_channels = 10;
  c.conv_filters = 100;
  c.dec_layers = 2;
  c.dec_units = 1024;
  c.embed_dim = 1024;
  return c;
}

void AsrConfig::Validate() const {
  Require(input_dim > 0 && vocab_size > 0, Errc::kConfig,
          "asr config needs positive input_dim and vocab_size");
  Require(sos_eos >= 0 && sos_eos < vocab_size && blank >= 0 &&
              blank < vocab_size && blank != sos_eos,
          Errc::kConfig, "asr config special ids out of range");
  Require(vgg_channels1 > 0 && vgg_channels2 > 0 && blstm_layers >= 1 &&
              blstm_units >= 1 && attn_dim > 0 && conv_channels > 0 &&
              conv_filters > 0 && dec_layers >= 1 && dec_units >= 1 &&
              embed_dim >= 1,
          Errc::kConfig, "asr config dimensions must be positive");
  Require(ctc_weight >= 0 && ctc_weight <= 1, Errc::kConfig,
          "ctc_weight must be in [0, 1]");
}

std::string AsrConfig::ToJson() const {
  nlohmann::json j = {
      {"kind", "asr"},
      {"input_dim", input_dim},
      {"vocab_size", vocab_size},
      {"sos_eos", sos_eos},
      {"blank", blank},
      {"vgg_channels1", vgg_channels1},
      {"vgg_channels2", vgg_channels2},
      {"blstm_layers", blstm_layers},
      {"blstm_units", blstm_units},
      {"attn_dim", attn_dim},
      {"conv_channels", conv_channels},
      {"conv_filters", conv_filters},
      {"dec_layers", dec_layers},
      {"dec_units", dec_units},
      {"embed_dim", embed_dim},
      {"ctc_weight", ctc_weight},
      {"init_scale", init_scale},
      {"seed", seed},
      {"vocab_hash", vocab_hash},
  };
  return j.dump();
}

AsrConfig AsrConfig::FromJson(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kFormat, std::string("bad asr config: ") + e.what());
  }
  Require(j.value("kind", "") == "asr", Errc::kFormat,
          "checkpoint does not hold an asr model");
  AsrConfig c;
  try {
    c.input_dim = j.at("input_dim");
    c.vocab_size = j.at("vocab_size");
    c.sos_eos = j.at("sos_eos");
    c.blank = j.at("blank");
    c.vgg_channels1 = j.at("vgg_channels1");
    c.vgg_channels2 = j.at("vgg_channels2");
    c.blstm_layers = j.at("blstm_layers");
    c.blstm_units = j.at("blstm_units");
    c.attn_dim = j.at("attn_dim");
    c.conv_channels = j.at("conv_channels");
    c.conv_filters = j.at("conv_filters");
    c.dec_layers = j.at("dec_layers");
    c.dec_units = j.at("dec_units");
    c.embed_dim = j.at("embed_dim");
    c.ctc_weight = j.at("ctc_weight");
    c.init_scale = j.at("init_scale");
    c.seed = j.at("seed");
    c.vocab_hash = j.at("vocab_hash");
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kFormat, std::string("bad asr config: ") + e.what());
  }
  c.Validate();
  return c;
}

template <typename T>
HybridModel<T>::HybridModel(const AsrConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  Build();
  Initialize();
}

template <typename T>
void HybridModel<T>::Build() {
  const AsrConfig& c = cfg_;
  vgg1_ = VggBlock<T>("enc.vgg1", 1, c.vgg_channels1);
  vgg2_ = VggBlock<T>("enc.vgg2", c.vgg_channels1, c.vgg_channels2);
  int in = c.vgg_channels2 * EncodedLength(c.input_dim);
  for (int l = 0; l < c.blstm_layers; ++l) {
    blstm_.emplace_back("enc.blstm" + std::to_string(l), in, c.blstm_units);
    in = 2 * c.blstm_units;
  }
  const int dh = 2 * c.blstm_units;
  ctc_out_ = Affine<T>("ctc.out", dh, c.vocab_size);
  att_key_ = Affine<T>("att.key", dh, c.attn_dim);
  att_query_ = Affine<T>("att.query", c.dec_units, c.attn_dim, false);
  att_loc_ = Affine<T>("att.loc", c.conv_channels, c.attn_dim, false);
  att_conv_ = Parameter<T>("att.conv", c.conv_channels, c.conv_filters);
  att_score_ = Affine<T>("att.score", c.attn_dim, 1, false);
  embed_ = Embedding<T>("dec.embed", c.vocab_size, c.embed_dim);
  in = c.embed_dim + dh;
  for (int l = 0; l < c.dec_layers; ++l) {
    dec_.emplace_back("dec.lstm" + std::to_string(l), in, c.dec_units);
    in = c.dec_units;
  }
  dec_out_ = Affine<T>("dec.out", c.dec_units + dh, c.vocab_size);

  vgg1_.Collect(&params_);
  vgg2_.Collect(&params_);
  for (auto& b : blstm_) b.Collect(&params_);
  ctc_out_.Collect(&params_);
  att_key_.Collect(&params_);
  att_query_.Collect(&params_);
  att_loc_.Collect(&params_);
  params_.push_back(&att_conv_);
  att_score_.Collect(&params_);
  embed_.Collect(&params_);
  for (auto& d : dec_) d.Collect(&params_);
  dec_out_.Collect(&params_);
}

template <typename T>
void HybridModel<T>::Initialize() {
  InitUniform(params_, cfg_.init_scale, cfg_.seed);
}

template <typename T>
typename HybridModel<T>::Encoded HybridModel<T>::Encode(
    Graph<T>& g, const Mat<T>& feats) const {
  const Mat<T>* one[] = {&feats};
  return EncodeBatch(g, one).front();
}

template <typename T>
std::vector<typename HybridModel<T>::Encoded> HybridModel<T>::EncodeBatch(
    Graph<T>& g, std::span<const Mat<T>* const> feats) const {
  std::vector<Var> xs;
  std::vector<int> frames;
  for (const Mat<T>* f : feats) {
    Require(f->rows() == cfg_.input_dim, Errc::kDimMismatch,
            "features have dim " + std::to_string(f->rows()) +
                ", model expects " + std::to_string(cfg_.input_dim));
    Require(f->cols() > 0, Errc::kEmptyInput, "empty feature matrix");
    int height = static_cast<int>(f->cols());
    int width = cfg_.input_dim;
    // Column-major d x T data is already the (t * d + f) layout of a
    // single-channel time x frequency map.
    Var x = g.Input(Eigen::Map<const Mat<T>>(f->data(), 1, f->size()));
    x = vgg1_.Apply(g, x, &height, &width);
    x = vgg2_.Apply(g, x, &height, &width);
    xs.push_back(
        g.Gather(x, ChannelsToFeaturesIndex(cfg_.vgg_channels2, height, width),
                 cfg_.vgg_channels2 * width, height));
    frames.push_back(height);
  }
  for (const auto& layer : blstm_) xs = layer.ApplyBatch(g, xs);
  std::vector<Encoded> out(xs.size());
  for (size_t j = 0; j < xs.size(); ++j) {
    out[j].h = xs[j];
    out[j].vh = att_key_.Apply(g, xs[j]);
    out[j].frames = frames[j];
  }
  return out;
}

template <typename T>
Var HybridModel<T>::CtcLogProbs(Graph<T>& g, const Encoded& enc) const {
  return g.LogSoftmax(ctc_out_.Apply(g, enc.h));
}

template <typename T>
typename HybridModel<T>::Attention HybridModel<T>::Attend(Graph<T>& g,
                                                          const Encoded& enc,
                                                          Var q_prev,
                                                          Var a_prev) const {
  const int tp = enc.frames;
  const int batch = static_cast<int>(g.Value(q_prev).cols());
  Require(g.Value(a_prev).rows() == tp && g.Value(a_prev).cols() == batch,
          Errc::kDimMismatch,
          "previous attention does not match encoder length");
  const int k = cfg_.conv_filters;
  const int pad = (k - 1) / 2;
  const int a_dim = cfg_.attn_dim;
  const int cols = tp * batch;

  std::vector<int> window(static_cast<size_t>(k) * cols);
  std::vector<int> tile_q(static_cast<size_t>(a_dim) * cols);
  std::vector<int> tile_k(static_cast<size_t>(a_dim) * cols);
  for (int j = 0; j < batch; ++j) {
    for (int t = 0; t < tp; ++t) {
      const size_t col = static_cast<size_t>(j) * tp + t;
      for (int i = 0; i < k; ++i) {
        const int s = t + i - pad;
        window[col * k + i] = (s >= 0 && s < tp) ? j * tp + s : -1;
      }
      for (int a = 0; a < a_dim; ++a) {
        tile_q[col * a_dim + a] = j * a_dim + a;
        tile_k[col * a_dim + a] = t * a_dim + a;
      }
    }
  }
  Var win = g.Gather(a_prev, std::move(window), k, cols);
  Var loc = att_loc_.Apply(g, g.MatMul(g.Param(att_conv_), win));
  Var q = g.Gather(att_query_.Apply(g, q_prev), std::move(tile_q), a_dim, cols);
  Var key = g.Gather(enc.vh, std::move(tile_k), a_dim, cols);
  Var e = att_score_.Apply(g, g.Tanh(g.Add(g.Add(key, q), loc)));
  std::vector<int> reshape(cols);
  std::iota(reshape.begin(), reshape.end(), 0);
  Var weights = g.Softmax(g.Gather(e, std::move(reshape), tp, batch));
  return {weights, g.MatMul(enc.h, weights)};
}

template <typename T>
std::vector<LstmState> HybridModel<T>::DecoderZeroState(Graph<T>& g,
                                                        int batch) const {
  std::vector<LstmState> s;
  for (const auto& l : dec_) s.push_back(l.ZeroState(g, batch));
  return s;
}

template <typename T>
Var HybridModel<T>::UniformAttention(Graph<T>& g, int frames, int batch) const {
  return g.Input(Mat<T>::Constant(frames, batch, T(1) / T(frames)));
}

template <typename T>
Var HybridModel<T>::DecoderStep(Graph<T>& g, std::span<const int> prev_tokens,
                                Var context,
                                std::vector<LstmState>* layers) const {
  Require(layers->size() == dec_.size(), Errc::kDimMismatch,
          "decoder state has the wrong number of layers");
  const Var in[] = {embed_.Lookup(g, prev_tokens), context};
  Var x = g.ConcatRows(in);
  for (size_t l = 0; l < dec_.size(); ++l) {
    (*layers)[l] = dec_[l].Step(g, x, (*layers)[l]);
    x = (*layers)[l].h;
  }
  const Var out[] = {x, context};
  return g.LogSoftmax(dec_out_.Apply(g, g.ConcatRows(out)));
}

template <typename T>
typename HybridModel<T>::Loss HybridModel<T>::ComputeLoss(
    Graph<T>& g, const Mat<T>& feats, std::span<const int> labels,
    double lambda) const {
  Require(lambda >= 0 && lambda <= 1, Errc::kInvalidArgument,
          "ctc weight must be in [0, 1]");
  Require(!labels.empty(), Errc::kEmptyInput, "empty label sequence");
  for (int l : labels) {
    Require(
        l >= 0 && l < cfg_.vocab_size && l != cfg_.blank && l != cfg_.sos_eos,
        Errc::kOutOfRange, "label id " + std::to_string(l) + " not a token");
  }
  Loss out;
  Encoded enc = Encode(g, feats);

  if (lambda > 0) {
    Var lp = CtcLogProbs(g, enc);
    const CtcLossResult r =
        CtcLoss(g.Value(lp).template cast<double>(), labels, cfg_.blank);
    Mat<T> value(1, 1);
    value(0, 0) = static_cast<T>(r.loss);
    const Var in[] = {lp};
    out.ctc = g.Custom(in, std::move(value),
                       [grad = r.grad_log_probs.template cast<T>().eval()](
                           const Mat<T>& dy, std::span<Mat<T>*> dx) {
                         if (dx[0]) *dx[0] += dy(0, 0) * grad;
                       });
  }

  if (lambda < 1) {
    const int steps = static_cast<int>(labels.size()) + 1;
    std::vector<LstmState> state = DecoderZeroState(g, 1);
    Var a = UniformAttention(g, enc.frames, 1);
    std::vector<Var> cols;
    std::vector<int> targets;
    int prev = cfg_.sos_eos;
    for (int u = 0; u < steps; ++u) {
      Attention att = Attend(g, enc, state.back().h, a);
      a = att.weights;
      const int prev_ids[] = {prev};
      cols.push_back(DecoderStep(g, prev_ids, att.context, &state));
      const int target = u + 1 < steps ? labels[u] : cfg_.sos_eos;
      targets.push_back(target);
      prev = target;
    }
    Var lp = g.ConcatCols(cols);
    const Mat<T>& lv = g.Value(lp);
    for (int u = 0; u < steps; ++u) {
      Eigen::Index best;
      lv.col(u).maxCoeff(&best);
      if (best == targets[u]) ++out.correct;
    }
    out.tokens = steps;
    out.att = g.Scale(g.Sum(g.Pick(lp, targets)), T(-1));
  }

  if (!out.ctc.valid()) {
    out.total = out.att;
  } else if (!out.att.valid()) {
    out.total = out.ctc;
  } else {
    out.total = g.Add(g.Scale(out.ctc, static_cast<T>(lambda)),
                      g.Scale(out.att, static_cast<T>(1.0 - lambda)));
  }
  return out;
}

template <typename T>
std::vector<double> HybridModel<T>::TeacherForcedLogProbs(
    const Mat<T>& feats, std::span<const int> labels) const {
  Graph<T> g(false);
  Encoded enc = Encode(g, feats);
  std::vector<LstmState> state = DecoderZeroState(g, 1);
  Var a = UniformAttention(g, enc.frames, 1);
  std::vector<double> out;
  int prev = cfg_.sos_eos;
  for (size_t u = 0; u <= labels.size(); ++u) {
    Attention att = Attend(g, enc, state.back().h, a);
    a = att.weights;
    const int prev_ids[] = {prev};
    Var lp = DecoderStep(g, prev_ids, att.context, &state);
    const int target = u < labels.size() ? labels[u] : cfg_.sos_eos;
    out.push_back(static_cast<double>(g.Value(lp)(target, 0)));
    prev = target;
  }
  return out;
}

template <typename T>
Mat<T> ToModelInput(const FeatureMatrix& f) {
  return f.frames.transpose().template cast<T>();
}

template Mat<float> ToModelInput<float>(const FeatureMatrix&);
template Mat<double> ToModelInput<double>(const FeatureMatrix&);

void SaveAsrModel(const std::string& path, const HybridModel<float>& model) {
  SaveCheckpoint(path, model.config().ToJson(), model.params());
}

std::unique_ptr<HybridModel<float>> LoadAsrModel(const std::string& path) {
  CheckpointData data = ReadCheckpoint(path);
  auto model =
      std::make_unique<HybridModel<float>>(AsrConfig::FromJson(data.config));
  AssignParameters(data, model->params());
  return model;
}

double TokenAccuracy(const HybridModel<float>& model,
                     std::span<const Utterance> data) {
  long correct = 0, total = 0;
  for (const Utterance& u : data) {
    Graph<float> g(false);
    auto loss =
        model.ComputeLoss(g, ToModelInput<float>(u.feats), u.labels, 0.0);
    correct += loss.correct;
    total += loss.tokens;
  }
  Require(total > 0, Errc::kEmptyInput, "accuracy over an empty set");
  return static_cast<double>(correct) / static_cast<double>(total);
}

AsrTrainResult TrainAsr(
    HybridModel<float>& model, std::span<const Utterance> train,
    std::span<const Utterance> valid, const AsrTrainOptions& opts,
    const std::function<void(const AsrEpochReport&)>& on_epoch) {
  Require(!train.empty() && !valid.empty(), Errc::kEmptyInput,
          "training and validation sets must be non-empty");
  Require(opts.batch_size >= 1 && opts.epochs >= 1, Errc::kInvalidArgument,
          "batch_size and epochs must be positive");
  const ParamList<float>& params = model.params();

  std::vector<Mat<float>> inputs;
  inputs.reserve(train.size());
  for (const Utterance& u : train)
    inputs.push_back(ToModelInput<float>(u.feats));

  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return train[a].feats.NumFrames() < train[b].feats.NumFrames();
  });
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < order.size(); i += opts.batch_size) {
    const size_t end = std::min(order.size(), i + opts.batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }

  std::unique_ptr<Optimizer<float>> opt;
  AdaDelta<float>* adadelta = nullptr;
  Adam<float>* adam = nullptr;
  double rate = 0.0;
  if (opts.optimizer == "adadelta") {
    auto o =
        std::make_unique<AdaDelta<float>>(AdaDeltaOptions{opts.rho, opts.eps});
    adadelta = o.get();
    rate = opts.eps;
    opt = std::move(o);
  } else if (opts.optimizer == "adam") {
    auto o = std::make_unique<Adam<float>>(AdamOptions{opts.lr});
    adam = o.get();
    rate = opts.lr;
    opt = std::move(o);
  } else {
    Fail(Errc::kConfig, "unknown optimizer " + opts.optimizer);
  }

  std::mt19937_64 rng(opts.seed);
  AsrTrainResult result;
  std::vector<Mat<float>> best;
  ZeroGrads(params);
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(batches.begin(), batches.end(), rng);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      const float scale = 1.0f / static_cast<float>(batch.size());
      for (size_t i : batch) {
        Graph<float> g;
        auto loss =
            model.ComputeLoss(g, inputs[i], train[i].labels, opts.ctc_weight);
        const double v = g.Scalar(loss.total);
        if (!std::isfinite(v)) {
          Fail(Errc::kDivergence, "non-finite loss at epoch " +
                                      std::to_string(epoch) + " on " +
                                      train[i].id);
        }
        loss_sum += v;
        g.Backward(g.Scale(loss.total, scale));
      }
      ClipGradients(params, opts.clip);
      opt->Step(params);
    }
    AsrEpochReport rep;
    rep.epoch = epoch;
    rep.train_loss = loss_sum / static_cast<double>(train.size());
    rep.valid_accuracy = TokenAccuracy(model, valid);
    rep.improved = rep.valid_accuracy > result.best_accuracy;
    if (rep.improved) {
      result.best_accuracy = rep.valid_accuracy;
      result.best_epoch = epoch;
      best.clear();
      for (auto* p : params) best.push_back(p->value);
    } else if (opts.halve_on_plateau) {
      rate *= 0.5;
      if (adadelta) adadelta->set_eps(rate);
      if (adam) adam->set_lr(rate);
    }
    rep.eps = rate;
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.epochs.push_back(rep);
    if (on_epoch) on_epoch(rep);
  }
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  return result;
}

template class HybridModel<float>;
template class HybridModel<double>;

}  // namespace imsk
