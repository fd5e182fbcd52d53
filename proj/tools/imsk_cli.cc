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

// imsk: command-line front end for training, segmentation, decoding,
// scoring and end-to-end transcription.

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "imsk/asr_model.h"
#include "imsk/audio_features.h"
#include "imsk/beam_decoder.h"
#include "imsk/error.h"
#include "imsk/neural_lm.h"
#include "imsk/pipeline.h"
#include "imsk/sad.h"
#include "imsk/scoring.h"
#include "imsk/subword_tokenizer.h"

namespace {

namespace fs = std::filesystem;
using namespace imsk;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::vector<std::string> ReadLines(const fs::path& path) {
  std::ifstream is(path);
  if (!is) Fail(Errc::kIo, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// Flags that mirror configuration keys. Values stay as text so that the
// configuration parser does the conversion for both sources, and only
// flags given on the command line override the file.
class ConfigFlags {
 public:
  void Add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    auto* opt = app->add_option(flag, values_[key], help + " [" + key + "]");
    options_.emplace_back(key, opt);
  }

  PipelineConfig Resolve(const std::string& config_path) const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = LoadPipelineConfig(config_path);
    for (const auto& [key, opt] : options_) {
      if (opt->count() > 0) cfg.Set(key, values_.at(key));
    }
    cfg.seed = SeedFromEnvironment(cfg.seed);
    return cfg;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

void AddModelFlags(CLI::App* app, ConfigFlags* flags) {
  flags->Add(app, "--model", "asr.model", "recognizer checkpoint");
  flags->Add(app, "--tokenizer", "asr.tokenizer", "subword vocabulary");
  flags->Add(app, "--cmvn", "asr.cmvn", "feature normalization statistics");
  flags->Add(app, "--lm", "lm.model", "language model checkpoint");
  flags->Add(app, "--beam", "decode.beam", "beam width");
  flags->Add(app, "--ctc-weight", "decode.ctc_weight", "CTC weight");
  flags->Add(app, "--lm-weight", "decode.lm_weight", "LM weight");
  flags->Add(app, "--max-output-ratio", "decode.max_output_ratio",
             "max tokens per encoder frame");
  flags->Add(app, "--batch-size", "decode.batch_size",
             "utterances decoded together");
}

void AddSadFlags(CLI::App* app, ConfigFlags* flags) {
  flags->Add(app, "--sad-model", "sad.model", "activity detector checkpoint");
  flags->Add(app, "--p-stay", "sad.p_stay", "HMM self-loop probability");
  flags->Add(app, "--max-speech", "sad.max_speech", "longest segment, seconds");
  flags->Add(app, "--merge-max", "sad.merge_max",
             "longest merged span, seconds");
}

// ---- train-tokenizer -------------------------------------------------------

struct TokenizerArgs {
  std::string input, out;
  UnigramOptions opts;
};

void RunTrainTokenizer(const TokenizerArgs& a) {
  const auto lines = ReadLines(a.input);
  const auto t0 = Clock::now();
  const SubwordVocab vocab = TrainUnigram(lines, a.opts);
  vocab.Save(a.out);
  std::cerr << "tokenizer: " << vocab.NumPieces() << " pieces from "
            << lines.size() << " lines in " << Seconds(t0, Clock::now())
            << " s -> " << a.out << "\n";
}

// ---- train-asr -------------------------------------------------------------

struct AsrArgs {
  std::string manifest, valid, tokenizer, out, cmvn_out;
  int num_mels = 80;
  bool full_scale = false;
  AsrConfig model;
  AsrTrainOptions train;
  bool no_halving = false;
};

std::vector<Utterance> LoadUtterances(const std::vector<ManifestEntry>& entries,
                                      const SubwordVocab& vocab, int num_mels,
                                      std::vector<FeatureMatrix>* raw) {
  std::vector<Utterance> out;
  for (const auto& e : entries) {
    FeatureMatrix f = AsrFeatures(LoadWav(e.wav), num_mels);
    raw->push_back(f);
    out.push_back({e.id, std::move(f), vocab.Encode(e.text)});
  }
  return out;
}

void RunTrainAsr(AsrArgs a) {
  const SubwordVocab vocab = SubwordVocab::Load(a.tokenizer);
  const auto train_entries = ReadManifest(a.manifest);
  const auto valid_entries = ReadManifest(a.valid);
  std::vector<FeatureMatrix> raw_train, raw_valid;
  auto train = LoadUtterances(train_entries, vocab, a.num_mels, &raw_train);
  auto valid = LoadUtterances(valid_entries, vocab, a.num_mels, &raw_valid);
  const CmvnStats stats = ComputeCmvn(raw_train);
  SaveCmvn(a.cmvn_out, stats);
  for (auto& u : train) u.feats = ApplyCmvn(u.feats, stats);
  for (auto& u : valid) u.feats = ApplyCmvn(u.feats, stats);

  AsrConfig cfg =
      a.full_scale ? AsrConfig::FullScale(a.num_mels, vocab.Size()) : a.model;
  cfg.input_dim = a.num_mels;
  cfg.vocab_size = vocab.Size();
  cfg.vocab_hash = vocab.Hash();
  cfg.sos_eos = SubwordVocab::kSosEos;
  cfg.blank = SubwordVocab::kBlank;
  cfg.ctc_weight = a.train.ctc_weight;
  cfg.seed = SeedFromEnvironment(a.train.seed);
  a.train.seed = cfg.seed;
  a.train.halve_on_plateau = !a.no_halving;
  HybridModel<float> model(cfg);
  const auto result =
      TrainAsr(model, train, valid, a.train, [](const AsrEpochReport& r) {
        std::fprintf(stderr,
                     "epoch %d loss %.4f valid-acc %.4f eps %.3g%s (%.1f s)\n",
                     r.epoch, r.train_loss, r.valid_accuracy, r.eps,
                     r.improved ? "" : " halved", r.seconds);
      });
  SaveAsrModel(a.out, model);
  std::fprintf(stderr, "best epoch %d valid-acc %.4f -> %s\n",
               result.best_epoch, result.best_accuracy, a.out.c_str());
}

// ---- train-lm --------------------------------------------------------------

struct LmArgs {
  std::string text, tokenizer, out;
  LmConfig model;
  LmTrainOptions train;
};

void RunTrainLm(LmArgs a) {
  const SubwordVocab vocab = SubwordVocab::Load(a.tokenizer);
  std::vector<std::vector<int>> corpus;
  for (const auto& line : ReadLines(a.text))
    corpus.push_back(vocab.Encode(line));
  a.model.vocab_size = vocab.Size();
  a.model.vocab_hash = vocab.Hash();
  a.model.sos_eos = SubwordVocab::kSosEos;
  a.model.seed = SeedFromEnvironment(a.train.seed);
  a.train.seed = a.model.seed;
  NeuralLm<float> lm(a.model);
  TrainLm(lm, corpus, a.train, [](int epoch, double ppl) {
    std::fprintf(stderr, "epoch %d perplexity %.4f\n", epoch, ppl);
  });
  SaveLm(a.out, lm);
  std::cerr << "language model -> " << a.out << "\n";
}

// ---- train-sad -------------------------------------------------------------

struct SadArgs {
  std::string manifest, labels, out;
  SadConfig model;
  SadTrainOptions train;
};

void RunTrainSad(SadArgs a) {
  const auto recs = ReadManifest(a.manifest);
  const auto regions = ReadLabelRegions(a.labels);
  std::vector<FeatureMatrix> feats;
  std::vector<std::vector<int>> labels;
  const FrameOptions frame;
  for (const auto& r : recs) {
    feats.push_back(SadFeatures(LoadWav(r.wav), a.model.input_dim));
    std::vector<LabelRegion> mine;
    for (const auto& g : regions) {
      if (g.recording_id == r.id) mine.push_back(g);
    }
    labels.push_back(
        FrameLabelsFromRegions(mine, feats.back().NumFrames(), frame));
  }
  a.model.seed = SeedFromEnvironment(a.train.seed);
  a.train.seed = a.model.seed;
  SadModel model(a.model);
  TrainSad(model, feats, labels, a.train, [](int epoch, double loss) {
    std::fprintf(stderr, "epoch %d loss %.4f\n", epoch, loss);
  });
  SaveSad(a.out, model);
  std::fprintf(stderr, "training frame accuracy %.4f -> %s\n",
               SadFrameAccuracy(model, feats, labels), a.out.c_str());
}

// ---- segment ---------------------------------------------------------------

struct Inputs {
  std::string wav, id, manifest;
};

std::vector<ManifestEntry> ResolveInputs(const Inputs& in) {
  if (!in.manifest.empty()) return ReadManifest(in.manifest);
  const fs::path wav = in.wav;
  return {{in.id.empty() ? wav.stem().string() : in.id, wav, ""}};
}

void RunSegment(const ConfigFlags& flags, const std::string& config,
                const Inputs& in, const std::string& out) {
  const PipelineConfig cfg = flags.Resolve(config);
  Require(!cfg.sad_model.empty(), Errc::kConfig, "segment needs --sad-model");
  const auto model = LoadSad(cfg.sad_model.string());
  std::vector<SegmentRecord> all;
  for (const auto& rec : ResolveInputs(in)) {
    const SegmentList segs =
        SegmentWaveform(*model, LoadWav(rec.wav), cfg.segment);
    const auto records = ToSegmentRecords(rec.id, segs);
    all.insert(all.end(), records.begin(), records.end());
  }
  WriteSegments(out, all);
  std::cerr << "segments: " << all.size() << " -> " << out << "\n";
}

// ---- decode ----------------------------------------------------------------

struct DecodeArgs {
  Inputs in;
  std::string features, segments, out, dump_nbest, timing_out;
  int nbest = 5;
};

void RunDecode(const ConfigFlags& flags, const std::string& config,
               const DecodeArgs& a) {
  PipelineConfig cfg = flags.Resolve(config);
  if (!a.dump_nbest.empty())
    cfg.decode.nbest = std::max(cfg.decode.nbest, a.nbest);
  cfg.sad_model.clear();
  const Pipeline pipe(cfg);
  const int dim = pipe.asr().config().input_dim;

  std::vector<std::string> ids;
  std::vector<FeatureMatrix> raw;
  double audio_seconds = 0.0;
  if (!a.features.empty()) {
    for (auto& [id, f] : LoadFeatureArchive(a.features)) {
      audio_seconds += f.NumFrames() * f.frame_shift;
      ids.push_back(id);
      raw.push_back(std::move(f));
    }
  } else {
    std::map<std::string, std::vector<SegmentRecord>> by_rec;
    const bool segmented = !a.segments.empty();
    if (segmented) {
      for (auto& r : ReadSegments(a.segments))
        by_rec[r.recording_id].push_back(r);
    }
    for (const auto& rec : ResolveInputs(a.in)) {
      const Waveform wave = LoadWav(rec.wav);
      if (!segmented) {
        audio_seconds += wave.Duration();
        ids.push_back(rec.id);
        raw.push_back(AsrFeatures(wave, dim));
        continue;
      }
      for (const auto& s : by_rec[rec.id]) {
        const Waveform piece = SliceWaveform(wave, s.start, s.end);
        audio_seconds += piece.Duration();
        ids.push_back(s.segment_id);
        raw.push_back(AsrFeatures(piece, dim));
      }
    }
  }

  const auto t0 = Clock::now();
  std::vector<FeatureMatrix> normalized;
  CmvnStats stats = LoadCmvn(cfg.cmvn);
  for (const auto& f : raw) normalized.push_back(ApplyCmvn(f, stats));
  const NeuralLm<float>* lm_ptr = nullptr;
  std::unique_ptr<NeuralLm<float>> lm;
  if (!cfg.lm_model.empty()) {
    lm = LoadLm(cfg.lm_model.string());
    lm_ptr = lm.get();
  }
  const BeamDecoder decoder(pipe.asr(), lm_ptr, cfg.decode);
  const auto results = decoder.DecodeBatch(normalized, cfg.batch_size);
  const double wall = Seconds(t0, Clock::now());

  std::vector<TextRecord> hyps;
  for (size_t i = 0; i < ids.size(); ++i) {
    hyps.push_back({ids[i], pipe.vocab().Decode(results[i].best().tokens)});
  }
  WriteTextTable(fs::path(a.out), hyps);
  if (!a.dump_nbest.empty()) {
    std::ofstream os(a.dump_nbest);
    if (!os) Fail(Errc::kIo, "cannot write " + a.dump_nbest);
    char buf[256];
    for (size_t i = 0; i < ids.size(); ++i) {
      const auto& nb = results[i].nbest;
      for (size_t r = 0; r < nb.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t",
                      r + 1, nb[r].score, nb[r].att, nb[r].ctc, nb[r].lm);
        os << ids[i] << '\t' << buf << pipe.vocab().Decode(nb[r].tokens)
           << '\n';
      }
    }
  }
  std::printf(
      "decoded %zu utterances: audio %.2f s, wall %.3f s, RT factor %.4f\n",
      ids.size(), audio_seconds, wall, RtFactor(wall, audio_seconds));
  if (!a.timing_out.empty()) {
    std::ofstream os(a.timing_out);
    if (!os) Fail(Errc::kIo, "cannot write " + a.timing_out);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "audio_seconds\t%.6f\nwall_seconds\t%.6f\n",
                  audio_seconds, wall);
    os << buf;
  }
}

// Reads the "key TAB value" timing file written by decode --timing-out.
std::pair<double, double> ReadTiming(const std::string& path) {
  double audio = -1.0, wall = -1.0;
  for (const auto& line : ReadLines(path)) {
    const auto f = SplitTabs(line);
    Require(f.size() == 2, Errc::kFormat, "bad timing line: " + line);
    if (f[0] == "audio_seconds") audio = std::stod(f[1]);
    if (f[0] == "wall_seconds") wall = std::stod(f[1]);
  }
  Require(audio >= 0.0 && wall >= 0.0, Errc::kFormat,
          "incomplete timing file " + path);
  return {audio, wall};
}

// ---- score -----------------------------------------------------------------

void RunScore(const std::string& ref_path, const std::string& hyp_path,
              bool verbose, const std::string& timing) {
  const auto refs = ReadTextTable(ref_path);
  const auto hyps = ReadTextTable(hyp_path);
  std::map<std::string, std::string> hyp_by_id;
  for (const auto& h : hyps) {
    Require(hyp_by_id.emplace(h.id, h.text).second, Errc::kFormat,
            "duplicate hypothesis id " + h.id);
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  std::map<std::string, bool> seen;
  for (const auto& r : refs) {
    const auto it = hyp_by_id.find(r.id);
    Require(it != hyp_by_id.end(), Errc::kFormat,
            "no hypothesis for utterance " + r.id);
    Require(seen.emplace(r.id, true).second, Errc::kFormat,
            "duplicate reference id " + r.id);
    pairs.emplace_back(r.text, it->second);
  }
  for (const auto& h : hyps) {
    Require(seen.count(h.id) > 0, Errc::kFormat,
            "no reference for utterance " + h.id);
  }
  if (verbose) {
    std::printf("%-24s %6s %4s %4s %4s %8s\n", "utterance", "words", "sub",
                "del", "ins", "wer%");
    for (size_t i = 0; i < pairs.size(); ++i) {
      const AlignmentResult a = AlignText(pairs[i].first, pairs[i].second);
      const double w = a.ref_words > 0 ? 100.0 * a.Errors() / a.ref_words : 0.0;
      std::printf("%-24s %6d %4d %4d %4d %8.2f\n", refs[i].id.c_str(),
                  a.ref_words, a.substitutions, a.deletions, a.insertions, w);
    }
  }
  const WerResult w = CorpusWer(pairs);
  std::printf(
      "WER %.2f%% [ %ld / %ld, S=%ld D=%ld I=%ld ] over %zu utterances\n",
      w.wer, w.substitutions + w.deletions + w.insertions, w.ref_words,
      w.substitutions, w.deletions, w.insertions, pairs.size());
  if (!timing.empty()) {
    const auto [audio, wall] = ReadTiming(timing);
    std::printf("RT factor %.4f [ %.3f s / %.2f s audio ]\n",
                RtFactor(wall, audio), wall, audio);
  }
}

// ---- transcribe ------------------------------------------------------------

struct TranscribeArgs {
  Inputs in;
  std::string out, out_dir, keep, segments;
};

void RunTranscribe(const ConfigFlags& flags, const std::string& config,
                   const TranscribeArgs& a) {
  const PipelineConfig cfg = flags.Resolve(config);
  const Pipeline pipe(cfg);
  const auto recs = ResolveInputs(a.in);
  Require(a.in.manifest.empty() || !a.out_dir.empty(), Errc::kInvalidArgument,
          "--manifest needs --out-dir");
  Require(!a.in.manifest.empty() || !a.out.empty(), Errc::kInvalidArgument,
          "--wav needs --out");
  std::map<std::string, SegmentList> given;
  if (!a.segments.empty()) {
    for (const auto& r : ReadSegments(a.segments)) {
      given[r.recording_id].push_back({r.start, r.end});
    }
  }
  if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
  if (!a.keep.empty()) fs::create_directories(a.keep);

  // Each worker owns whole recordings; outputs go to per-recording files.
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (size_t i = next++; i < recs.size(); i = next++) {
      try {
        const auto& rec = recs[i];
        std::optional<SegmentList> segs;
        if (!a.segments.empty()) segs = given[rec.id];
        Intermediates dump;
        const Transcript t = pipe.Transcribe(LoadWav(rec.wav), rec.id, segs,
                                             a.keep.empty() ? nullptr : &dump);
        const fs::path out = a.out_dir.empty()
                                 ? fs::path(a.out)
                                 : fs::path(a.out_dir) / (rec.id + ".tsv");
        WriteTranscript(out, t);
        if (!a.keep.empty()) {
          const fs::path base = fs::path(a.keep) / rec.id;
          WriteSegments(fs::path(base.string() + ".segments.tsv"),
                        dump.segments);
          SaveFeatureArchive(base.string() + ".feats", dump.features);
          WriteTextTable(fs::path(base.string() + ".hyp.tsv"), dump.hypotheses);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const int jobs =
      std::max(1, std::min<int>(cfg.jobs, static_cast<int>(recs.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  std::cerr << "transcribed " << recs.size() << " recording(s)\n";
}

int Main(int argc, char** argv) {
  CLI::App app{"imsk: speech transcription toolkit"};
  app.require_subcommand(1);

  // train-tokenizer
  TokenizerArgs tok;
  auto* c_tok = app.add_subcommand("train-tokenizer",
                                   "train a unigram subword vocabulary");
  c_tok->add_option("--input", tok.input, "text, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  c_tok->add_option("--target-size", tok.opts.target_size, "pieces to keep");
  c_tok->add_option("--seed-max-len", tok.opts.seed_max_len,
                    "longest seed piece");
  c_tok->add_option("--prune-fraction", tok.opts.prune_fraction,
                    "share pruned per round");
  c_tok->add_option("--out", tok.out, "vocabulary file")->required();

  // train-asr
  AsrArgs asr;
  auto* c_asr =
      app.add_subcommand("train-asr", "train the CTC/attention recognizer");
  c_asr->add_option("--manifest", asr.manifest, "training manifest")
      ->required()
      ->check(CLI::ExistingFile);
  c_asr->add_option("--valid", asr.valid, "validation manifest")
      ->required()
      ->check(CLI::ExistingFile);
  c_asr->add_option("--tokenizer", asr.tokenizer, "subword vocabulary")
      ->required()
      ->check(CLI::ExistingFile);
  c_asr->add_option("--out", asr.out, "checkpoint to write")->required();
  c_asr
      ->add_option("--cmvn-out", asr.cmvn_out,
                   "normalization statistics to write")
      ->required();
  c_asr->add_option("--num-mels", asr.num_mels, "log-mel bands");
  c_asr->add_flag("--full-scale", asr.full_scale, "full-size layer dimensions");
  c_asr->add_option("--blstm-layers", asr.model.blstm_layers);
  c_asr->add_option("--blstm-units", asr.model.blstm_units);
  c_asr->add_option("--vgg-channels1", asr.model.vgg_channels1);
  c_asr->add_option("--vgg-channels2", asr.model.vgg_channels2);
  c_asr->add_option("--attn-dim", asr.model.attn_dim);
  c_asr->add_option("--conv-channels", asr.model.conv_channels);
  c_asr->add_option("--conv-filters", asr.model.conv_filters);
  c_asr->add_option("--dec-layers", asr.model.dec_layers);
  c_asr->add_option("--dec-units", asr.model.dec_units);
  c_asr->add_option("--embed-dim", asr.model.embed_dim);
  c_asr->add_option("--epochs", asr.train.epochs);
  c_asr->add_option("--batch-size", asr.train.batch_size);
  c_asr->add_option("--optimizer", asr.train.optimizer)
      ->check(CLI::IsMember({"adadelta", "adam"}));
  c_asr->add_option("--rho", asr.train.rho);
  c_asr->add_option("--eps", asr.train.eps);
  c_asr->add_option("--lr", asr.train.lr, "adam learning rate");
  c_asr->add_option("--clip", asr.train.clip);
  c_asr->add_option("--ctc-weight", asr.train.ctc_weight);
  c_asr->add_flag("--no-halving", asr.no_halving, "keep eps fixed on plateaus");
  c_asr->add_option("--seed", asr.train.seed, "overridden by IMSK_SEED");

  // train-lm
  LmArgs lm;
  auto* c_lm =
      app.add_subcommand("train-lm", "train the recurrent language model");
  c_lm->add_option("--text", lm.text, "one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  c_lm->add_option("--tokenizer", lm.tokenizer)
      ->required()
      ->check(CLI::ExistingFile);
  c_lm->add_option("--out", lm.out)->required();
  c_lm->add_option("--layers", lm.model.layers);
  c_lm->add_option("--units", lm.model.units);
  c_lm->add_option("--embed-dim", lm.model.embed_dim);
  c_lm->add_option("--epochs", lm.train.epochs);
  c_lm->add_option("--batch-size", lm.train.batch_size);
  c_lm->add_option("--optimizer", lm.train.optimizer)
      ->check(CLI::IsMember({"sgd", "adam"}));
  c_lm->add_option("--lr", lm.train.lr);
  c_lm->add_option("--clip", lm.train.clip);
  c_lm->add_option("--seed", lm.train.seed, "overridden by IMSK_SEED");

  // train-sad
  SadArgs sad;
  auto* c_sad =
      app.add_subcommand("train-sad", "train the speech activity detector");
  c_sad->add_option("--manifest", sad.manifest, "recordings")
      ->required()
      ->check(CLI::ExistingFile);
  c_sad->add_option("--labels", sad.labels, "labelled regions")
      ->required()
      ->check(CLI::ExistingFile);
  c_sad->add_option("--out", sad.out)->required();
  c_sad->add_option("--dim", sad.model.input_dim, "MFCC dimension");
  c_sad->add_option("--hidden", sad.model.hidden);
  c_sad->add_option("--epochs", sad.train.epochs);
  c_sad->add_option("--lr", sad.train.lr);
  c_sad->add_option("--seed", sad.train.seed, "overridden by IMSK_SEED");

  auto add_inputs = [](CLI::App* c, Inputs* in) {
    auto* wav = c->add_option("--wav", in->wav, "one recording")
                    ->check(CLI::ExistingFile);
    c->add_option("--id", in->id,
                  "recording id for --wav (default: file stem)");
    auto* man = c->add_option("--manifest", in->manifest, "recordings")
                    ->check(CLI::ExistingFile);
    wav->excludes(man);
    return std::make_pair(wav, man);
  };

  // segment
  ConfigFlags seg_flags;
  std::string seg_config, seg_out;
  Inputs seg_in;
  auto* c_seg = app.add_subcommand("segment", "detect speech segments");
  c_seg->add_option("--config", seg_config)->check(CLI::ExistingFile);
  AddSadFlags(c_seg, &seg_flags);
  auto [seg_wav, seg_man] = add_inputs(c_seg, &seg_in);
  c_seg->add_option("--out", seg_out, "segments file")->required();

  // decode
  ConfigFlags dec_flags;
  std::string dec_config;
  DecodeArgs dec;
  auto* c_dec =
      app.add_subcommand("decode", "decode utterances with beam search");
  c_dec->add_option("--config", dec_config)->check(CLI::ExistingFile);
  AddModelFlags(c_dec, &dec_flags);
  auto [dec_wav, dec_man] = add_inputs(c_dec, &dec.in);
  auto* dec_feats =
      c_dec->add_option("--features", dec.features, "feature archive")
          ->check(CLI::ExistingFile);
  dec_feats->excludes(dec_wav)->excludes(dec_man);
  c_dec
      ->add_option("--segments", dec.segments,
                   "decode these segments of the inputs")
      ->check(CLI::ExistingFile)
      ->excludes(dec_feats);
  c_dec->add_option("--out", dec.out, "hypotheses 'id TAB text'")->required();
  c_dec->add_option("--dump-nbest", dec.dump_nbest,
                    "write 'id rank score att ctc lm text' per hypothesis");
  c_dec->add_option("--nbest", dec.nbest,
                    "hypotheses per utterance in the dump");
  c_dec->add_option("--timing-out", dec.timing_out,
                    "audio and wall seconds, for score");

  // score
  std::string ref_path, hyp_path, timing_path;
  bool verbose = false;
  auto* c_score = app.add_subcommand("score", "word error rate of hypotheses");
  c_score->add_option("--ref", ref_path)->required()->check(CLI::ExistingFile);
  c_score->add_option("--hyp", hyp_path)->required()->check(CLI::ExistingFile);
  c_score->add_flag("--verbose", verbose, "per-utterance table");
  c_score
      ->add_option("--timing", timing_path,
                   "decode --timing-out file; adds RT factor")
      ->check(CLI::ExistingFile);

  // transcribe
  ConfigFlags tr_flags;
  std::string tr_config;
  TranscribeArgs tr;
  auto* c_tr =
      app.add_subcommand("transcribe", "segment and decode recordings");
  c_tr->add_option("--config", tr_config)->check(CLI::ExistingFile);
  AddModelFlags(c_tr, &tr_flags);
  AddSadFlags(c_tr, &tr_flags);
  tr_flags.Add(c_tr, "--jobs", "run.jobs", "recordings processed concurrently");
  auto [tr_wav, tr_man] = add_inputs(c_tr, &tr.in);
  c_tr->add_option("--out", tr.out, "transcript for --wav")->excludes(tr_man);
  c_tr->add_option("--out-dir", tr.out_dir, "transcripts for --manifest")
      ->excludes(tr_wav);
  c_tr->add_option("--segments", tr.segments,
                   "use these segments instead of detection")
      ->check(CLI::ExistingFile);
  c_tr->add_option("--keep-intermediates", tr.keep,
                   "directory for segments, features and segment hypotheses");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 2;
  }

  try {
    if (c_tok->parsed()) RunTrainTokenizer(tok);
    if (c_asr->parsed()) RunTrainAsr(asr);
    if (c_lm->parsed()) RunTrainLm(lm);
    if (c_sad->parsed()) RunTrainSad(sad);
    if (c_seg->parsed()) {
      Require(!seg_in.wav.empty() || !seg_in.manifest.empty(),
              Errc::kInvalidArgument, "segment needs --wav or --manifest");
      RunSegment(seg_flags, seg_config, seg_in, seg_out);
    }
    if (c_dec->parsed()) {
      Require(!dec.in.wav.empty() || !dec.in.manifest.empty() ||
                  !dec.features.empty(),
              Errc::kInvalidArgument,
              "decode needs --wav, --manifest or --features");
      RunDecode(dec_flags, dec_config, dec);
    }
    if (c_score->parsed()) RunScore(ref_path, hyp_path, verbose, timing_path);
    if (c_tr->parsed()) {
      Require(!tr.in.wav.empty() || !tr.in.manifest.empty(),
              Errc::kInvalidArgument, "transcribe needs --wav or --manifest");
      RunTranscribe(tr_flags, tr_config, tr);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << ErrcName(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return Main(argc, argv); }
