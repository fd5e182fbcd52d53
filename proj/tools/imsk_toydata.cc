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

// imsk_toydata: writes a small audio corpus for exercising the command-line
// tools: tone-rendered utterances with transcripts, labelled recordings for
// the activity detector, and long recordings that mix speech, silence and
// impulse noise.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "imsk/audio_features.h"
#include "imsk/error.h"
#include "imsk/pipeline.h"
#include "imsk/synthetic.h"

namespace {

namespace fs = std::filesystem;
using namespace imsk;

struct Options {
  std::string out;
  int num_train = 120;
  int num_valid = 20;
  int num_test = 20;
  int num_sad = 24;
  int num_recordings = 2;
  int max_words = 3;
  uint64_t seed = 7;
};

class SentenceSource {
 public:
  SentenceSource(uint64_t seed, int max_words)
      : rng_(seed), max_words_(max_words) {}

  std::string Next() {
    std::uniform_int_distribution<int> words(1, max_words_);
    std::uniform_int_distribution<size_t> pick(0, lexicon_.size() - 1);
    std::string s;
    for (int n = words(rng_); n > 0; --n) {
      if (!s.empty()) s += ' ';
      s += lexicon_[pick(rng_)];
    }
    return s;
  }

 private:
  std::mt19937_64 rng_;
  int max_words_;
  std::vector<std::string> lexicon_ = ToyAsrOptions{}.lexicon;
};

void Append(const Waveform& piece, Waveform* wave) {
  wave->samples.insert(wave->samples.end(), piece.samples.begin(),
                       piece.samples.end());
}

// Renders `count` utterances into dir/<split>/ and returns their manifest.
std::vector<ManifestEntry> WriteSplit(const fs::path& dir,
                                      const std::string& split, int count,
                                      SentenceSource* sentences,
                                      uint64_t seed) {
  fs::create_directories(dir / split);
  const ToneSpeechOptions tone;
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < count; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "%s-%03d", split.c_str(), i);
    const std::string text = sentences->Next();
    Waveform wave;
    wave.sample_rate = tone.sample_rate;
    AppendSilence(0.1, tone.noise, seed + 2 * i, &wave);
    Append(RenderToneSpeech(text, tone, seed + 2 * i + 1), &wave);
    AppendSilence(0.1, tone.noise, seed + 2 * i + 7919, &wave);
    const fs::path rel = fs::path(split) / (std::string(id) + ".wav");
    SaveWav(dir / rel, wave);
    entries.push_back({id, rel, text});
  }
  WriteManifest(dir / (split + ".tsv"), entries);
  return entries;
}

void Run(const Options& o) {
  const fs::path dir = o.out;
  fs::create_directories(dir);
  SentenceSource sentences(o.seed, o.max_words);

  const auto train =
      WriteSplit(dir, "train", o.num_train, &sentences, o.seed * 1000);
  WriteSplit(dir, "valid", o.num_valid, &sentences, o.seed * 1000 + 100000);
  const auto test =
      WriteSplit(dir, "test", o.num_test, &sentences, o.seed * 1000 + 200000);
  {
    std::ofstream text(dir / "text.txt");
    for (const auto& e : train) text << e.text << '\n';
  }
  std::vector<TextRecord> refs;
  for (const auto& e : test) refs.push_back({e.id, e.text});
  WriteTextTable(dir / "test.ref.tsv", refs);

  // Activity-detector corpus with region labels.
  SadCorpusOptions sad_opts;
  sad_opts.num_recordings = o.num_sad;
  sad_opts.seed = o.seed + 3;
  const FrameOptions frame;
  fs::create_directories(dir / "sad");
  std::vector<ManifestEntry> sad_entries;
  std::vector<LabelRegion> regions;
  for (const auto& r : MakeSadCorpus(sad_opts)) {
    const fs::path rel = fs::path("sad") / (r.id + ".wav");
    SaveWav(dir / rel, r.wave);
    sad_entries.push_back({r.id, rel, ""});
    const auto mine = FrameLabelsToRegions(r.id, r.frame_labels, frame);
    regions.insert(regions.end(), mine.begin(), mine.end());
  }
  WriteManifest(dir / "sad.tsv", sad_entries);
  WriteLabelRegions(dir / "sad_regions.tsv", regions);

  // Long recordings: utterances separated by silence and impulse noise.
  fs::create_directories(dir / "recordings");
  const ToneSpeechOptions tone;
  std::vector<ManifestEntry> recs;
  for (int i = 0; i < o.num_recordings; ++i) {
    char id[64];
    std::snprintf(id, sizeof(id), "rec-%02d", i);
    const uint64_t s = o.seed * 1000 + 300000 + 100 * i;
    Waveform wave;
    wave.sample_rate = tone.sample_rate;
    std::string text;
    AppendSilence(1.0, tone.noise, s, &wave);
    for (int k = 0; k < 3; ++k) {
      const std::string sentence = sentences.Next();
      text += (text.empty() ? "" : " ") + sentence;
      Append(RenderToneSpeech(sentence, tone, s + 10 + k), &wave);
      AppendSilence(1.2, tone.noise, s + 20 + k, &wave);
      if (k == 1) {
        AppendImpulses(0.5, 8.0, tone.noise, s + 30, &wave);
        AppendSilence(1.0, tone.noise, s + 40, &wave);
      }
    }
    const fs::path rel = fs::path("recordings") / (std::string(id) + ".wav");
    SaveWav(dir / rel, wave);
    recs.push_back({id, rel, text});
  }
  WriteManifest(dir / "recordings.tsv", recs);
  std::cerr << "toy corpus -> " << dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imsk_toydata: synthetic corpus for the imsk tools"};
  Options o;
  app.add_option("--out", o.out, "output directory")->required();
  app.add_option("--num-train", o.num_train);
  app.add_option("--num-valid", o.num_valid);
  app.add_option("--num-test", o.num_test);
  app.add_option("--num-sad", o.num_sad, "activity-detector recordings");
  app.add_option("--num-recordings", o.num_recordings, "long mixed recordings");
  app.add_option("--max-words", o.max_words, "words per utterance");
  app.add_option("--seed", o.seed);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  try {
    Run(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
