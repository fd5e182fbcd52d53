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

// Generated corpora for desk-scale training and tests. Nothing here models
// real speech; the generators only need to be learnable and reproducible.

#ifndef IMSK_SYNTHETIC_H_
#define IMSK_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "imsk/audio_features.h"

namespace imsk {

// Feature-level corpus: every character (and the pause between words) has a
// fixed random template vector; an utterance is the templates of its text,
// each held for a random number of frames, plus Gaussian noise.
struct ToyAsrOptions {
  int num_utterances = 240;
  int feat_dim = 20;
  int min_words = 1;
  int max_words = 3;
  int min_frames_per_char = 5;
  int max_frames_per_char = 7;
  int edge_frames = 3;  // pause frames before and after the text
  double noise = 0.3;
  uint64_t seed = 11;
  uint64_t template_seed = 5;  // shared between corpora that must agree
  std::vector<std::string> lexicon = {"ba",  "dim", "kola", "su",
                                      "rek", "mu",  "tana", "bis"};
};

struct ToyUtterance {
  std::string id;
  std::string text;
  FeatureMatrix feats;
};

std::vector<ToyUtterance> MakeToyAsrCorpus(const ToyAsrOptions& opts);

// Audio rendering of text: each character becomes a short two-tone chord,
// spaces become near-silence.
struct ToneSpeechOptions {
  int sample_rate = 16000;
  double char_seconds = 0.08;
  double space_seconds = 0.05;
  double amplitude = 0.3;
  double noise = 0.003;
};

Waveform RenderToneSpeech(const std::string& text,
                          const ToneSpeechOptions& opts, uint64_t seed);

// Sample-level pieces used by the activity-detection corpus.
void AppendSilence(double seconds, double noise, uint64_t seed, Waveform* wave);
void AppendImpulses(double seconds, double rate_hz, double noise, uint64_t seed,
                    Waveform* wave);

// Recordings of alternating silence, tone "speech" and impulse "garbage"
// regions with one label (0 silence, 1 speech, 2 garbage) per analysis frame.
struct SadCorpusOptions {
  int num_recordings = 24;
  int regions_per_recording = 6;
  double min_region_seconds = 0.4;
  double max_region_seconds = 1.5;
  int sample_rate = 16000;
  double frame_length = 0.025;
  double frame_shift = 0.010;
  uint64_t seed = 3;
};

struct SadRecording {
  std::string id;
  Waveform wave;
  std::vector<int> frame_labels;
};

std::vector<SadRecording> MakeSadCorpus(const SadCorpusOptions& opts);

// Labels of the frames of `wave` given per-sample labels: each frame takes
// the label of its center sample.
std::vector<int> FrameLabelsFromSamples(const std::vector<int>& sample_labels,
                                        int sample_rate, double frame_length,
                                        double frame_shift);

}  // namespace imsk

#endif  // IMSK_SYNTHETIC_H_
