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

#include "imsk/synthetic.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "imsk/error.h"
#include "imsk/subword_tokenizer.h"

namespace imsk {
namespace {

std::string PaddedId(const std::string& prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return prefix + buf;
}

// Two chord frequencies per character, spread over 300..3500 Hz.
std::pair<double, double> ChordFor(const std::string& ch) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : ch) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  const double f1 = 300.0 + static_cast<double>(h % 23) * 60.0;
  const double f2 = 1800.0 + static_cast<double>((h / 23) % 29) * 60.0;
  return {f1, f2};
}

}  // namespace

std::vector<ToyUtterance> MakeToyAsrCorpus(const ToyAsrOptions& opts) {
  Require(opts.num_utterances > 0 && opts.feat_dim > 0 &&
              !opts.lexicon.empty() && opts.min_words >= 1 &&
              opts.max_words >= opts.min_words &&
              opts.min_frames_per_char >= 1 &&
              opts.max_frames_per_char >= opts.min_frames_per_char,
          Errc::kInvalidArgument, "bad toy corpus options");
  // Templates depend only on the symbol and template_seed.
  std::map<std::string, Eigen::VectorXd> templates;
  auto template_for = [&](const std::string& sym) -> const Eigen::VectorXd& {
    auto it = templates.find(sym);
    if (it != templates.end()) return it->second;
    uint64_t h = opts.template_seed;
    for (unsigned char c : sym) h = h * 1315423911ULL + c;
    std::mt19937_64 trng(h);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd v(opts.feat_dim);
    for (int k = 0; k < opts.feat_dim; ++k) v(k) = n(trng);
    if (sym == " ") v *= 0.1;
    return templates.emplace(sym, v).first->second;
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> n_words(opts.min_words, opts.max_words);
  std::uniform_int_distribution<size_t> pick(0, opts.lexicon.size() - 1);
  std::uniform_int_distribution<int> dur(opts.min_frames_per_char,
                                         opts.max_frames_per_char);
  std::normal_distribution<double> noise(0.0, opts.noise);

  std::vector<ToyUtterance> out;
  for (int i = 0; i < opts.num_utterances; ++i) {
    ToyUtterance u;
    u.id = PaddedId("toy", i);
    const int words = n_words(rng);
    for (int w = 0; w < words; ++w) {
      if (w) u.text += ' ';
      u.text += opts.lexicon[pick(rng)];
    }
    std::vector<std::string> symbols(opts.edge_frames, " ");
    for (const std::string& ch : SplitCodePoints(u.text)) {
      const int d = dur(rng);
      for (int k = 0; k < d; ++k) symbols.push_back(ch);
    }
    for (int k = 0; k < opts.edge_frames; ++k) symbols.push_back(" ");
    u.feats.frames.resize(static_cast<Eigen::Index>(symbols.size()),
                          opts.feat_dim);
    for (size_t t = 0; t < symbols.size(); ++t) {
      const Eigen::VectorXd& tv = template_for(symbols[t]);
      for (int k = 0; k < opts.feat_dim; ++k) {
        u.feats.frames(static_cast<Eigen::Index>(t), k) = tv(k) + noise(rng);
      }
    }
    out.push_back(std::move(u));
  }
  return out;
}

Waveform RenderToneSpeech(const std::string& text,
                          const ToneSpeechOptions& opts, uint64_t seed) {
  Waveform w;
  w.sample_rate = opts.sample_rate;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, opts.noise);
  const double two_pi = 2.0 * std::numbers::pi;
  for (const std::string& ch : SplitCodePoints(text)) {
    if (ch == " ") {
      const int n = static_cast<int>(opts.space_seconds * opts.sample_rate);
      for (int i = 0; i < n; ++i)
        w.samples.push_back(static_cast<float>(noise(rng)));
      continue;
    }
    const auto [f1, f2] = ChordFor(ch);
    const int n = static_cast<int>(opts.char_seconds * opts.sample_rate);
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / opts.sample_rate;
      // Short raised-cosine ramps keep chord edges from splattering.
      const double ramp = std::min({1.0, i / 80.0, (n - 1 - i) / 80.0});
      const double v = opts.amplitude * ramp *
                           (0.6 * std::sin(two_pi * f1 * t) +
                            0.4 * std::sin(two_pi * f2 * t)) +
                       noise(rng);
      w.samples.push_back(static_cast<float>(std::clamp(v, -1.0, 1.0)));
    }
  }
  return w;
}

void AppendSilence(double seconds, double noise, uint64_t seed,
                   Waveform* wave) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  const int count = static_cast<int>(seconds * wave->sample_rate);
  for (int i = 0; i < count; ++i) {
    wave->samples.push_back(static_cast<float>(n(rng)));
  }
}

void AppendImpulses(double seconds, double rate_hz, double noise, uint64_t seed,
                    Waveform* wave) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int count = static_cast<int>(seconds * wave->sample_rate);
  const double p = rate_hz / wave->sample_rate;
  int decay = 0;
  double amp = 0.0;
  for (int i = 0; i < count; ++i) {
    if (u(rng) < p) {
      amp = 0.5 + 0.4 * u(rng);
      decay = 40;
    }
    double v = n(rng);
    if (decay > 0) {
      v += amp * ((decay % 2) ? 1.0 : -1.0) * decay / 40.0;
      --decay;
    }
    wave->samples.push_back(static_cast<float>(std::clamp(v, -1.0, 1.0)));
  }
}

std::vector<int> FrameLabelsFromSamples(const std::vector<int>& sample_labels,
                                        int sample_rate, double frame_length,
                                        double frame_shift) {
  const int flen = static_cast<int>(std::lround(frame_length * sample_rate));
  const int shift = static_cast<int>(std::lround(frame_shift * sample_rate));
  const int64_t n = static_cast<int64_t>(sample_labels.size());
  if (n < flen) return {};
  const int frames = NumFrames(n, flen, shift);
  std::vector<int> out(frames);
  for (int f = 0; f < frames; ++f) {
    out[f] = sample_labels[static_cast<size_t>(f) * shift + flen / 2];
  }
  return out;
}

std::vector<SadRecording> MakeSadCorpus(const SadCorpusOptions& opts) {
  Require(opts.num_recordings > 0 && opts.regions_per_recording > 0 &&
              opts.max_region_seconds >= opts.min_region_seconds &&
              opts.min_region_seconds > 0,
          Errc::kInvalidArgument, "bad activity corpus options");
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> len(opts.min_region_seconds,
                                             opts.max_region_seconds);
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> letter(0, 25);
  std::vector<SadRecording> out;
  for (int r = 0; r < opts.num_recordings; ++r) {
    SadRecording rec;
    rec.id = PaddedId("rec", r);
    rec.wave.sample_rate = opts.sample_rate;
    std::vector<int> sample_labels;
    int prev = -1;
    for (int k = 0; k < opts.regions_per_recording; ++k) {
      int c = kind(rng);
      if (c == prev) c = (c + 1 + kind(rng) % 2) % 3;
      prev = c;
      const double seconds = len(rng);
      const uint64_t seed = rng();
      if (c == 0) {
        AppendSilence(seconds, 0.003, seed, &rec.wave);
      } else if (c == 2) {
        AppendImpulses(seconds, 25.0, 0.003, seed, &rec.wave);
      } else {
        ToneSpeechOptions to;
        to.sample_rate = opts.sample_rate;
        // Words of 2 to 5 letters with the inter-word pauses of real text.
        std::string text;
        const int chars =
            std::max(1, static_cast<int>(seconds / to.char_seconds));
        for (int i = 0, word = 0; i < chars; ++i) {
          if (word >= 2 && (word == 5 || letter(rng) % 3 == 0) &&
              i + 1 < chars) {
            text += ' ';
            word = 0;
          }
          text += static_cast<char>('a' + letter(rng));
          ++word;
        }
        Waveform w = RenderToneSpeech(text, to, seed);
        rec.wave.samples.insert(rec.wave.samples.end(), w.samples.begin(),
                                w.samples.end());
      }
      sample_labels.resize(rec.wave.samples.size(), c);
    }
    rec.frame_labels = FrameLabelsFromSamples(
        sample_labels, opts.sample_rate, opts.frame_length, opts.frame_shift);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace imsk
