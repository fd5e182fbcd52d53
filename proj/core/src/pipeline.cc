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

#include "imsk/pipeline.h"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "imsk/error.h"

namespace imsk {

namespace fs = std::filesystem;

std::string FormatSeconds(double seconds) {
  char buf[64];
  // Round half away from zero on the centisecond grid so 0.005 -> "0.01"
  // independently of binary representation noise.
  const double cs = std::round(seconds * 100.0 + (seconds >= 0 ? 1e-7 : -1e-7));
  std::snprintf(buf, sizeof(buf), "%.2f", cs / 100.0);
  return buf;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

namespace {

std::ifstream OpenIn(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(Errc::kIo, "cannot open " + path.string());
  return is;
}

std::ofstream OpenOut(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(Errc::kIo, "cannot write " + path.string());
  return os;
}

// Calls `fn(fields, line_number)` for each non-empty line.
void ForEachRow(
    const fs::path& path,
    const std::function<void(const std::vector<std::string>&, int)>& fn) {
  std::ifstream is = OpenIn(path);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    fn(SplitTabs(line), line_no);
  }
}

[[noreturn]] void BadRow(const fs::path& path, int line,
                         const std::string& what) {
  Fail(Errc::kFormat, path.string() + ":" + std::to_string(line) + ": " + what);
}

double ParseDouble(std::string_view text, const std::string& what) {
  double v = 0.0;
  const std::string s(text);
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    Fail(Errc::kFormat, "bad number for " + what + ": '" + s + "'");
  }
  return v;
}

int64_t ParseInt(std::string_view text, const std::string& what) {
  int64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(Errc::kFormat,
         "bad integer for " + what + ": '" + std::string(text) + "'");
  }
  return v;
}

void WriteTo(const fs::path& path,
             const std::function<void(std::ostream&)>& fn) {
  std::ofstream os = OpenOut(path);
  fn(os);
  if (!os) Fail(Errc::kIo, "write failed for " + path.string());
}

}  // namespace

std::vector<ManifestEntry> ReadManifest(const fs::path& path) {
  std::vector<ManifestEntry> out;
  const fs::path base = path.parent_path();
  ForEachRow(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty()) {
      BadRow(path, line, "expected 'utt-id TAB wav-path [TAB transcript]'");
    }
    fs::path wav = f[1];
    if (wav.is_relative()) wav = base / wav;
    out.push_back({f[0], wav, f.size() == 3 ? f[2] : std::string()});
  });
  return out;
}

void WriteManifest(const fs::path& path,
                   std::span<const ManifestEntry> entries) {
  WriteTo(path, [&](std::ostream& os) {
    for (const auto& e : entries) {
      os << e.id << '\t' << e.wav.string() << '\t' << e.text << '\n';
    }
  });
}

std::vector<TextRecord> ReadTextTable(const fs::path& path) {
  std::vector<TextRecord> out;
  ForEachRow(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() > 2 || f[0].empty())
      BadRow(path, line, "expected 'id TAB text'");
    out.push_back({f[0], f.size() == 2 ? f[1] : std::string()});
  });
  return out;
}

void WriteTextTable(std::ostream& os, std::span<const TextRecord> records) {
  for (const auto& r : records) os << r.id << '\t' << r.text << '\n';
}

void WriteTextTable(const fs::path& path, std::span<const TextRecord> records) {
  WriteTo(path, [&](std::ostream& os) { WriteTextTable(os, records); });
}

std::string SegmentId(std::string_view recording_id, int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return std::string(recording_id) + "-" + buf;
}

std::vector<SegmentRecord> ToSegmentRecords(std::string_view recording_id,
                                            std::span<const Segment> segs) {
  std::vector<SegmentRecord> out;
  for (size_t i = 0; i < segs.size(); ++i) {
    out.push_back({SegmentId(recording_id, static_cast<int>(i)),
                   std::string(recording_id), segs[i].start, segs[i].end});
  }
  return out;
}

void WriteSegments(std::ostream& os, std::span<const SegmentRecord> records) {
  for (const auto& r : records) {
    os << r.segment_id << '\t' << r.recording_id << '\t'
       << FormatSeconds(r.start) << '\t' << FormatSeconds(r.end) << '\n';
  }
}

void WriteSegments(const fs::path& path,
                   std::span<const SegmentRecord> records) {
  WriteTo(path, [&](std::ostream& os) { WriteSegments(os, records); });
}

std::vector<SegmentRecord> ReadSegments(const fs::path& path) {
  std::vector<SegmentRecord> out;
  ForEachRow(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() != 4) {
      BadRow(path, line,
             "expected 'segment-id TAB recording-id TAB start TAB end'");
    }
    SegmentRecord r{f[0], f[1], ParseDouble(f[2], "start"),
                    ParseDouble(f[3], "end")};
    if (!(r.start >= 0.0 && r.start < r.end))
      BadRow(path, line, "empty or negative segment");
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<LabelRegion> ReadLabelRegions(const fs::path& path) {
  std::vector<LabelRegion> out;
  ForEachRow(path, [&](const std::vector<std::string>& f, int line) {
    if (f.size() != 4) {
      BadRow(path, line, "expected 'recording-id TAB start TAB end TAB class'");
    }
    int label = -1;
    if (f[3] == "silence" || f[3] == "0") label = kSilence;
    if (f[3] == "speech" || f[3] == "1") label = kSpeech;
    if (f[3] == "garbage" || f[3] == "2") label = kGarbage;
    if (label < 0) BadRow(path, line, "unknown class '" + f[3] + "'");
    out.push_back(
        {f[0], ParseDouble(f[1], "start"), ParseDouble(f[2], "end"), label});
  });
  return out;
}

void WriteLabelRegions(const fs::path& path,
                       std::span<const LabelRegion> regions) {
  static constexpr const char* kNames[] = {"silence", "speech", "garbage"};
  WriteTo(path, [&](std::ostream& os) {
    for (const auto& r : regions) {
      os << r.recording_id << '\t' << FormatSeconds(r.start) << '\t'
         << FormatSeconds(r.end) << '\t' << kNames[r.label] << '\n';
    }
  });
}

std::vector<int> FrameLabelsFromRegions(std::span<const LabelRegion> regions,
                                        int num_frames,
                                        const FrameOptions& frame) {
  std::vector<int> labels(num_frames, kSilence);
  for (int t = 0; t < num_frames; ++t) {
    const double center = t * frame.frame_shift + 0.5 * frame.frame_length;
    for (const auto& r : regions) {
      if (center >= r.start && center < r.end) labels[t] = r.label;
    }
  }
  return labels;
}

std::vector<LabelRegion> FrameLabelsToRegions(std::string_view recording_id,
                                              std::span<const int> labels,
                                              const FrameOptions& frame) {
  Require(frame.frame_shift >= 0.01, Errc::kInvalidArgument,
          "frame shift below the 2-decimal time grid");
  const int n = static_cast<int>(labels.size());
  // Last grid point at or before the center of frame t.
  auto boundary = [&](int t) {
    const double center = t * frame.frame_shift + 0.5 * frame.frame_length;
    return std::floor(center * 100.0 + 1e-6) / 100.0;
  };
  std::vector<LabelRegion> out;
  for (int a = 0; a < n;) {
    int b = a;
    while (b < n && labels[b] == labels[a]) ++b;
    const double start = a == 0 ? 0.0 : boundary(a);
    const double end =
        b == n ? boundary(n - 1) + frame.frame_shift : boundary(b);
    out.push_back({std::string(recording_id), start, end, labels[a]});
    a = b;
  }
  return out;
}

void WriteTranscript(std::ostream& os, const Transcript& t) {
  for (const auto& e : t.entries) {
    os << FormatSeconds(e.start) << '\t' << FormatSeconds(e.end) << '\t'
       << e.text << '\n';
  }
}

void WriteTranscript(const fs::path& path, const Transcript& t) {
  WriteTo(path, [&](std::ostream& os) { WriteTranscript(os, t); });
}

Waveform SliceWaveform(const Waveform& wave, double start, double end) {
  Require(start >= 0.0 && start <= end, Errc::kInvalidArgument,
          "bad slice bounds");
  const auto n = static_cast<int64_t>(wave.samples.size());
  const int64_t a =
      std::clamp<int64_t>(std::llround(start * wave.sample_rate), 0, n);
  const int64_t b =
      std::clamp<int64_t>(std::llround(end * wave.sample_rate), a, n);
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(wave.samples.begin() + a, wave.samples.begin() + b);
  return out;
}

FeatureMatrix AsrFeatures(const Waveform& wave, int num_mels) {
  MelOptions o;
  o.num_mels = num_mels;
  FeatureMatrix f = ExtractLogMel(wave, o);
  // Archives store float32; rounding here makes a dumped archive decode
  // exactly like the features it was written from.
  f.frames = f.frames.cast<float>().cast<double>();
  return f;
}

namespace {

using Setter = std::function<void(PipelineConfig&, std::string_view)>;

struct KeyInfo {
  const char* key;
  Setter set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string Str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const std::vector<KeyInfo>& KeyTable() {
  using C = PipelineConfig;
  auto path = [](fs::path C::* m) {
    return KeyInfo{
        nullptr,
        [m](C& c, std::string_view v) { c.*m = fs::path(std::string(v)); },
        [m](const C& c) { return (c.*m).string(); }};
  };
  auto with = [](const char* key, KeyInfo k) {
    k.key = key;
    return k;
  };
  static const std::vector<KeyInfo> table = {
      with("sad.model", path(&C::sad_model)),
      {"sad.p_stay",
       [](C& c, std::string_view v) {
         c.segment.p_stay = ParseDouble(v, "sad.p_stay");
       },
       [](const C& c) { return Str(c.segment.p_stay); }},
      {"sad.max_speech",
       [](C& c, std::string_view v) {
         c.segment.post.max_speech = ParseDouble(v, "sad.max_speech");
       },
       [](const C& c) { return Str(c.segment.post.max_speech); }},
      {"sad.merge_max",
       [](C& c, std::string_view v) {
         c.segment.post.merge_max = ParseDouble(v, "sad.merge_max");
       },
       [](const C& c) { return Str(c.segment.post.merge_max); }},
      with("asr.model", path(&C::asr_model)),
      with("asr.tokenizer", path(&C::tokenizer)),
      with("asr.cmvn", path(&C::cmvn)),
      with("lm.model", path(&C::lm_model)),
      {"decode.beam",
       [](C& c, std::string_view v) {
         c.decode.beam = static_cast<int>(ParseInt(v, "decode.beam"));
       },
       [](const C& c) { return std::to_string(c.decode.beam); }},
      {"decode.ctc_weight",
       [](C& c, std::string_view v) {
         c.decode.ctc_weight = ParseDouble(v, "decode.ctc_weight");
       },
       [](const C& c) { return Str(c.decode.ctc_weight); }},
      {"decode.lm_weight",
       [](C& c, std::string_view v) {
         c.decode.lm_weight = ParseDouble(v, "decode.lm_weight");
       },
       [](const C& c) { return Str(c.decode.lm_weight); }},
      {"decode.max_output_ratio",
       [](C& c, std::string_view v) {
         c.decode.max_output_ratio = ParseDouble(v, "decode.max_output_ratio");
       },
       [](const C& c) { return Str(c.decode.max_output_ratio); }},
      {"decode.batch_size",
       [](C& c, std::string_view v) {
         c.batch_size = static_cast<int>(ParseInt(v, "decode.batch_size"));
       },
       [](const C& c) { return std::to_string(c.batch_size); }},
      {"run.jobs",
       [](C& c, std::string_view v) {
         c.jobs = static_cast<int>(ParseInt(v, "run.jobs"));
       },
       [](const C& c) { return std::to_string(c.jobs); }},
      {"run.seed",
       [](C& c, std::string_view v) {
         c.seed = static_cast<uint64_t>(ParseInt(v, "run.seed"));
       },
       [](const C& c) { return std::to_string(c.seed); }},
  };
  return table;
}

bool IsPathKey(std::string_view key) {
  return key == "sad.model" || key == "asr.model" || key == "asr.tokenizer" ||
         key == "asr.cmvn" || key == "lm.model";
}

std::string Unquote(std::string v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') &&
      v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

}  // namespace

void PipelineConfig::Set(std::string_view key, std::string_view value) {
  for (const auto& k : KeyTable()) {
    if (key == k.key) {
      k.set(*this, value);
      return;
    }
  }
  Fail(Errc::kConfig, "unknown configuration key '" + std::string(key) + "'");
}

std::vector<std::string> PipelineConfig::Keys() {
  std::vector<std::string> out;
  for (const auto& k : KeyTable()) out.emplace_back(k.key);
  return out;
}

PipelineConfig ParsePipelineConfig(std::istream& is, const fs::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    Fail(Errc::kConfig, std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      Fail(Errc::kConfig, "config: key '" + section + "' outside a section");
    }
    for (const auto& [name, node] : body) {
      const std::string key = section + "." + name;
      std::string value = Unquote(node.get_value<std::string>());
      // Inline comments after the value.
      for (const char c : {'#', ';'}) {
        const size_t pos = value.find(std::string(" ") + c);
        if (pos != std::string::npos) value = value.substr(0, pos);
      }
      while (!value.empty() &&
             std::isspace(static_cast<unsigned char>(value.back()))) {
        value.pop_back();
      }
      value = Unquote(value);
      if (IsPathKey(key) && !value.empty() && fs::path(value).is_relative()) {
        value = (base_dir / value).string();
      }
      cfg.Set(key, value);
    }
  }
  return cfg;
}

PipelineConfig LoadPipelineConfig(const fs::path& path) {
  std::ifstream is = OpenIn(path);
  return ParsePipelineConfig(is, path.parent_path());
}

void WritePipelineConfig(std::ostream& os, const PipelineConfig& cfg) {
  std::string section;
  for (const auto& k : KeyTable()) {
    const std::string_view key = k.key;
    const size_t dot = key.find('.');
    const std::string sec(key.substr(0, dot));
    if (sec != section) {
      os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
      section = sec;
    }
    os << key.substr(dot + 1) << " = " << k.get(cfg) << '\n';
  }
}

uint64_t SeedFromEnvironment(uint64_t fallback) {
  const char* env = std::getenv("IMSK_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  return static_cast<uint64_t>(ParseInt(env, "IMSK_SEED"));
}

void CheckVocabularies(const SubwordVocab& vocab, const AsrConfig& asr,
                       const LmConfig* lm) {
  Require(asr.vocab_size == vocab.Size() && asr.vocab_hash == vocab.Hash(),
          Errc::kVocabMismatch,
          "recognizer was trained with a different tokenizer vocabulary");
  if (lm) {
    Require(lm->vocab_size == vocab.Size() && lm->vocab_hash == vocab.Hash(),
            Errc::kVocabMismatch,
            "language model was trained with a different tokenizer vocabulary");
  }
}

namespace {

// Re-throws with the stage and item that failed.
template <typename Fn>
auto InStage(const std::string& stage, const std::string& item, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    Fail(e.code(), stage + " [" + item + "]: " + e.what());
  }
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& cfg) : cfg_(cfg) {
  Require(cfg_.batch_size >= 1, Errc::kConfig, "batch size must be >= 1");
  Require(cfg_.jobs >= 1, Errc::kConfig, "jobs must be >= 1");
  Require(
      !cfg_.asr_model.empty() && !cfg_.tokenizer.empty() && !cfg_.cmvn.empty(),
      Errc::kConfig, "config needs asr.model, asr.tokenizer and asr.cmvn");
  vocab_ = InStage("load tokenizer", cfg_.tokenizer.string(),
                   [&] { return SubwordVocab::Load(cfg_.tokenizer); });
  asr_ = InStage("load recognizer", cfg_.asr_model.string(),
                 [&] { return LoadAsrModel(cfg_.asr_model.string()); });
  if (!cfg_.lm_model.empty()) {
    lm_ = InStage("load language model", cfg_.lm_model.string(),
                  [&] { return LoadLm(cfg_.lm_model.string()); });
  }
  CheckVocabularies(vocab_, asr_->config(), lm_ ? &lm_->config() : nullptr);
  cmvn_ = InStage("load cmvn", cfg_.cmvn.string(),
                  [&] { return LoadCmvn(cfg_.cmvn); });
  Require(cmvn_.Dim() == asr_->config().input_dim, Errc::kConfig,
          "cmvn dim " + std::to_string(cmvn_.Dim()) +
              " differs from recognizer input dim " +
              std::to_string(asr_->config().input_dim));
  if (!cfg_.sad_model.empty()) {
    sad_ = InStage("load activity detector", cfg_.sad_model.string(),
                   [&] { return LoadSad(cfg_.sad_model.string()); });
  }
  decoder_ = std::make_unique<BeamDecoder>(*asr_, lm_.get(), cfg_.decode);
}

SegmentList Pipeline::Segment(const Waveform& wave) const {
  Require(sad_ != nullptr, Errc::kConfig,
          "segmentation needs sad.model in the configuration");
  return SegmentWaveform(*sad_, wave, cfg_.segment);
}

std::vector<std::string> Pipeline::DecodeFeatures(
    std::span<const FeatureMatrix> raw) const {
  std::vector<FeatureMatrix> normalized;
  std::vector<size_t> which;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].NumFrames() == 0) continue;  // shorter than one frame
    normalized.push_back(ApplyCmvn(raw[i], cmvn_));
    which.push_back(i);
  }
  std::vector<std::string> texts(raw.size());
  const auto results = decoder_->DecodeBatch(normalized, cfg_.batch_size);
  for (size_t k = 0; k < which.size(); ++k) {
    texts[which[k]] = vocab_.Decode(results[k].best().tokens);
  }
  return texts;
}

Transcript Pipeline::Transcribe(const Waveform& wave,
                                const std::string& recording_id,
                                const std::optional<SegmentList>& segments,
                                Intermediates* dump) const {
  Transcript out;
  out.recording_id = recording_id;
  const SegmentList segs = segments ? *segments
                                    : InStage("segment", recording_id,
                                              [&] { return Segment(wave); });
  const std::vector<SegmentRecord> records =
      ToSegmentRecords(recording_id, segs);
  std::vector<FeatureMatrix> feats;
  for (const auto& r : records) {
    feats.push_back(InStage("features", r.segment_id, [&] {
      const Waveform piece = SliceWaveform(wave, r.start, r.end);
      const MelOptions mel;
      if (piece.samples.size() <
          static_cast<size_t>(
              std::llround(mel.frame.frame_length * wave.sample_rate))) {
        return FeatureMatrix{Eigen::MatrixXd(0, asr_->config().input_dim)};
      }
      return AsrFeatures(piece, asr_->config().input_dim);
    }));
  }
  const std::vector<std::string> texts =
      InStage("decode", recording_id, [&] { return DecodeFeatures(feats); });
  for (size_t i = 0; i < segs.size(); ++i) {
    out.entries.push_back({segs[i].start, segs[i].end, texts[i]});
  }
  if (dump) {
    dump->segments = records;
    dump->features.clear();
    dump->hypotheses.clear();
    for (size_t i = 0; i < records.size(); ++i) {
      dump->features.emplace_back(records[i].segment_id, feats[i]);
      dump->hypotheses.push_back({records[i].segment_id, texts[i]});
    }
  }
  return out;
}

}  // namespace imsk
