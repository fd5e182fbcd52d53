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

// End-to-end transcription (segmentation, then decoding of each segment)
// and the text formats exchanged between the command-line stages.

#ifndef IMSK_PIPELINE_H_
#define IMSK_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imsk/asr_model.h"
#include "imsk/audio_features.h"
#include "imsk/beam_decoder.h"
#include "imsk/neural_lm.h"
#include "imsk/sad.h"
#include "imsk/subword_tokenizer.h"

namespace imsk {

// Seconds with two decimals, as used by every time-stamped file.
std::string FormatSeconds(double seconds);

// Splits a line on tabs; a trailing '\r' is dropped first.
std::vector<std::string> SplitTabs(std::string_view line);

// "utt-id TAB wav-path TAB transcript"; relative wav paths are resolved
// against the manifest's directory. The transcript column may be absent.
struct ManifestEntry {
  std::string id;
  std::filesystem::path wav;
  std::string text;
};
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   std::span<const ManifestEntry> entries);

// "id TAB text" tables: references, hypotheses.
struct TextRecord {
  std::string id;
  std::string text;
};
std::vector<TextRecord> ReadTextTable(const std::filesystem::path& path);
void WriteTextTable(std::ostream& os, std::span<const TextRecord> records);
void WriteTextTable(const std::filesystem::path& path,
                    std::span<const TextRecord> records);

// "segment-id TAB recording-id TAB start TAB end".
struct SegmentRecord {
  std::string segment_id;
  std::string recording_id;
  double start = 0.0;
  double end = 0.0;
};
std::string SegmentId(std::string_view recording_id, int index);
std::vector<SegmentRecord> ToSegmentRecords(std::string_view recording_id,
                                            std::span<const Segment> segs);
void WriteSegments(std::ostream& os, std::span<const SegmentRecord> records);
void WriteSegments(const std::filesystem::path& path,
                   std::span<const SegmentRecord> records);
std::vector<SegmentRecord> ReadSegments(const std::filesystem::path& path);

// Activity-detector training labels: "recording-id TAB start TAB end TAB
// class" with class silence | speech | garbage (or 0 | 1 | 2). Frames not
// covered by any region are silence; each frame takes the class of its
// center time.
struct LabelRegion {
  std::string recording_id;
  double start = 0.0;
  double end = 0.0;
  int label = kSilence;
};
std::vector<LabelRegion> ReadLabelRegions(const std::filesystem::path& path);
void WriteLabelRegions(const std::filesystem::path& path,
                       std::span<const LabelRegion> regions);
std::vector<int> FrameLabelsFromRegions(std::span<const LabelRegion> regions,
                                        int num_frames,
                                        const FrameOptions& frame);
// Inverse of FrameLabelsFromRegions: one region per run of equal labels.
// Boundaries sit on the 2-decimal grid between neighbouring frame centers,
// so a written and re-read file reproduces `labels` when the frame shift
// is at least 10 ms.
std::vector<LabelRegion> FrameLabelsToRegions(std::string_view recording_id,
                                              std::span<const int> labels,
                                              const FrameOptions& frame);

struct TranscriptEntry {
  double start = 0.0;
  double end = 0.0;
  std::string text;
};
struct Transcript {
  std::string recording_id;
  std::vector<TranscriptEntry> entries;
};
// "start TAB end TAB text" lines.
void WriteTranscript(std::ostream& os, const Transcript& t);
void WriteTranscript(const std::filesystem::path& path, const Transcript& t);

// Audio between two times, sample indices rounded to the nearest sample.
Waveform SliceWaveform(const Waveform& wave, double start, double end);

// Recognizer features: log-mel bands rounded to float precision.
FeatureMatrix AsrFeatures(const Waveform& wave, int num_mels);

struct PipelineConfig {
  std::filesystem::path sad_model;
  std::filesystem::path asr_model;
  std::filesystem::path lm_model;  // optional
  std::filesystem::path tokenizer;
  std::filesystem::path cmvn;
  SegmentOptions segment;
  DecodeConfig decode;
  int batch_size = 8;
  int jobs = 1;
  uint64_t seed = 1;

  // Sets one "section.key" entry from its text form.
  void Set(std::string_view key, std::string_view value);
  // Every accepted key, in file order.
  static std::vector<std::string> Keys();
};

// INI-style text: "[section]" headers and "key = value" lines; '#' and ';'
// start comments; values may be quoted. Relative paths are resolved
// against `base_dir`.
PipelineConfig ParsePipelineConfig(std::istream& is,
                                   const std::filesystem::path& base_dir = {});
PipelineConfig LoadPipelineConfig(const std::filesystem::path& path);
void WritePipelineConfig(std::ostream& os, const PipelineConfig& cfg);

// Value of IMSK_SEED when set, else `fallback`.
uint64_t SeedFromEnvironment(uint64_t fallback);

// Throws kVocabMismatch unless tokenizer, recognizer and (optional) LM
// agree on vocabulary size and fingerprint.
void CheckVocabularies(const SubwordVocab& vocab, const AsrConfig& asr,
                       const LmConfig* lm);

// What a transcription produced on the way, for --keep-intermediates.
struct Intermediates {
  std::vector<SegmentRecord> segments;
  FeatureArchive features;  // per segment, before normalization
  std::vector<TextRecord> hypotheses;
};

class Pipeline {
 public:
  // Loads every model and validates the combination before any decoding.
  explicit Pipeline(const PipelineConfig& cfg);

  const PipelineConfig& config() const { return cfg_; }
  const SubwordVocab& vocab() const { return vocab_; }
  const HybridModel<float>& asr() const { return *asr_; }

  SegmentList Segment(const Waveform& wave) const;
  // Decodes feature matrices (normalized here) in batches and detokenizes.
  std::vector<std::string> DecodeFeatures(
      std::span<const FeatureMatrix> raw) const;
  // Full chain; `segments` replaces activity detection when given.
  Transcript Transcribe(const Waveform& wave, const std::string& recording_id,
                        const std::optional<SegmentList>& segments = {},
                        Intermediates* dump = nullptr) const;

 private:
  PipelineConfig cfg_;
  SubwordVocab vocab_;
  CmvnStats cmvn_;
  std::unique_ptr<SadModel> sad_;
  std::unique_ptr<HybridModel<float>> asr_;
  std::unique_ptr<NeuralLm<float>> lm_;
  std::unique_ptr<BeamDecoder> decoder_;
};

}  // namespace imsk

#endif  // IMSK_PIPELINE_H_
