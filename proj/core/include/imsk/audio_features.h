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

// Audio loading, log-Mel / MFCC front end, and global CMVN.

#ifndef IMSK_AUDIO_FEATURES_H_
#define IMSK_AUDIO_FEATURES_H_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace imsk {

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double Duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a RIFF/WAVE file holding 16-bit linear PCM mono audio.
Waveform LoadWav(const std::filesystem::path& path);
Waveform ParseWav(std::string_view bytes);
// Writes 16-bit PCM mono; samples are clipped to [-1, 1].
void SaveWav(const std::filesystem::path& path, const Waveform& wave);

struct FrameOptions {
  double frame_length = 0.025;  // seconds
  double frame_shift = 0.010;   // seconds
  double preemphasis = 0.97;
  int fft_size = 0;  // 0 = smallest power of two >= frame length in samples
};

struct MelOptions {
  FrameOptions frame;
  int num_mels = 80;
  double low_freq = 20.0;
  double high_freq = 0.0;  // <= 0 means offset from Nyquist
};

struct MfccOptions {
  FrameOptions frame;
  int num_mels = 40;
  int num_ceps = 40;  // kept equal to num_mels: no cepstral truncation
  double low_freq = 20.0;
  double high_freq = 0.0;
};

// T x d, one row per frame.
struct FeatureMatrix {
  Eigen::MatrixXd frames;
  double frame_shift = 0.010;
  double frame_length = 0.025;

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
};

// 1 + floor((num_samples - frame) / shift); 0 when the signal is shorter
// than one frame. The trailing partial frame is dropped.
int NumFrames(int64_t num_samples, int frame_samples, int shift_samples);

inline constexpr double kLogMelFloor = 1e-10;

// Triangular filters on the Mel scale, mel(f) = 1127 ln(1 + f / 700).
class MelBank {
 public:
  MelBank(int num_mels, int fft_size, int sample_rate, double low_freq,
          double high_freq);

  // num_mels x (fft_size / 2 + 1)
  const Eigen::MatrixXd& weights() const { return weights_; }
  double CenterFrequency(int bin) const { return centers_[bin]; }
  int NumMels() const { return static_cast<int>(weights_.rows()); }

  static double HzToMel(double hz);
  static double MelToHz(double mel);

 private:
  Eigen::MatrixXd weights_;
  std::vector<double> centers_;
};

int FftSizeFor(const FrameOptions& opts, int sample_rate);

// Pre-emphasised, Hamming-windowed power spectra, one row per frame.
Eigen::MatrixXd PowerSpectra(const Waveform& wave, const FrameOptions& opts);

FeatureMatrix ExtractLogMel(const Waveform& wave, const MelOptions& opts = {});
FeatureMatrix ExtractMfcc(const Waveform& wave, const MfccOptions& opts = {});

// Orthonormal DCT-II matrix: ceps = D * logmel. Its inverse is D^T.
Eigen::MatrixXd DctMatrix(int n);
// Maps cepstral rows back to log-Mel rows (requires num_ceps == num_mels).
Eigen::MatrixXd InverseDct(const Eigen::MatrixXd& ceps_rows);

struct CmvnStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  int64_t frame_count = 0;

  int Dim() const { return static_cast<int>(mean.size()); }
};

CmvnStats ComputeCmvn(std::span<const FeatureMatrix> features);
FeatureMatrix ApplyCmvn(const FeatureMatrix& features, const CmvnStats& stats);

void WriteCmvn(std::ostream& os, const CmvnStats& stats);
CmvnStats ReadCmvn(std::istream& is);
void SaveCmvn(const std::filesystem::path& path, const CmvnStats& stats);
CmvnStats LoadCmvn(const std::filesystem::path& path);

// "FEAT1" records: utterance id, u32 T, u32 d, row-major float32.
void WriteFeatureRecord(std::ostream& os, std::string_view utt_id,
                        const FeatureMatrix& features);
std::optional<std::pair<std::string, FeatureMatrix>> ReadFeatureRecord(
    std::istream& is);

using FeatureArchive = std::vector<std::pair<std::string, FeatureMatrix>>;
void SaveFeatureArchive(const std::filesystem::path& path,
                        const FeatureArchive& archive);
FeatureArchive LoadFeatureArchive(const std::filesystem::path& path);

}  // namespace imsk

#endif  // IMSK_AUDIO_FEATURES_H_
