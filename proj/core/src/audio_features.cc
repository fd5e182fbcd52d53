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

#include "imsk/audio_features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "imsk/binary_io.h"
#include "imsk/error.h"

namespace imsk {
namespace {

uint32_t U32At(std::string_view b, size_t off) {
  return static_cast<uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

uint16_t U16At(std::string_view b, size_t off) {
  return static_cast<uint16_t>(static_cast<unsigned char>(b[off]) |
                               static_cast<unsigned char>(b[off + 1]) << 8);
}

int SamplesFor(double seconds, int sample_rate) {
  return static_cast<int>(std::lround(seconds * sample_rate));
}

}  // namespace

Waveform ParseWav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
    Fail(Errc::kFormat, "not a RIFF/WAVE file");
  }
  size_t pos = 12;
  bool have_fmt = false;
  int channels = 0, sample_rate = 0, bits = 0;
  while (pos + 8 <= b.size()) {
    const std::string_view id = b.substr(pos, 4);
    const uint32_t size = U32At(b, pos + 4);
    const size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > b.size()) {
        Fail(Errc::kTruncated, "truncated fmt chunk");
      }
      const uint16_t format = U16At(b, body);
      channels = U16At(b, body + 2);
      sample_rate = static_cast<int>(U32At(b, body + 4));
      bits = U16At(b, body + 14);
      if (format != 1) {
        Fail(Errc::kUnsupportedEncoding, "unsupported WAV format tag " +
                                             std::to_string(format) +
                                             " (only linear PCM)");
      }
      if (channels != 1) {
        Fail(Errc::kMultichannel, "expected mono audio, got " +
                                      std::to_string(channels) + " channels");
      }
      if (bits != 16) {
        Fail(Errc::kUnsupportedEncoding, "unsupported sample width " +
                                             std::to_string(bits) +
                                             " bits (only 16-bit PCM)");
      }
      if (sample_rate < 8000) {
        Fail(Errc::kUnsupportedEncoding,
             "sample rate " + std::to_string(sample_rate) + " below 8000 Hz");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) Fail(Errc::kFormat, "data chunk before fmt chunk");
      if (body + size > b.size()) {
        Fail(Errc::kTruncated, "data chunk declares " + std::to_string(size) +
                                   " bytes but only " +
                                   std::to_string(b.size() - body) +
                                   " are present");
      }
      if (size < 2) Fail(Errc::kEmptyInput, "WAV file has no samples");
      Waveform wave;
      wave.sample_rate = sample_rate;
      wave.samples.resize(size / 2);
      for (size_t i = 0; i < wave.samples.size(); ++i) {
        const auto v = static_cast<int16_t>(U16At(b, body + 2 * i));
        wave.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) Fail(Errc::kTruncated, "missing fmt chunk");
  Fail(Errc::kTruncated, "missing data chunk");
}

Waveform LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(Errc::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  try {
    return ParseWav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void SaveWav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(Errc::kIo, "cannot write " + path.string());
  const auto data_bytes = static_cast<uint32_t>(wave.samples.size() * 2);
  io::WriteMagic(out, "RIFF");
  io::WriteLe<uint32_t>(out, 36 + data_bytes);
  io::WriteMagic(out, "WAVEfmt ");
  io::WriteLe<uint32_t>(out, 16);
  io::WriteLe<uint16_t>(out, 1);
  io::WriteLe<uint16_t>(out, 1);
  io::WriteLe<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate));
  io::WriteLe<uint32_t>(out, static_cast<uint32_t>(wave.sample_rate * 2));
  io::WriteLe<uint16_t>(out, 2);
  io::WriteLe<uint16_t>(out, 16);
  io::WriteMagic(out, "data");
  io::WriteLe<uint32_t>(out, data_bytes);
  for (float s : wave.samples) {
    const double clipped = std::clamp(static_cast<double>(s), -1.0, 1.0);
    const auto q = static_cast<int16_t>(
        std::clamp<long>(std::lround(clipped * 32768.0), -32768, 32767));
    io::WriteLe<int16_t>(out, q);
  }
  if (!out) Fail(Errc::kIo, "write failed for " + path.string());
}

int NumFrames(int64_t num_samples, int frame_samples, int shift_samples) {
  if (num_samples < frame_samples) return 0;
  return static_cast<int>(1 + (num_samples - frame_samples) / shift_samples);
}

double MelBank::HzToMel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }

double MelBank::MelToHz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

MelBank::MelBank(int num_mels, int fft_size, int sample_rate, double low_freq,
                 double high_freq) {
  Require(num_mels > 0, Errc::kInvalidArgument, "num_mels must be positive");
  const double nyquist = 0.5 * sample_rate;
  if (high_freq <= 0.0) high_freq += nyquist;
  Require(low_freq >= 0.0 && high_freq > low_freq && high_freq <= nyquist,
          Errc::kInvalidArgument, "invalid Mel frequency range");
  const int num_bins = fft_size / 2 + 1;
  const double mel_low = HzToMel(low_freq);
  const double mel_high = HzToMel(high_freq);
  const double delta = (mel_high - mel_low) / (num_mels + 1);
  weights_ = Eigen::MatrixXd::Zero(num_mels, num_bins);
  centers_.resize(num_mels);
  for (int m = 0; m < num_mels; ++m) {
    const double left = mel_low + m * delta;
    const double center = left + delta;
    const double right = center + delta;
    centers_[m] = MelToHz(center);
    for (int k = 0; k < num_bins; ++k) {
      const double mel =
          HzToMel(static_cast<double>(k) * sample_rate / fft_size);
      if (mel > left && mel < right) {
        weights_(m, k) =
            mel <= center ? (mel - left) / delta : (right - mel) / delta;
      }
    }
  }
}

int FftSizeFor(const FrameOptions& opts, int sample_rate) {
  if (opts.fft_size > 0) return opts.fft_size;
  const int frame = SamplesFor(opts.frame_length, sample_rate);
  int n = 1;
  while (n < frame) n <<= 1;
  return n;
}

Eigen::MatrixXd PowerSpectra(const Waveform& wave, const FrameOptions& opts) {
  const int frame = SamplesFor(opts.frame_length, wave.sample_rate);
  const int shift = SamplesFor(opts.frame_shift, wave.sample_rate);
  Require(frame > 0 && shift > 0, Errc::kInvalidArgument,
          "frame length and shift must be positive");
  const int num_frames =
      NumFrames(static_cast<int64_t>(wave.samples.size()), frame, shift);
  if (num_frames == 0) {
    Fail(Errc::kShortInput, "waveform of " +
                                std::to_string(wave.samples.size()) +
                                " samples is shorter than one frame (" +
                                std::to_string(frame) + ")");
  }
  const int fft_size = FftSizeFor(opts, wave.sample_rate);
  Require(fft_size >= frame, Errc::kInvalidArgument,
          "fft_size smaller than the frame");
  const int num_bins = fft_size / 2 + 1;

  std::vector<double> window(frame);
  for (int i = 0; i < frame; ++i) {
    window[i] =
        frame == 1
            ? 1.0
            : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (frame - 1));
  }

  Eigen::FFT<double> fft;
  std::vector<double> buf(fft_size);
  std::vector<std::complex<double>> spectrum;
  Eigen::MatrixXd power(num_frames, num_bins);
  for (int t = 0; t < num_frames; ++t) {
    const float* src = wave.samples.data() + static_cast<size_t>(t) * shift;
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int i = 0; i < frame; ++i) buf[i] = src[i];
    for (int i = frame - 1; i > 0; --i) buf[i] -= opts.preemphasis * buf[i - 1];
    buf[0] -= opts.preemphasis * buf[0];
    for (int i = 0; i < frame; ++i) buf[i] *= window[i];
    fft.fwd(spectrum, buf);
    for (int k = 0; k < num_bins; ++k) power(t, k) = std::norm(spectrum[k]);
  }
  return power;
}

namespace {

FeatureMatrix LogMelFrom(const Waveform& wave, const FrameOptions& frame,
                         int num_mels, double low, double high) {
  const Eigen::MatrixXd power = PowerSpectra(wave, frame);
  const MelBank bank(num_mels, FftSizeFor(frame, wave.sample_rate),
                     wave.sample_rate, low, high);
  FeatureMatrix out;
  out.frame_shift = frame.frame_shift;
  out.frame_length = frame.frame_length;
  out.frames = power * bank.weights().transpose();
  out.frames = out.frames.array().max(kLogMelFloor).log().matrix();
  return out;
}

}  // namespace

FeatureMatrix ExtractLogMel(const Waveform& wave, const MelOptions& opts) {
  return LogMelFrom(wave, opts.frame, opts.num_mels, opts.low_freq,
                    opts.high_freq);
}

Eigen::MatrixXd DctMatrix(int n) {
  Eigen::MatrixXd d(n, n);
  for (int k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      d(k, i) = scale * std::cos(std::numbers::pi * k * (i + 0.5) / n);
    }
  }
  return d;
}

Eigen::MatrixXd InverseDct(const Eigen::MatrixXd& ceps_rows) {
  const Eigen::MatrixXd d = DctMatrix(static_cast<int>(ceps_rows.cols()));
  // rows: logmel^T = ceps^T * D
  return ceps_rows * d;
}

FeatureMatrix ExtractMfcc(const Waveform& wave, const MfccOptions& opts) {
  Require(opts.num_ceps >= 1 && opts.num_ceps <= opts.num_mels,
          Errc::kInvalidArgument, "num_ceps must be in [1, num_mels]");
  FeatureMatrix out = LogMelFrom(wave, opts.frame, opts.num_mels, opts.low_freq,
                                 opts.high_freq);
  const Eigen::MatrixXd d = DctMatrix(opts.num_mels);
  out.frames = out.frames * d.topRows(opts.num_ceps).transpose();
  return out;
}

CmvnStats ComputeCmvn(std::span<const FeatureMatrix> features) {
  int64_t count = 0;
  int dim = -1;
  for (const auto& f : features) {
    if (f.NumFrames() == 0) continue;
    if (dim < 0) dim = f.Dim();
    Require(f.Dim() == dim, Errc::kDimMismatch,
            "feature dimensions differ across matrices");
    count += f.NumFrames();
  }
  if (count == 0) Fail(Errc::kEmptyInput, "no frames to compute CMVN from");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dim);
  for (const auto& f : features) {
    for (int t = 0; t < f.NumFrames(); ++t) {
      sum += f.frames.row(t).transpose();
      sum_sq += f.frames.row(t).transpose().cwiseAbs2();
    }
  }
  CmvnStats stats;
  stats.frame_count = count;
  stats.mean = sum / static_cast<double>(count);
  stats.variance =
      (sum_sq / static_cast<double>(count) - stats.mean.cwiseAbs2())
          .cwiseMax(0.0);
  return stats;
}

FeatureMatrix ApplyCmvn(const FeatureMatrix& features, const CmvnStats& stats) {
  if (features.Dim() != stats.Dim()) {
    Fail(Errc::kDimMismatch, "CMVN dim " + std::to_string(stats.Dim()) +
                                 " does not match feature dim " +
                                 std::to_string(features.Dim()));
  }
  const Eigen::RowVectorXd inv_std =
      stats.variance.cwiseSqrt().cwiseMax(1e-8).cwiseInverse().transpose();
  FeatureMatrix out = features;
  out.frames.rowwise() -= stats.mean.transpose();
  out.frames.array().rowwise() *= inv_std.array();
  return out;
}

void WriteCmvn(std::ostream& os, const CmvnStats& stats) {
  io::WriteMagic(os, "CMVN1");
  io::WriteLe<uint32_t>(os, static_cast<uint32_t>(stats.Dim()));
  io::WriteLe<uint64_t>(os, static_cast<uint64_t>(stats.frame_count));
  for (int i = 0; i < stats.Dim(); ++i) io::WriteLe<double>(os, stats.mean[i]);
  for (int i = 0; i < stats.Dim(); ++i) {
    io::WriteLe<double>(os, stats.variance[i]);
  }
}

CmvnStats ReadCmvn(std::istream& is) {
  if (!io::ReadMagic(is, "CMVN1")) Fail(Errc::kTruncated, "empty CMVN stream");
  CmvnStats stats;
  const auto dim = io::ReadLe<uint32_t>(is);
  stats.frame_count = static_cast<int64_t>(io::ReadLe<uint64_t>(is));
  stats.mean.resize(dim);
  stats.variance.resize(dim);
  for (uint32_t i = 0; i < dim; ++i) stats.mean[i] = io::ReadLe<double>(is);
  for (uint32_t i = 0; i < dim; ++i) stats.variance[i] = io::ReadLe<double>(is);
  return stats;
}

void SaveCmvn(const std::filesystem::path& path, const CmvnStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(Errc::kIo, "cannot write " + path.string());
  WriteCmvn(out, stats);
}

CmvnStats LoadCmvn(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(Errc::kIo, "cannot open " + path.string());
  return ReadCmvn(in);
}

void WriteFeatureRecord(std::ostream& os, std::string_view utt_id,
                        const FeatureMatrix& features) {
  io::WriteMagic(os, "FEAT1");
  io::WriteString(os, utt_id);
  io::WriteLe<uint32_t>(os, static_cast<uint32_t>(features.NumFrames()));
  io::WriteLe<uint32_t>(os, static_cast<uint32_t>(features.Dim()));
  for (int t = 0; t < features.NumFrames(); ++t) {
    for (int j = 0; j < features.Dim(); ++j) {
      io::WriteLe<float>(os, static_cast<float>(features.frames(t, j)));
    }
  }
}

std::optional<std::pair<std::string, FeatureMatrix>> ReadFeatureRecord(
    std::istream& is) {
  if (!io::ReadMagic(is, "FEAT1")) return std::nullopt;
  std::pair<std::string, FeatureMatrix> rec;
  rec.first = io::ReadString(is);
  const auto rows = io::ReadLe<uint32_t>(is);
  const auto cols = io::ReadLe<uint32_t>(is);
  rec.second.frames.resize(rows, cols);
  for (uint32_t t = 0; t < rows; ++t) {
    for (uint32_t j = 0; j < cols; ++j) {
      rec.second.frames(t, j) = io::ReadLe<float>(is);
    }
  }
  return rec;
}

void SaveFeatureArchive(const std::filesystem::path& path,
                        const FeatureArchive& archive) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(Errc::kIo, "cannot write " + path.string());
  for (const auto& [id, feats] : archive) WriteFeatureRecord(out, id, feats);
}

FeatureArchive LoadFeatureArchive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(Errc::kIo, "cannot open " + path.string());
  FeatureArchive archive;
  while (auto rec = ReadFeatureRecord(in)) archive.push_back(std::move(*rec));
  return archive;
}

}  // namespace imsk
