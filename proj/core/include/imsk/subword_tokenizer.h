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

// Unigram-LM subword vocabulary: EM training with iterative pruning, and
// most-probable segmentation.
//
// Text is split into whitespace-delimited words; each word is segmented on
// its own and consecutive words are joined by the reserved boundary piece
// U+2581. The boundary piece is a fixed unit outside the unigram
// distribution, so the learned piece probabilities sum to one on their own.

#ifndef IMSK_SUBWORD_TOKENIZER_H_
#define IMSK_SUBWORD_TOKENIZER_H_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace imsk {

inline constexpr std::string_view kWordBoundary = "\xe2\x96\x81";

// Splits UTF-8 text into code points (invalid bytes become single units).
std::vector<std::string> SplitCodePoints(std::string_view text);
std::vector<std::string> SplitWords(std::string_view text);

struct Segmentation {
  std::vector<std::string> pieces;
  double log_prob = 0.0;
};

class SubwordVocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kSosEos = 1;
  static constexpr int kBlank = 2;
  static constexpr int kBoundary = 3;
  static constexpr int kNumReserved = 4;
  static constexpr double kUnkProb = 1e-10;

  SubwordVocab() = default;

  // `pieces` holds (piece, probability); probabilities are renormalised.
  static SubwordVocab FromPieces(
      std::vector<std::pair<std::string, double>> pieces);

  // Number of ids, reserved ones included.
  int Size() const { return static_cast<int>(pieces_.size()); }
  int NumPieces() const { return Size() - kNumReserved; }

  const std::string& Piece(int id) const;
  std::optional<int> Find(std::string_view piece) const;
  // Natural log of the unigram probability (kUnkProb for unk).
  double LogProb(int id) const;

  Segmentation SegmentWord(std::string_view word) const;
  Segmentation Segment(std::string_view text) const;

  std::vector<int> Encode(std::string_view text) const;
  std::string Decode(std::span<const int> ids) const;

  // Fingerprint of the serialized vocabulary; models record it so that
  // mismatched tokenizer/ASR/LM combinations can be rejected.
  uint64_t Hash() const;

  void Write(std::ostream& os) const;
  static SubwordVocab Read(std::istream& is);
  void Save(const std::filesystem::path& path) const;
  static SubwordVocab Load(const std::filesystem::path& path);

  const std::string& unk_glyph() const { return unk_glyph_; }
  void set_unk_glyph(std::string glyph) { unk_glyph_ = std::move(glyph); }

 private:
  void Index();

  std::vector<std::string> pieces_;
  std::vector<double> log_probs_;
  std::unordered_map<std::string, int> index_;
  int max_piece_chars_ = 1;
  std::string unk_glyph_ = "<unk>";
};

struct UnigramOptions {
  int target_size = 100;
  int seed_max_len = 8;
  double prune_fraction = 0.2;
  int em_iters_per_round = 2;
  int seed_cap_factor = 20;
};

// Step-by-step unigram training; TrainUnigram drives it to completion.
class UnigramTrainer {
 public:
  UnigramTrainer(std::span<const std::string> corpus, UnigramOptions opts);

  // Corpus log-likelihood, sum over segmentations, of the current model.
  double LogLikelihood() const;
  // One EM iteration; returns the log-likelihood after the update.
  double EmStep();
  // Removes the lowest-impact multi-character pieces; returns the number
  // removed.
  int PruneStep();
  bool Done() const;
  int NumPieces() const { return static_cast<int>(pieces_.size()); }
  int AlphabetSize() const { return alphabet_size_; }

  std::vector<std::pair<std::string, double>> Pieces() const;
  SubwordVocab ToVocab() const;

 private:
  struct Edge {
    int begin;
    int end;
    int piece;
  };
  struct Word {
    std::vector<std::string> chars;
    double count = 0.0;
    std::vector<Edge> edges;  // sorted by end
  };

  void BuildLattices();
  double WordLogLikelihood(const Word& w, std::vector<double>* alpha) const;

  UnigramOptions opts_;
  std::vector<Word> words_;
  std::vector<std::string> pieces_;
  std::vector<int> piece_chars_;
  std::vector<double> probs_;
  int alphabet_size_ = 0;
};

SubwordVocab TrainUnigram(std::span<const std::string> corpus,
                          const UnigramOptions& opts);

}  // namespace imsk

#endif  // IMSK_SUBWORD_TOKENIZER_H_
