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

#include "imsk/subword_tokenizer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "imsk/binary_io.h"
#include "imsk/error.h"

namespace imsk {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const char* const kReservedNames[SubwordVocab::kNumReserved] = {
    "<unk>", "<sos/eos>", "<blank>", "\xe2\x96\x81"};

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a))
               : b + std::log1p(std::exp(a - b));
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string Join(const std::vector<std::string>& chars, int begin, int end) {
  std::string s;
  for (int i = begin; i < end; ++i) s += chars[i];
  return s;
}

// Candidate ordering for segmentation: higher log-prob, then fewer pieces,
// then lexicographically smaller piece sequence.
bool Better(const Segmentation& a, const Segmentation& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.pieces.size() != b.pieces.size()) {
    return a.pieces.size() < b.pieces.size();
  }
  return a.pieces < b.pieces;
}

}  // namespace

std::vector<std::string> SplitCodePoints(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
    }
    if (i + len > text.size()) len = 1;
    for (size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

// ---------------------------------------------------------------------------
// SubwordVocab

SubwordVocab SubwordVocab::FromPieces(
    std::vector<std::pair<std::string, double>> pieces) {
  Require(!pieces.empty(), Errc::kEmptyInput, "vocabulary has no pieces");
  double total = 0.0;
  for (const auto& [piece, p] : pieces) {
    Require(!piece.empty(), Errc::kInvalidArgument, "empty piece");
    for (char c : piece) {
      Require(!IsSpace(c), Errc::kInvalidArgument,
              "piece contains whitespace: '" + piece + "'");
    }
    for (const char* name : kReservedNames) {
      Require(piece != name, Errc::kInvalidArgument,
              "piece collides with a reserved unit: " + piece);
    }
    Require(p >= 0.0 && std::isfinite(p), Errc::kInvalidArgument,
            "invalid probability for piece " + piece);
    total += p;
  }
  Require(total > 0.0, Errc::kInvalidArgument, "piece probabilities sum to 0");
  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  SubwordVocab v;
  for (const char* name : kReservedNames) v.pieces_.emplace_back(name);
  v.log_probs_ = {std::log(kUnkProb), kNegInf, kNegInf, 0.0};
  for (auto& [piece, p] : pieces) {
    v.pieces_.push_back(std::move(piece));
    v.log_probs_.push_back(std::log(p / total));
  }
  v.Index();
  return v;
}

void SubwordVocab::Index() {
  index_.clear();
  max_piece_chars_ = 1;
  for (int id = 0; id < Size(); ++id) {
    auto [it, inserted] = index_.emplace(pieces_[id], id);
    Require(inserted, Errc::kFormat, "duplicate piece '" + pieces_[id] + "'");
    if (id >= kNumReserved) {
      max_piece_chars_ =
          std::max(max_piece_chars_,
                   static_cast<int>(SplitCodePoints(pieces_[id]).size()));
    }
  }
}

const std::string& SubwordVocab::Piece(int id) const {
  if (id < 0 || id >= Size()) {
    Fail(Errc::kOutOfRange, "token id " + std::to_string(id) +
                                " outside vocabulary of size " +
                                std::to_string(Size()));
  }
  return pieces_[id];
}

std::optional<int> SubwordVocab::Find(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double SubwordVocab::LogProb(int id) const {
  Piece(id);
  return log_probs_[id];
}

Segmentation SubwordVocab::SegmentWord(std::string_view word) const {
  const std::vector<std::string> chars = SplitCodePoints(word);
  const int n = static_cast<int>(chars.size());
  std::vector<std::optional<Segmentation>> best(n + 1);
  best[0] = Segmentation{};
  const double log_unk = std::log(kUnkProb);
  for (int end = 1; end <= n; ++end) {
    for (int begin = std::max(0, end - max_piece_chars_); begin < end;
         ++begin) {
      if (!best[begin]) continue;
      std::string piece = Join(chars, begin, end);
      double lp;
      auto it = index_.find(piece);
      if (it != index_.end() && it->second >= kNumReserved) {
        lp = log_probs_[it->second];
      } else if (end - begin == 1) {
        lp = log_unk;
      } else {
        continue;
      }
      Segmentation cand;
      cand.log_prob = best[begin]->log_prob + lp;
      cand.pieces = best[begin]->pieces;
      cand.pieces.push_back(std::move(piece));
      if (!best[end] || Better(cand, *best[end])) best[end] = std::move(cand);
    }
  }
  return std::move(*best[n]);
}

Segmentation SubwordVocab::Segment(std::string_view text) const {
  Segmentation out;
  const std::vector<std::string> words = SplitWords(text);
  for (size_t w = 0; w < words.size(); ++w) {
    if (w > 0) out.pieces.emplace_back(kWordBoundary);
    Segmentation seg = SegmentWord(words[w]);
    out.log_prob += seg.log_prob;
    for (auto& p : seg.pieces) out.pieces.push_back(std::move(p));
  }
  return out;
}

std::vector<int> SubwordVocab::Encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& piece : Segment(text).pieces) {
    auto it = index_.find(piece);
    ids.push_back(it == index_.end() ? kUnk : it->second);
  }
  return ids;
}

std::string SubwordVocab::Decode(std::span<const int> ids) const {
  std::string text;
  for (int id : ids) {
    const std::string& piece = Piece(id);
    switch (id) {
      case kUnk:
        text += unk_glyph_;
        break;
      case kBoundary:
        text += ' ';
        break;
      case kSosEos:
      case kBlank:
        break;
      default:
        text += piece;
    }
  }
  return text;
}

void SubwordVocab::Write(std::ostream& os) const {
  char buf[64];
  for (int id = 0; id < Size(); ++id) {
    std::snprintf(buf, sizeof(buf), "%.17g", log_probs_[id]);
    os << pieces_[id] << '\t' << buf << '\n';
  }
}

SubwordVocab SubwordVocab::Read(std::istream& is) {
  SubwordVocab v;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    Require(tab != std::string::npos && tab > 0, Errc::kFormat,
            "vocab line " + std::to_string(line_no) +
                ": expected piece<TAB>logprob");
    std::string piece = line.substr(0, tab);
    const std::string num = line.substr(tab + 1);
    char* endp = nullptr;
    const double lp = std::strtod(num.c_str(), &endp);
    Require(endp != num.c_str(), Errc::kFormat,
            "vocab line " + std::to_string(line_no) + ": bad log-probability");
    const int id = v.Size();
    if (id < kNumReserved) {
      Require(piece == kReservedNames[id], Errc::kFormat,
              "vocab line " + std::to_string(line_no) +
                  ": expected reserved unit " + kReservedNames[id]);
    }
    v.pieces_.push_back(std::move(piece));
    v.log_probs_.push_back(lp);
  }
  Require(v.Size() > kNumReserved, Errc::kFormat, "vocabulary has no pieces");
  double total = 0.0;
  for (int id = kNumReserved; id < v.Size(); ++id) {
    total += std::exp(v.log_probs_[id]);
  }
  Require(std::abs(total - 1.0) < 1e-6, Errc::kFormat,
          "piece probabilities sum to " + std::to_string(total));
  v.Index();
  return v;
}

void SubwordVocab::Save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) Fail(Errc::kIo, "cannot write " + path.string());
  Write(out);
}

SubwordVocab SubwordVocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(Errc::kIo, "cannot open " + path.string());
  return Read(in);
}

uint64_t SubwordVocab::Hash() const {
  std::ostringstream os;
  Write(os);
  return io::Fnv1a64(os.str());
}

// ---------------------------------------------------------------------------
// UnigramTrainer

UnigramTrainer::UnigramTrainer(std::span<const std::string> corpus,
                               UnigramOptions opts)
    : opts_(opts) {
  Require(opts_.prune_fraction > 0.0 && opts_.prune_fraction < 1.0,
          Errc::kInvalidArgument, "prune_fraction must be in (0, 1)");
  Require(opts_.seed_max_len >= 1, Errc::kInvalidArgument,
          "seed_max_len must be >= 1");
  Require(opts_.em_iters_per_round >= 1, Errc::kInvalidArgument,
          "em_iters_per_round must be >= 1");

  std::map<std::string, double> word_counts;
  for (const auto& line : corpus) {
    for (auto& w : SplitWords(line)) word_counts[w] += 1.0;
  }
  Require(!word_counts.empty(), Errc::kEmptyInput, "empty training corpus");

  std::map<std::string, double> char_freq;
  std::map<std::string, double> substr_freq;
  for (const auto& [text, count] : word_counts) {
    Word w;
    w.chars = SplitCodePoints(text);
    w.count = count;
    const int n = static_cast<int>(w.chars.size());
    for (int i = 0; i < n; ++i) {
      char_freq[w.chars[i]] += count;
      std::string s = w.chars[i];
      for (int len = 2; len <= opts_.seed_max_len && i + len <= n; ++len) {
        s += w.chars[i + len - 1];
        substr_freq[s] += count;
      }
    }
    words_.push_back(std::move(w));
  }
  alphabet_size_ = static_cast<int>(char_freq.size());
  if (opts_.target_size < alphabet_size_) {
    Fail(Errc::kInvalidArgument,
         "target size " + std::to_string(opts_.target_size) +
             " is below the alphabet size " + std::to_string(alphabet_size_));
  }

  std::vector<std::pair<std::string, double>> seeds;
  for (auto& [s, f] : substr_freq) {
    if (f >= 2.0) seeds.emplace_back(s, f);
  }
  std::stable_sort(
      seeds.begin(), seeds.end(),
      [](const auto& a, const auto& b) { return a.second > b.second; });
  const size_t cap = static_cast<size_t>(
      std::max(0, opts_.seed_cap_factor * opts_.target_size - alphabet_size_));
  if (seeds.size() > cap) seeds.resize(cap);

  double total = 0.0;
  for (const auto& [c, f] : char_freq) {
    pieces_.push_back(c);
    piece_chars_.push_back(1);
    probs_.push_back(f);
    total += f;
  }
  for (const auto& [s, f] : seeds) {
    piece_chars_.push_back(static_cast<int>(SplitCodePoints(s).size()));
    pieces_.push_back(s);
    probs_.push_back(f);
    total += f;
  }
  for (double& p : probs_) p /= total;
  BuildLattices();
}

void UnigramTrainer::BuildLattices() {
  std::unordered_map<std::string, int> index;
  int max_len = 1;
  for (int i = 0; i < NumPieces(); ++i) {
    index.emplace(pieces_[i], i);
    max_len = std::max(max_len, piece_chars_[i]);
  }
  for (auto& w : words_) {
    w.edges.clear();
    const int n = static_cast<int>(w.chars.size());
    for (int end = 1; end <= n; ++end) {
      for (int begin = std::max(0, end - max_len); begin < end; ++begin) {
        auto it = index.find(Join(w.chars, begin, end));
        if (it != index.end()) w.edges.push_back({begin, end, it->second});
      }
    }
  }
}

double UnigramTrainer::WordLogLikelihood(const Word& w,
                                         std::vector<double>* alpha) const {
  alpha->assign(w.chars.size() + 1, kNegInf);
  (*alpha)[0] = 0.0;
  for (const Edge& e : w.edges) {
    (*alpha)[e.end] =
        LogAdd((*alpha)[e.end], (*alpha)[e.begin] + std::log(probs_[e.piece]));
  }
  return alpha->back();
}

double UnigramTrainer::LogLikelihood() const {
  std::vector<double> alpha;
  double ll = 0.0;
  for (const auto& w : words_) ll += w.count * WordLogLikelihood(w, &alpha);
  return ll;
}

double UnigramTrainer::EmStep() {
  std::vector<double> counts(pieces_.size(), 0.0);
  std::vector<double> alpha, beta;
  for (const auto& w : words_) {
    const double ll = WordLogLikelihood(w, &alpha);
    beta.assign(w.chars.size() + 1, kNegInf);
    beta.back() = 0.0;
    for (auto it = w.edges.rbegin(); it != w.edges.rend(); ++it) {
      beta[it->begin] =
          LogAdd(beta[it->begin], std::log(probs_[it->piece]) + beta[it->end]);
    }
    for (const Edge& e : w.edges) {
      const double post = std::exp(alpha[e.begin] + std::log(probs_[e.piece]) +
                                   beta[e.end] - ll);
      counts[e.piece] += w.count * post;
    }
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (size_t i = 0; i < counts.size(); ++i) probs_[i] = counts[i] / total;
  return LogLikelihood();
}

bool UnigramTrainer::Done() const {
  if (NumPieces() <= opts_.target_size) return true;
  return std::none_of(piece_chars_.begin(), piece_chars_.end(),
                      [](int n) { return n > 1; });
}

int UnigramTrainer::PruneStep() {
  if (Done()) return 0;
  const int num_pieces = NumPieces();
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < num_pieces; ++i) index.emplace(pieces_[i], i);

  std::vector<bool> removed(num_pieces, false);
  // Viterbi path of `chars` over the current pieces minus `excluded` and the
  // pieces already marked removed. Zero-probability pieces stay usable at a
  // prohibitive score so that every string keeps a path.
  auto viterbi = [&](const std::vector<std::string>& chars, int excluded) {
    const int n = static_cast<int>(chars.size());
    std::vector<double> score(n + 1, kNegInf);
    std::vector<int> back_piece(n + 1, -1), back_pos(n + 1, -1);
    score[0] = 0.0;
    for (int end = 1; end <= n; ++end) {
      for (int begin = 0; begin < end; ++begin) {
        if (score[begin] == kNegInf) continue;
        auto it = index.find(Join(chars, begin, end));
        if (it == index.end() || it->second == excluded ||
            removed[it->second]) {
          continue;
        }
        const double p = probs_[it->second];
        const double s = score[begin] + (p > 0.0 ? std::log(p) : -1e6);
        if (back_piece[end] < 0 || s > score[end]) {
          score[end] = s;
          back_piece[end] = it->second;
          back_pos[end] = begin;
        }
      }
    }
    std::vector<int> path;
    for (int pos = n; pos > 0 && back_piece[pos] >= 0; pos = back_pos[pos]) {
      path.push_back(back_piece[pos]);
    }
    std::reverse(path.begin(), path.end());
    return path;
  };

  std::vector<double> freq(num_pieces, 0.0);
  for (const auto& w : words_) {
    for (int id : viterbi(w.chars, -1)) freq[id] += w.count;
  }
  const double sum = std::accumulate(freq.begin(), freq.end(), 0.0);
  const double log_sum = std::log(sum);

  struct Candidate {
    int piece;
    double loss;
  };
  std::vector<Candidate> candidates;
  for (int i = 0; i < num_pieces; ++i) {
    if (piece_chars_[i] <= 1) continue;
    if (freq[i] == 0.0) {
      candidates.push_back({i, kNegInf});
      continue;
    }
    // Likelihood lost when occurrences of piece i are re-segmented into its
    // best alternative and the freed mass is redistributed.
    const std::vector<int> alt = viterbi(SplitCodePoints(pieces_[i]), i);
    const double new_sum =
        sum + freq[i] * (static_cast<double>(alt.size()) - 1.0);
    const double log_new_sum = std::log(new_sum);
    const double lp_piece = std::log(freq[i]) - log_sum;
    double lp_alt = 0.0;
    for (int a : alt) lp_alt += std::log(freq[a] + freq[i]) - log_new_sum;
    candidates.push_back({i, freq[i] / sum * (lp_piece - lp_alt)});
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.loss != b.loss) return a.loss < b.loss;
              if (probs_[a.piece] != probs_[b.piece]) {
                return probs_[a.piece] < probs_[b.piece];
              }
              return pieces_[a.piece] < pieces_[b.piece];
            });
  int to_remove = std::max(1, static_cast<int>(std::floor(opts_.prune_fraction *
                                                          candidates.size())));
  to_remove = std::min({to_remove, num_pieces - opts_.target_size,
                        static_cast<int>(candidates.size())});

  for (int k = 0; k < to_remove; ++k) removed[candidates[k].piece] = true;
  // Hand each removed piece's mass to its replacement segmentation, which
  // keeps every word segmentable with non-zero probability.
  std::vector<double> moved = probs_;
  for (int k = 0; k < to_remove; ++k) {
    const int i = candidates[k].piece;
    for (int a : viterbi(SplitCodePoints(pieces_[i]), i)) moved[a] += probs_[i];
  }
  std::vector<std::string> pieces;
  std::vector<int> piece_chars;
  std::vector<double> probs;
  double total = 0.0;
  for (int i = 0; i < num_pieces; ++i) {
    if (removed[i]) continue;
    pieces.push_back(pieces_[i]);
    piece_chars.push_back(piece_chars_[i]);
    probs.push_back(moved[i]);
    total += moved[i];
  }
  for (double& p : probs) p /= total;
  pieces_ = std::move(pieces);
  piece_chars_ = std::move(piece_chars);
  probs_ = std::move(probs);
  BuildLattices();
  return to_remove;
}

std::vector<std::pair<std::string, double>> UnigramTrainer::Pieces() const {
  std::vector<std::pair<std::string, double>> out;
  for (int i = 0; i < NumPieces(); ++i) out.emplace_back(pieces_[i], probs_[i]);
  return out;
}

SubwordVocab UnigramTrainer::ToVocab() const {
  // Single characters are always kept, even at zero expected count, so that
  // any string over the training alphabet stays segmentable.
  auto pieces = Pieces();
  for (int i = 0; i < NumPieces(); ++i) {
    if (piece_chars_[i] == 1 && pieces[i].second <= 0.0) {
      pieces[i].second = std::numeric_limits<double>::min();
    }
  }
  return SubwordVocab::FromPieces(std::move(pieces));
}

SubwordVocab TrainUnigram(std::span<const std::string> corpus,
                          const UnigramOptions& opts) {
  UnigramTrainer trainer(corpus, opts);
  for (;;) {
    for (int i = 0; i < opts.em_iters_per_round; ++i) trainer.EmStep();
    if (trainer.Done()) break;
    trainer.PruneStep();
  }
  return trainer.ToVocab();
}

}  // namespace imsk
