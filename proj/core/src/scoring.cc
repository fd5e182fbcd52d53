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

#include "imsk/scoring.h"

#include <algorithm>

#include "imsk/error.h"
#include "imsk/subword_tokenizer.h"

namespace imsk {

AlignmentResult Align(std::span<const std::string> ref,
                      std::span<const std::string> hyp) {
  const size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      const int diag = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({diag, d[i][j - 1] + 1, d[i - 1][j] + 1});
    }
  }
  AlignmentResult r;
  r.ref_words = static_cast<int>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (d[i][j] == d[i - 1][j - 1] + (same ? 0 : 1)) {
        r.ops.push_back(same ? EditOp::kCorrect : EditOp::kSubstitution);
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      r.ops.push_back(EditOp::kInsertion);
      --j;
      continue;
    }
    r.ops.push_back(EditOp::kDeletion);
    --i;
  }
  std::reverse(r.ops.begin(), r.ops.end());
  for (EditOp op : r.ops) {
    switch (op) {
      case EditOp::kCorrect:
        ++r.correct;
        break;
      case EditOp::kSubstitution:
        ++r.substitutions;
        break;
      case EditOp::kInsertion:
        ++r.insertions;
        break;
      case EditOp::kDeletion:
        ++r.deletions;
        break;
    }
  }
  return r;
}

AlignmentResult AlignText(const std::string& ref, const std::string& hyp) {
  const auto r = SplitWords(ref);
  const auto h = SplitWords(hyp);
  return Align(r, h);
}

WerResult CorpusWer(
    std::span<const std::pair<std::string, std::string>> pairs) {
  WerResult w;
  for (const auto& [ref, hyp] : pairs) {
    const AlignmentResult a = AlignText(ref, hyp);
    w.substitutions += a.substitutions;
    w.deletions += a.deletions;
    w.insertions += a.insertions;
    w.correct += a.correct;
    w.ref_words += a.ref_words;
  }
  Require(w.ref_words > 0, Errc::kEmptyInput,
          "word error rate needs at least one reference word");
  w.wer = 100.0 *
          static_cast<double>(w.substitutions + w.deletions + w.insertions) /
          static_cast<double>(w.ref_words);
  return w;
}

double RtFactor(double processing_seconds, double audio_seconds) {
  Require(audio_seconds > 0, Errc::kInvalidArgument,
          "real-time factor needs a positive audio duration");
  return processing_seconds / audio_seconds;
}

}  // namespace imsk
